// Copyright 2026 The hsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsq/hsq.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "hsq/config.hpp"
#include "hsq/detection.hpp"
#include "hsq/error.hpp"
#include "hsq/runner.hpp"
#include "hsq/tomography.hpp"

struct hsq_config {
  hsq::ExperimentConfig cfg;
};

struct hsq_report {
  hsq::RunReport report;
};

namespace {

thread_local std::string g_last_error;

hsq_status fail(hsq_status code, std::string what) {
  g_last_error = std::move(what);
  return code;
}

// Runs body and maps exceptions onto status codes.
template <typename F>
hsq_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return HSQ_OK;
  } catch (const hsq::Error& e) {
    return fail(static_cast<hsq_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HSQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HSQ_ERR_INTERNAL, e.what());
  }
}

hsq_status null_arg(const char* name) {
  return fail(HSQ_ERR_INVALID_ARGUMENT, std::string("null argument '") + name + "'");
}

hsq_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (cap == 0) return HSQ_OK;
  if (!buf) return null_arg("buf");
  const size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  return HSQ_OK;
}

template <typename Run>
hsq_status make_report(hsq_report_t** out, Run&& run) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new hsq_report{run()}; });
}

}  // namespace

extern "C" {

const char* hsq_version(void) { return "1.0.0"; }

const char* hsq_last_error(void) { return g_last_error.c_str(); }

hsq_status hsq_config_default(hsq_config_t** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new hsq_config{}; });
}

hsq_status hsq_config_load(const char* path, hsq_config_t** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new hsq_config{hsq::load_config(path)}; });
}

hsq_status hsq_config_parse(const char* yaml_text, hsq_config_t** out) {
  if (!yaml_text) return null_arg("yaml_text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new hsq_config{hsq::parse_config(yaml_text)}; });
}

void hsq_config_free(hsq_config_t* cfg) { delete cfg; }

hsq_status hsq_config_set(hsq_config_t* cfg, const char* key, const char* yaml_value) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  if (!yaml_value) return null_arg("yaml_value");
  return guarded([&] { cfg->cfg = hsq::set_config_value(cfg->cfg, key, yaml_value); });
}

hsq_status hsq_config_set_seed(hsq_config_t* cfg, uint64_t seed) {
  if (!cfg) return null_arg("cfg");
  cfg->cfg.seed = seed;
  return HSQ_OK;
}

hsq_status hsq_config_set_mode(hsq_config_t* cfg, const char* mode) {
  if (!cfg) return null_arg("cfg");
  if (!mode) return null_arg("mode");
  return guarded([&] { cfg->cfg = hsq::set_config_value(cfg->cfg, "mode", mode); });
}

hsq_status hsq_config_hash(const hsq_config_t* cfg, uint64_t* out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  return guarded([&] { *out = hsq::config_hash(cfg->cfg); });
}

hsq_status hsq_config_dump(const hsq_config_t* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("cfg");
  std::string text;
  const hsq_status s = guarded([&] { text = hsq::dump_config(cfg->cfg); });
  return s == HSQ_OK ? copy_out(text, buf, cap, needed) : s;
}

hsq_status hsq_run_heralded_storage(const hsq_config_t* cfg, const char* input,
                                    hsq_report_t** out) {
  if (!cfg) return null_arg("cfg");
  if (!input) return null_arg("input");
  return make_report(out, [&] {
    return hsq::run_heralded_storage(cfg->cfg, hsq::parse_input_state(input));
  });
}

hsq_status hsq_run_single(const hsq_config_t* cfg, hsq_report_t** out) {
  if (!cfg) return null_arg("cfg");
  return make_report(out, [&] { return hsq::run_single_node(cfg->cfg); });
}

hsq_status hsq_run_two_node(const hsq_config_t* cfg, hsq_report_t** out) {
  if (!cfg) return null_arg("cfg");
  return make_report(out, [&] { return hsq::run_two_node(cfg->cfg); });
}

hsq_status hsq_phase_sweep(const hsq_config_t* cfg, const char* protocol, hsq_report_t** out) {
  if (!cfg) return null_arg("cfg");
  if (!protocol) return null_arg("protocol");
  return make_report(out, [&] {
    return hsq::phase_sweep(cfg->cfg, hsq::parse_protocol(protocol));
  });
}

hsq_status hsq_tomo_state_csv(const hsq_config_t* cfg, const char* path, const char* input,
                              hsq_report_t** out) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return make_report(out, [&] {
    hsq::TomoDataset d = hsq::read_tomo_csv(path);
    if (input) d.input = hsq::to_string(hsq::parse_input_state(input));
    return hsq::run_state_tomography(d, cfg->cfg);
  });
}

hsq_status hsq_tomo_process_csv(const hsq_config_t* cfg, const char* const* names,
                                const char* const* paths, size_t count, hsq_report_t** out) {
  if (!cfg) return null_arg("cfg");
  if (count > 0 && (!names || !paths)) return null_arg(names ? "paths" : "names");
  return make_report(out, [&] {
    std::vector<hsq::NamedCounts> data;
    for (size_t i = 0; i < count; ++i) {
      if (!names[i] || !paths[i]) hsq::fail("null entry in names or paths");
      hsq::TomoDataset d = hsq::read_tomo_csv(paths[i]);
      d.input = names[i];
      data.push_back({names[i], std::move(d)});
    }
    return hsq::run_process_tomography(data, cfg->cfg);
  });
}

void hsq_report_free(hsq_report_t* report) { delete report; }

hsq_status hsq_report_write(const hsq_report_t* report, const char* dir) {
  if (!report) return null_arg("report");
  if (!dir) return null_arg("dir");
  return guarded([&] { hsq::write_outputs(report->report, dir); });
}

hsq_status hsq_report_text(const hsq_report_t* report, char* buf, size_t cap, size_t* needed) {
  if (!report) return null_arg("report");
  std::string text;
  const hsq_status s = guarded([&] { text = hsq::format_report(report->report); });
  return s == HSQ_OK ? copy_out(text, buf, cap, needed) : s;
}

hsq_status hsq_report_metric(const hsq_report_t* report, const char* key, double* value,
                             double* uncertainty) {
  if (!report) return null_arg("report");
  if (!key) return null_arg("key");
  const hsq::Metric* m = report->report.find(key);
  if (!m) return fail(HSQ_ERR_INVALID_ARGUMENT, std::string("unknown metric '") + key + "'");
  if (value) *value = m->value;
  if (uncertainty) *uncertainty = m->uncertainty;
  return HSQ_OK;
}

size_t hsq_report_metric_count(const hsq_report_t* report) {
  return report ? report->report.metrics.size() : 0;
}

hsq_status hsq_report_metric_at(const hsq_report_t* report, size_t index, const char** key,
                                double* value, double* uncertainty, const char** method) {
  if (!report) return null_arg("report");
  if (index >= report->report.metrics.size()) {
    return fail(HSQ_ERR_INVALID_ARGUMENT, "metric index out of range");
  }
  const hsq::Metric& m = report->report.metrics[index];
  if (key) *key = m.key.c_str();
  if (value) *value = m.value;
  if (uncertainty) *uncertainty = m.uncertainty;
  if (method) *method = m.method.c_str();
  return HSQ_OK;
}

size_t hsq_report_verdict_count(const hsq_report_t* report) {
  return report ? report->report.verdicts.size() : 0;
}

hsq_status hsq_report_verdict_at(const hsq_report_t* report, size_t index, const char** key,
                                 double* value, double* threshold, int* pass) {
  if (!report) return null_arg("report");
  if (index >= report->report.verdicts.size()) {
    return fail(HSQ_ERR_INVALID_ARGUMENT, "verdict index out of range");
  }
  const hsq::VerdictEntry& v = report->report.verdicts[index];
  if (key) *key = v.key.c_str();
  if (value) *value = v.value;
  if (threshold) *threshold = v.verdict.threshold;
  if (pass) *pass = v.verdict.pass ? 1 : 0;
  return HSQ_OK;
}

hsq_status hsq_herald_efficiency(double eta_sr_prime, double eta_t, double eta_d, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = hsq::herald_efficiency(eta_sr_prime, eta_t, eta_d); });
}

hsq_status hsq_entanglement_fidelity_vis(double v0, double v1, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = hsq::entanglement_fidelity_vis(v0, v1); });
}

hsq_status hsq_entanglement_fidelity_pauli(double xx, double yy, double zz, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = hsq::entanglement_fidelity_pauli(xx, yy, zz); });
}

}  // extern "C"
