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

// hsq: command-line front end over the C API.
//
//   hsq run-single   --config presets/calibrated.yaml --out out/single
//   hsq run-two-node --config presets/calibrated.yaml --mode sampled --seed 7
//   hsq sweep        --protocol two_node
//   hsq tomo         --counts rho.csv --input D
//   hsq tomo         --process E=e.csv --process L=l.csv --process D=d.csv --process R=r.csv
//   hsq report       --config presets/calibrated.yaml --out out
//
// Exit status: 0 success, 1 usage or I/O error, 2 config error, 3 no heralded
// statistics, 4 solver non-convergence.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsq/hsq.h"

namespace {

struct ConfigDeleter {
  void operator()(hsq_config_t* c) const { hsq_config_free(c); }
};
struct ReportDeleter {
  void operator()(hsq_report_t* r) const { hsq_report_free(r); }
};
using ConfigPtr = std::unique_ptr<hsq_config_t, ConfigDeleter>;
using ReportPtr = std::unique_ptr<hsq_report_t, ReportDeleter>;

struct Options {
  std::string config;
  std::string out;
  std::string mode;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> overrides;  // key=value
  std::string input;
  std::string protocol = "single";
  std::string counts;
  std::vector<std::string> process;  // NAME=path
  bool quiet = false;
};

// Status failures carry the C API code, which doubles as the exit status.
struct Failure {
  hsq_status status;
};

void check(hsq_status s, const char* what) {
  if (s == HSQ_OK) return;
  std::fprintf(stderr, "hsq: %s: %s\n", what, hsq_last_error());
  throw Failure{s};
}

int exit_code(hsq_status s) {
  switch (s) {
    case HSQ_ERR_CONFIG:
    case HSQ_ERR_NO_STATISTICS:
    case HSQ_ERR_NONCONVERGENCE:
      return static_cast<int>(s);
    default:
      return 1;
  }
}

ConfigPtr build_config(const Options& o) {
  hsq_config_t* raw = nullptr;
  if (o.config.empty()) {
    check(hsq_config_default(&raw), "config");
  } else {
    check(hsq_config_load(o.config.c_str(), &raw), "config");
  }
  ConfigPtr cfg(raw);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "hsq: --set expects key=value, got '%s'\n", kv.c_str());
      throw Failure{HSQ_ERR_CONFIG};
    }
    check(hsq_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
          "config");
  }
  if (o.seed_set) check(hsq_config_set_seed(cfg.get(), o.seed), "config");
  if (!o.mode.empty()) check(hsq_config_set_mode(cfg.get(), o.mode.c_str()), "config");
  return cfg;
}

std::string report_text(const hsq_report_t* r) {
  size_t needed = 0;
  check(hsq_report_text(r, nullptr, 0, &needed), "report");
  std::string text(needed, '\0');
  check(hsq_report_text(r, text.data(), text.size(), &needed), "report");
  text.resize(needed - 1);
  return text;
}

void emit(const hsq_report_t* r, const Options& o, const std::string& subdir = "") {
  if (!o.quiet) std::fputs(report_text(r).c_str(), stdout);
  if (!o.out.empty()) {
    const std::string dir = subdir.empty() ? o.out : o.out + "/" + subdir;
    check(hsq_report_write(r, dir.c_str()), "write");
  }
}

void run(const std::string& command, const Options& o) {
  const ConfigPtr cfg = build_config(o);
  hsq_report_t* raw = nullptr;
  if (command == "run-single") {
    if (o.input.empty()) {
      check(hsq_run_single(cfg.get(), &raw), "run-single");
    } else {
      check(hsq_run_heralded_storage(cfg.get(), o.input.c_str(), &raw), "run-single");
    }
    emit(ReportPtr(raw).get(), o);
  } else if (command == "run-two-node") {
    check(hsq_run_two_node(cfg.get(), &raw), "run-two-node");
    emit(ReportPtr(raw).get(), o);
  } else if (command == "sweep") {
    check(hsq_phase_sweep(cfg.get(), o.protocol.c_str(), &raw), "sweep");
    emit(ReportPtr(raw).get(), o);
  } else if (command == "tomo") {
    if (!o.counts.empty()) {
      check(hsq_tomo_state_csv(cfg.get(), o.counts.c_str(),
                               o.input.empty() ? nullptr : o.input.c_str(), &raw), "tomo");
    } else {
      std::vector<std::string> names, paths;
      for (const auto& kv : o.process) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
          std::fprintf(stderr, "hsq: --process expects NAME=path, got '%s'\n", kv.c_str());
          throw Failure{HSQ_ERR_INVALID_ARGUMENT};
        }
        names.push_back(kv.substr(0, eq));
        paths.push_back(kv.substr(eq + 1));
      }
      std::vector<const char*> n, p;
      for (std::size_t i = 0; i < names.size(); ++i) {
        n.push_back(names[i].c_str());
        p.push_back(paths[i].c_str());
      }
      check(hsq_tomo_process_csv(cfg.get(), n.data(), p.data(), n.size(), &raw), "tomo");
    }
    emit(ReportPtr(raw).get(), o);
  } else if (command == "report") {
    check(hsq_run_single(cfg.get(), &raw), "run-single");
    ReportPtr single(raw);
    check(hsq_run_two_node(cfg.get(), &raw), "run-two-node");
    ReportPtr two(raw);
    emit(single.get(), o, "single");
    if (!o.quiet) std::fputs("\n", stdout);
    emit(two.get(), o, "two_node");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded qubit storage and two-node entanglement simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hsq_version());
  // Global flags may appear after the subcommand.
  app.fallthrough();
  Options o;

  app.add_option("--config", o.config, "config YAML (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "directory for report.txt and CSV outputs");
  app.add_option("--mode", o.mode, "override run mode")
      ->check(CLI::IsMember({"analytic", "sampled"}));
  app.add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t s) { o.seed = s, o.seed_set = true; }, "override seed");
  app.add_option("--set", o.overrides, "override a dotted config key, e.g. eta_t=0.5");
  app.add_flag("-q,--quiet", o.quiet, "do not print the report");

  auto* single = app.add_subcommand("run-single", "heralded storage benchmark at one node");
  single->add_option("--input", o.input, "run only this input state (E, L, D, A, R, Lc)");
  app.add_subcommand("run-two-node", "heralded entanglement between two nodes");
  auto* sweep = app.add_subcommand("sweep", "read-phase sweep with visibility fit");
  sweep->add_option("--protocol", o.protocol, "single or two_node")
      ->check(CLI::IsMember({"single", "two_node"}));
  auto* tomo = app.add_subcommand("tomo", "maximum-likelihood tomography from counts CSV");
  auto* counts = tomo->add_option("--counts", o.counts, "state counts CSV")
                     ->check(CLI::ExistingFile);
  auto* process = tomo->add_option("--process", o.process, "NAME=counts.csv per input state");
  tomo->add_option("--input", o.input, "prepared state of --counts, adds its fidelity");
  counts->excludes(process);
  app.add_subcommand("report", "single-node and two-node runs, written to <out>/single and "
                               "<out>/two_node");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  if (command == "tomo" && o.counts.empty() && o.process.empty()) {
    std::fputs("hsq: tomo needs --counts or --process\n", stderr);
    return 1;
  }
  try {
    run(command, o);
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
