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

#include "hsq/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace hsq {
namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfig, what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error_at(const YAML::Node& n, const std::string& what) const {
    const YAML::Mark m = n.Mark();
    if (m.is_null()) config_error(fmt::format("{}: {}", source_, what));
    config_error(fmt::format("{}:{}:{}: {}", source_, m.line + 1, m.column + 1, what));
  }

  void require_map(const YAML::Node& n, const std::string& path) const {
    if (!n.IsMap()) error_at(n, fmt::format("'{}' must be a mapping", path));
  }

  void check_keys(const YAML::Node& n, const std::string& path,
                  const std::set<std::string>& allowed) const {
    require_map(n, path.empty() ? "<root>" : path);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        error_at(kv.first, fmt::format("unknown key '{}'", join(path, key)));
      }
    }
  }

  template <typename T>
  void read(const YAML::Node& parent, const std::string& key, const std::string& path,
            T& out) const {
    const YAML::Node n = parent[key];
    if (!n) return;
    if (!n.IsScalar()) error_at(n, fmt::format("'{}' must be a scalar", join(path, key)));
    try {
      out = n.as<T>();
    } catch (const YAML::BadConversion&) {
      error_at(n, fmt::format("'{}' has invalid value '{}'", join(path, key), n.Scalar()));
    }
  }

  template <typename Enum, typename Parse>
  void read_enum(const YAML::Node& parent, const std::string& key, const std::string& path,
                 Enum& out, Parse&& parse) const {
    std::string text;
    read(parent, key, path, text);
    if (text.empty()) return;
    try {
      out = parse(text);
    } catch (const Error& e) {
      error_at(parent[key], fmt::format("'{}': {}", join(path, key), e.what()));
    }
  }

 private:
  std::string source_;
};

RunMode parse_mode(const std::string& s) {
  if (s == "analytic") return RunMode::kAnalytic;
  if (s == "sampled") return RunMode::kSampled;
  fail("expected analytic or sampled, got '" + s + "'");
}

HeraldConvention parse_convention(const std::string& s) {
  if (s == "retain_with_correction") return HeraldConvention::kRetainWithCorrection;
  if (s == "discard_minus") return HeraldConvention::kDiscardMinus;
  fail("expected retain_with_correction or discard_minus, got '" + s + "'");
}

ProcessConstraint parse_constraint(const std::string& s) {
  if (s == "trace_preserving") return ProcessConstraint::kTracePreserving;
  if (s == "trace_non_increasing") return ProcessConstraint::kTraceNonIncreasing;
  fail("expected trace_preserving or trace_non_increasing, got '" + s + "'");
}

DephasingModel parse_dephasing(const std::string& s) {
  if (s == "gaussian") return DephasingModel::kGaussian;
  if (s == "exponential") return DephasingModel::kExponential;
  fail("expected gaussian or exponential, got '" + s + "'");
}

void read_node(const Reader& r, const YAML::Node& root, const std::string& key,
               NodeParams& p) {
  const YAML::Node n = root[key];
  if (!n) return;
  r.check_keys(n, key,
               {"eta_store", "eta_retrieve", "eta_patch", "dephasing_lifetime",
                "excitation_error", "read_phase"});
  r.read(n, "eta_store", key, p.eta_store);
  r.read(n, "eta_retrieve", key, p.eta_retrieve);
  r.read(n, "eta_patch", key, p.eta_patch);
  r.read(n, "dephasing_lifetime", key, p.dephasing_lifetime);
  r.read(n, "excitation_error", key, p.excitation_error);
  r.read(n, "read_phase", key, p.read_phase);
}

void read_detectors(const Reader& r, const YAML::Node& root, ExperimentConfig& cfg) {
  const YAML::Node n = root["detectors"];
  if (!n) return;
  std::set<std::string> allowed{"efficiency", "dark_prob"};
  for (int i = 1; i <= kNumDetectors; ++i) allowed.insert(fmt::format("spd{}", i));
  r.check_keys(n, "detectors", allowed);
  DetectorParams shared = cfg.detectors[0];
  bool any_shared = false;
  if (n["efficiency"]) {
    r.read(n, "efficiency", "detectors", shared.efficiency);
    any_shared = true;
  }
  if (n["dark_prob"]) {
    r.read(n, "dark_prob", "detectors", shared.dark_prob);
    any_shared = true;
  }
  for (int i = 0; i < kNumDetectors; ++i) {
    DetectorParams& d = cfg.detectors[i];
    if (any_shared) {
      if (n["efficiency"]) d.efficiency = shared.efficiency;
      if (n["dark_prob"]) d.dark_prob = shared.dark_prob;
    }
    const std::string key = fmt::format("spd{}", i + 1);
    const YAML::Node o = n[key];
    if (!o) continue;
    const std::string path = "detectors." + key;
    r.check_keys(o, path, {"efficiency", "dark_prob"});
    r.read(o, "efficiency", path, d.efficiency);
    r.read(o, "dark_prob", path, d.dark_prob);
  }
}

void read_phase_grid(const Reader& r, const YAML::Node& root, ExperimentConfig& cfg) {
  const YAML::Node n = root["phase_grid"];
  if (!n) return;
  if (n.IsSequence()) {
    cfg.phase_grid.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      try {
        cfg.phase_grid.push_back(n[i].as<double>());
      } catch (const YAML::BadConversion&) {
        r.error_at(n[i], fmt::format("'phase_grid[{}]' is not a number", i));
      }
    }
    return;
  }
  // Uniform grid over [start, stop) with `points` samples.
  r.check_keys(n, "phase_grid", {"start", "stop", "points"});
  double start = 0.0;
  double stop = 2.0 * std::numbers::pi;
  int points = 12;
  r.read(n, "start", "phase_grid", start);
  r.read(n, "stop", "phase_grid", stop);
  r.read(n, "points", "phase_grid", points);
  if (points < 1) r.error_at(n, "'phase_grid.points' must be >= 1");
  cfg.phase_grid.clear();
  for (int i = 0; i < points; ++i) cfg.phase_grid.push_back(start + (stop - start) * i / points);
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  return fmt::format("{:.17g}", v);
}

void check_fraction(double v, const std::string& field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    config_error(fmt::format("range error: '{}' must lie in [0,1] (got {})", field, v));
  }
}

void check_node(const NodeParams& p, const std::string& key) {
  check_fraction(p.eta_store, key + ".eta_store");
  check_fraction(p.eta_retrieve, key + ".eta_retrieve");
  check_fraction(p.eta_patch, key + ".eta_patch");
  check_fraction(p.excitation_error, key + ".excitation_error");
  if (!(p.dephasing_lifetime > 0.0)) {
    config_error(fmt::format("range error: '{}.dephasing_lifetime' must be positive (got {})",
                             key, p.dephasing_lifetime));
  }
  if (!std::isfinite(p.read_phase)) {
    config_error(fmt::format("range error: '{}.read_phase' must be finite", key));
  }
}

}  // namespace

std::string_view to_string(RunMode m) {
  return m == RunMode::kAnalytic ? "analytic" : "sampled";
}

std::string_view to_string(HeraldConvention c) {
  return c == HeraldConvention::kRetainWithCorrection ? "retain_with_correction"
                                                      : "discard_minus";
}

std::string_view to_string(ProcessConstraint c) {
  return c == ProcessConstraint::kTracePreserving ? "trace_preserving"
                                                  : "trace_non_increasing";
}

std::string_view to_string(DephasingModel m) {
  return m == DephasingModel::kGaussian ? "gaussian" : "exponential";
}

std::vector<double> ExperimentConfig::default_phase_grid() {
  std::vector<double> g;
  for (int i = 0; i < 12; ++i) g.push_back(i * std::numbers::pi / 6.0);
  return g;
}

const DetectorParams& ExperimentConfig::detector(int spd) const {
  if (spd < 1 || spd > kNumDetectors) fail(fmt::format("no detector SPD{}", spd));
  return detectors[spd - 1];
}

double ExperimentConfig::mean_dark_prob(std::initializer_list<int> spds) const {
  double sum = 0.0;
  for (int s : spds) sum += detector(s).dark_prob;
  return spds.size() ? sum / static_cast<double>(spds.size()) : 0.0;
}

void ExperimentConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    config_error(fmt::format("unsupported schema_version {} (expected {})", schema_version,
                             kSchemaVersion));
  }
  if (shots < 1) config_error("range error: 'shots' must be >= 1");
  if (!std::isfinite(theta0)) config_error("range error: 'theta0' must be finite");
  check_fraction(eta_t, "eta_t");
  check_fraction(eta_t_signal, "eta_t_signal");
  check_fraction(eta_link, "eta_link");
  check_fraction(eta_source, "eta_source");
  check_node(node_a, "node_a");
  check_node(node_b, "node_b");
  for (int i = 0; i < kNumDetectors; ++i) {
    const std::string key = fmt::format("detectors.spd{}", i + 1);
    check_fraction(detectors[i].efficiency, key + ".efficiency");
    check_fraction(detectors[i].dark_prob, key + ".dark_prob");
    if (detectors[i].dark_prob >= 1.0) {
      config_error(fmt::format("range error: '{}.dark_prob' must be < 1", key));
    }
  }
  const std::pair<double, const char*> durations[] = {
      {timeline.bin_separation, "timeline.bin_separation"},
      {timeline.storage_hold, "timeline.storage_hold"},
      {timeline.node_a_wait, "timeline.node_a_wait"},
      {timeline.retrieval_wait, "timeline.retrieval_wait"}};
  for (const auto& [v, name] : durations) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      config_error(fmt::format("range error: '{}' must be a finite duration >= 0", name));
    }
  }
  if (phase_grid.empty()) config_error("range error: 'phase_grid' must not be empty");
  for (double p : phase_grid) {
    if (!std::isfinite(p)) config_error("range error: 'phase_grid' entries must be finite");
  }
  if (analysis.bootstrap_resamples < 0) {
    config_error("range error: 'analysis.bootstrap_resamples' must be >= 0");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    config_error(fmt::format("{}:{}:{}: parse error: {}", source, e.mark.line + 1,
                             e.mark.column + 1, e.msg));
  }
  ExperimentConfig cfg;
  if (root.IsNull()) {
    cfg.validate();
    return cfg;
  }
  const Reader r(source);
  r.check_keys(root, "",
               {"schema_version", "seed", "mode", "shots", "theta0", "eta_t", "eta_t_signal",
                "eta_link", "eta_source", "herald_basis_convention", "process_constraint",
                "dephasing_model", "node_a", "node_b", "detectors", "timeline", "phase_grid",
                "analysis", "apparatus"});
  r.read(root, "schema_version", "", cfg.schema_version);
  r.read(root, "seed", "", cfg.seed);
  r.read_enum(root, "mode", "", cfg.mode, parse_mode);
  if (root["shots"]) {
    long long shots = 0;
    r.read(root, "shots", "", shots);
    if (shots < 1) r.error_at(root["shots"], "range error: 'shots' must be >= 1");
    cfg.shots = static_cast<std::uint64_t>(shots);
  }
  r.read(root, "theta0", "", cfg.theta0);
  r.read(root, "eta_t", "", cfg.eta_t);
  r.read(root, "eta_t_signal", "", cfg.eta_t_signal);
  r.read(root, "eta_link", "", cfg.eta_link);
  r.read(root, "eta_source", "", cfg.eta_source);
  r.read_enum(root, "herald_basis_convention", "", cfg.herald_basis_convention,
              parse_convention);
  r.read_enum(root, "process_constraint", "", cfg.process_constraint, parse_constraint);
  r.read_enum(root, "dephasing_model", "", cfg.dephasing_model, parse_dephasing);
  read_node(r, root, "node_a", cfg.node_a);
  read_node(r, root, "node_b", cfg.node_b);
  read_detectors(r, root, cfg);
  if (const YAML::Node t = root["timeline"]) {
    r.check_keys(t, "timeline",
                 {"bin_separation", "storage_hold", "node_a_wait", "retrieval_wait"});
    r.read(t, "bin_separation", "timeline", cfg.timeline.bin_separation);
    r.read(t, "storage_hold", "timeline", cfg.timeline.storage_hold);
    r.read(t, "node_a_wait", "timeline", cfg.timeline.node_a_wait);
    r.read(t, "retrieval_wait", "timeline", cfg.timeline.retrieval_wait);
  }
  read_phase_grid(r, root, cfg);
  if (const YAML::Node a = root["analysis"]) {
    r.check_keys(a, "analysis", {"bootstrap_resamples", "entanglement_input"});
    r.read(a, "bootstrap_resamples", "analysis", cfg.analysis.bootstrap_resamples);
    r.read_enum(a, "entanglement_input", "analysis", cfg.analysis.entanglement_input,
                [](const std::string& s) { return parse_input_state(s); });
  }
  if (const YAML::Node a = root["apparatus"]) {
    r.check_keys(a, "apparatus",
                 {"optical_depth", "cavity_finesse", "rydberg_state", "detuning_hz",
                  "temperature_k"});
    r.read(a, "optical_depth", "apparatus", cfg.apparatus.optical_depth);
    r.read(a, "cavity_finesse", "apparatus", cfg.apparatus.cavity_finesse);
    r.read(a, "rydberg_state", "apparatus", cfg.apparatus.rydberg_state);
    r.read(a, "detuning_hz", "apparatus", cfg.apparatus.detuning_hz);
    r.read(a, "temperature_k", "apparatus", cfg.apparatus.temperature_k);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error(fmt::format("cannot open config file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string dump_config(const ExperimentConfig& c) {
  std::string out;
  auto line = [&out](const std::string& s) { out += s + "\n"; };
  line(fmt::format("schema_version: {}", c.schema_version));
  line(fmt::format("seed: {}", c.seed));
  line(fmt::format("mode: {}", to_string(c.mode)));
  line(fmt::format("shots: {}", c.shots));
  line(fmt::format("theta0: {}", num(c.theta0)));
  line(fmt::format("eta_t: {}", num(c.eta_t)));
  line(fmt::format("eta_t_signal: {}", num(c.eta_t_signal)));
  line(fmt::format("eta_link: {}", num(c.eta_link)));
  line(fmt::format("eta_source: {}", num(c.eta_source)));
  line(fmt::format("herald_basis_convention: {}", to_string(c.herald_basis_convention)));
  line(fmt::format("process_constraint: {}", to_string(c.process_constraint)));
  line(fmt::format("dephasing_model: {}", to_string(c.dephasing_model)));
  for (const auto& [key, p] : {std::pair{"node_a", &c.node_a}, std::pair{"node_b", &c.node_b}}) {
    line(fmt::format("{}:", key));
    line(fmt::format("  eta_store: {}", num(p->eta_store)));
    line(fmt::format("  eta_retrieve: {}", num(p->eta_retrieve)));
    line(fmt::format("  eta_patch: {}", num(p->eta_patch)));
    line(fmt::format("  dephasing_lifetime: {}", num(p->dephasing_lifetime)));
    line(fmt::format("  excitation_error: {}", num(p->excitation_error)));
    line(fmt::format("  read_phase: {}", num(p->read_phase)));
  }
  line("detectors:");
  for (int i = 0; i < kNumDetectors; ++i) {
    line(fmt::format("  spd{}: {{efficiency: {}, dark_prob: {}}}", i + 1,
                     num(c.detectors[i].efficiency), num(c.detectors[i].dark_prob)));
  }
  line("timeline:");
  line(fmt::format("  bin_separation: {}", num(c.timeline.bin_separation)));
  line(fmt::format("  storage_hold: {}", num(c.timeline.storage_hold)));
  line(fmt::format("  node_a_wait: {}", num(c.timeline.node_a_wait)));
  line(fmt::format("  retrieval_wait: {}", num(c.timeline.retrieval_wait)));
  std::string grid;
  for (std::size_t i = 0; i < c.phase_grid.size(); ++i) {
    grid += (i ? ", " : "") + num(c.phase_grid[i]);
  }
  line(fmt::format("phase_grid: [{}]", grid));
  line("analysis:");
  line(fmt::format("  bootstrap_resamples: {}", c.analysis.bootstrap_resamples));
  line(fmt::format("  entanglement_input: {}", to_string(c.analysis.entanglement_input)));
  line("apparatus:");
  line(fmt::format("  optical_depth: {}", num(c.apparatus.optical_depth)));
  line(fmt::format("  cavity_finesse: {}", num(c.apparatus.cavity_finesse)));
  line(fmt::format("  rydberg_state: \"{}\"", c.apparatus.rydberg_state));
  line(fmt::format("  detuning_hz: {}", num(c.apparatus.detuning_hz)));
  line(fmt::format("  temperature_k: {}", num(c.apparatus.temperature_k)));
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : dump_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

ExperimentConfig set_config_value(const ExperimentConfig& cfg, const std::string& key,
                                  const std::string& value) {
  YAML::Node root = YAML::Load(dump_config(cfg));
  YAML::Node v;
  try {
    v = YAML::Load(value);
  } catch (const YAML::ParserException& e) {
    config_error(fmt::format("'{}': cannot parse value '{}': {}", key, value, e.msg));
  }
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  if (parts.empty()) config_error("empty config key");

  // The shared detector keys fan out to all six detectors.
  if (parts.size() == 2 && parts[0] == "detectors" &&
      (parts[1] == "efficiency" || parts[1] == "dark_prob")) {
    for (int i = 1; i <= kNumDetectors; ++i) {
      root["detectors"][fmt::format("spd{}", i)][parts[1]] = v;
    }
    return parse_config(YAML::Dump(root), "<set " + key + ">");
  }
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const YAML::Node next = chain.back()[parts[i]];
    if (!next || !next.IsMap()) config_error(fmt::format("unknown key '{}'", key));
    chain.push_back(next);
  }
  if (!chain.back()[parts.back()]) config_error(fmt::format("unknown key '{}'", key));
  chain.back()[parts.back()] = v;
  return parse_config(YAML::Dump(root), "<set " + key + ">");
}

}  // namespace hsq
