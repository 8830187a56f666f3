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

#include "hsq/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "hsq/superatom.hpp"

namespace hsq {
namespace {

constexpr DetectorPair kNodeAPair{1, 2};
constexpr DetectorPair kHeraldPair{3, 4};
constexpr DetectorPair kRetrievedPair{5, 6};

// Substream offsets keep every measurement point on its own random sequence.
constexpr std::uint64_t kTomoStream = 0;
constexpr std::uint64_t kV0Stream = 100;
constexpr std::uint64_t kSweepStream = 1000;
constexpr std::uint64_t kTwoNodeStream = 100000;

using Settings = std::array<MeasurementSetting, 3>;

// Runs fn(0..n-1) as independent tasks and returns results in index order.
template <typename Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::optional<T>> slots(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
  } else {
    std::vector<std::future<void>> tasks;
    for (std::size_t w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < n; i += workers) slots[i].emplace(fn(i));
      }));
    }
    for (auto& t : tasks) t.get();
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

JointState loss(const JointState& s, const std::string& reg, double eta) {
  if (eta == 1.0) return s;
  return apply_channel(s, loss_channel(eta), reg);
}

JointState depolarize(const JointState& s, const std::string& reg, double p) {
  if (p == 0.0) return s;
  return apply_channel(s, depolarizing_channel(p), reg);
}

JointState dephase(const ExperimentConfig& cfg, const JointState& s, const std::string& node,
                   double t, double tau) {
  return motional_dephasing(s, node, t, tau, cfg.dephasing_model);
}

// Photon leaves its node, crosses a lossy path and the interferometer.
JointState to_detection(const ExperimentConfig& cfg, const JointState& s,
                        const std::string& photon, double eta) {
  return timebin_to_polarization(loss(s, photon, eta), photon, cfg.theta0);
}

std::string point_label(const Settings& settings, bool two_node) {
  std::string out(basis_label(settings[1]));
  if (two_node) out += "/" + std::string(basis_label(settings[0]));
  out += "/" + std::string(basis_label(settings[2]));
  return out;
}

CoincidencePoint measure(const ExperimentConfig& cfg, const JointState& s,
                         const Settings& settings, double phase, std::uint64_t stream,
                         bool two_node) {
  std::vector<PathSpec> paths;
  std::vector<DetectorPair> signals;
  paths.push_back({"herald", settings[1], kHeraldPair.plus, kHeraldPair.minus,
                   cfg.detector(kHeraldPair.plus), cfg.detector(kHeraldPair.minus)});
  if (two_node) {
    paths.push_back({"node_a", settings[0], kNodeAPair.plus, kNodeAPair.minus,
                     cfg.detector(kNodeAPair.plus), cfg.detector(kNodeAPair.minus)});
    signals.push_back(kNodeAPair);
  }
  paths.push_back({"retrieved", settings[2], kRetrievedPair.plus, kRetrievedPair.minus,
                   cfg.detector(kRetrievedPair.plus), cfg.detector(kRetrievedPair.minus)});
  signals.push_back(kRetrievedPair);

  const PatternDistribution dist = click_pattern_distribution(s, paths);
  if (cfg.mode == RunMode::kAnalytic) {
    return expected_tally(dist, static_cast<double>(cfg.shots), kHeraldPair, signals, phase,
                          point_label(settings, two_node));
  }
  const auto records =
      sample_shots(dist, cfg.shots, cfg.seed, ShotContext{settings, phase, stream});
  CoincidenceTable t = coincidence_tally(records, kHeraldPair, signals);
  if (t.points.size() != 1) fail("unexpected grouping of sampled shots");
  return std::move(t.points.front());
}

double dark_for(const ExperimentConfig& cfg, bool two_node) {
  return two_node ? cfg.mean_dark_prob({1, 2, 3, 4, 5, 6}) : cfg.mean_dark_prob({3, 4, 5, 6});
}

double herald_events(const CoincidencePoint& p) {
  const int k = p.num_paths();
  double n = 0.0;
  for (int i = 0; i < static_cast<int>(p.counts.size()); ++i) {
    if (pattern_string(i, k)[0] != '0') n += p.counts[i];
  }
  return n;
}

// Heralded counts of the retrieved photon. A "-" herald leaves the qubit
// Z-flipped, which swaps the X and Y outcomes.
SettingCounts heralded_counts(const CoincidencePoint& p, MeasurementSetting m,
                              HeraldConvention conv) {
  SettingCounts c;
  c.n_plus = p.count("++");
  c.n_minus = p.count("+-");
  c.heralds = c.n_plus + c.n_minus + p.count("+0");
  if (conv == HeraldConvention::kRetainWithCorrection) {
    const bool flip = m != MeasurementSetting::kIdentity;
    c.n_plus += p.count(flip ? "--" : "-+");
    c.n_minus += p.count(flip ? "-+" : "--");
    c.heralds += p.count("-+") + p.count("--") + p.count("-0");
  }
  return c;
}

TomoDataset build_dataset(std::span<const CoincidencePoint> points, InputStateId id,
                          HeraldConvention conv) {
  TomoDataset d;
  d.input = std::string(to_string(id));
  for (std::size_t i = 0; i < kAllSettings.size(); ++i) {
    const SettingCounts c = heralded_counts(points[i], kAllSettings[i], conv);
    if (!(c.total() > 0.0)) {
      throw Error(ErrorCode::kNoStatistics,
                  fmt::format("no heralded coincidences for input {} in setting {}", d.input,
                              basis_label(kAllSettings[i])));
    }
    d.counts[kAllSettings[i]] = c;
    d.trials += points[i].trials;
  }
  return d;
}

// Fraction of coincidences with equal outcomes on herald and retrieved
// photon, both herald outcomes included.
SeriesPoint same_fraction(const CoincidencePoint& p, double phase) {
  const double same = p.count("++") + p.count("--");
  const double total = same + p.count("+-") + p.count("-+");
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kNoStatistics, fmt::format("no coincidences at phase {}", phase));
  }
  return {phase, same / total, total};
}

// Two-node correlation <sigma sigma> of node A and node B conditioned on a
// herald. With `flip_on_minus`, "-" heralds carry a Z correction.
SeriesPoint correlation(const CoincidencePoint& p, double phase, bool flip_on_minus,
                        HeraldConvention conv) {
  double agree = 0.0;
  double total = 0.0;
  for (char h : {'+', '-'}) {
    if (h == '-' && conv == HeraldConvention::kDiscardMinus) continue;
    for (char a : {'+', '-'})
      for (char b : {'+', '-'}) {
        const std::string pat{h, a, b};
        const double n = p.count(pat);
        bool same = a == b;
        if (h == '-' && flip_on_minus) same = !same;
        if (same) agree += n;
        total += n;
      }
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kNoStatistics,
                fmt::format("no heralded coincidences at phase {}", phase));
  }
  return {phase, agree / total, total};
}

double bloch_projection(const ComplexVector& psi, MeasurementSetting m) {
  const ComplexVector q = psi.head(2);
  return (q.adjoint() * pauli2(observable(m)) * q)(0, 0).real();
}

// Binomial propagation of F_s = (1 + r_in . r_out) / 2 through linear
// inversion of the setting fractions.
double fidelity_se(const TomoDataset& d, const ComplexVector& psi) {
  double var = 0.0;
  for (const auto& [m, c] : d.counts) {
    const double r = bloch_projection(psi, m);
    const double se = binomial_se(c.n_plus / c.total(), c.total());
    var += r * r * se * se;
  }
  return std::sqrt(var);
}

double state_fidelity2(const ComplexMatrix& rho, const ComplexVector& psi) {
  const ComplexVector q = psi.head(2);
  return (q.adjoint() * rho * q)(0, 0).real();
}

CoincidencePoint resample(const CoincidencePoint& p, std::mt19937_64& rng) {
  CoincidencePoint out = p;
  for (double& c : out.counts) {
    if (c > 0.0) c = static_cast<double>(std::poisson_distribution<long long>(c)(rng));
  }
  return out;
}

ProcessEstimate fit_process(const std::vector<TomoDataset>& all, ProcessConstraint constraint) {
  std::vector<ComplexVector> inputs;
  std::vector<TomoDataset> data;
  for (InputStateId id : kProcessInputStates) {
    const auto it = std::find(kAllInputStates.begin(), kAllInputStates.end(), id);
    inputs.push_back(input_amplitudes(id).head(2));
    data.push_back(all[static_cast<std::size_t>(it - kAllInputStates.begin())]);
  }
  return reconstruct_process_ml(inputs, data, constraint);
}

double process_fidelity_to_identity(const ProcessEstimate& e) {
  return process_fidelity(e.process, ProcessMatrix::identity());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void add(RunReport& r, std::string key, double value, double unc, std::string method) {
  r.metrics.push_back({std::move(key), value, unc, std::move(method)});
}

void add_verdict(RunReport& r, const std::string& key, FidelityMetric metric) {
  const double v = r.value(key);
  r.verdicts.push_back({key, metric, v, classical_limit_check(metric, v)});
}

RunReport new_report(const ExperimentConfig& cfg, std::string protocol) {
  cfg.validate();
  RunReport r;
  r.protocol = std::move(protocol);
  r.provenance = {config_hash(cfg), cfg.seed, cfg.mode, cfg.schema_version};
  return r;
}

void add_herald_rates(RunReport& r, const ExperimentConfig& cfg,
                      std::span<const CoincidencePoint> points) {
  double heralds = 0.0;
  double trials = 0.0;
  double discarded = 0.0;
  for (const auto& p : points) {
    heralds += herald_events(p);
    trials += p.trials;
    discarded += p.discarded;
  }
  if (!(heralds > 0.0)) throw Error(ErrorCode::kNoStatistics, "no herald events recorded");
  const double raw = heralds / trials;
  const double se = binomial_se(raw, trials);
  // A valid herald is exactly one click on SPD3/SPD4; invert the dark-click
  // admixture assuming equal dark probability on both detectors.
  const double d = cfg.mean_dark_prob({3, 4});
  const double corrected = (raw / (1.0 - d) - 2.0 * d) / (1.0 - 2.0 * d);
  add(r, "herald_rate_raw", raw, se, "binomial");
  add(r, "herald_rate", corrected, se / ((1.0 - d) * (1.0 - 2.0 * d)), "binomial");
  add(r, "herald_budget", herald_budget(cfg), 0.0, "formula");
  add(r, "discarded_fraction", discarded / trials, binomial_se(discarded / trials, trials),
      "binomial");
}

ComplexVector retrieved_input(InputStateId id) { return input_amplitudes(id); }

struct SingleMeasurements {
  // tomo[i][m]: input kAllInputStates[i], retrieved setting kAllSettings[m].
  std::vector<std::array<CoincidencePoint, 3>> tomo;
};

std::array<CoincidencePoint, 3> measure_tomography(const ExperimentConfig& cfg,
                                                   InputStateId id) {
  const auto idx = static_cast<std::uint64_t>(
      std::find(kAllInputStates.begin(), kAllInputStates.end(), id) - kAllInputStates.begin());
  const JointState s = single_node_state(cfg, retrieved_input(id), 0.0);
  std::array<CoincidencePoint, 3> out;
  for (std::size_t m = 0; m < 3; ++m) {
    const Settings settings{MeasurementSetting::kIdentity, MeasurementSetting::kRyMinusHalfPi,
                            kAllSettings[m]};
    out[m] = measure(cfg, s, settings, 0.0, kTomoStream + idx * 3 + m, false);
  }
  return out;
}

struct StateResult {
  StateEstimate raw;
  StateEstimate deducted;
  TomoDataset raw_data;
  TomoDataset deducted_data;
};

StateResult analyze_state(const ExperimentConfig& cfg, InputStateId id,
                          const std::array<CoincidencePoint, 3>& points) {
  const double d = dark_for(cfg, false);
  std::array<CoincidencePoint, 3> ded;
  for (std::size_t m = 0; m < 3; ++m) ded[m] = deduct_dark_counts(points[m], d);
  StateResult r;
  r.raw_data = build_dataset(points, id, cfg.herald_basis_convention);
  r.deducted_data = build_dataset(ded, id, cfg.herald_basis_convention);
  r.raw = reconstruct_state_ml(r.raw_data);
  r.deducted = reconstruct_state_ml(r.deducted_data);
  return r;
}

void add_state_results(RunReport& r, InputStateId id, const StateResult& s) {
  const ComplexVector psi = retrieved_input(id);
  const std::string name(to_string(id));
  add(r, "F_s_raw." + name, state_fidelity2(s.raw.rho, psi), fidelity_se(s.raw_data, psi),
      "binomial");
  add(r, "F_s_deducted." + name, state_fidelity2(s.deducted.rho, psi),
      fidelity_se(s.deducted_data, psi), "binomial");
  r.tomography.push_back({"raw_" + name, s.raw_data});
  r.tomography.push_back({"deducted_" + name, s.deducted_data});
  r.matrices.push_back({"rho_raw_" + name, s.raw.rho});
  r.matrices.push_back({"rho_deducted_" + name, s.deducted.rho});
}

struct VisResult {
  VisibilityFit fit;
  std::vector<SeriesPoint> series;
};

struct SingleSweep {
  std::vector<CoincidencePoint> points;
  VisResult raw;
  VisResult deducted;
};

SingleSweep measure_single_sweep(const ExperimentConfig& cfg) {
  const ComplexVector psi = input_amplitudes(cfg.analysis.entanglement_input);
  const Settings xx{MeasurementSetting::kIdentity, MeasurementSetting::kRyMinusHalfPi,
                    MeasurementSetting::kRyMinusHalfPi};
  SingleSweep out;
  out.points = parallel_map(cfg.phase_grid.size(), [&](std::size_t k) {
    const double phase = cfg.phase_grid[k];
    return measure(cfg, single_node_state(cfg, psi, phase), xx, phase, kSweepStream + k, false);
  });
  const double d = dark_for(cfg, false);
  for (const auto& p : out.points) {
    out.raw.series.push_back(same_fraction(p, p.phase));
    out.deducted.series.push_back(same_fraction(deduct_dark_counts(p, d), p.phase));
  }
  out.raw.fit = fit_visibility(out.raw.series);
  out.deducted.fit = fit_visibility(out.deducted.series);
  return out;
}

void add_single_sweep(RunReport& r, const SingleSweep& s) {
  for (const auto& p : s.raw.series) {
    r.sweep.push_back({p.phase, "DD+AA", p.fraction, p.trials});
    r.sweep.push_back({p.phase, "DA+AD", 1.0 - p.fraction, p.trials});
  }
  for (const auto& p : s.points) r.coincidences.points.push_back(p);
  add(r, "V1", s.raw.fit.visibility, s.raw.fit.visibility_err, "fit");
  add(r, "V1_phase", s.raw.fit.phase, s.raw.fit.phase_err, "fit");
  add(r, "V1_deducted", s.deducted.fit.visibility, s.deducted.fit.visibility_err, "fit");
}

struct TwoNodeSweep {
  std::vector<CoincidencePoint> points;  // phase-major, families XX, YY, ZZ
  std::array<std::vector<SeriesPoint>, 3> series;
  VisibilityFit xx;
  VisibilityFit yy;
};

constexpr std::array<MeasurementSetting, 3> kTwoNodeFamilies{
    MeasurementSetting::kRyMinusHalfPi, MeasurementSetting::kRxHalfPi,
    MeasurementSetting::kIdentity};
constexpr std::array<const char*, 3> kTwoNodeFamilyNames{"XX", "YY", "ZZ"};

TwoNodeSweep measure_two_node_sweep(const ExperimentConfig& cfg) {
  TwoNodeSweep out;
  const std::size_t n = cfg.phase_grid.size();
  auto per_phase = parallel_map(n, [&](std::size_t k) {
    const double phase = cfg.phase_grid[k];
    const JointState s = two_node_state(cfg, phase);
    std::array<CoincidencePoint, 3> pts;
    for (std::size_t f = 0; f < 3; ++f) {
      const MeasurementSetting m = kTwoNodeFamilies[f];
      pts[f] = measure(cfg, s, {m, MeasurementSetting::kRyMinusHalfPi, m}, phase,
                       kTwoNodeStream + 3 * k + f, true);
    }
    return pts;
  });
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t f = 0; f < 3; ++f) {
      const auto& p = per_phase[k][f];
      out.points.push_back(p);
      const bool flip = kTwoNodeFamilies[f] != MeasurementSetting::kIdentity;
      out.series[f].push_back(correlation(p, p.phase, flip, cfg.herald_basis_convention));
    }
  }
  out.xx = fit_visibility(out.series[0]);
  out.yy = fit_visibility(out.series[1]);
  return out;
}

void add_two_node_results(RunReport& r, const TwoNodeSweep& s) {
  for (std::size_t k = 0; k < s.series[0].size(); ++k)
    for (std::size_t f = 0; f < 3; ++f) {
      const auto& p = s.series[f][k];
      r.sweep.push_back({p.phase, kTwoNodeFamilyNames[f], p.fraction, p.trials});
    }
  for (const auto& p : s.points) r.coincidences.points.push_back(p);

  // <XX> is the fitted amplitude; <YY> is read off its fitted curve at the
  // phase where the XX fringe peaks.
  const double xx = s.xx.visibility;
  const double theta_star = std::numbers::pi / 2.0 - s.xx.phase;
  const double arg = theta_star + s.yy.phase;
  const double yy = s.yy.visibility * std::sin(arg);
  const double yy_err =
      std::hypot(std::sin(arg) * s.yy.visibility_err,
                 s.yy.visibility * std::cos(arg) * std::hypot(s.xx.phase_err, s.yy.phase_err));
  double zz = 0.0;
  double zz_var = 0.0;
  for (const auto& p : s.series[2]) {
    zz += 2.0 * p.fraction - 1.0;
    const double se = 2.0 * binomial_se(p.fraction, p.trials);
    zz_var += se * se;
  }
  const double n = static_cast<double>(s.series[2].size());
  zz /= n;
  const double zz_err = std::sqrt(zz_var) / n;

  add(r, "XX", xx, s.xx.visibility_err, "fit");
  add(r, "XX_phase", s.xx.phase, s.xx.phase_err, "fit");
  add(r, "YY", yy, yy_err, "fit");
  add(r, "ZZ", zz, zz_err, "binomial");
  const double fe = entanglement_fidelity_pauli(xx, yy, zz);
  add(r, "F_e_pauli", fe, std::sqrt(s.xx.visibility_err * s.xx.visibility_err +
                                    yy_err * yy_err + zz_err * zz_err) / 4.0,
      "propagated");
  add(r, "F_e_vis", entanglement_fidelity_vis(zz, xx),
      std::sqrt(zz_err * zz_err + 4.0 * s.xx.visibility_err * s.xx.visibility_err) / 4.0,
      "propagated");
}

}  // namespace

std::string_view to_string(Protocol p) { return p == Protocol::kSingle ? "single" : "two_node"; }

Protocol parse_protocol(std::string_view name) {
  if (name == "single") return Protocol::kSingle;
  if (name == "two_node" || name == "two-node") return Protocol::kTwoNode;
  fail(fmt::format("unknown protocol '{}'", name));
}

const Metric* RunReport::find(std::string_view key) const {
  for (const auto& m : metrics)
    if (m.key == key) return &m;
  return nullptr;
}

const Metric& RunReport::metric(std::string_view key) const {
  if (const Metric* m = find(key)) return *m;
  fail(fmt::format("report has no metric '{}'", key));
}

JointState single_node_state(const ExperimentConfig& cfg, const ComplexVector& input,
                             double sweep_phase) {
  const NodeParams& a = cfg.node_a;
  const NodeParams& b = cfg.node_b;
  if (input.size() < 2) fail("input amplitudes need two time-bin components");

  // Node A: single-photon source.
  JointState s = excite(JointState::absent(RegisterLabel::atom_a()), "A", input(0), input(1));
  s = depolarize(s, "A", a.excitation_error);
  s = readout(s, "A", "flying", cfg.eta_source, a.read_phase);
  s = partial_trace(s, "A");
  s = loss(s, "flying", cfg.eta_link);

  // Node B: store, hold, herald, retrieve.
  s = tensor(s, JointState::absent(RegisterLabel::atom_b()));
  s = eit_store(s, "flying", "B", b.eta_store);
  s = dephase(cfg, s, "B", cfg.timeline.storage_hold, b.dephasing_lifetime);
  s = read_and_patch(s, "B", "herald", b.eta_patch, b.read_phase);
  s = depolarize(s, "B", b.excitation_error);
  s = dephase(cfg, s, "B", cfg.timeline.retrieval_wait, b.dephasing_lifetime);
  s = to_detection(cfg, s, "herald", cfg.eta_t);

  const double compensation = -(a.read_phase + b.read_phase + 2.0 * cfg.theta0);
  s = readout(s, "B", "retrieved", b.eta_retrieve, compensation + sweep_phase);
  s = partial_trace(s, "B");
  return to_detection(cfg, s, "retrieved", cfg.eta_t_signal);
}

JointState two_node_state(const ExperimentConfig& cfg, double sweep_phase) {
  const NodeParams& a = cfg.node_a;
  const NodeParams& b = cfg.node_b;
  const ComplexVector psi = input_amplitudes(cfg.analysis.entanglement_input);

  // Node A: atom-photon entanglement by read-and-patch.
  JointState s = excite(JointState::absent(RegisterLabel::atom_a()), "A", psi(0), psi(1));
  s = depolarize(s, "A", a.excitation_error);
  s = read_and_patch(s, "A", "flying", a.eta_patch, a.read_phase);
  s = depolarize(s, "A", a.excitation_error);
  s = loss(s, "flying", cfg.eta_link);

  s = tensor(s, JointState::absent(RegisterLabel::atom_b()));
  s = eit_store(s, "flying", "B", b.eta_store);
  s = dephase(cfg, s, "B", cfg.timeline.storage_hold, b.dephasing_lifetime);
  s = read_and_patch(s, "B", "herald", b.eta_patch, b.read_phase);
  s = depolarize(s, "B", b.excitation_error);
  s = dephase(cfg, s, "B", cfg.timeline.retrieval_wait, b.dephasing_lifetime);
  s = to_detection(cfg, s, "herald", cfg.eta_t);

  // Retrieval at both nodes.
  s = dephase(cfg, s, "A", cfg.timeline.node_a_wait, a.dephasing_lifetime);
  s = readout(s, "A", "node_a", a.eta_retrieve, 0.0);
  s = partial_trace(s, "A");
  s = to_detection(cfg, s, "node_a", cfg.eta_t_signal);
  const double compensation = -(a.read_phase + b.read_phase + 3.0 * cfg.theta0);
  s = readout(s, "B", "retrieved", b.eta_retrieve, compensation + sweep_phase);
  s = partial_trace(s, "B");
  return to_detection(cfg, s, "retrieved", cfg.eta_t_signal);
}

double herald_budget(const ExperimentConfig& cfg) {
  const double eta_d =
      0.5 * (cfg.detector(kHeraldPair.plus).efficiency + cfg.detector(kHeraldPair.minus).efficiency);
  const double source = cfg.eta_source * cfg.eta_link;
  return source * herald_efficiency(cfg.node_b.eta_store * cfg.node_b.eta_patch, cfg.eta_t, eta_d);
}

RunReport run_heralded_storage(const ExperimentConfig& cfg, InputStateId input) {
  RunReport r = new_report(cfg, fmt::format("heralded_storage:{}", to_string(input)));
  r.coincidences.path_names = {"herald", "retrieved"};
  const auto points = measure_tomography(cfg, input);
  add_herald_rates(r, cfg, points);
  for (const auto& p : points) r.coincidences.points.push_back(p);
  add_state_results(r, input, analyze_state(cfg, input, points));
  return r;
}

RunReport run_single_node(const ExperimentConfig& cfg) {
  RunReport r = new_report(cfg, "single");
  r.coincidences.path_names = {"herald", "retrieved"};

  auto tomo = parallel_map(kAllInputStates.size(), [&](std::size_t i) {
    return measure_tomography(cfg, kAllInputStates[i]);
  });
  std::vector<CoincidencePoint> flat;
  for (const auto& t : tomo)
    for (const auto& p : t) flat.push_back(p);
  add_herald_rates(r, cfg, flat);
  for (const auto& p : flat) r.coincidences.points.push_back(p);

  // State tomography of the six inputs.
  auto states = parallel_map(kAllInputStates.size(), [&](std::size_t i) {
    return analyze_state(cfg, kAllInputStates[i], tomo[i]);
  });
  double sum_raw = 0.0, sum_ded = 0.0, var_raw = 0.0, var_ded = 0.0;
  std::vector<TomoDataset> raw_sets, ded_sets;
  for (std::size_t i = 0; i < states.size(); ++i) {
    add_state_results(r, kAllInputStates[i], states[i]);
    const std::string name(to_string(kAllInputStates[i]));
    const Metric& mr = r.metric("F_s_raw." + name);
    const Metric& md = r.metric("F_s_deducted." + name);
    sum_raw += mr.value;
    sum_ded += md.value;
    var_raw += mr.uncertainty * mr.uncertainty;
    var_ded += md.uncertainty * md.uncertainty;
    raw_sets.push_back(states[i].raw_data);
    ded_sets.push_back(states[i].deducted_data);
  }
  const double n = static_cast<double>(states.size());
  add(r, "F_s_avg_raw", sum_raw / n, std::sqrt(var_raw) / n, "binomial");
  add(r, "F_s_avg_deducted", sum_ded / n, std::sqrt(var_ded) / n, "binomial");

  // Process tomography from the E, L, D, R datasets.
  const ProcessConstraint constraints[] = {ProcessConstraint::kTracePreserving,
                                           ProcessConstraint::kTraceNonIncreasing};
  auto fits = parallel_map(4, [&](std::size_t k) {
    return fit_process(k < 2 ? raw_sets : ded_sets, constraints[k % 2]);
  });

  // Parametric bootstrap of the process fidelities.
  std::array<std::vector<double>, 4> boot;
  if (cfg.analysis.bootstrap_resamples > 0) {
    const double d = dark_for(cfg, false);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::vector<std::array<CoincidencePoint, 3>>> draws;
    for (int b = 0; b < cfg.analysis.bootstrap_resamples; ++b) {
      std::vector<std::array<CoincidencePoint, 3>> draw;
      for (const auto& t : tomo) {
        std::array<CoincidencePoint, 3> pts;
        for (std::size_t m = 0; m < 3; ++m) pts[m] = resample(t[m], rng);
        draw.push_back(pts);
      }
      draws.push_back(std::move(draw));
    }
    auto values = parallel_map(draws.size(), [&](std::size_t b) {
      std::vector<TomoDataset> raw, ded;
      for (std::size_t i = 0; i < kAllInputStates.size(); ++i) {
        std::array<CoincidencePoint, 3> dd;
        for (std::size_t m = 0; m < 3; ++m) dd[m] = deduct_dark_counts(draws[b][i][m], d);
        raw.push_back(build_dataset(draws[b][i], kAllInputStates[i], cfg.herald_basis_convention));
        ded.push_back(build_dataset(dd, kAllInputStates[i], cfg.herald_basis_convention));
      }
      std::array<double, 4> v;
      for (std::size_t k = 0; k < 4; ++k) {
        v[k] = process_fidelity_to_identity(fit_process(k < 2 ? raw : ded, constraints[k % 2]));
      }
      return v;
    });
    for (const auto& v : values)
      for (std::size_t k = 0; k < 4; ++k) boot[k].push_back(v[k]);
  }
  const char* names[] = {"F_p_raw.tp", "F_p_raw.tni", "F_p_deducted.tp", "F_p_deducted.tni"};
  const double fs_err[] = {r.metric("F_s_avg_raw").uncertainty,
                           r.metric("F_s_avg_deducted").uncertainty};
  for (std::size_t k = 0; k < 4; ++k) {
    const double f = process_fidelity_to_identity(fits[k]);
    if (cfg.analysis.bootstrap_resamples > 0) {
      add(r, names[k], f, stddev(boot[k]), "bootstrap");
    } else {
      // Average-fidelity relation for qubit channels: F_p = (3 F_s - 1) / 2.
      add(r, names[k], f, 1.5 * fs_err[k / 2], "propagated");
    }
  }
  const std::size_t pick = cfg.process_constraint == ProcessConstraint::kTracePreserving ? 0 : 1;
  for (const char* kind : {"raw", "deducted"}) {
    const Metric& m = r.metric(fmt::format("F_p_{}.{}", kind, pick == 0 ? "tp" : "tni"));
    add(r, fmt::format("F_p_{}", kind), m.value, m.uncertainty, m.method);
  }
  add(r, "success_trace_raw", fits[1].success_trace, 0.0, "fit");
  add(r, "success_trace_deducted", fits[3].success_trace, 0.0, "fit");
  const char* chi_names[] = {"chi_raw_tp", "chi_raw_tni", "chi_deducted_tp",
                             "chi_deducted_tni"};
  for (std::size_t k = 0; k < 4; ++k) r.matrices.push_back({chi_names[k], fits[k].process.chi()});

  // Herald-retrieved entanglement: V0 in Z/Z at fixed phase, V1 from the
  // X/X phase sweep.
  const JointState ent =
      single_node_state(cfg, input_amplitudes(cfg.analysis.entanglement_input), 0.0);
  const CoincidencePoint zz =
      measure(cfg, ent,
              {MeasurementSetting::kIdentity, MeasurementSetting::kIdentity,
               MeasurementSetting::kIdentity},
              0.0, kV0Stream, false);
  r.coincidences.points.push_back(zz);
  const SeriesPoint v0 = same_fraction(zz, 0.0);
  const SeriesPoint v0d = same_fraction(deduct_dark_counts(zz, dark_for(cfg, false)), 0.0);
  const double v0_err = 2.0 * binomial_se(v0.fraction, v0.trials);
  add(r, "V0", 2.0 * v0.fraction - 1.0, v0_err, "binomial");
  add(r, "V0_deducted", 2.0 * v0d.fraction - 1.0, 2.0 * binomial_se(v0d.fraction, v0d.trials),
      "binomial");

  const SingleSweep sweep = measure_single_sweep(cfg);
  add_single_sweep(r, sweep);
  const double v1 = sweep.raw.fit.visibility;
  const double v1_err = sweep.raw.fit.visibility_err;
  add(r, "F_e_vis", entanglement_fidelity_vis(r.value("V0"), v1),
      std::sqrt(v0_err * v0_err + 4.0 * v1_err * v1_err) / 4.0, "propagated");
  const Metric& v0dm = r.metric("V0_deducted");
  const double v1d_err = sweep.deducted.fit.visibility_err;
  add(r, "F_e_vis_deducted", entanglement_fidelity_vis(v0dm.value, sweep.deducted.fit.visibility),
      std::sqrt(v0dm.uncertainty * v0dm.uncertainty + 4.0 * v1d_err * v1d_err) / 4.0,
      "propagated");

  add_verdict(r, "F_p_raw", FidelityMetric::kProcess);
  add_verdict(r, "F_p_deducted", FidelityMetric::kProcess);
  add_verdict(r, "F_e_vis", FidelityMetric::kEntanglement);
  return r;
}

RunReport run_two_node(const ExperimentConfig& cfg) {
  RunReport r = new_report(cfg, "two_node");
  r.coincidences.path_names = {"herald", "node_a", "retrieved"};
  const TwoNodeSweep s = measure_two_node_sweep(cfg);
  add_herald_rates(r, cfg, s.points);
  add_two_node_results(r, s);
  add_verdict(r, "F_e_pauli", FidelityMetric::kEntanglement);
  return r;
}

RunReport phase_sweep(const ExperimentConfig& cfg, Protocol protocol) {
  RunReport r = new_report(cfg, fmt::format("sweep:{}", to_string(protocol)));
  if (protocol == Protocol::kSingle) {
    r.coincidences.path_names = {"herald", "retrieved"};
    add_single_sweep(r, measure_single_sweep(cfg));
  } else {
    r.coincidences.path_names = {"herald", "node_a", "retrieved"};
    add_two_node_results(r, measure_two_node_sweep(cfg));
  }
  return r;
}

RunReport run_state_tomography(const TomoDataset& data, const ExperimentConfig& cfg) {
  RunReport r = new_report(cfg, "tomo:state");
  const StateEstimate est = reconstruct_state_ml(data);
  const double purity = (est.rho * est.rho).trace().real();
  add(r, "purity", purity, 0.0, "fit");
  add(r, "log_likelihood", est.log_likelihood, 0.0, "fit");
  if (!data.input.empty()) {
    const ComplexVector psi = input_amplitudes(parse_input_state(data.input));
    add(r, "F_s", state_fidelity2(est.rho, psi), fidelity_se(data, psi), "binomial");
  }
  r.tomography.push_back({data.input.empty() ? "state" : data.input, data});
  r.matrices.push_back({"rho", est.rho});
  return r;
}

RunReport run_process_tomography(const std::vector<NamedCounts>& data,
                                 const ExperimentConfig& cfg) {
  RunReport r = new_report(cfg, "tomo:process");
  std::vector<ComplexVector> inputs;
  std::vector<TomoDataset> sets;
  for (const auto& d : data) {
    inputs.push_back(input_amplitudes(parse_input_state(d.name)).head(2));
    sets.push_back(d.data);
    r.tomography.push_back(d);
  }
  const ProcessEstimate est = reconstruct_process_ml(inputs, sets, cfg.process_constraint);
  add(r, "F_p", process_fidelity_to_identity(est), 0.0, "fit");
  add(r, "success_trace", est.success_trace, 0.0, "fit");
  add(r, "log_likelihood", est.log_likelihood, 0.0, "fit");
  r.matrices.push_back({"chi", est.process.chi()});
  add_verdict(r, "F_p", FidelityMetric::kProcess);
  return r;
}

std::string format_report(const RunReport& r) {
  std::string out;
  out += fmt::format("hsq run report\nprotocol: {}\n", r.protocol);
  out += fmt::format("mode: {}\nseed: {}\nconfig_hash: {:016x}\nschema_version: {}\n\n",
                     to_string(r.provenance.mode), r.provenance.seed, r.provenance.config_hash,
                     r.provenance.schema_version);
  out += fmt::format("{:<26} {:>12} {:>12}  {}\n", "metric", "value", "uncertainty", "method");
  for (const auto& m : r.metrics) {
    out += fmt::format("{:<26} {:>12.6f} {:>12.6f}  {}\n", m.key, m.value, m.uncertainty,
                       m.method);
  }
  if (!r.verdicts.empty()) {
    out += "\nclassical-limit verdicts\n";
    for (const auto& v : r.verdicts) {
      out += fmt::format("{:<26} {:.4f} > {:.2f}  {}  margin {:+.4f}\n", v.key, v.value,
                         v.verdict.threshold, v.verdict.pass ? "PASS" : "FAIL",
                         v.verdict.margin);
    }
  }
  return out;
}

void write_outputs(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, fmt::format("cannot create '{}': {}", dir, ec.message()));
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", p.string()));
    return f;
  };
  const fs::path root(dir);
  open(root / "report.txt") << format_report(r);
  {
    auto f = open(root / "metrics.csv");
    f << "key,value,uncertainty,method\n";
    for (const auto& m : r.metrics) {
      f << fmt::format("{},{:.17g},{:.17g},{}\n", m.key, m.value, m.uncertainty, m.method);
    }
  }
  if (!r.sweep.empty()) {
    auto f = open(root / "sweep.csv");
    f << "phase_rad,family,fraction,trials\n";
    for (const auto& s : r.sweep) {
      f << fmt::format("{:.17g},{},{:.17g},{:.17g}\n", s.phase, s.family, s.fraction, s.trials);
    }
  }
  if (!r.coincidences.points.empty()) {
    auto f = open(root / "coincidences.csv");
    f << "phase_rad,setting,pattern,count,trials\n";
    for (const auto& p : r.coincidences.points) {
      const int k = p.num_paths();
      for (std::size_t i = 0; i < p.counts.size(); ++i) {
        f << fmt::format("{:.17g},{},{},{:.17g},{:.17g}\n", p.phase, p.setting,
                         pattern_string(static_cast<int>(i), k), p.counts[i], p.trials);
      }
    }
  }
  if (!r.tomography.empty()) {
    fs::create_directories(root / "tomo");
    for (const auto& t : r.tomography) {
      auto f = open(root / "tomo" / (t.name + ".csv"));
      write_tomo_csv(f, t.data);
    }
  }
  if (!r.matrices.empty()) {
    fs::create_directories(root / "matrices");
    for (const auto& m : r.matrices) {
      auto f = open(root / "matrices" / (m.name + ".csv"));
      write_matrix_csv(f, m.matrix);
    }
  }
}

}  // namespace hsq
