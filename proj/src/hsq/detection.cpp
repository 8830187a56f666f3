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

#include "hsq/detection.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

namespace hsq {
namespace {

constexpr int kPlusDigit = 0;
constexpr int kMinusDigit = 1;
constexpr int kSilentDigit = 2;

int ipow3(int n) {
  int r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_detector_id(int spd) {
  if (spd < 1 || spd > kNumDetectors) {
    fail("unknown detector id SPD" + std::to_string(spd));
  }
}

// Digit of one path given the click mask; -1 when both detectors fired.
int path_digit(unsigned mask, DetectorPair pair) {
  const bool p = (mask >> (pair.plus - 1)) & 1u;
  const bool m = (mask >> (pair.minus - 1)) & 1u;
  if (p && m) return -1;
  if (p) return kPlusDigit;
  if (m) return kMinusDigit;
  return kSilentDigit;
}

// Pattern index of a click mask, or -1 for a multi-click trial.
int mask_pattern(unsigned mask, DetectorPair herald, std::span<const DetectorPair> signals) {
  int idx = path_digit(mask, herald);
  if (idx < 0) return -1;
  for (const auto& s : signals) {
    const int d = path_digit(mask, s);
    if (d < 0) return -1;
    idx = idx * 3 + d;
  }
  return idx;
}

std::string setting_label(const std::array<MeasurementSetting, 3>& settings,
                          DetectorPair herald, std::span<const DetectorPair> signals) {
  std::string out(basis_label(settings[(herald.plus - 1) / 2]));
  for (const auto& s : signals) {
    out += "/";
    out += basis_label(settings[(s.plus - 1) / 2]);
  }
  return out;
}

void check_layout(DetectorPair herald, std::span<const DetectorPair> signals) {
  check_detector_id(herald.plus);
  check_detector_id(herald.minus);
  for (const auto& s : signals) {
    check_detector_id(s.plus);
    check_detector_id(s.minus);
  }
}

}  // namespace

void DetectorParams::validate(const std::string& where) const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) fail(where + ".efficiency must lie in [0,1]");
  if (!(dark_prob >= 0.0 && dark_prob <= 1.0)) fail(where + ".dark_prob must lie in [0,1]");
}

PatternDistribution click_pattern_distribution(const JointState& s,
                                               std::span<const PathSpec> paths) {
  if (std::abs(s.trace() - 1.0) > 1e-9) fail("click probabilities need a normalized state");
  JointState rotated = s;
  std::vector<int> pos;
  for (const auto& p : paths) {
    check_detector_id(p.plus_detector);
    check_detector_id(p.minus_detector);
    p.plus.validate("plus detector");
    p.minus.validate("minus detector");
    rotated = apply_unitary(rotated, setting_unitary(p.setting), p.photon);
    pos.push_back(rotated.position(p.photon));
  }

  // Joint distribution of the quantum outcomes (+, -, vacuum) per path.
  const int k = static_cast<int>(paths.size());
  std::vector<double> outcome(ipow3(k), 0.0);
  const int n = rotated.size();
  for (int i = 0; i < rotated.dim(); ++i) {
    int idx = 0;
    for (int p = 0; p < k; ++p) {
      const int stride = ipow3(n - 1 - pos[p]);
      idx = idx * 3 + (i / stride) % 3;
    }
    outcome[idx] += std::max(0.0, rotated.rho()(i, i).real());
  }

  PatternDistribution dist{};
  for (int idx = 0; idx < static_cast<int>(outcome.size()); ++idx) {
    if (outcome[idx] == 0.0) continue;
    // Expand detector responses path by path.
    std::vector<std::pair<unsigned, double>> partial{{0u, outcome[idx]}};
    int rem = idx;
    std::vector<int> digits(k);
    for (int p = k - 1; p >= 0; --p) {
      digits[p] = rem % 3;
      rem /= 3;
    }
    for (int p = 0; p < k; ++p) {
      const auto& path = paths[p];
      const double q_plus = digits[p] == 0 ? path.plus.efficiency : 0.0;
      const double q_minus = digits[p] == 1 ? path.minus.efficiency : 0.0;
      const double c_plus = 1.0 - (1.0 - q_plus) * (1.0 - path.plus.dark_prob);
      const double c_minus = 1.0 - (1.0 - q_minus) * (1.0 - path.minus.dark_prob);
      const unsigned b_plus = 1u << (path.plus_detector - 1);
      const unsigned b_minus = 1u << (path.minus_detector - 1);
      std::vector<std::pair<unsigned, double>> next;
      next.reserve(partial.size() * 4);
      for (const auto& [mask, w] : partial) {
        next.emplace_back(mask, w * (1 - c_plus) * (1 - c_minus));
        next.emplace_back(mask | b_plus, w * c_plus * (1 - c_minus));
        next.emplace_back(mask | b_minus, w * (1 - c_plus) * c_minus);
        next.emplace_back(mask | b_plus | b_minus, w * c_plus * c_minus);
      }
      partial = std::move(next);
    }
    for (const auto& [mask, w] : partial) dist[mask] += w;
  }
  return dist;
}

ClickProbabilities click_probabilities(const JointState& s, const std::string& path,
                                       MeasurementSetting setting,
                                       const DetectorParams& plus_det,
                                       const DetectorParams& minus_det) {
  const PathSpec spec{path, setting, 1, 2, plus_det, minus_det};
  const auto dist = click_pattern_distribution(s, std::span(&spec, 1));
  ClickProbabilities out;
  out.none = dist[0b00];
  out.both = dist[0b11];
  out.plus = dist[0b01] + dist[0b11];
  out.minus = dist[0b10] + dist[0b11];
  return out;
}

ClickProbabilities click_probabilities(const JointState& s, const std::string& path,
                                       MeasurementSetting setting,
                                       const DetectorParams& det) {
  return click_probabilities(s, path, setting, det, det);
}

double shot_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t shot) {
  const std::uint64_t key = splitmix64(seed) ^ splitmix64(stream ^ 0x5851f42d4c957f2dULL);
  const std::uint64_t x = splitmix64(key + splitmix64(shot));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::vector<DetectionRecord> sample_shots(const PatternDistribution& probabilities,
                                          std::uint64_t n, std::uint64_t seed,
                                          const ShotContext& context) {
  std::array<double, kNumPatterns> cumulative{};
  double total = 0.0;
  for (int i = 0; i < kNumPatterns; ++i) {
    if (!(probabilities[i] >= 0.0)) fail("pattern probabilities must be non-negative");
    total += probabilities[i];
    cumulative[i] = total;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("pattern probabilities must sum to 1");

  std::vector<DetectionRecord> records(n);
  auto fill = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const double u = shot_uniform(seed, context.stream, i) * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      int mask = static_cast<int>(it - cumulative.begin());
      if (mask >= kNumPatterns) mask = kNumPatterns - 1;
      records[i] = DetectionRecord{i, context.settings, context.phase,
                                   static_cast<std::uint8_t>(mask)};
    }
  };

  const std::uint64_t workers =
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(std::thread::hardware_concurrency(),
                                                         n / 65536));
  if (workers <= 1) {
    fill(0, n);
  } else {
    std::vector<std::future<void>> jobs;
    const std::uint64_t chunk = (n + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t b = w * chunk;
      const std::uint64_t e = std::min(n, b + chunk);
      if (b < e) jobs.push_back(std::async(std::launch::async, fill, b, e));
    }
    for (auto& j : jobs) j.get();
  }
  return records;
}

int CoincidencePoint::num_paths() const {
  int k = 0;
  for (std::size_t n = counts.size(); n > 1; n /= 3) ++k;
  return k;
}

std::string pattern_string(int index, int num_paths) {
  std::string s(num_paths, '0');
  for (int p = num_paths - 1; p >= 0; --p) {
    const int d = index % 3;
    s[p] = d == kPlusDigit ? '+' : d == kMinusDigit ? '-' : '0';
    index /= 3;
  }
  return s;
}

int pattern_index(std::string_view pattern) {
  int idx = 0;
  for (char c : pattern) {
    int d = 0;
    if (c == '+') d = kPlusDigit;
    else if (c == '-') d = kMinusDigit;
    else if (c == '0') d = kSilentDigit;
    else fail("invalid pattern character in '" + std::string(pattern) + "'");
    idx = idx * 3 + d;
  }
  return idx;
}

double CoincidencePoint::count(std::string_view pattern) const {
  if (static_cast<int>(pattern.size()) != num_paths()) fail("pattern length mismatch");
  return counts.at(pattern_index(pattern));
}

double CoincidencePoint::coincidences() const {
  const int k = num_paths();
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
    if (pattern_string(i, k).find('0') == std::string::npos) sum += counts[i];
  }
  return sum;
}

CoincidenceTable coincidence_tally(std::span<const DetectionRecord> records,
                                   DetectorPair herald,
                                   std::span<const DetectorPair> signals) {
  check_layout(herald, signals);
  const int k = 1 + static_cast<int>(signals.size());
  CoincidenceTable table;
  table.path_names.push_back("herald");
  for (std::size_t i = 0; i < signals.size(); ++i) {
    table.path_names.push_back("signal" + std::to_string(i + 1));
  }
  std::map<std::pair<double, std::array<MeasurementSetting, 3>>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.phase, r.settings);
    auto it = index.find(key);
    if (it == index.end()) {
      CoincidencePoint p;
      p.phase = r.phase;
      p.setting = setting_label(r.settings, herald, signals);
      p.counts.assign(ipow3(k), 0.0);
      table.points.push_back(std::move(p));
      it = index.emplace(key, table.points.size() - 1).first;
    }
    auto& point = table.points[it->second];
    point.trials += 1.0;
    const int idx = mask_pattern(r.clicks, herald, signals);
    if (idx < 0) {
      point.discarded += 1.0;
    } else {
      point.counts[idx] += 1.0;
    }
  }
  return table;
}

CoincidencePoint expected_tally(const PatternDistribution& probabilities, double trials,
                                DetectorPair herald, std::span<const DetectorPair> signals,
                                double phase, std::string setting) {
  check_layout(herald, signals);
  const int k = 1 + static_cast<int>(signals.size());
  CoincidencePoint p;
  p.phase = phase;
  p.setting = std::move(setting);
  p.trials = trials;
  p.counts.assign(ipow3(k), 0.0);
  for (unsigned mask = 0; mask < kNumPatterns; ++mask) {
    const double w = probabilities[mask] * trials;
    if (w == 0.0) continue;
    const int idx = mask_pattern(mask, herald, signals);
    if (idx < 0) {
      p.discarded += w;
    } else {
      p.counts[idx] += w;
    }
  }
  return p;
}

CoincidencePoint deduct_dark_counts(const CoincidencePoint& point, double dark_prob) {
  if (!(dark_prob >= 0.0 && dark_prob < 1.0)) fail("dark_prob must lie in [0,1)");
  if (dark_prob == 0.0) return point;
  const int k = point.num_paths();
  const double ratio = dark_prob / (1.0 - dark_prob);
  const double survival = std::pow(1.0 - dark_prob, k);
  CoincidencePoint out = point;
  for (int i = 0; i < static_cast<int>(point.counts.size()); ++i) {
    const std::string pat = pattern_string(i, k);
    if (pat.find('0') != std::string::npos) continue;
    double partner = 0.0;
    for (int j = 0; j < k; ++j) {
      std::string silent = pat;
      silent[j] = '0';
      partner += point.counts[pattern_index(silent)];
    }
    out.counts[i] = std::max(0.0, point.counts[i] - ratio * partner) / survival;
  }
  return out;
}

CoincidenceTable deduct_dark_counts(const CoincidenceTable& table, double dark_prob) {
  CoincidenceTable out = table;
  for (auto& p : out.points) p = deduct_dark_counts(p, dark_prob);
  return out;
}

double VisibilityFit::model(double theta) const {
  return 0.5 * (1.0 + visibility * std::sin(theta + phase));
}

VisibilityFit fit_visibility(std::span<const SeriesPoint> series) {
  std::vector<double> phases;
  for (const auto& p : series) {
    if (!(p.trials > 0.0)) fail("visibility series point without trials");
    phases.push_back(p.phase);
  }
  std::sort(phases.begin(), phases.end());
  phases.erase(std::unique(phases.begin(), phases.end()), phases.end());
  if (phases.size() < 4 || phases.back() - phases.front() <= std::numbers::pi) {
    fail("insufficient phase coverage: need >= 4 distinct phases spanning more than pi");
  }

  // f - 1/2 = a sin(theta) + b cos(theta); iteratively reweighted with the
  // binomial variance of the current model.
  Eigen::Vector2d coef = Eigen::Vector2d::Zero();
  Eigen::Matrix2d normal;
  for (int iter = 0; iter < 4; ++iter) {
    normal.setZero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (const auto& p : series) {
      const double s = std::sin(p.phase);
      const double c = std::cos(p.phase);
      double q = iter == 0 ? p.fraction : 0.5 + coef(0) * s + coef(1) * c;
      q = std::clamp(q, 0.0, 1.0);
      const double var = std::max(q * (1.0 - q), 1.0 / p.trials);
      const double w = p.trials / var;
      const Eigen::Vector2d row(s, c);
      normal += w * row * row.transpose();
      rhs += w * row * (p.fraction - 0.5);
    }
    if (std::abs(normal.determinant()) < 1e-12 * normal.squaredNorm()) {
      fail("singular visibility fit");
    }
    coef = normal.ldlt().solve(rhs);
  }

  const Eigen::Matrix2d cov = normal.inverse();
  const double r = coef.norm();
  VisibilityFit fit;
  fit.visibility = 2.0 * r;
  fit.phase = std::atan2(coef(1), coef(0));
  if (r > 0.0) {
    const Eigen::Vector2d grad_v = 2.0 * coef / r;
    fit.visibility_err = std::sqrt(grad_v.dot(cov * grad_v));
    const Eigen::Vector2d grad_phi(-coef(1) / (r * r), coef(0) / (r * r));
    fit.phase_err = std::sqrt(grad_phi.dot(cov * grad_phi));
  } else {
    fit.visibility_err = 2.0 * std::sqrt(cov.trace() / 2.0);
    fit.phase_err = std::numbers::pi;
  }
  // Amplitudes above 1 are projected back onto the physical boundary.
  fit.visibility = std::min(fit.visibility, 1.0);
  return fit;
}

double herald_efficiency(double eta_sr_prime, double eta_t, double eta_d) {
  for (double v : {eta_sr_prime, eta_t, eta_d}) {
    if (!(v >= 0.0 && v <= 1.0)) fail("efficiencies must lie in [0,1]");
  }
  return eta_sr_prime * eta_t * eta_d;
}

double binomial_se(double p, double n) {
  if (!(n > 0.0)) return std::numeric_limits<double>::infinity();
  p = std::clamp(p, 0.0, 1.0);
  return std::sqrt(p * (1.0 - p) / n);
}

}  // namespace hsq
