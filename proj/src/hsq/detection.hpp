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

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsq/photonics.hpp"
#include "hsq/qstate.hpp"

namespace hsq {

struct DetectorParams {
  double efficiency = 1.0;
  double dark_prob = 0.0;  // per detection window

  void validate(const std::string& where = "detector") const;
};

// Detector ids follow the lab naming SPD1..SPD6. Pairs (1,2), (3,4), (5,6)
// read out the node-A photon, the herald and the node-B retrieved photon.
inline constexpr int kNumDetectors = 6;
inline constexpr int kNumPatterns = 1 << kNumDetectors;

struct ClickProbabilities {
  double plus = 0.0;   // marginal click probability of the "+" detector
  double minus = 0.0;  // marginal click probability of the "-" detector
  double none = 0.0;   // neither detector clicks
  double both = 0.0;   // both click
};

ClickProbabilities click_probabilities(const JointState& s, const std::string& path,
                                       MeasurementSetting setting,
                                       const DetectorParams& det);
ClickProbabilities click_probabilities(const JointState& s, const std::string& path,
                                       MeasurementSetting setting,
                                       const DetectorParams& plus_det,
                                       const DetectorParams& minus_det);

// One measured photon register feeding a detector pair.
struct PathSpec {
  std::string photon;
  MeasurementSetting setting = MeasurementSetting::kIdentity;
  int plus_detector = 1;  // SPD id, 1-based
  int minus_detector = 2;
  DetectorParams plus;
  DetectorParams minus;
};

// Probability of every click mask (bit k-1 set when SPDk clicks).
using PatternDistribution = std::array<double, kNumPatterns>;

PatternDistribution click_pattern_distribution(const JointState& s,
                                               std::span<const PathSpec> paths);

struct DetectionRecord {
  std::uint64_t shot = 0;
  // Analyzer setting per detector pair: index 0 -> SPD1/2, 1 -> SPD3/4,
  // 2 -> SPD5/6.
  std::array<MeasurementSetting, 3> settings{};
  double phase = 0.0;
  std::uint8_t clicks = 0;

  bool clicked(int spd) const { return (clicks >> (spd - 1)) & 1u; }
};

struct ShotContext {
  std::array<MeasurementSetting, 3> settings{};
  double phase = 0.0;
  std::uint64_t stream = 0;  // independent substream per measurement point
};

// Counter-based uniform variate: depends only on (seed, stream, shot).
double shot_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t shot);

std::vector<DetectionRecord> sample_shots(const PatternDistribution& probabilities,
                                          std::uint64_t n, std::uint64_t seed,
                                          const ShotContext& context = {});

// Detector pair of one path in a coincidence layout.
struct DetectorPair {
  int plus = 1;
  int minus = 2;
};

// Counts per measurement point. Each path contributes one digit to the
// outcome pattern: '+' (only the plus detector clicked), '-' (only minus) or
// '0' (silent). Path 0 is the herald. Trials in which any path had both
// detectors click are kept in `discarded`.
struct CoincidencePoint {
  double phase = 0.0;
  std::string setting;  // analyzer bases per path joined by '/', e.g. "X/Z"
  std::vector<double> counts;
  double discarded = 0.0;
  double trials = 0.0;

  int num_paths() const;
  double count(std::string_view pattern) const;
  // Sum over the coincidence cells (no silent path).
  double coincidences() const;
};

struct CoincidenceTable {
  std::vector<std::string> path_names;
  std::vector<CoincidencePoint> points;
};

std::string pattern_string(int index, int num_paths);
int pattern_index(std::string_view pattern);

// Groups records by (phase, settings) in first-seen order.
CoincidenceTable coincidence_tally(std::span<const DetectionRecord> records,
                                   DetectorPair herald,
                                   std::span<const DetectorPair> signals);

// Expected counts for `trials` attempts under an exact pattern distribution.
CoincidencePoint expected_tally(const PatternDistribution& probabilities,
                                double trials, DetectorPair herald,
                                std::span<const DetectorPair> signals, double phase,
                                std::string setting);

// Removes first-order accidental coincidences: for every fully clicked cell,
// dark_prob times the counts where one path was silent while the others
// matched the cell, rescaled by the dark-free survival factor.
CoincidenceTable deduct_dark_counts(const CoincidenceTable& table, double dark_prob);
CoincidencePoint deduct_dark_counts(const CoincidencePoint& point, double dark_prob);

struct SeriesPoint {
  double phase = 0.0;
  double fraction = 0.0;
  double trials = 0.0;
};

struct VisibilityFit {
  double visibility = 0.0;
  double phase = 0.0;  // phi in (1 + V sin(theta + phi)) / 2
  double visibility_err = 0.0;
  double phase_err = 0.0;

  double model(double theta) const;
};

VisibilityFit fit_visibility(std::span<const SeriesPoint> series);

double herald_efficiency(double eta_sr_prime, double eta_t, double eta_d);

// Binomial standard error of a fraction estimated from n trials.
double binomial_se(double p, double n);

}  // namespace hsq
