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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "hsq/detection.hpp"
#include "support.hpp"

using namespace hsq;
using hsq::test::qubit;

namespace {

constexpr double kPi = std::numbers::pi;
const double kS = 1.0 / std::sqrt(2.0);
constexpr DetectorPair kHerald{3, 4};
constexpr DetectorPair kSignal[] = {{5, 6}};

JointState polarization_photon(const ComplexVector& psi) {
  return JointState::pure(RegisterLabel::photon("p", Basis::kPolarization), psi);
}

// (|V V> + e^{i theta}|H H>)/sqrt2 on ("h", "s").
JointState correlated_pair(double theta) {
  ComplexVector psi = ComplexVector::Zero(9);
  psi(0) = kS;
  psi(4) = std::polar(kS, theta);
  return JointState({RegisterLabel::photon("h", Basis::kPolarization),
                     RegisterLabel::photon("s", Basis::kPolarization)},
                    psi * psi.adjoint());
}

std::array<PathSpec, 2> xx_paths(const DetectorParams& det = {}) {
  return {PathSpec{"h", MeasurementSetting::kRyMinusHalfPi, 3, 4, det, det},
          PathSpec{"s", MeasurementSetting::kRyMinusHalfPi, 5, 6, det, det}};
}

double same_fraction(const CoincidencePoint& p) {
  return (p.count("++") + p.count("--")) / p.coincidences();
}

}  // namespace

TEST_CASE("click probability examples") {
  const JointState plus = polarization_photon(qubit(kS, kS));
  const ClickProbabilities ideal =
      click_probabilities(plus, "p", MeasurementSetting::kRyMinusHalfPi, DetectorParams{});
  CHECK(ideal.plus == doctest::Approx(1.0));
  CHECK(ideal.minus == doctest::Approx(0.0));
  CHECK(ideal.none == doctest::Approx(0.0));

  const JointState v = polarization_photon(qubit(1, 0));
  const ClickProbabilities eff =
      click_probabilities(v, "p", MeasurementSetting::kIdentity, DetectorParams{0.656, 0.0});
  CHECK(eff.plus == doctest::Approx(0.656));

  const ClickProbabilities dark =
      click_probabilities(v, "p", MeasurementSetting::kIdentity, DetectorParams{0.0, 0.01});
  CHECK(dark.plus == doctest::Approx(0.01));
  CHECK(dark.minus == doctest::Approx(0.01));
  CHECK(dark.both == doctest::Approx(1e-4));
  CHECK(dark.none == doctest::Approx(0.99 * 0.99));
}

TEST_CASE("click probabilities follow 1 - (1 - eta p)(1 - d)") {
  const JointState d = polarization_photon(qubit(std::sqrt(0.3), std::sqrt(0.7)));
  const DetectorParams det{0.6, 0.02};
  const ClickProbabilities c = click_probabilities(d, "p", MeasurementSetting::kIdentity, det);
  CHECK(c.plus == doctest::Approx(1 - (1 - 0.6 * 0.3) * 0.98).epsilon(1e-14));
  CHECK(c.minus == doctest::Approx(1 - (1 - 0.6 * 0.7) * 0.98).epsilon(1e-14));
}

TEST_CASE("pattern distribution sums to one and rejects bad detector ids") {
  const auto paths = xx_paths({0.7, 0.03});
  const PatternDistribution dist = click_pattern_distribution(correlated_pair(0.4), paths);
  double sum = 0.0;
  for (double p : dist) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  std::array<PathSpec, 1> bad{PathSpec{"h", MeasurementSetting::kIdentity, 7, 4, {}, {}}};
  CHECK_THROWS_AS(click_pattern_distribution(correlated_pair(0.0), bad), Error);
}

TEST_CASE("sample_shots examples") {
  PatternDistribution degenerate{};
  degenerate[0b010100] = 1.0;
  CHECK(sample_shots(degenerate, 0, 1).empty());
  const auto same = sample_shots(degenerate, 1000, 42);
  CHECK(std::all_of(same.begin(), same.end(), [](const auto& r) { return r.clicks == 0b010100; }));

  PatternDistribution coin{};
  coin[0] = 0.5;
  coin[1] = 0.5;
  const auto flips = sample_shots(coin, 1000000, 20240613);
  double ones = 0.0;
  for (const auto& r : flips) ones += r.clicked(1);
  CHECK(std::abs(ones / 1e6 - 0.5) < 5 * 0.0005);

  PatternDistribution bad{};
  bad[0] = 0.7;
  CHECK_THROWS_AS(sample_shots(bad, 10, 1), Error);
}

TEST_CASE("sampling is counter based and deterministic") {
  PatternDistribution dist{};
  dist[0] = 0.25;
  dist[3] = 0.25;
  dist[12] = 0.5;
  const auto a = sample_shots(dist, 200000, 7, {{}, 0.0, 3});
  const auto b = sample_shots(dist, 200000, 7, {{}, 0.0, 3});
  const auto prefix = sample_shots(dist, 1000, 7, {{}, 0.0, 3});
  auto same_clicks = [](const auto& x, const auto& y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
      if (x[i].clicks != y[i].clicks) return false;
    return true;
  };
  CHECK(same_clicks(a, b, a.size()));
  CHECK(same_clicks(prefix, a, prefix.size()));
  CHECK(shot_uniform(7, 3, 11) == shot_uniform(7, 3, 11));
  CHECK(shot_uniform(7, 3, 11) != shot_uniform(7, 4, 11));
}

TEST_CASE("tally without herald clicks keeps totals") {
  std::vector<DetectionRecord> records(50);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].clicks = (i % 2) ? 0b010000 : 0;
  const CoincidenceTable t = coincidence_tally(records, kHerald, kSignal);
  REQUIRE(t.points.size() == 1);
  CHECK(t.points[0].trials == 50);
  CHECK(t.points[0].coincidences() == 0.0);
  CHECK(t.points[0].count("0+") == 25);
}

TEST_CASE("tally of perfectly correlated records has empty anti-correlated cells") {
  std::vector<DetectionRecord> records;
  for (int i = 0; i < 40; ++i) {
    DetectionRecord r;
    r.clicks = (i % 2) ? (0b000100 | 0b010000) : (0b001000 | 0b100000);
    records.push_back(r);
  }
  const CoincidencePoint p = coincidence_tally(records, kHerald, kSignal).points[0];
  CHECK(p.count("++") == 20);
  CHECK(p.count("--") == 20);
  CHECK(p.count("+-") == 0);
  CHECK(p.count("-+") == 0);
  CHECK_THROWS_AS(coincidence_tally(records, DetectorPair{0, 4}, kSignal), Error);
}

TEST_CASE("sampled correlated fractions follow the analytic fringe") {
  std::vector<SeriesPoint> analytic;
  for (int k = 0; k < 12; ++k) {
    const double theta = k * kPi / 6;
    const auto paths = xx_paths({0.65, 0.0});
    const PatternDistribution dist = click_pattern_distribution(correlated_pair(theta), paths);
    const CoincidencePoint exact = expected_tally(dist, 1.0, kHerald, kSignal, theta, "X/X");
    const double p = same_fraction(exact);
    CHECK(p == doctest::Approx(0.5 * (1 + std::cos(theta))).epsilon(1e-12));
    analytic.push_back({theta, p, 1e4});

    const auto records = sample_shots(dist, 200000, 99, {{}, theta, static_cast<std::uint64_t>(k)});
    const CoincidencePoint sampled = coincidence_tally(records, kHerald, kSignal).points[0];
    const double n = sampled.coincidences();
    CHECK(std::abs(same_fraction(sampled) - p) < 5 * std::sqrt(std::max(p * (1 - p), 1.0 / n) / n));
  }
  const VisibilityFit fit = fit_visibility(analytic);
  CHECK(fit.visibility == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.phase == doctest::Approx(kPi / 2).epsilon(1e-9));
}

TEST_CASE("expected tally of a dark-free distribution matches its cells") {
  PatternDistribution dist{};
  dist[0b000100 | 0b010000] = 0.3;  // herald +, signal +
  dist[0b001000] = 0.2;             // herald -, signal silent
  dist[0b001100] = 0.1;             // herald both -> discarded
  dist[0] = 0.4;
  const CoincidencePoint p = expected_tally(dist, 1000, kHerald, kSignal, 0.0, "X/Z");
  CHECK(p.count("++") == doctest::Approx(300));
  CHECK(p.count("-0") == doctest::Approx(200));
  CHECK(p.discarded == doctest::Approx(100));
  CHECK(p.count("00") == doctest::Approx(400));
  CHECK(pattern_string(pattern_index("+-0"), 3) == "+-0");
}

TEST_CASE("fit_visibility recovers noiseless fringes exactly") {
  for (double v : {0.0, 0.25, 0.5, 0.647, 0.75, 1.0}) {
    for (double phi : {0.0, kPi / 3, kPi}) {
      std::vector<SeriesPoint> series;
      for (int k = 0; k < 12; ++k) {
        const double t = k * kPi / 6;
        series.push_back({t, 0.5 * (1 + v * std::sin(t + phi)), 1000});
      }
      const VisibilityFit fit = fit_visibility(series);
      CHECK(std::abs(fit.visibility - v) < 1e-6);
      if (v > 0.0) {
        CHECK(std::abs(std::remainder(fit.phase - phi, 2 * kPi)) < 1e-6);
      }
    }
  }
}

TEST_CASE("fit_visibility on a constant series gives zero visibility") {
  std::vector<SeriesPoint> series;
  for (int k = 0; k < 8; ++k) series.push_back({k * kPi / 4, 0.5, 500});
  CHECK(fit_visibility(series).visibility < 1e-12);
}

TEST_CASE("fit_visibility rejects insufficient coverage") {
  std::vector<SeriesPoint> three{{0, 0.5, 10}, {1, 0.6, 10}, {2, 0.7, 10}};
  CHECK_THROWS_AS(fit_visibility(three), Error);
  std::vector<SeriesPoint> narrow;
  for (int k = 0; k < 6; ++k) narrow.push_back({k * 0.5, 0.5, 10});  // spans 2.5 < pi
  CHECK_THROWS_AS(fit_visibility(narrow), Error);
}

TEST_CASE("fit_visibility on binomial data stays within three standard errors") {
  std::mt19937_64 rng(2024);
  int within = 0;
  constexpr int kReps = 20;
  for (int rep = 0; rep < kReps; ++rep) {
    std::vector<SeriesPoint> series;
    for (int k = 0; k < 12; ++k) {
      const double t = k * kPi / 6;
      const double p = 0.5 * (1 + 0.9 * std::sin(t + 0.4));
      std::binomial_distribution<int> b(10000, p);
      series.push_back({t, b(rng) / 1e4, 1e4});
    }
    const VisibilityFit fit = fit_visibility(series);
    if (std::abs(fit.visibility - 0.9) < 3 * fit.visibility_err) ++within;
  }
  CHECK(within >= kReps - 1);
}

TEST_CASE("dark deduction examples") {
  CoincidencePoint p;
  p.counts.assign(9, 0.0);
  p.counts[pattern_index("++")] = 120;
  p.counts[pattern_index("+0")] = 900;
  p.trials = 10000;
  const CoincidencePoint same = deduct_dark_counts(p, 0.0);
  CHECK(same.counts == p.counts);

  // Signal-free cells: every coincidence is accidental.
  const double d = 0.01;
  CoincidencePoint dark;
  dark.counts.assign(9, 0.0);
  dark.counts[pattern_index("+0")] = 1000 * (1 - d) * (1 - d);
  dark.counts[pattern_index("++")] = 1000 * d * (1 - d);
  const CoincidencePoint cleaned = deduct_dark_counts(dark, d);
  CHECK(std::abs(cleaned.count("++")) < 1e-9);
  CHECK_THROWS_AS(deduct_dark_counts(p, 1.0), Error);
}

TEST_CASE("dark deduction inverts injected dark clicks to first order") {
  std::mt19937_64 rng(17);
  for (double d : {0.001, 0.01, 0.03, 0.05}) {
    for (int rep = 0; rep < 10; ++rep) {
      // Dark-free counts over herald x signal digits (+, -, 0).
      std::vector<double> truth(9, 0.0);
      const double trials = 1e5;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double total = 0.0;
      for (int i = 0; i < 9; ++i) total += (truth[i] = u(rng));
      for (auto& t : truth) t *= trials / total;

      // Each detector adds an independent dark click with probability d.
      auto spread = [d](int digit) {
        std::array<double, 4> out{};  // +, -, 0, both
        if (digit == 0) out = {1 - d, 0, 0, d};
        if (digit == 1) out = {0, 1 - d, 0, d};
        if (digit == 2) out = {d * (1 - d), d * (1 - d), (1 - d) * (1 - d), d * d};
        return out;
      };
      CoincidencePoint observed;
      observed.counts.assign(9, 0.0);
      observed.trials = trials;
      for (int i = 0; i < 9; ++i) {
        const auto h = spread(i / 3);
        const auto s = spread(i % 3);
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) {
            const double w = truth[i] * h[a] * s[b];
            if (a == 3 || b == 3) {
              observed.discarded += w;
            } else {
              observed.counts[a * 3 + b] += w;
            }
          }
        }
      }
      const CoincidencePoint deducted = deduct_dark_counts(observed, d);
      for (const char* cell : {"++", "+-", "-+", "--"}) {
        CHECK(std::abs(deducted.count(cell) - truth[pattern_index(cell)]) <= d * d * trials);
      }
    }
  }
}

TEST_CASE("herald efficiency examples") {
  CHECK(herald_efficiency(0.068, 0.481, 0.656) == doctest::Approx(0.0215).epsilon(5e-4 / 0.0215));
  CHECK(std::abs(herald_efficiency(0.068, 0.481, 0.656) - 0.0215) < 5e-4);
  CHECK(herald_efficiency(0.0, 0.481, 0.656) == 0.0);
  CHECK(herald_efficiency(0.068, 0.0, 0.656) == 0.0);
  CHECK(herald_efficiency(1, 1, 1) == 1.0);
  CHECK_THROWS_AS(herald_efficiency(1.2, 1, 1), Error);
}

TEST_CASE("identical seeds give identical tallies") {
  const auto paths = xx_paths({0.656, 0.004});
  const PatternDistribution dist = click_pattern_distribution(correlated_pair(0.3), paths);
  const auto a = coincidence_tally(sample_shots(dist, 50000, 5, {{}, 0.3, 1}), kHerald, kSignal);
  const auto b = coincidence_tally(sample_shots(dist, 50000, 5, {{}, 0.3, 1}), kHerald, kSignal);
  CHECK(a.points[0].counts == b.points[0].counts);
  CHECK(a.points[0].discarded == b.points[0].discarded);
}
