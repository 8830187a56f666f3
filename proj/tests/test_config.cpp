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

#include <cstdlib>
#include <numbers>

#include "hsq/config.hpp"

using namespace hsq;

namespace {

std::string preset(const std::string& name) {
  const char* dir = std::getenv("HSQ_PRESET_DIR");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

std::string config_message(const std::string& text) {
  try {
    parse_config(text, "t.yaml");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("seed-only file takes every default") {
  const ExperimentConfig cfg = parse_config("seed: 7\n");
  const ExperimentConfig def;
  CHECK(cfg.seed == 7);
  CHECK(cfg.schema_version == kSchemaVersion);
  CHECK(cfg.mode == RunMode::kAnalytic);
  CHECK(cfg.shots == 100000);
  CHECK(cfg.eta_t == 1.0);
  CHECK(cfg.herald_basis_convention == HeraldConvention::kRetainWithCorrection);
  CHECK(cfg.process_constraint == ProcessConstraint::kTracePreserving);
  CHECK(cfg.timeline.bin_separation == 425e-9);
  CHECK(cfg.phase_grid.size() == 12);
  ExperimentConfig seeded = def;
  seeded.seed = 7;
  CHECK(dump_config(cfg) == dump_config(seeded));
  CHECK(dump_config(parse_config("")) == dump_config(def));
}

TEST_CASE("range violations name the field") {
  const std::string m = config_message("eta_t: 1.2\n");
  CHECK(contains(m, "eta_t"));
  CHECK(contains(m, "range"));
  CHECK(contains(config_message("node_b:\n  eta_store: -0.1\n"), "node_b.eta_store"));
  CHECK(contains(config_message("detectors:\n  spd3: {dark_prob: 1.0}\n"), "spd3"));
  CHECK(contains(config_message("shots: 0\n"), "shots"));
  CHECK(contains(config_message("phase_grid: []\n"), "phase_grid"));
}

TEST_CASE("unknown keys and parse errors carry line information") {
  const std::string unknown = config_message("seed: 1\nnode_a:\n  eta_stor: 0.5\n");
  CHECK(contains(unknown, "t.yaml:3:"));
  CHECK(contains(unknown, "eta_stor"));
  const std::string syntax = config_message("seed: 1\nnode_a: [1, 2\n");
  CHECK(contains(syntax, "t.yaml:"));
  CHECK(contains(syntax, "parse error"));
  CHECK(contains(config_message("mode: fast\n"), "mode"));
  CHECK(contains(config_message("schema_version: 2\n"), "schema_version"));
}

TEST_CASE("missing config file is a config error") {
  try {
    load_config("/nonexistent/cfg.yaml");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
}

TEST_CASE("calibrated preset carries the measured constants") {
  const ExperimentConfig cfg = load_config(preset("calibrated.yaml"));
  CHECK(cfg.eta_t == 0.481);
  for (int spd = 1; spd <= kNumDetectors; ++spd) CHECK(cfg.detector(spd).efficiency == 0.656);
  CHECK(cfg.node_b.eta_store * cfg.node_b.eta_retrieve == doctest::Approx(0.164).epsilon(1e-12));
  CHECK(cfg.node_b.eta_store * cfg.node_b.eta_patch == doctest::Approx(0.068).epsilon(1e-12));
  CHECK(cfg.node_b.dephasing_lifetime == 1.4e-6);
  CHECK(cfg.node_a.dephasing_lifetime == 1.4e-6);
  CHECK(cfg.timeline.storage_hold == 670e-9);
  CHECK(cfg.timeline.bin_separation == 425e-9);
  CHECK(cfg.apparatus.optical_depth == 2.0);
  CHECK(cfg.apparatus.cavity_finesse == 19.0);
  CHECK(cfg.apparatus.rydberg_state == "91S1/2");
  CHECK(cfg.apparatus.detuning_hz == 60e6);
  CHECK(cfg.phase_grid.size() == 12);
  CHECK(cfg.phase_grid.back() < 2 * std::numbers::pi);
}

TEST_CASE("ideal preset is noiseless and lossless") {
  const ExperimentConfig cfg = load_config(preset("ideal.yaml"));
  for (const NodeParams* n : {&cfg.node_a, &cfg.node_b}) {
    CHECK(n->eta_store == 1.0);
    CHECK(n->eta_retrieve == 1.0);
    CHECK(n->eta_patch == 1.0);
    CHECK(n->excitation_error == 0.0);
    CHECK(std::isinf(n->dephasing_lifetime));
  }
  CHECK(cfg.mean_dark_prob({1, 2, 3, 4, 5, 6}) == 0.0);
}

TEST_CASE("dump round trips exactly") {
  for (const char* name : {"calibrated.yaml", "ideal.yaml"}) {
    const ExperimentConfig cfg = load_config(preset(name));
    const std::string text = dump_config(cfg);
    const ExperimentConfig back = parse_config(text);
    CHECK(dump_config(back) == text);
    CHECK(config_hash(back) == config_hash(cfg));
    CHECK(back.node_b.eta_store == cfg.node_b.eta_store);
    CHECK(back.phase_grid == cfg.phase_grid);
  }
  ExperimentConfig odd;
  odd.theta0 = 0.1 + 0.2;
  odd.node_a.read_phase = -1.0 / 3.0;
  CHECK(parse_config(dump_config(odd)).theta0 == odd.theta0);
  CHECK(parse_config(dump_config(odd)).node_a.read_phase == odd.node_a.read_phase);
}

TEST_CASE("hash changes with any field") {
  ExperimentConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.detectors[4].dark_prob = 1e-5;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("dotted overrides") {
  const ExperimentConfig base;
  const ExperimentConfig a = set_config_value(base, "node_b.eta_store", "0.25");
  CHECK(a.node_b.eta_store == 0.25);
  CHECK(a.node_a.eta_store == 1.0);
  const ExperimentConfig d = set_config_value(base, "detectors.dark_prob", "0.01");
  for (int spd = 1; spd <= kNumDetectors; ++spd) CHECK(d.detector(spd).dark_prob == 0.01);
  const ExperimentConfig one = set_config_value(base, "detectors.spd4.efficiency", "0.5");
  CHECK(one.detector(4).efficiency == 0.5);
  CHECK(one.detector(3).efficiency == 1.0);
  CHECK(set_config_value(base, "mode", "sampled").mode == RunMode::kSampled);
  CHECK(set_config_value(base, "phase_grid", "[0, 1, 2, 3]").phase_grid.size() == 4);
  CHECK_THROWS_AS(set_config_value(base, "node_c.eta_store", "0.5"), Error);
  CHECK_THROWS_AS(set_config_value(base, "eta_t", "2"), Error);
}

TEST_CASE("phase grid in list and range form") {
  const ExperimentConfig list = parse_config("phase_grid: [0.0, 1.5, 3.5]\n");
  CHECK(list.phase_grid == std::vector<double>{0.0, 1.5, 3.5});
  const ExperimentConfig range = parse_config("phase_grid: {start: 0, stop: 4, points: 4}\n");
  CHECK(range.phase_grid == std::vector<double>{0.0, 1.0, 2.0, 3.0});
  CHECK(contains(config_message("phase_grid: {start: 0, stop: 4, points: 0}\n"), "points"));
}

TEST_CASE("detector shorthand applies before per-detector entries") {
  const ExperimentConfig cfg =
      parse_config("detectors:\n  efficiency: 0.7\n  spd2: {efficiency: 0.5}\n");
  CHECK(cfg.detector(1).efficiency == 0.7);
  CHECK(cfg.detector(2).efficiency == 0.5);
  CHECK(cfg.detector(6).efficiency == 0.7);
  CHECK_THROWS_AS(cfg.detector(7), Error);
  CHECK(parse_config("detectors:\n  spd1: {dark_prob: 0.1}\n  spd2: {dark_prob: 0.3}\n")
            .mean_dark_prob({1, 2}) == doctest::Approx(0.2));
}
