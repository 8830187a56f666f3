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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hsq/config.hpp"
#include "hsq/detection.hpp"
#include "hsq/tomography.hpp"

namespace hsq {

enum class Protocol { kSingle, kTwoNode };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view name);

struct Metric {
  std::string key;
  double value = 0.0;
  double uncertainty = 0.0;
  std::string method;  // exact, binomial, fit, bootstrap, propagated, formula
};

struct VerdictEntry {
  std::string key;  // metric the verdict refers to
  FidelityMetric metric = FidelityMetric::kProcess;
  double value = 0.0;
  ClassicalVerdict verdict;
};

struct SweepRow {
  double phase = 0.0;
  std::string family;
  double fraction = 0.0;
  double trials = 0.0;
};

struct NamedCounts {
  std::string name;
  TomoDataset data;
};

struct NamedMatrix {
  std::string name;
  ComplexMatrix matrix;
};

struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::kAnalytic;
  int schema_version = kSchemaVersion;
};

struct RunReport {
  std::string protocol;
  Provenance provenance;
  std::vector<Metric> metrics;
  std::vector<VerdictEntry> verdicts;
  std::vector<SweepRow> sweep;
  CoincidenceTable coincidences;
  std::vector<NamedCounts> tomography;
  std::vector<NamedMatrix> matrices;

  const Metric* find(std::string_view key) const;
  const Metric& metric(std::string_view key) const;  // throws on unknown key
  double value(std::string_view key) const { return metric(key).value; }
};

// Final heralding-stage state of the single-node protocol for a time-bin
// input: registers "herald" and "retrieved", both in polarization basis.
// `sweep_phase` is added to the compensated retrieval read phase.
JointState single_node_state(const ExperimentConfig& cfg, const ComplexVector& input,
                             double sweep_phase = 0.0);

// Final state of the two-node protocol: registers "herald", "node_a" and
// "retrieved".
JointState two_node_state(const ExperimentConfig& cfg, double sweep_phase = 0.0);

// Product of the configured efficiencies along the herald path.
double herald_budget(const ExperimentConfig& cfg);

// One input state: herald rates, tomography counts and F_s raw/deducted.
RunReport run_heralded_storage(const ExperimentConfig& cfg, InputStateId input);

// Six-state benchmark, process tomography, V0/V1 entanglement check.
RunReport run_single_node(const ExperimentConfig& cfg);

RunReport run_two_node(const ExperimentConfig& cfg);

RunReport phase_sweep(const ExperimentConfig& cfg, Protocol protocol);

// Standalone tomography of one dataset, optionally as a process fit when
// datasets for E, L, D and R are supplied.
RunReport run_state_tomography(const TomoDataset& data, const ExperimentConfig& cfg);
RunReport run_process_tomography(const std::vector<NamedCounts>& data,
                                 const ExperimentConfig& cfg);

std::string format_report(const RunReport& report);

// Writes report.txt, metrics.csv and whichever of sweep.csv,
// coincidences.csv, tomo/<name>.csv and matrices/<name>.csv apply.
void write_outputs(const RunReport& report, const std::string& dir);

}  // namespace hsq
