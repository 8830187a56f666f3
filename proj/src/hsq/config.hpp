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
#include <initializer_list>
#include <string>
#include <vector>

#include "hsq/detection.hpp"
#include "hsq/photonics.hpp"
#include "hsq/superatom.hpp"
#include "hsq/tomography.hpp"

namespace hsq {

inline constexpr int kSchemaVersion = 1;

enum class RunMode { kAnalytic, kSampled };

// What to do with heralds registered on the "-" detector: they project the
// stored qubit onto a Z-flipped copy.
enum class HeraldConvention { kRetainWithCorrection, kDiscardMinus };

struct AnalysisOptions {
  // Parametric resamples behind process-fidelity error bars; 0 falls back to
  // propagation from the state fidelities.
  int bootstrap_resamples = 200;
  InputStateId entanglement_input = InputStateId::kD;
};

// Apparatus constants carried for documentation; no dynamics depend on them.
struct Apparatus {
  double optical_depth = 2.0;
  double cavity_finesse = 19.0;
  std::string rydberg_state = "91S1/2";
  double detuning_hz = 60e6;
  double temperature_k = 6e-6;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 0;
  RunMode mode = RunMode::kAnalytic;
  std::uint64_t shots = 100000;  // attempts per measurement point

  double theta0 = 0.0;        // interferometer phase
  double eta_t = 1.0;         // herald path transmission
  double eta_t_signal = 1.0;  // retrieved and node-A photon paths
  double eta_link = 1.0;      // node A -> node B fiber
  // Photon generation at node A in single-node runs, separate from the
  // retrieval of a stored excitation (node_a.eta_retrieve).
  double eta_source = 1.0;

  HeraldConvention herald_basis_convention = HeraldConvention::kRetainWithCorrection;
  ProcessConstraint process_constraint = ProcessConstraint::kTracePreserving;
  DephasingModel dephasing_model = DephasingModel::kGaussian;

  NodeParams node_a;
  NodeParams node_b;
  std::array<DetectorParams, kNumDetectors> detectors{};  // SPD1..SPD6
  Timeline timeline;
  std::vector<double> phase_grid = default_phase_grid();
  AnalysisOptions analysis;
  Apparatus apparatus;

  const DetectorParams& detector(int spd) const;
  // Mean dark probability of the listed detectors, used by the deduction.
  double mean_dark_prob(std::initializer_list<int> spds) const;

  // Throws Error(kConfig) naming the offending field.
  void validate() const;

  static std::vector<double> default_phase_grid();
};

std::string_view to_string(RunMode m);
std::string_view to_string(HeraldConvention c);
std::string_view to_string(ProcessConstraint c);
std::string_view to_string(DephasingModel m);

// Parses YAML text. Missing keys keep their defaults; unknown keys, type
// mismatches and range violations raise Error(kConfig).
ExperimentConfig parse_config(const std::string& text,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Canonical fully-populated YAML rendering; parse_config round-trips it.
std::string dump_config(const ExperimentConfig& cfg);

// Returns a copy with one dotted key (e.g. "node_b.eta_store") replaced by a
// YAML scalar or list, revalidated as a whole. "detectors.efficiency" and
// "detectors.dark_prob" set all six detectors.
ExperimentConfig set_config_value(const ExperimentConfig& cfg, const std::string& key,
                                  const std::string& value);

// FNV-1a over the canonical rendering.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace hsq
