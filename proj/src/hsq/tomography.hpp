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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hsq/photonics.hpp"
#include "hsq/qstate.hpp"

namespace hsq {

struct SettingCounts {
  double n_plus = 0.0;
  double n_minus = 0.0;
  // Heralded trials behind this setting; only needed for trace-non-increasing
  // process fits (0 when unknown).
  double heralds = 0.0;

  double total() const { return n_plus + n_minus; }
};

struct TomoDataset {
  std::map<MeasurementSetting, SettingCounts> counts;
  std::string input;  // input state id, informational
  double trials = 0.0;

  void validate() const;
};

// CSV with header `setting,outcome,count`; setting in {Z,X,Y} (or I/Ry/Rx),
// outcome in {+,-}.
TomoDataset parse_tomo_csv(std::istream& in);
TomoDataset read_tomo_csv(const std::string& path);
void write_tomo_csv(std::ostream& out, const TomoDataset& d);

// Expected counts of a qubit state measured `n` times per setting.
TomoDataset ideal_dataset(const ComplexMatrix& rho2, double n = 1.0);

struct SolverSettings {
  double relative_tolerance = 1e-13;
  int max_iterations = 5000;
};

struct StateEstimate {
  ComplexMatrix rho;  // 2x2, unit trace
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> history;  // log-likelihood after every accepted step
};

// Maximum-likelihood qubit state over rho = T^dagger T / Tr(T^dagger T),
// started from the maximally mixed state.
StateEstimate reconstruct_state_ml(const TomoDataset& d, const SolverSettings& s = {});

// Same estimate embedded as a polarization photon register.
JointState reconstruct_state(const TomoDataset& d, const std::string& photon = "retrieved",
                             const SolverSettings& s = {});

// Bloch-vector linear inversion; not constrained to physical states.
ComplexMatrix linear_inversion(const TomoDataset& d);

// Qubit process in the Pauli operator basis {I, X, Y, Z}:
// rho_out = sum_mn chi(m, n) sigma_m rho sigma_n.
class ProcessMatrix {
 public:
  ProcessMatrix() : chi_(ComplexMatrix::Zero(4, 4)) {}
  explicit ProcessMatrix(ComplexMatrix chi);

  static ProcessMatrix identity();
  static ProcessMatrix from_choi(const ComplexMatrix& choi);

  const ComplexMatrix& chi() const { return chi_; }
  ComplexMatrix choi() const;
  ComplexMatrix apply(const ComplexMatrix& rho2) const;
  bool is_valid(double eps = 1e-9) const;

 private:
  ComplexMatrix chi_;
};

enum class ProcessConstraint { kTracePreserving, kTraceNonIncreasing };

struct ProcessEstimate {
  ProcessMatrix process;  // unit trace; conditional on success for TNI fits
  ComplexMatrix choi;
  double success_trace = 1.0;  // Tr(chi) before renormalization
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

// ML process estimate from heralded counts of the listed input states.
ProcessEstimate reconstruct_process_ml(std::span<const ComplexVector> inputs,
                                       std::span<const TomoDataset> outputs,
                                       ProcessConstraint constraint =
                                           ProcessConstraint::kTracePreserving,
                                       const SolverSettings& s = {});

// ML process estimate treating the outcome probabilities of already
// reconstructed output states as data.
ProcessMatrix reconstruct_process(std::span<const ComplexVector> inputs,
                                  std::span<const ComplexMatrix> outputs,
                                  const SolverSettings& s = {});

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi0);

double entanglement_fidelity_vis(double v0, double v1);
double entanglement_fidelity_pauli(double xx, double yy, double zz);

enum class FidelityMetric { kProcess, kEntanglement };

inline constexpr double kProcessClassicalLimit = 0.69;
inline constexpr double kEntanglementClassicalLimit = 0.50;

struct ClassicalVerdict {
  bool pass = false;
  double threshold = 0.0;
  double margin = 0.0;  // value - threshold
};

ClassicalVerdict classical_limit_check(FidelityMetric metric, double value);

// Writes a qubit density or process matrix as `row,col,real,imag` lines.
void write_matrix_csv(std::ostream& out, const ComplexMatrix& m);

}  // namespace hsq
