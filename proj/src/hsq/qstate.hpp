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

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsq/error.hpp"

namespace hsq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Every register is a qubit plus one "absence" level (atomic ground or
// photonic vacuum) at index 2.
inline constexpr int kLevels = 3;
inline constexpr int kAbsent = 2;

struct Tolerances {
  double eps_mat = 1e-10;
  double eps_psd = 1e-9;
};

inline constexpr Tolerances kDefaultTolerances{};

enum class RegisterKind { kAtomA, kAtomB, kPhoton };

// Basis semantics of the two qubit levels.
//   kAtom:         (|R1>, |R2>, |G>)
//   kTimeBin:      (|t_E>, |t_L>, |vac>)
//   kPolarization: (|V>, |H>, |vac>)
enum class Basis { kAtom, kTimeBin, kPolarization };

struct RegisterLabel {
  RegisterKind kind = RegisterKind::kPhoton;
  std::string id;
  Basis basis = Basis::kTimeBin;

  static RegisterLabel atom_a(std::string id = "A") {
    return {RegisterKind::kAtomA, std::move(id), Basis::kAtom};
  }
  static RegisterLabel atom_b(std::string id = "B") {
    return {RegisterKind::kAtomB, std::move(id), Basis::kAtom};
  }
  static RegisterLabel photon(std::string id, Basis basis = Basis::kTimeBin) {
    return {RegisterKind::kPhoton, std::move(id), basis};
  }

  friend bool operator==(const RegisterLabel&, const RegisterLabel&) = default;
};

// Unnormalized density matrix over an ordered list of registers. The first
// register is the most significant digit of the composite index. Tr(rho) is
// the probability of the branch the state describes.
class JointState {
 public:
  JointState() = default;
  JointState(std::vector<RegisterLabel> registers, ComplexMatrix rho);

  // |psi><psi| on a single register; psi need not be normalized.
  static JointState pure(RegisterLabel reg, const ComplexVector& psi);
  // |absent><absent| on a single register.
  static JointState absent(RegisterLabel reg);

  const std::vector<RegisterLabel>& registers() const { return registers_; }
  const ComplexMatrix& rho() const { return rho_; }
  int size() const { return static_cast<int>(registers_.size()); }
  int dim() const { return static_cast<int>(rho_.rows()); }
  double trace() const { return rho_.trace().real(); }

  bool has(const std::string& id) const;
  int position(const std::string& id) const;  // throws on unknown id
  const RegisterLabel& label(const std::string& id) const;

  JointState with_basis(const std::string& id, Basis basis) const;
  JointState scaled(double factor) const;
  // Rescaled to unit trace; throws when the trace vanishes.
  JointState normalized() const;

  // Hermiticity within eps_mat, eigenvalues >= -eps_psd, trace in
  // [-eps_mat, 1 + eps_mat].
  bool is_valid(const Tolerances& tol = kDefaultTolerances) const;

 private:
  std::vector<RegisterLabel> registers_;
  ComplexMatrix rho_;
};

struct KrausChannel {
  std::vector<ComplexMatrix> operators;
  int arity = 1;
  bool trace_preserving = false;

  int dim() const;
  // Sum_k K_k^dagger K_k <= I (and == I when trace_preserving).
  bool is_valid(const Tolerances& tol = kDefaultTolerances) const;
  void validate(const Tolerances& tol = kDefaultTolerances) const;
};

enum class Pauli { kI, kX, kY, kZ };

struct Projection {
  double probability = 0.0;
  JointState state;
};

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                  double eps = kDefaultTolerances.eps_mat);

// Pauli operators on the qubit sector; `absent_value` sits on level 2.
ComplexMatrix pauli3(Pauli p, Complex absent_value = 0.0);
ComplexMatrix pauli2(Pauli p);

// Lifts a 2x2 qubit operator to 3x3 with `absent_value` on the absence level.
ComplexMatrix embed_qubit(const ComplexMatrix& m2, Complex absent_value = 1.0);
// Lifts an operator acting on registers at `targets` to the full space.
ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const int> targets,
                             int num_registers);

JointState tensor(const JointState& a, const JointState& b);

JointState apply_channel(const JointState& s, const KrausChannel& ch,
                         std::span<const std::string> targets);
JointState apply_channel(const JointState& s, const KrausChannel& ch,
                         const std::string& target);
JointState apply_unitary(const JointState& s, const ComplexMatrix& u,
                         const std::string& target);

Projection project(const JointState& s, const ComplexMatrix& projector,
                   const std::string& target);

JointState partial_trace(const JointState& s, const std::string& discard);

// Renormalization over the non-absent sector of the measured registers is
// opt-in; without it the state must already have unit trace.
enum class Renormalize { kNo, kQubitSector };

double pauli_expectation(const JointState& s,
                         const std::map<std::string, Pauli>& ops,
                         Renormalize renormalize = Renormalize::kNo,
                         const Tolerances& tol = kDefaultTolerances);

// Projects every listed register onto its qubit sector.
JointState restrict_to_qubits(const JointState& s,
                              std::span<const std::string> ids);

// Tr(rho |psi><psi|) for normalized rho and unit-norm psi.
double state_fidelity(const JointState& rho, const ComplexVector& psi,
                      const Tolerances& tol = kDefaultTolerances);

double trace_norm(const ComplexMatrix& m);

// Standard channels on a single register.
KrausChannel identity_channel();
// Amplitude transmission with efficiency eta: the qubit sector survives with
// weight eta, the remainder lands incoherently on the absence level.
KrausChannel loss_channel(double eta);
// Depolarizes the qubit sector with weight p; absence level untouched.
KrausChannel depolarizing_channel(double p);
// Multiplies the qubit-sector coherence by gamma.
KrausChannel dephasing_channel(double gamma);

}  // namespace hsq
