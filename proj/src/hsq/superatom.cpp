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

#include "hsq/superatom.hpp"

#include <cmath>

namespace hsq {
namespace {

constexpr int kR1 = 0;
constexpr int kR2 = 1;
constexpr int kG = kAbsent;
constexpr int kEarly = 0;
constexpr int kLate = 1;
constexpr int kVac = kAbsent;

// Index of |first, second> in a two-register product basis.
int pair(int first, int second) { return first * kLevels + second; }

void check_fraction(double v, const std::string& name) {
  if (!(v >= 0.0 && v <= 1.0)) fail(name + " must lie in [0,1]");
}

double excited_weight(const JointState& s, const std::string& node) {
  const ComplexMatrix q = embed_qubit(pauli2(Pauli::kI), 0.0);
  return project(s, q, node).probability;
}

void require_atom(const JointState& s, const std::string& node) {
  if (s.label(node).basis != Basis::kAtom) fail("register '" + node + "' is not an atom");
}

}  // namespace

void NodeParams::validate(const std::string& where) const {
  check_fraction(eta_store, where + ".eta_store");
  check_fraction(eta_retrieve, where + ".eta_retrieve");
  check_fraction(eta_patch, where + ".eta_patch");
  check_fraction(excitation_error, where + ".excitation_error");
  if (!(dephasing_lifetime > 0.0)) fail(where + ".dephasing_lifetime must be positive");
  if (!std::isfinite(read_phase)) fail(where + ".read_phase must be finite");
}

void Timeline::validate() const {
  if (!(bin_separation >= 0.0)) fail("timeline.bin_separation must be >= 0");
  if (!(storage_hold >= 0.0)) fail("timeline.storage_hold must be >= 0");
  if (!(node_a_wait >= 0.0)) fail("timeline.node_a_wait must be >= 0");
  if (!(retrieval_wait >= 0.0)) fail("timeline.retrieval_wait must be >= 0");
}

JointState excite(const JointState& s, const std::string& node, Complex alpha,
                  Complex beta) {
  require_atom(s, node);
  if (excited_weight(s, node) > kDefaultTolerances.eps_mat) {
    fail("node '" + node + "' is not in the ground state");
  }
  // Single Kraus operator |psi><G|; trace-preserving on ground-state inputs.
  ComplexMatrix k = ComplexMatrix::Zero(kLevels, kLevels);
  k(kR1, kG) = alpha;
  k(kR2, kG) = beta;
  const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
  if (std::abs(norm - 1.0) > 1e-12) fail("excitation amplitudes must be normalized");
  return apply_channel(s, KrausChannel{{k}, 1, false}, node);
}

JointState excite_superposition(const JointState& s, const std::string& node,
                                double phase, double error) {
  const double h = std::sqrt(0.5);
  JointState out = excite(s, node, h, h * std::exp(kI * phase));
  if (error > 0.0) out = apply_channel(out, depolarizing_channel(error), node);
  return out;
}

JointState excite_superposition(const RegisterLabel& node, double phase, double error) {
  return excite_superposition(JointState::absent(node), node.id, phase, error);
}

JointState readout(const JointState& s, const std::string& node,
                   const std::string& new_photon, double eta, double read_phase) {
  require_atom(s, node);
  check_fraction(eta, "readout efficiency");
  if (s.has(new_photon)) fail("duplicate register label '" + new_photon + "'");
  JointState out = tensor(s, JointState::absent(RegisterLabel::photon(new_photon)));

  const int d = kLevels * kLevels;
  ComplexMatrix ok = ComplexMatrix::Zero(d, d);
  ok(pair(kG, kEarly), pair(kR1, kVac)) = std::sqrt(eta);
  ok(pair(kG, kLate), pair(kR2, kVac)) = std::sqrt(eta) * std::exp(kI * read_phase);
  ok(pair(kG, kVac), pair(kG, kVac)) = 1.0;
  ComplexMatrix lost1 = ComplexMatrix::Zero(d, d);
  lost1(pair(kG, kVac), pair(kR1, kVac)) = std::sqrt(1.0 - eta);
  ComplexMatrix lost2 = ComplexMatrix::Zero(d, d);
  lost2(pair(kG, kVac), pair(kR2, kVac)) = std::sqrt(1.0 - eta);

  const std::string targets[] = {node, new_photon};
  return apply_channel(out, KrausChannel{{ok, lost1, lost2}, 2, false}, targets);
}

JointState eit_store(const JointState& s, const std::string& photon,
                     const std::string& node, double eta) {
  require_atom(s, node);
  check_fraction(eta, "storage efficiency");
  if (s.label(photon).basis != Basis::kTimeBin) {
    fail("register '" + photon + "' is not a time-bin photon");
  }
  if (excited_weight(s, node) > kDefaultTolerances.eps_mat) {
    fail("node '" + node + "' is already excited");
  }
  const int d = kLevels * kLevels;
  ComplexMatrix ok = ComplexMatrix::Zero(d, d);
  ok(pair(kVac, kR1), pair(kEarly, kG)) = std::sqrt(eta);
  ok(pair(kVac, kR2), pair(kLate, kG)) = std::sqrt(eta);
  ok(pair(kVac, kG), pair(kVac, kG)) = 1.0;
  ComplexMatrix lost1 = ComplexMatrix::Zero(d, d);
  lost1(pair(kVac, kG), pair(kEarly, kG)) = std::sqrt(1.0 - eta);
  ComplexMatrix lost2 = ComplexMatrix::Zero(d, d);
  lost2(pair(kVac, kG), pair(kLate, kG)) = std::sqrt(1.0 - eta);

  const std::string targets[] = {photon, node};
  const JointState mapped =
      apply_channel(s, KrausChannel{{ok, lost1, lost2}, 2, false}, targets);
  return partial_trace(mapped, photon);
}

JointState read_and_patch(const JointState& s, const std::string& node,
                          const std::string& herald, double eta, double read_phase) {
  require_atom(s, node);
  check_fraction(eta, "read-and-patch efficiency");
  if (s.has(herald)) fail("duplicate register label '" + herald + "'");
  JointState out = tensor(s, JointState::absent(RegisterLabel::photon(herald)));

  const int d = kLevels * kLevels;
  ComplexMatrix ok = ComplexMatrix::Zero(d, d);
  ok(pair(kR1, kEarly), pair(kR1, kVac)) = std::sqrt(eta);
  ok(pair(kR2, kLate), pair(kR2, kVac)) = std::sqrt(eta) * std::exp(kI * read_phase);
  ok(pair(kG, kVac), pair(kG, kVac)) = 1.0;
  ComplexMatrix lost1 = ComplexMatrix::Zero(d, d);
  lost1(pair(kG, kVac), pair(kR1, kVac)) = std::sqrt(1.0 - eta);
  ComplexMatrix lost2 = ComplexMatrix::Zero(d, d);
  lost2(pair(kG, kVac), pair(kR2, kVac)) = std::sqrt(1.0 - eta);

  const std::string targets[] = {node, herald};
  return apply_channel(out, KrausChannel{{ok, lost1, lost2}, 2, false}, targets);
}

double coherence_factor(double t, double tau, DephasingModel model) {
  if (!(t >= 0.0)) fail("dephasing time must be >= 0");
  if (!(tau > 0.0)) fail("dephasing lifetime must be positive");
  if (std::isinf(tau)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = t / tau;
  return model == DephasingModel::kGaussian ? std::exp(-x * x) : std::exp(-x);
}

JointState motional_dephasing(const JointState& s, const std::string& node, double t,
                              double tau, DephasingModel model) {
  const double gamma = coherence_factor(t, tau, model);
  if (gamma == 1.0) return s;
  return apply_channel(s, dephasing_channel(gamma), node);
}

}  // namespace hsq
