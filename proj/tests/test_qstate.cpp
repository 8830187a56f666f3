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

#include <numbers>

#include "hsq/qstate.hpp"
#include "support.hpp"

using namespace hsq;
using hsq::test::level;
using hsq::test::qubit;

namespace {

const RegisterLabel kAtom = RegisterLabel::atom_a("A");
const RegisterLabel kPhoton = RegisterLabel::photon("p");

// (|R1>|t_E> + e^{i theta0}|R2>|t_L>)/sqrt2 with the atom first.
JointState atom_photon_pair(double theta0) {
  ComplexVector psi = ComplexVector::Zero(9);
  psi(0 * 3 + 0) = 1.0 / std::sqrt(2.0);
  psi(1 * 3 + 1) = std::polar(1.0, theta0) / std::sqrt(2.0);
  return JointState({kAtom, kPhoton}, psi * psi.adjoint());
}

}  // namespace

TEST_CASE("tensor of pure product states") {
  const JointState s = tensor(JointState::pure(kAtom, level(0)), JointState::pure(kPhoton, level(0)));
  CHECK(s.size() == 2);
  CHECK(s.trace() == doctest::Approx(1.0));
  CHECK(std::abs(s.rho()(0, 0) - 1.0) < 1e-15);
  CHECK(s.rho().cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("tensor multiplies traces") {
  const JointState a = JointState::pure(kAtom, level(0)).scaled(0.5);
  const JointState b = JointState::pure(kPhoton, qubit(1, 1).normalized()).scaled(0.4);
  CHECK(tensor(a, b).trace() == doctest::Approx(0.20).epsilon(1e-14));
}

TEST_CASE("tensor of maximally mixed qubit sectors") {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = m(1, 1) = 0.5;
  const double wa = 0.8, wb = 0.6;
  const JointState s = tensor(JointState({kAtom}, wa * m), JointState({kPhoton}, wb * m));
  // Direct Kronecker oracle: qubit-sector composite indices 0, 1, 3, 4.
  for (int i : {0, 1, 3, 4}) CHECK(s.rho()(i, i).real() == doctest::Approx(0.25 * wa * wb));
  for (int i : {2, 5, 6, 7, 8}) CHECK(std::abs(s.rho()(i, i)) < 1e-15);
}

TEST_CASE("tensor rejects duplicate labels") {
  const JointState a = JointState::pure(kPhoton, level(0));
  CHECK_THROWS_AS(tensor(a, a), Error);
}

TEST_CASE("identity channel leaves the state unchanged") {
  const JointState s = atom_photon_pair(0.4);
  CHECK(approx_equal(apply_channel(s, identity_channel(), "p").rho(), s.rho()));
}

TEST_CASE("full loss moves all weight to vacuum") {
  for (auto psi : {level(0), level(1), qubit(0.6, Complex(0, 0.8))}) {
    const JointState out = apply_channel(JointState::pure(kPhoton, psi), loss_channel(0.0), "p");
    CHECK(out.rho()(2, 2).real() == doctest::Approx(1.0));
    CHECK(out.rho().block(0, 0, 2, 2).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("single-operator full-loss Kraus map is not trace non-increasing") {
  // K = |vac><t_E| + |vac><t_L| + |vac><vac| has K^dagger K with unit
  // off-diagonals; full loss needs one operator per level.
  ComplexMatrix k = ComplexMatrix::Zero(3, 3);
  k(2, 0) = k(2, 1) = k(2, 2) = 1.0;
  KrausChannel ch{{k}, 1, false};
  CHECK_FALSE(ch.is_valid());
  CHECK_THROWS_AS(ch.validate(), Error);
}

TEST_CASE("amplitude pass with eta 0.164 on |t_E>") {
  const JointState out = apply_channel(JointState::pure(kPhoton, level(0)), loss_channel(0.164), "p");
  // Hand Kraus algebra: K0 = diag(sqrt(eta), sqrt(eta), 1), K1 = sqrt(1-eta)|vac><t_E|.
  CHECK(out.rho()(0, 0).real() == doctest::Approx(0.164).epsilon(1e-14));
  CHECK(out.rho()(2, 2).real() == doctest::Approx(0.836).epsilon(1e-14));
  CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("apply_channel errors") {
  const JointState s = atom_photon_pair(0.0);
  CHECK_THROWS_AS(apply_channel(s, identity_channel(), "nope"), Error);
  const std::string both[] = {"A", "p"};
  CHECK_THROWS_AS(apply_channel(s, identity_channel(), both), Error);
}

TEST_CASE("projecting the photon of the atom-photon pair onto |+>") {
  const double theta0 = 0.7;
  const ComplexVector plus = qubit(1, 1) / std::sqrt(2.0);
  const Projection p = project(atom_photon_pair(theta0), plus * plus.adjoint(), "p");
  CHECK(p.probability == doctest::Approx(0.5).epsilon(1e-14));
  const JointState atom = partial_trace(p.state, "p").normalized();
  const ComplexVector expected = qubit(1, std::polar(1.0, theta0)) / std::sqrt(2.0);
  CHECK(state_fidelity(atom, expected) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projecting |t_E> onto vacuum and onto itself") {
  const JointState s = JointState::pure(kPhoton, level(0)).scaled(0.7);
  CHECK(project(s, level(2) * level(2).adjoint(), "p").probability == doctest::Approx(0.0));
  CHECK(project(s, level(0) * level(0).adjoint(), "p").probability == doctest::Approx(0.7));
}

TEST_CASE("project rejects non-idempotent operators") {
  const JointState s = JointState::pure(kPhoton, level(0));
  CHECK_THROWS_AS(project(s, 0.5 * ComplexMatrix::Identity(3, 3), "p"), Error);
}

TEST_CASE("partial trace of the atom-photon pair") {
  const JointState atom = partial_trace(atom_photon_pair(1.1), "p");
  CHECK(atom.rho()(0, 0).real() == doctest::Approx(0.5));
  CHECK(atom.rho()(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(atom.rho()(0, 1)) < 1e-15);
}

TEST_CASE("partial trace of a product state scales by the partner trace") {
  const JointState a = JointState::pure(kAtom, qubit(0.6, 0.8)).scaled(0.9);
  const JointState b = JointState::pure(kPhoton, qubit(1, 0)).scaled(0.3);
  CHECK(approx_equal(partial_trace(tensor(a, b), "p").rho(), 0.3 * a.rho()));
}

TEST_CASE("partial trace over a vacuum-only register") {
  const JointState a = JointState::pure(kAtom, qubit(0.6, Complex(0, 0.8)));
  const JointState s = tensor(a, JointState::absent(kPhoton));
  CHECK(approx_equal(partial_trace(s, "p").rho(), a.rho()));
  CHECK_THROWS_AS(partial_trace(s, "missing"), Error);
}

TEST_CASE("Pauli correlations of Phi+") {
  ComplexVector psi = ComplexVector::Zero(9);
  psi(0) = psi(4) = 1.0 / std::sqrt(2.0);
  const JointState s({RegisterLabel::photon("a"), RegisterLabel::photon("b")}, psi * psi.adjoint());
  CHECK(pauli_expectation(s, {{"a", Pauli::kX}, {"b", Pauli::kX}}) == doctest::Approx(1.0));
  CHECK(pauli_expectation(s, {{"a", Pauli::kY}, {"b", Pauli::kY}}) == doctest::Approx(-1.0));
  CHECK(pauli_expectation(s, {{"a", Pauli::kZ}, {"b", Pauli::kZ}}) == doctest::Approx(1.0));
}

TEST_CASE("Pauli expectations of the maximally mixed qubit and of |t_E>") {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = m(1, 1) = 0.5;
  const JointState mixed({kPhoton}, m);
  for (Pauli p : {Pauli::kX, Pauli::kY, Pauli::kZ}) {
    CHECK(std::abs(pauli_expectation(mixed, {{"p", p}})) < 1e-15);
  }
  CHECK(pauli_expectation(JointState::pure(kPhoton, level(0)), {{"p", Pauli::kZ}}) == 1.0);
}

TEST_CASE("Pauli expectation requires explicit renormalization") {
  const JointState branch = JointState::pure(kPhoton, level(0)).scaled(0.3);
  CHECK_THROWS_AS(pauli_expectation(branch, {{"p", Pauli::kZ}}), Error);
  CHECK(pauli_expectation(branch, {{"p", Pauli::kZ}}, Renormalize::kQubitSector) ==
        doctest::Approx(1.0));
  // Unit trace with vacuum weight: the absence level contributes zero.
  const JointState lossy = apply_channel(JointState::pure(kPhoton, level(0)), loss_channel(0.3), "p");
  CHECK(pauli_expectation(lossy, {{"p", Pauli::kZ}}) == doctest::Approx(0.3));
  CHECK(pauli_expectation(lossy, {{"p", Pauli::kZ}}, Renormalize::kQubitSector) ==
        doctest::Approx(1.0));
}

TEST_CASE("state fidelity examples") {
  const ComplexVector d = qubit(1, 1) / std::sqrt(2.0);
  CHECK(state_fidelity(JointState::pure(kPhoton, d), d) == doctest::Approx(1.0));
  ComplexMatrix mixed = ComplexMatrix::Zero(3, 3);
  mixed(0, 0) = mixed(1, 1) = 0.5;
  CHECK(state_fidelity(JointState({kPhoton}, mixed), qubit(0.6, Complex(0, 0.8))) ==
        doctest::Approx(0.5));
  const ComplexVector perp = qubit(1, -1) / std::sqrt(2.0);
  const ComplexMatrix rho = 0.899 * d * d.adjoint() + 0.101 * perp * perp.adjoint();
  CHECK(state_fidelity(JointState({kPhoton}, rho), d) == doctest::Approx(0.899).epsilon(1e-14));
  CHECK_THROWS_AS(state_fidelity(JointState({kPhoton}, 0.5 * rho), d), Error);
}

TEST_CASE("trace norm examples") {
  CHECK(trace_norm(ComplexMatrix::Zero(4, 4)) == 0.0);
  ComplexMatrix diag = ComplexMatrix::Zero(4, 4);
  diag.diagonal() << 0.75, -0.25, -0.25, -0.25;
  CHECK(trace_norm(diag) == doctest::Approx(1.5).epsilon(1e-14));
  std::mt19937_64 rng(3);
  CHECK(trace_norm(test::random_unitary(rng, 4)) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(trace_norm(ComplexMatrix::Zero(2, 3)), Error);
}

TEST_CASE("depolarizing and dephasing channels") {
  const ComplexVector d = qubit(1, 1) / std::sqrt(2.0);
  const JointState s = JointState::pure(kPhoton, d);
  const JointState dep = apply_channel(s, depolarizing_channel(0.3), "p");
  // (1-p) rho + p I/2 on the qubit sector.
  CHECK(dep.rho()(0, 1).real() == doctest::Approx(0.7 * 0.5));
  CHECK(dep.rho()(0, 0).real() == doctest::Approx(0.5));
  const JointState deph = apply_channel(s, dephasing_channel(0.795), "p");
  CHECK(deph.rho()(0, 1).real() == doctest::Approx(0.795 * 0.5));
  CHECK(deph.rho()(1, 1).real() == doctest::Approx(0.5));
}

TEST_CASE("JointState validity checks") {
  CHECK(atom_photon_pair(0.2).is_valid());
  ComplexMatrix bad = ComplexMatrix::Zero(3, 3);
  bad(0, 0) = 1.0;
  bad(1, 1) = -0.1;
  CHECK_FALSE(JointState({kPhoton}, bad).is_valid());
  CHECK_THROWS_AS(JointState({kPhoton, kPhoton}, ComplexMatrix::Identity(9, 9) / 9.0), Error);
}
