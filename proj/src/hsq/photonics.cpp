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

#include "hsq/photonics.hpp"

#include <cmath>
#include <numbers>

namespace hsq {

std::string_view to_string(InputStateId id) {
  switch (id) {
    case InputStateId::kE: return "E";
    case InputStateId::kL: return "L";
    case InputStateId::kD: return "D";
    case InputStateId::kA: return "A";
    case InputStateId::kR: return "R";
    case InputStateId::kLc: return "Lc";
  }
  return "?";
}

InputStateId parse_input_state(std::string_view name) {
  for (auto id : kAllInputStates) {
    if (to_string(id) == name) return id;
  }
  fail("unknown input state '" + std::string(name) + "' (expected E, L, D, A, R or Lc)");
}

std::string_view basis_label(MeasurementSetting m) {
  switch (m) {
    case MeasurementSetting::kIdentity: return "Z";
    case MeasurementSetting::kRyMinusHalfPi: return "X";
    case MeasurementSetting::kRxHalfPi: return "Y";
  }
  return "?";
}

MeasurementSetting parse_setting(std::string_view name) {
  if (name == "Z" || name == "I") return MeasurementSetting::kIdentity;
  if (name == "X" || name == "Ry") return MeasurementSetting::kRyMinusHalfPi;
  if (name == "Y" || name == "Rx") return MeasurementSetting::kRxHalfPi;
  fail("unknown measurement setting '" + std::string(name) + "'");
}

Pauli observable(MeasurementSetting m) {
  switch (m) {
    case MeasurementSetting::kIdentity: return Pauli::kZ;
    case MeasurementSetting::kRyMinusHalfPi: return Pauli::kX;
    case MeasurementSetting::kRxHalfPi: return Pauli::kY;
  }
  return Pauli::kI;
}

ComplexVector input_amplitudes(InputStateId id) {
  const double h = std::numbers::sqrt2 / 2.0;
  ComplexVector v(2);
  switch (id) {
    case InputStateId::kE: v << 1.0, 0.0; break;
    case InputStateId::kL: v << 0.0, 1.0; break;
    case InputStateId::kD: v << h, h; break;
    case InputStateId::kA: v << h, -h; break;
    case InputStateId::kR: v << h, kI * h; break;
    case InputStateId::kLc: v << h, -kI * h; break;
  }
  return v;
}

JointState make_input_state(InputStateId id, const std::string& photon) {
  return JointState::pure(RegisterLabel::photon(photon, Basis::kTimeBin),
                          input_amplitudes(id));
}

JointState timebin_to_polarization(const JointState& s, const std::string& photon,
                                   double theta0) {
  if (s.label(photon).basis != Basis::kTimeBin) {
    fail("register '" + photon + "' is not a time-bin photon");
  }
  ComplexMatrix u = ComplexMatrix::Identity(kLevels, kLevels);
  u(1, 1) = std::exp(kI * theta0);
  return apply_unitary(s, u, photon).with_basis(photon, Basis::kPolarization);
}

ComplexMatrix rotation_x(double angle) {
  const ComplexMatrix m = std::cos(angle / 2) * pauli2(Pauli::kI) -
                          kI * std::sin(angle / 2) * pauli2(Pauli::kX);
  return embed_qubit(m, 1.0);
}

ComplexMatrix rotation_y(double angle) {
  const ComplexMatrix m = std::cos(angle / 2) * pauli2(Pauli::kI) -
                          kI * std::sin(angle / 2) * pauli2(Pauli::kY);
  return embed_qubit(m, 1.0);
}

ComplexMatrix setting_unitary(MeasurementSetting m) {
  switch (m) {
    case MeasurementSetting::kIdentity: return ComplexMatrix::Identity(kLevels, kLevels);
    case MeasurementSetting::kRyMinusHalfPi: return rotation_y(-std::numbers::pi / 2);
    case MeasurementSetting::kRxHalfPi: return rotation_x(std::numbers::pi / 2);
  }
  return ComplexMatrix::Identity(kLevels, kLevels);
}

BasisProjectors basis_projectors(MeasurementSetting m) {
  // The analyzer projects onto |V> (level 0) and |H> (level 1) after the
  // rotation U, so the effective projectors are U^dagger |k><k| U.
  const ComplexMatrix u = setting_unitary(m);
  BasisProjectors out;
  for (int k = 0; k < kLevels; ++k) {
    ComplexMatrix e = ComplexMatrix::Zero(kLevels, kLevels);
    e(k, k) = 1.0;
    ComplexMatrix p = u.adjoint() * e * u;
    p = 0.5 * (p + p.adjoint());
    if (k == 0) out.plus = p;
    if (k == 1) out.minus = p;
    if (k == 2) out.vacuum = p;
  }
  return out;
}

ComplexVector setting_eigenvector(MeasurementSetting m, bool plus) {
  const ComplexMatrix u = setting_unitary(m);
  const ComplexVector v = u.adjoint().col(plus ? 0 : 1);
  return v.head(2);
}

}  // namespace hsq
