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
#include <string>
#include <string_view>

#include "hsq/qstate.hpp"

namespace hsq {

// The six benchmark inputs. kLc is the (|t_E> - i|t_L>)/sqrt2 state; the
// suffix keeps it apart from the late time bin.
enum class InputStateId { kE, kL, kD, kA, kR, kLc };

inline constexpr std::array<InputStateId, 6> kAllInputStates = {
    InputStateId::kE, InputStateId::kL, InputStateId::kD,
    InputStateId::kA, InputStateId::kR, InputStateId::kLc};

// Informationally complete subset used for process reconstruction.
inline constexpr std::array<InputStateId, 4> kProcessInputStates = {
    InputStateId::kE, InputStateId::kL, InputStateId::kD, InputStateId::kR};

// Rotation applied before the {V,H} analyzer. The measured observable is Z,
// X and Y respectively.
enum class MeasurementSetting { kIdentity, kRyMinusHalfPi, kRxHalfPi };

inline constexpr std::array<MeasurementSetting, 3> kAllSettings = {
    MeasurementSetting::kIdentity, MeasurementSetting::kRyMinusHalfPi,
    MeasurementSetting::kRxHalfPi};

std::string_view to_string(InputStateId id);
InputStateId parse_input_state(std::string_view name);

// "Z", "X" or "Y".
std::string_view basis_label(MeasurementSetting m);
MeasurementSetting parse_setting(std::string_view name);
Pauli observable(MeasurementSetting m);

// Qubit amplitudes (early, late).
ComplexVector input_amplitudes(InputStateId id);

JointState make_input_state(InputStateId id, const std::string& photon = "input");

// Interferometer: |t_E> -> |V>, |t_L> -> e^{i theta0}|H>, vacuum untouched.
JointState timebin_to_polarization(const JointState& s, const std::string& photon,
                                   double theta0);

ComplexMatrix rotation_x(double angle);  // exp(-i angle X / 2) on the qubit sector
ComplexMatrix rotation_y(double angle);  // exp(-i angle Y / 2) on the qubit sector
ComplexMatrix setting_unitary(MeasurementSetting m);

struct BasisProjectors {
  ComplexMatrix plus;
  ComplexMatrix minus;
  ComplexMatrix vacuum;
};

// plus/minus project onto the +1/-1 eigenstates of the setting's observable.
BasisProjectors basis_projectors(MeasurementSetting m);

// Qubit-sector eigenvector of the setting's observable with eigenvalue +1
// (plus == true) or -1.
ComplexVector setting_eigenvector(MeasurementSetting m, bool plus);

}  // namespace hsq
