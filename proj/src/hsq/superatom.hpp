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

#include <limits>
#include <string>

#include "hsq/qstate.hpp"

namespace hsq {

enum class DephasingModel { kGaussian, kExponential };

struct NodeParams {
  double eta_store = 1.0;     // EIT storage amplitude efficiency (weight)
  double eta_retrieve = 1.0;  // readout of a stored excitation
  double eta_patch = 1.0;     // herald emission of the read-and-patch map
  double dephasing_lifetime = std::numeric_limits<double>::infinity();  // seconds
  double excitation_error = 0.0;  // depolarizing weight per (re-)excitation
  double read_phase = 0.0;        // radians

  void validate(const std::string& where = "node") const;
};

struct Timeline {
  double bin_separation = 425e-9;
  double storage_hold = 670e-9;
  // Extra idle time of node A's excitation before readout (two-node runs).
  double node_a_wait = 0.0;
  // Extra idle time between heralding and retrieval at node B.
  double retrieval_wait = 0.0;

  void validate() const;
};

// Prepares alpha|R1> + beta|R2> on a node that sits in |G>.
JointState excite(const JointState& s, const std::string& node, Complex alpha,
                  Complex beta);

// (|R1> + e^{i phase}|R2>)/sqrt2 mixed with qubit-sector depolarization of
// weight `error`.
JointState excite_superposition(const JointState& s, const std::string& node,
                                double phase, double error);
JointState excite_superposition(const RegisterLabel& node, double phase,
                                double error);

// |R1> -> |G>|t_E>, |R2> -> e^{i phase}|G>|t_L> with weight eta; failures
// leave the atom in |G> and the new photon in vacuum.
JointState readout(const JointState& s, const std::string& node,
                   const std::string& new_photon, double eta, double read_phase);

// |t_E> -> |R1>, |t_L> -> |R2> with weight eta; the photon register is
// consumed. Failures leave the atom in |G>.
JointState eit_store(const JointState& s, const std::string& photon,
                     const std::string& node, double eta);

// Basis-copy map |R1> -> |R1>|t_E>, |R2> -> e^{i phase}|R2>|t_L> with weight
// eta on the emitted herald; a failed emission drops the atom to |G>.
JointState read_and_patch(const JointState& s, const std::string& node,
                          const std::string& herald, double eta, double read_phase);

double coherence_factor(double t, double tau,
                        DephasingModel model = DephasingModel::kGaussian);

JointState motional_dephasing(const JointState& s, const std::string& node, double t,
                              double tau,
                              DephasingModel model = DephasingModel::kGaussian);

}  // namespace hsq
