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

#include "hsq/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hsq {
namespace {

int ipow3(int n) {
  int r = 1;
  for (int i = 0; i < n; ++i) r *= kLevels;
  return r;
}

int digit(int index, int position, int num_registers) {
  return (index / ipow3(num_registers - 1 - position)) % kLevels;
}

int set_digit(int index, int position, int num_registers, int value) {
  const int stride = ipow3(num_registers - 1 - position);
  const int old = (index / stride) % kLevels;
  return index + (value - old) * stride;
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

std::vector<int> positions_of(const JointState& s,
                              std::span<const std::string> ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(s.position(id));
  std::set<int> unique(out.begin(), out.end());
  if (unique.size() != out.size()) fail("channel targets must be distinct registers");
  return out;
}

}  // namespace

JointState::JointState(std::vector<RegisterLabel> registers, ComplexMatrix rho)
    : registers_(std::move(registers)), rho_(std::move(rho)) {
  std::set<std::string> ids;
  for (const auto& r : registers_) {
    if (!ids.insert(r.id).second) fail("duplicate register label '" + r.id + "'");
  }
  const int expected = ipow3(static_cast<int>(registers_.size()));
  if (rho_.rows() != expected || rho_.cols() != expected) {
    fail("density matrix dimension does not match register count");
  }
}

JointState JointState::pure(RegisterLabel reg, const ComplexVector& psi) {
  ComplexVector v = ComplexVector::Zero(kLevels);
  if (psi.size() == 2) {
    v.head(2) = psi;
  } else if (psi.size() == kLevels) {
    v = psi;
  } else {
    fail("pure state amplitudes must have length 2 or 3");
  }
  return JointState({std::move(reg)}, v * v.adjoint());
}

JointState JointState::absent(RegisterLabel reg) {
  ComplexVector v = ComplexVector::Zero(kLevels);
  v(kAbsent) = 1.0;
  return pure(std::move(reg), v);
}

bool JointState::has(const std::string& id) const {
  return std::any_of(registers_.begin(), registers_.end(),
                     [&](const RegisterLabel& r) { return r.id == id; });
}

int JointState::position(const std::string& id) const {
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    if (registers_[i].id == id) return static_cast<int>(i);
  }
  fail("unknown register '" + id + "'");
}

const RegisterLabel& JointState::label(const std::string& id) const {
  return registers_[position(id)];
}

JointState JointState::with_basis(const std::string& id, Basis basis) const {
  auto regs = registers_;
  regs[position(id)].basis = basis;
  return JointState(std::move(regs), rho_);
}

JointState JointState::scaled(double factor) const {
  return JointState(registers_, rho_ * factor);
}

JointState JointState::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) fail("cannot normalize a state with vanishing trace");
  return scaled(1.0 / t);
}

bool JointState::is_valid(const Tolerances& tol) const {
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol.eps_mat) return false;
  const double t = trace();
  if (t < -tol.eps_mat || t > 1.0 + tol.eps_mat) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(rho_),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol.eps_psd;
}

int KrausChannel::dim() const {
  return arity == 1 ? kLevels : kLevels * kLevels;
}

bool KrausChannel::is_valid(const Tolerances& tol) const {
  if (arity != 1 && arity != 2) return false;
  if (operators.empty()) return false;
  const int d = dim();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const auto& k : operators) {
    if (k.rows() != d || k.cols() != d) return false;
    sum += k.adjoint() * k;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(sum),
                                                  Eigen::EigenvaluesOnly);
  if (es.eigenvalues().maxCoeff() > 1.0 + tol.eps_psd) return false;
  if (trace_preserving && !approx_equal(sum, ComplexMatrix::Identity(d, d), tol.eps_mat)) {
    return false;
  }
  return true;
}

void KrausChannel::validate(const Tolerances& tol) const {
  if (!is_valid(tol)) fail("Kraus channel is not trace-non-increasing or has wrong shape");
}

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double eps) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  return (a - b).cwiseAbs().maxCoeff() <= eps;
}

ComplexMatrix pauli2(Pauli p) {
  ComplexMatrix m(2, 2);
  switch (p) {
    case Pauli::kI: m << 1, 0, 0, 1; break;
    case Pauli::kX: m << 0, 1, 1, 0; break;
    case Pauli::kY: m << 0, -kI, kI, 0; break;
    case Pauli::kZ: m << 1, 0, 0, -1; break;
  }
  return m;
}

ComplexMatrix embed_qubit(const ComplexMatrix& m2, Complex absent_value) {
  ComplexMatrix m = ComplexMatrix::Zero(kLevels, kLevels);
  m.topLeftCorner(2, 2) = m2;
  m(kAbsent, kAbsent) = absent_value;
  return m;
}

ComplexMatrix pauli3(Pauli p, Complex absent_value) {
  return embed_qubit(pauli2(p), absent_value);
}

ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const int> targets,
                             int num_registers) {
  const int k = static_cast<int>(targets.size());
  const int sub = ipow3(k);
  if (op.rows() != sub || op.cols() != sub) fail("operator dimension does not match arity");
  const int full = ipow3(num_registers);
  ComplexMatrix out = ComplexMatrix::Zero(full, full);
  for (int row = 0; row < full; ++row) {
    int r_sub = 0;
    for (int t = 0; t < k; ++t) r_sub = r_sub * kLevels + digit(row, targets[t], num_registers);
    for (int c_sub = 0; c_sub < sub; ++c_sub) {
      const Complex v = op(r_sub, c_sub);
      if (v == Complex(0.0)) continue;
      int col = row;
      int rem = c_sub;
      for (int t = k - 1; t >= 0; --t) {
        col = set_digit(col, targets[t], num_registers, rem % kLevels);
        rem /= kLevels;
      }
      out(row, col) = v;
    }
  }
  return out;
}

JointState tensor(const JointState& a, const JointState& b) {
  std::vector<RegisterLabel> regs = a.registers();
  for (const auto& r : b.registers()) {
    if (a.has(r.id)) fail("duplicate register label '" + r.id + "'");
    regs.push_back(r);
  }
  const auto& ra = a.rho();
  const auto& rb = b.rho();
  ComplexMatrix out(ra.rows() * rb.rows(), ra.cols() * rb.cols());
  for (Eigen::Index i = 0; i < ra.rows(); ++i) {
    for (Eigen::Index j = 0; j < ra.cols(); ++j) {
      out.block(i * rb.rows(), j * rb.cols(), rb.rows(), rb.cols()) = ra(i, j) * rb;
    }
  }
  return JointState(std::move(regs), std::move(out));
}

JointState apply_channel(const JointState& s, const KrausChannel& ch,
                         std::span<const std::string> targets) {
  if (static_cast<int>(targets.size()) != ch.arity) {
    fail("channel arity does not match the number of target registers");
  }
  const auto pos = positions_of(s, targets);
  ComplexMatrix out = ComplexMatrix::Zero(s.dim(), s.dim());
  for (const auto& k : ch.operators) {
    const ComplexMatrix full = embed_operator(k, pos, s.size());
    out.noalias() += full * s.rho() * full.adjoint();
  }
  return JointState(s.registers(), hermitize(out));
}

JointState apply_channel(const JointState& s, const KrausChannel& ch,
                         const std::string& target) {
  const std::string targets[] = {target};
  return apply_channel(s, ch, targets);
}

JointState apply_unitary(const JointState& s, const ComplexMatrix& u,
                         const std::string& target) {
  KrausChannel ch{{u}, 1, true};
  return apply_channel(s, ch, target);
}

Projection project(const JointState& s, const ComplexMatrix& projector,
                   const std::string& target) {
  if (projector.rows() != kLevels || projector.cols() != kLevels) {
    fail("projector must be 3x3");
  }
  const double eps = kDefaultTolerances.eps_mat;
  if (!approx_equal(projector, projector.adjoint(), eps) ||
      !approx_equal(projector * projector, projector, eps)) {
    fail("projector is not an idempotent Hermitian matrix");
  }
  const int pos[] = {s.position(target)};
  const ComplexMatrix full = embed_operator(projector, pos, s.size());
  JointState out(s.registers(), hermitize(full * s.rho() * full.adjoint()));
  const double p = out.trace();
  return {p, std::move(out)};
}

JointState partial_trace(const JointState& s, const std::string& discard) {
  const int pos = s.position(discard);
  const int n = s.size();
  std::vector<RegisterLabel> regs = s.registers();
  regs.erase(regs.begin() + pos);
  const int out_dim = ipow3(n - 1);
  const int stride = ipow3(n - 1 - pos);
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
  auto expand = [&](int reduced, int level) {
    const int high = reduced / stride;
    const int low = reduced % stride;
    return (high * kLevels + level) * stride + low;
  };
  for (int i = 0; i < out_dim; ++i) {
    for (int j = 0; j < out_dim; ++j) {
      Complex acc = 0.0;
      for (int l = 0; l < kLevels; ++l) acc += s.rho()(expand(i, l), expand(j, l));
      out(i, j) = acc;
    }
  }
  return JointState(std::move(regs), std::move(out));
}

JointState restrict_to_qubits(const JointState& s, std::span<const std::string> ids) {
  const ComplexMatrix q = embed_qubit(pauli2(Pauli::kI), 0.0);
  JointState out = s;
  for (const auto& id : ids) out = project(out, q, id).state;
  return out;
}

double pauli_expectation(const JointState& s, const std::map<std::string, Pauli>& ops,
                         Renormalize renormalize, const Tolerances& tol) {
  JointState state = s;
  if (renormalize == Renormalize::kQubitSector) {
    std::vector<std::string> ids;
    for (const auto& [id, p] : ops) ids.push_back(id);
    state = restrict_to_qubits(state, ids);
    if (state.trace() <= tol.eps_mat) fail("qubit sector carries no weight");
    state = state.normalized();
  } else if (std::abs(state.trace() - 1.0) > tol.eps_mat) {
    fail("pauli_expectation needs a normalized state or explicit renormalization");
  }
  std::vector<int> pos;
  ComplexMatrix op = ComplexMatrix::Identity(1, 1);
  for (const auto& [id, p] : ops) {
    pos.push_back(state.position(id));
    const ComplexMatrix m = pauli3(p, 0.0);
    ComplexMatrix next(op.rows() * kLevels, op.cols() * kLevels);
    for (Eigen::Index i = 0; i < op.rows(); ++i)
      for (Eigen::Index j = 0; j < op.cols(); ++j)
        next.block(i * kLevels, j * kLevels, kLevels, kLevels) = op(i, j) * m;
    op = std::move(next);
  }
  if (pos.empty()) return state.trace();
  const ComplexMatrix full = embed_operator(op, pos, state.size());
  const Complex v = (full * state.rho()).trace();
  if (std::abs(v.imag()) > 1e3 * tol.eps_mat) {
    fail("Pauli expectation has an imaginary part; state is not Hermitian");
  }
  return v.real();
}

double state_fidelity(const JointState& rho, const ComplexVector& psi,
                      const Tolerances& tol) {
  if (std::abs(rho.trace() - 1.0) > tol.eps_mat) fail("state_fidelity needs a normalized state");
  ComplexVector v = ComplexVector::Zero(rho.dim());
  if (psi.size() == rho.dim()) {
    v = psi;
  } else if (rho.dim() == kLevels && psi.size() == 2) {
    v.head(2) = psi;
  } else {
    fail("state_fidelity dimension mismatch");
  }
  if (std::abs(v.norm() - 1.0) > 1e-9) fail("state_fidelity needs a unit-norm pure state");
  return (v.adjoint() * rho.rho() * v)(0, 0).real();
}

double trace_norm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) fail("trace_norm needs a square matrix");
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

KrausChannel identity_channel() {
  return {{ComplexMatrix::Identity(kLevels, kLevels)}, 1, true};
}

KrausChannel loss_channel(double eta) {
  if (eta < 0.0 || eta > 1.0) fail("loss efficiency outside [0,1]");
  ComplexMatrix pass = ComplexMatrix::Zero(kLevels, kLevels);
  pass(0, 0) = std::sqrt(eta);
  pass(1, 1) = std::sqrt(eta);
  pass(kAbsent, kAbsent) = 1.0;
  ComplexMatrix lose0 = ComplexMatrix::Zero(kLevels, kLevels);
  lose0(kAbsent, 0) = std::sqrt(1.0 - eta);
  ComplexMatrix lose1 = ComplexMatrix::Zero(kLevels, kLevels);
  lose1(kAbsent, 1) = std::sqrt(1.0 - eta);
  return {{pass, lose0, lose1}, 1, true};
}

KrausChannel depolarizing_channel(double p) {
  if (p < 0.0 || p > 1.0) fail("depolarizing weight outside [0,1]");
  return {{std::sqrt(1.0 - 0.75 * p) * ComplexMatrix::Identity(kLevels, kLevels),
           std::sqrt(0.25 * p) * pauli3(Pauli::kX, 1.0),
           std::sqrt(0.25 * p) * pauli3(Pauli::kY, 1.0),
           std::sqrt(0.25 * p) * pauli3(Pauli::kZ, 1.0)},
          1,
          true};
}

KrausChannel dephasing_channel(double gamma) {
  if (gamma < 0.0 || gamma > 1.0) fail("dephasing factor outside [0,1]");
  return {{std::sqrt(0.5 * (1.0 + gamma)) * ComplexMatrix::Identity(kLevels, kLevels),
           std::sqrt(0.5 * (1.0 - gamma)) * pauli3(Pauli::kZ, 1.0)},
          1,
          true};
}

}  // namespace hsq
