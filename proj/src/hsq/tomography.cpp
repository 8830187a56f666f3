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

#include "hsq/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace hsq {
namespace {

struct Observation {
  ComplexMatrix effect;  // acts on the estimated object
  double weight = 0.0;   // normalized count
};

double log_likelihood(std::span<const Observation> obs, const ComplexMatrix& x) {
  double l = 0.0;
  for (const auto& o : obs) {
    if (o.weight == 0.0) continue;
    const double p = (o.effect * x).trace().real();
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    l += o.weight * std::log(p);
  }
  return l;
}

ComplexMatrix r_operator(std::span<const Observation> obs, const ComplexMatrix& x) {
  ComplexMatrix r = ComplexMatrix::Zero(x.rows(), x.cols());
  for (const auto& o : obs) {
    if (o.weight == 0.0) continue;
    const double p = (o.effect * x).trace().real();
    r += (o.weight / p) * o.effect;
  }
  return r;
}

ComplexMatrix qubit_projector(MeasurementSetting m, bool plus) {
  const ComplexVector v = setting_eigenvector(m, plus);
  return v * v.adjoint();
}

std::vector<Observation> state_observations(const TomoDataset& d) {
  d.validate();
  double total = 0.0;
  for (const auto& [m, c] : d.counts) total += c.total();
  std::vector<Observation> obs;
  for (const auto& [m, c] : d.counts) {
    obs.push_back({qubit_projector(m, true), c.n_plus / total});
    obs.push_back({qubit_projector(m, false), c.n_minus / total});
  }
  return obs;
}

// Upper-triangular 2x2 factor from (t00, t11, Re t01, Im t01).
ComplexMatrix factor(const Eigen::Vector4d& x) {
  ComplexMatrix t(2, 2);
  t << x(0), Complex(x(2), x(3)), 0.0, x(1);
  return t;
}

ComplexMatrix density(const Eigen::Vector4d& x) {
  const ComplexMatrix t = factor(x);
  const ComplexMatrix a = t.adjoint() * t;
  return a / a.trace().real();
}

Eigen::Vector4d likelihood_gradient(std::span<const Observation> obs,
                                    const Eigen::Vector4d& x) {
  const ComplexMatrix t = factor(x);
  const ComplexMatrix a = t.adjoint() * t;
  const double tr = a.trace().real();
  const ComplexMatrix rho = a / tr;
  const ComplexMatrix r = r_operator(obs, rho);
  const double rr = (r * rho).trace().real();
  const ComplexMatrix m = (r - rr * ComplexMatrix::Identity(2, 2)) / tr;
  const ComplexMatrix mt = m * t.adjoint();
  // dL/dT_ij = 2 Re (M T^dagger)_ji for the real part of T_ij and
  // -2 Im (M T^dagger)_ji for its imaginary part.
  return Eigen::Vector4d(2.0 * mt(0, 0).real(), 2.0 * mt(1, 1).real(),
                         2.0 * mt(1, 0).real(), -2.0 * mt(1, 0).imag());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

// Quasi-Newton ascent with an Armijo backtracking line search. Only steps that
// raise the objective are accepted, so `history` is non-decreasing.
template <typename Objective, typename Gradient>
BfgsResult maximize_bfgs(Objective&& f, Gradient&& grad, Eigen::VectorXd x,
                         const SolverSettings& s, const char* what) {
  const Eigen::Index n = x.size();
  BfgsResult out;
  double l = f(x);
  out.history.push_back(l);
  Eigen::VectorXd g = grad(x);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool converged = false;
  int iter = 0;
  for (; iter < s.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-13) {
      converged = true;
      break;
    }
    Eigen::VectorXd dir = h * g;
    if (dir.dot(g) <= 0.0) {
      h.setIdentity();
      dir = g;
    }
    double t = 1.0;
    double l_new = f(x + t * dir);
    while (!(l_new >= l + 1e-4 * t * dir.dot(g)) && t > 1e-20) {
      t *= 0.5;
      l_new = f(x + t * dir);
    }
    if (!(l_new >= l + 1e-4 * t * dir.dot(g))) {
      if (!h.isIdentity()) {
        h.setIdentity();
        continue;
      }
      converged = true;  // at the resolution limit of the objective
      break;
    }
    const Eigen::VectorXd x_new = x + t * dir;
    const Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd sv = x_new - x;
    const Eigen::VectorXd yv = g - g_new;  // gradient change of -f
    const double sy = sv.dot(yv);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * yv;
      h += ((sy + yv.dot(hy)) * rho * rho) * (sv * sv.transpose()) -
           rho * (hy * sv.transpose() + sv * hy.transpose());
    }
    const double gain = l_new - l;
    x = x_new;
    g = g_new;
    l = l_new;
    out.history.push_back(l);
    if (gain <= s.relative_tolerance * std::max(1.0, std::abs(l)) &&
        g.lpNorm<Eigen::Infinity>() <= 1e-6) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kNonConvergence,
                fmt::format("{} ML did not converge in {} iterations (gradient {:.3g})", what,
                            s.max_iterations, g.lpNorm<Eigen::Infinity>()));
  }
  out.x = std::move(x);
  out.value = l;
  out.iterations = iter;
  return out;
}

// Process fit over Stinespring isometries V = W (W^dagger W)^{-1/2}, which
// are trace preserving by construction. V stacks the Kraus operators
// (rank * d_out rows, d_in columns); the Choi matrix is
// sum_k |K_k>><<K_k| with input index most significant.
struct IsometryModel {
  std::span<const ComplexMatrix> inputs;  // rho_in per observation
  std::span<const ComplexMatrix> effects; // I_rank ⊗ E per observation
  std::span<const double> weights;
  int d_in = 2;
  int rows = 0;

  ComplexMatrix unpack(const Eigen::VectorXd& x) const {
    ComplexMatrix w(rows, d_in);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < d_in; ++j) {
        const int k = 2 * (i * d_in + j);
        w(i, j) = Complex(x(k), x(k + 1));
      }
    return w;
  }

  struct Parts {
    ComplexMatrix v, x;
    Eigen::VectorXd s;
    ComplexMatrix u;
  };

  Parts isometry(const ComplexMatrix& w) const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(w.adjoint() * w);
    Parts p;
    p.s = es.eigenvalues();
    p.u = es.eigenvectors();
    Eigen::VectorXd inv = p.s.cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    p.x = p.u * inv.cast<Complex>().asDiagonal() * p.u.adjoint();
    p.v = w * p.x;
    return p;
  }

  double value(const Eigen::VectorXd& x) const {
    const ComplexMatrix v = isometry(unpack(x)).v;
    double l = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] == 0.0) continue;
      const double p = (effects[k] * v * inputs[k] * v.adjoint()).trace().real();
      if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
      l += weights[k] * std::log(p);
    }
    return l;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    const ComplexMatrix w = unpack(x);
    const Parts p = isometry(w);
    // dL = 2 Re Tr(G^dagger dV) with G = sum f/p E V rho.
    ComplexMatrix g = ComplexMatrix::Zero(rows, d_in);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (weights[k] == 0.0) continue;
      const ComplexMatrix ev = effects[k] * p.v;
      const double prob = (ev * inputs[k] * p.v.adjoint()).trace().real();
      g += (weights[k] / prob) * ev * inputs[k];
    }
    // Chain rule through X = S^{-1/2}, S = W^dagger W, in the eigenbasis of S.
    const ComplexMatrix h = p.u.adjoint() * (g.adjoint() * w) * p.u;
    ComplexMatrix q(d_in, d_in);
    for (int i = 0; i < d_in; ++i)
      for (int j = 0; j < d_in; ++j) {
        const double xi = 1.0 / std::sqrt(std::max(p.s(i), 1e-300));
        const double xj = 1.0 / std::sqrt(std::max(p.s(j), 1e-300));
        q(j, i) = h(j, i) / (p.s(i) * p.s(j) * (xi + xj));
      }
    q = p.u * q * p.u.adjoint();
    const ComplexMatrix total = g * p.x - w * (q + q.adjoint());
    Eigen::VectorXd out(2 * rows * d_in);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < d_in; ++j) {
        const int k = 2 * (i * d_in + j);
        out(k) = 2.0 * total(i, j).real();
        out(k + 1) = 2.0 * total(i, j).imag();
      }
    return out;
  }
};

}  // namespace

void TomoDataset::validate() const {
  for (auto m : kAllSettings) {
    auto it = counts.find(m);
    if (it == counts.end()) {
      fail(fmt::format("tomography dataset lacks the {} setting", basis_label(m)));
    }
    if (it->second.n_plus < 0.0 || it->second.n_minus < 0.0) {
      fail("tomography counts must be non-negative");
    }
    if (!(it->second.total() > 0.0)) {
      fail(fmt::format("tomography setting {} has no counts", basis_label(m)));
    }
  }
}

TomoDataset parse_tomo_csv(std::istream& in) {
  TomoDataset d;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    line.erase(std::remove_if(line.begin(), line.end(),
                              [](unsigned char ch) { return std::isspace(ch); }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
    if (!header_seen && !cols.empty() && cols[0] == "setting") {
      header_seen = true;
      continue;
    }
    if (cols.size() != 3) fail(fmt::format("tomography CSV line {}: expected 3 columns", line_no));
    const MeasurementSetting m = parse_setting(cols[0]);
    double count = 0.0;
    try {
      count = std::stod(cols[2]);
    } catch (const std::exception&) {
      fail(fmt::format("tomography CSV line {}: bad count '{}'", line_no, cols[2]));
    }
    if (count < 0.0) fail(fmt::format("tomography CSV line {}: negative count", line_no));
    auto& c = d.counts[m];
    if (cols[1] == "+") c.n_plus += count;
    else if (cols[1] == "-") c.n_minus += count;
    else fail(fmt::format("tomography CSV line {}: outcome must be + or -", line_no));
  }
  d.validate();
  return d;
}

TomoDataset read_tomo_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return parse_tomo_csv(in);
}

void write_tomo_csv(std::ostream& out, const TomoDataset& d) {
  out << "setting,outcome,count\n";
  for (auto m : kAllSettings) {
    auto it = d.counts.find(m);
    if (it == d.counts.end()) continue;
    out << fmt::format("{},+,{:.17g}\n", basis_label(m), it->second.n_plus);
    out << fmt::format("{},-,{:.17g}\n", basis_label(m), it->second.n_minus);
  }
}

TomoDataset ideal_dataset(const ComplexMatrix& rho2, double n) {
  TomoDataset d;
  for (auto m : kAllSettings) {
    const double p = std::clamp((qubit_projector(m, true) * rho2).trace().real(), 0.0, 1.0);
    d.counts[m] = {n * p, n * (1.0 - p), n};
  }
  d.trials = 3 * n;
  return d;
}

StateEstimate reconstruct_state_ml(const TomoDataset& d, const SolverSettings& s) {
  const auto obs = state_observations(d);
  auto value = [&](const Eigen::VectorXd& v) {
    return log_likelihood(obs, density(Eigen::Vector4d(v)));
  };
  auto grad = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(likelihood_gradient(obs, Eigen::Vector4d(v)));
  };
  const Eigen::VectorXd x0 = Eigen::Vector4d(std::sqrt(0.5), std::sqrt(0.5), 0.0, 0.0);
  BfgsResult r = maximize_bfgs(value, grad, x0, s, "state");
  StateEstimate est;
  est.rho = density(Eigen::Vector4d(r.x));
  est.log_likelihood = r.value;
  est.iterations = r.iterations;
  est.history = std::move(r.history);
  return est;
}

JointState reconstruct_state(const TomoDataset& d, const std::string& photon,
                             const SolverSettings& s) {
  const auto est = reconstruct_state_ml(d, s);
  ComplexMatrix rho = ComplexMatrix::Zero(kLevels, kLevels);
  rho.topLeftCorner(2, 2) = est.rho;
  return JointState({RegisterLabel::photon(photon, Basis::kPolarization)}, rho);
}

ComplexMatrix linear_inversion(const TomoDataset& d) {
  d.validate();
  ComplexMatrix rho = 0.5 * pauli2(Pauli::kI);
  for (const auto& [m, c] : d.counts) {
    const double r = (c.n_plus - c.n_minus) / c.total();
    rho += 0.5 * r * pauli2(observable(m));
  }
  return rho;
}

ProcessMatrix::ProcessMatrix(ComplexMatrix chi) : chi_(std::move(chi)) {
  if (chi_.rows() != 4 || chi_.cols() != 4) fail("process matrix must be 4x4");
}

ProcessMatrix ProcessMatrix::identity() {
  ComplexMatrix chi = ComplexMatrix::Zero(4, 4);
  chi(0, 0) = 1.0;
  return ProcessMatrix(chi);
}

namespace {

ComplexVector pauli_ket(int m) {
  // (I ⊗ sigma_m) |Omega>, |Omega> = |00> + |11>.
  static const Pauli order[] = {Pauli::kI, Pauli::kX, Pauli::kY, Pauli::kZ};
  const ComplexMatrix s = pauli2(order[m]);
  ComplexVector v = ComplexVector::Zero(4);
  for (int i = 0; i < 2; ++i)
    for (int o = 0; o < 2; ++o) v(i * 2 + o) = s(o, i);
  return v;
}

}  // namespace

ProcessMatrix ProcessMatrix::from_choi(const ComplexMatrix& choi) {
  if (choi.rows() != 4 || choi.cols() != 4) fail("qubit Choi matrix must be 4x4");
  ComplexMatrix chi(4, 4);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      chi(m, n) = (pauli_ket(m).adjoint() * choi * pauli_ket(n))(0, 0) / 4.0;
  return ProcessMatrix(0.5 * (chi + chi.adjoint()));
}

ComplexMatrix ProcessMatrix::choi() const {
  ComplexMatrix c = ComplexMatrix::Zero(4, 4);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) c += chi_(m, n) * pauli_ket(m) * pauli_ket(n).adjoint();
  return c;
}

ComplexMatrix ProcessMatrix::apply(const ComplexMatrix& rho2) const {
  static const Pauli order[] = {Pauli::kI, Pauli::kX, Pauli::kY, Pauli::kZ};
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      out += chi_(m, n) * pauli2(order[m]) * rho2 * pauli2(order[n]);
  return out;
}

bool ProcessMatrix::is_valid(double eps) const {
  if (!approx_equal(chi_, chi_.adjoint(), eps)) return false;
  if (std::abs(chi_.trace().real() - 1.0) > eps) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (chi_ + chi_.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -eps;
}

ProcessEstimate reconstruct_process_ml(std::span<const ComplexVector> inputs,
                                       std::span<const TomoDataset> outputs,
                                       ProcessConstraint constraint,
                                       const SolverSettings& s) {
  if (inputs.size() != outputs.size() || inputs.empty()) {
    fail("process reconstruction needs one dataset per input state");
  }
  const bool tni = constraint == ProcessConstraint::kTraceNonIncreasing;
  // Trace-non-increasing fits add a loss level to the output space; the
  // estimate is trace preserving there and the qubit block is the channel.
  const int d_out = tni ? 3 : 2;
  const int rank = 2 * d_out;
  const ComplexMatrix id_rank = ComplexMatrix::Identity(rank, rank);
  std::vector<ComplexMatrix> rhos;
  std::vector<ComplexMatrix> effects;
  std::vector<double> weights;
  auto add = [&](const ComplexMatrix& rho, const ComplexMatrix& e, double n) {
    rhos.push_back(rho);
    effects.push_back(kron(id_rank, e));
    weights.push_back(n);
  };
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    outputs[i].validate();
    const ComplexVector psi = inputs[i].normalized();
    const ComplexMatrix rho = psi * psi.adjoint();
    for (const auto& [m, c] : outputs[i].counts) {
      for (bool plus : {true, false}) {
        ComplexMatrix e = ComplexMatrix::Zero(d_out, d_out);
        e.topLeftCorner(2, 2) = qubit_projector(m, plus);
        add(rho, e, plus ? c.n_plus : c.n_minus);
      }
      if (tni) {
        if (c.heralds < c.total()) {
          fail("trace-non-increasing process fit needs herald counts per setting");
        }
        ComplexMatrix e = ComplexMatrix::Zero(d_out, d_out);
        e(2, 2) = 1.0;
        add(rho, e, c.heralds - c.total());
      }
    }
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;

  IsometryModel model{rhos, effects, weights, 2, rank * d_out};
  // Start from the completely depolarizing channel: Kraus operators
  // |a><b| / sqrt(d_out) for every output level a and input level b.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * model.rows * 2);
  for (int a = 0; a < d_out; ++a)
    for (int b = 0; b < 2; ++b) {
      const int kraus = a * 2 + b;
      const int row = kraus * d_out + a;
      x0(2 * (row * 2 + b)) = 1.0 / std::sqrt(static_cast<double>(d_out));
    }
  auto value = [&](const Eigen::VectorXd& x) { return model.value(x); };
  auto grad = [&](const Eigen::VectorXd& x) { return model.gradient(x); };
  BfgsResult r = maximize_bfgs(value, grad, x0, s, "process");

  const ComplexMatrix v = model.isometry(model.unpack(r.x)).v;
  ComplexMatrix choi = ComplexMatrix::Zero(2 * d_out, 2 * d_out);
  for (int k = 0; k < rank; ++k) {
    const ComplexMatrix kraus = v.block(k * d_out, 0, d_out, 2);
    ComplexVector vec(2 * d_out);
    for (int i = 0; i < 2; ++i)
      for (int o = 0; o < d_out; ++o) vec(i * d_out + o) = kraus(o, i);
    choi += vec * vec.adjoint();
  }
  ProcessEstimate est;
  est.choi = choi;
  est.log_likelihood = r.value;
  est.iterations = r.iterations;
  est.history = std::move(r.history);
  ComplexMatrix qubit_choi(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          qubit_choi(a * 2 + x, b * 2 + y) = choi(a * d_out + x, b * d_out + y);
  ProcessMatrix raw = ProcessMatrix::from_choi(qubit_choi);
  est.success_trace = raw.chi().trace().real();
  if (!(est.success_trace > 0.0)) fail("process estimate has no weight on the qubit sector");
  est.process = ProcessMatrix(raw.chi() / est.success_trace);
  return est;
}

ProcessMatrix reconstruct_process(std::span<const ComplexVector> inputs,
                                  std::span<const ComplexMatrix> outputs,
                                  const SolverSettings& s) {
  std::vector<TomoDataset> data;
  for (const auto& rho : outputs) {
    if (rho.rows() == 2) {
      data.push_back(ideal_dataset(rho));
    } else {
      data.push_back(ideal_dataset(rho.topLeftCorner(2, 2) / rho.topLeftCorner(2, 2).trace()));
    }
  }
  return reconstruct_process_ml(inputs, data, ProcessConstraint::kTracePreserving, s).process;
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi0) {
  return 1.0 - 0.5 * trace_norm(chi0.chi() - chi.chi());
}

double entanglement_fidelity_vis(double v0, double v1) {
  return (1.0 + v0 + 2.0 * v1) / 4.0;
}

double entanglement_fidelity_pauli(double xx, double yy, double zz) {
  return (1.0 + xx - yy + zz) / 4.0;
}

ClassicalVerdict classical_limit_check(FidelityMetric metric, double value) {
  ClassicalVerdict v;
  v.threshold = metric == FidelityMetric::kProcess ? kProcessClassicalLimit
                                                   : kEntanglementClassicalLimit;
  v.margin = value - v.threshold;
  v.pass = value > v.threshold;
  return v;
}

void write_matrix_csv(std::ostream& out, const ComplexMatrix& m) {
  out << "row,col,real,imag\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << fmt::format("{},{},{:.12g},{:.12g}\n", i, j, m(i, j).real(), m(i, j).imag());
}

}  // namespace hsq
