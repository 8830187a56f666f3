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

// Shared generators and independent oracles for the test suites.

#include <cmath>
#include <complex>
#include <random>
#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "hsq/detection.hpp"
#include "hsq/qstate.hpp"
#include "hsq/tomography.hpp"

namespace hsq::test {

inline ComplexMatrix ginibre(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(n(rng), n(rng));
  return g;
}

// Haar-random unitary via QR with the phase fix.
inline ComplexMatrix random_unitary(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<ComplexMatrix> qr(ginibre(rng, d, d));
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR();
  for (int j = 0; j < d; ++j) q.col(j) *= std::polar(1.0, std::arg(r(j, j)));
  return q;
}

// Random density matrix of size d, unit trace, random rank.
inline ComplexMatrix random_density(std::mt19937_64& rng, int d, int rank = 0) {
  if (rank <= 0) rank = 1 + static_cast<int>(rng() % d);
  const ComplexMatrix g = ginibre(rng, d, rank);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// Random 3-level state with weight spread over the qubit sector and the
// absence level, scaled to trace `w`.
inline ComplexMatrix random_register_state(std::mt19937_64& rng, int registers, double w) {
  int d = 1;
  for (int i = 0; i < registers; ++i) d *= kLevels;
  return random_density(rng, d) * w;
}

// Kraus operators of a random qubit channel with `rank` operators.
inline std::vector<ComplexMatrix> random_qubit_kraus(std::mt19937_64& rng, int rank) {
  const ComplexMatrix g = ginibre(rng, 2 * rank, 2);
  // Isometry V = G (G^dagger G)^{-1/2}.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g.adjoint() * g);
  const ComplexMatrix inv_sqrt = es.eigenvectors() *
                                 es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                 es.eigenvectors().adjoint();
  const ComplexMatrix v = g * inv_sqrt;
  std::vector<ComplexMatrix> k;
  for (int i = 0; i < rank; ++i) k.push_back(v.block(2 * i, 0, 2, 2));
  return k;
}

inline ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& k, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& op : k) out += op * rho * op.adjoint();
  return out;
}

inline ComplexMatrix pauli(int m) {
  ComplexMatrix p(2, 2);
  switch (m) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, Complex(0, -1), Complex(0, 1), 0; break;
    default: p << 1, 0, 0, -1; break;
  }
  return p;
}

// chi from Kraus operators by expanding each K in the Pauli basis:
// K = sum_m a_m sigma_m with a_m = Tr(sigma_m K)/2, chi_mn = sum_k a_km a_kn*.
inline ComplexMatrix chi_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  ComplexMatrix chi = ComplexMatrix::Zero(4, 4);
  for (const auto& k : kraus) {
    Eigen::Vector4cd a;
    for (int m = 0; m < 4; ++m) a(m) = (pauli(m) * k).trace() / 2.0;
    chi += a * a.adjoint();
  }
  return chi;
}

inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline ComplexVector qubit(Complex a, Complex b) {
  ComplexVector v(3);
  v << a, b, 0.0;
  return v;
}

inline ComplexVector level(int i) {
  ComplexVector v = ComplexVector::Zero(3);
  v(i) = 1.0;
  return v;
}

// One-sided normal tail beyond 5 sigma.
inline constexpr double kFiveSigmaTail = 2.866515718791939e-7;

// P(X >= k) (upper) or P(X <= k) for X ~ Poisson(lambda), summed directly.
inline double poisson_tail(double lambda, double k, bool upper) {
  auto pmf = [lambda](double j) {
    return std::exp(j * std::log(lambda) - lambda - std::lgamma(j + 1.0));
  };
  double sum = 0.0;
  if (upper) {
    for (double j = k; j < k + 200.0 + 10.0 * lambda; j += 1.0) sum += pmf(j);
  } else {
    for (double j = 0.0; j <= k; j += 1.0) sum += pmf(j);
  }
  return std::min(sum, 1.0);
}

struct CellAgreement {
  double max_z = 0.0;      // cells with at least 20 expected counts
  double min_tail = 1.0;   // rarer cells, exact Poisson tail of the observation
  bool ok = true;
};

// Compares sampled coincidence cells with analytic probabilities at the 5
// sigma level: binomial standard errors where the normal approximation holds,
// the equivalent Poisson tail probability for rare cells.
inline CellAgreement compare_cells(const CoincidenceTable& analytic,
                                   const CoincidenceTable& sampled) {
  CellAgreement out;
  if (analytic.points.size() != sampled.points.size()) {
    out.ok = false;
    return out;
  }
  for (std::size_t i = 0; i < analytic.points.size(); ++i) {
    const auto& a = analytic.points[i];
    const auto& s = sampled.points[i];
    if (a.counts.size() != s.counts.size() || a.setting != s.setting) {
      out.ok = false;
      return out;
    }
    for (std::size_t k = 0; k < a.counts.size(); ++k) {
      const double p = a.counts[k] / a.trials;
      const double expected = p * s.trials;
      const double observed = s.counts[k];
      if (expected >= 20.0) {
        const double z = std::abs(observed / s.trials - p) / std::sqrt(p * (1.0 - p) / s.trials);
        out.max_z = std::max(out.max_z, z);
        out.ok = out.ok && z < 5.0;
      } else if (expected == 0.0) {
        out.ok = out.ok && observed == 0.0;
      } else {
        const double tail = poisson_tail(expected, observed, observed >= expected);
        out.min_tail = std::min(out.min_tail, tail);
        out.ok = out.ok && tail > kFiveSigmaTail;
      }
    }
  }
  return out;
}

}  // namespace hsq::test
