// Copyright 2026 The nmqt Authors
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

// Shared fixtures for the test suites.

#pragma once

#include <nmqt/channels.hpp>
#include <nmqt/fock.hpp>
#include <nmqt/linalg.hpp>

#include <random>

namespace nmqt::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20260418ULL);
  return g;
}

inline Matrix random_matrix(int n, int m = -1) {
  if (m < 0) m = n;
  std::normal_distribution<double> nd;
  Matrix a(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = cplx(nd(rng()), nd(rng()));
  return a;
}

inline Matrix random_hermitian(int n) {
  const Matrix a = random_matrix(n);
  return 0.5 * (a + a.adjoint());
}

inline DensityMatrix random_density(int n) {
  const Matrix a = random_matrix(n);
  return DensityMatrix::normalized(a * a.adjoint(), Dims{n});
}

/// Scaled Taylor series for exp(m): reference for the exponential contract.
inline Matrix taylor_expm(const Matrix& m, int terms = 30) {
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::pow(2.0, s) > 0.5) ++s;
  const Matrix a = m / std::pow(2.0, s);
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= terms; ++k) {
    term = (term * a / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
  return sum;
}

/// Evolves rho_RB jointly with the ancillas on R kron B kron A, with no
/// superoperator: matrix Lindblad right-hand side and a Taylor step of 30 terms.
/// The ancillas start in the vacuum; the ancillas are traced out at the end.
inline Matrix augmented_reference(const ChannelSpec& spec, const Matrix& rho_rb, int dim_r, double t, double h = 0.02) {
  const JointModel m = assemble(spec);
  const long long dba = dims_product(m.dims);
  const long long da = dba / spec.mode_dim;
  const Matrix ir = Matrix::Identity(dim_r, dim_r);
  const Matrix hf = kron(ir, m.hamiltonian.matrix());
  std::vector<Matrix> ls;
  for (const auto& l : m.collapse) ls.push_back(kron(ir, l.matrix()));
  Matrix vac = Matrix::Zero(da, da);
  vac(0, 0) = 1.0;
  Matrix rho = kron(rho_rb, vac);
  auto rhs = [&](const Matrix& x) {
    Matrix y = -kI * (hf * x - x * hf);
    for (const auto& l : ls) {
      const Matrix ldl = l.adjoint() * l;
      y += l * x * l.adjoint() - 0.5 * (ldl * x + x * ldl);
    }
    return y;
  };
  const int steps = std::max(1, static_cast<int>(std::ceil(t / h)));
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    Matrix term = rho, sum = rho;
    for (int k = 1; k <= 30; ++k) {
      term = (dt / k) * rhs(term);
      sum += term;
    }
    rho = sum;
  }
  Dims full{dim_r};
  full.insert(full.end(), m.dims.begin(), m.dims.end());
  return ptrace(rho, full, {0, 1});
}

/// Pure-loss oracle: E(|i><j|) = sum_l sqrt(C(i,l) C(j,l)) b^{i-l} conj(b)^{j-l} (1-|b|^2)^l |i-l><j-l|.
inline Matrix loss_channel_matrix(int dim, cplx b) {
  auto binom = [](int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); };
  const double loss = 1.0 - std::norm(b);
  Matrix e = Matrix::Zero(dim * dim, dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int l = 0; l <= std::min(i, j); ++l) {
        const cplx c = std::sqrt(binom(i, l) * binom(j, l)) * std::pow(b, i - l) * std::pow(std::conj(b), j - l) *
                       std::pow(loss, l);
        e((i - l) + (j - l) * dim, i + j * dim) += c;
      }
  return e;
}

/// Amplitude b(t) of mode B for a single damped ancilla (rates already in omega_b units).
inline cplx lorentzian_amplitude(double gamma, double kappa, double omega, double t) {
  Matrix m(2, 2);
  const double g = 0.5 * std::sqrt(gamma * kappa);
  m << 0.0, g, -g, cplx(-0.5 * gamma, -omega);
  return expm(t * m)(0, 0);
}

inline double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace nmqt::testing
