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

// Dense complex linear algebra shared by every module: matrix aliases, the
// Kronecker product, the matrix exponential and spectral helpers.

#pragma once

#include <nmqt/error.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace nmqt {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }
inline Vector kron(const Vector& a, const Vector& b) { return Eigen::kroneckerProduct(a, b).eval(); }

/// Largest entry-wise deviation from Hermiticity.
inline double hermiticity_error(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Matrix exponential by Pade scaling-and-squaring (Eigen's implementation).
inline Matrix expm(const Matrix& m) {
  if (m.size() == 0) return m;
  return m.exp();
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
inline RVector hermitian_eigenvalues(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Sum of singular values. Hermitian input takes the cheaper eigenvalue route.
inline double trace_norm(const Matrix& m, double hermitian_tol = 1e-12) {
  if (m.size() == 0) return 0.0;
  if (hermiticity_error(m) <= hermitian_tol) return hermitian_eigenvalues(m).cwiseAbs().sum();
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

/// Induced 1-norm (max column sum), a cheap upper bound on the spectral norm
/// up to a factor sqrt(n).
inline double one_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

/// n evenly spaced points from a to b inclusive.
inline std::vector<double> linspace(double a, double b, int n) {
  require(n >= 2, ErrorKind::InvalidParameter, "linspace needs at least two points");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace nmqt
