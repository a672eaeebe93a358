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

// Lindblad generators in superoperator form and their time propagation.
//
// Vectorization is column stacking: vec(rho)[i + j*d] = rho(i, j), which is
// Eigen's native column-major storage. Under it vec(A X B) = (B^T kron A) vec(X).

#pragma once

#include <nmqt/error.hpp>
#include <nmqt/fock.hpp>
#include <nmqt/linalg.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace nmqt {

class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(Matrix data, Dims hilbert_dims) : data_(std::move(data)), dims_(std::move(hilbert_dims)) {
    require(!dims_.empty(), ErrorKind::InvalidDimension, "superoperator needs Hilbert dims");
    const long long d = dims_product(dims_);
    require(data_.rows() == d * d && data_.cols() == d * d, ErrorKind::Shape,
            "superoperator side must equal (prod dims)^2 for dims " + dims_string(dims_));
  }

  static Superoperator identity(Dims hilbert_dims) {
    const long long d = dims_product(hilbert_dims);
    return {Matrix::Identity(d * d, d * d), std::move(hilbert_dims)};
  }

  const Matrix& matrix() const { return data_; }
  const Dims& hilbert_dims() const { return dims_; }
  Eigen::Index hilbert_side() const { return static_cast<Eigen::Index>(dims_product(dims_)); }

  /// Acts on an operator given as a square matrix.
  Matrix apply(const Matrix& x) const {
    const Eigen::Index d = hilbert_side();
    require(x.rows() == d && x.cols() == d, ErrorKind::Shape, "superoperator applied to mismatched operator");
    Vector v = data_ * Eigen::Map<const Vector>(x.data(), d * d);
    return Eigen::Map<const Matrix>(v.data(), d, d);
  }

 private:
  Matrix data_;
  Dims dims_;
};

inline Vector vec(const Matrix& x) { return Eigen::Map<const Vector>(x.data(), x.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index d) {
  require(v.size() == d * d, ErrorKind::Shape, "unvec: length is not d^2");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

/// Uniform grid t0, t0 + dt, ..., t_end with dt = (t_end - t0) / n_steps.
/// A degenerate grid (t_end == t0) holds the single time t0.
class TimeGrid {
 public:
  TimeGrid(double t0, double t_end, int n_steps) : t0_(t0), t_end_(t_end), n_steps_(n_steps) {
    require(std::isfinite(t0) && std::isfinite(t_end), ErrorKind::InvalidParameter, "time grid bounds must be finite");
    require(t_end >= t0, ErrorKind::InvalidParameter, "time grid needs t_end >= t0");
    require(n_steps >= 1, ErrorKind::InvalidParameter, "time grid needs n_steps >= 1");
    if (t_end == t0) n_steps_ = 0;
  }

  /// Smallest grid over [t0, t_end] whose step does not exceed max_dt.
  static TimeGrid with_max_step(double t0, double t_end, double max_dt) {
    require(max_dt > 0.0, ErrorKind::InvalidParameter, "max step must be positive");
    const int n = std::max(1, static_cast<int>(std::ceil((t_end - t0) / max_dt - 1e-9)));
    return {t0, t_end, n};
  }

  double t0() const { return t0_; }
  double t_end() const { return t_end_; }
  int n_steps() const { return n_steps_; }
  bool degenerate() const { return n_steps_ == 0; }
  double dt() const { return degenerate() ? 0.0 : (t_end_ - t0_) / n_steps_; }
  double time(int n) const { return n == n_steps_ ? t_end_ : t0_ + n * dt(); }
  std::size_t size() const { return static_cast<std::size_t>(n_steps_) + 1; }

  std::vector<double> times() const {
    std::vector<double> t(size());
    for (int n = 0; n <= n_steps_; ++n) t[n] = time(n);
    return t;
  }

  /// Same interval, step halved.
  TimeGrid refined() const { return {t0_, t_end_, degenerate() ? 1 : 2 * n_steps_}; }

 private:
  double t0_;
  double t_end_;
  int n_steps_;
};

/// Generator of drho/dt = -i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho}).
///
/// The dissipator equals 1/2[L rho, L^dag] + 1/2[L, rho L^dag].
inline Superoperator liouvillian(const Operator& h, const std::vector<Operator>& collapse) {
  const double herm = hermiticity_error(h.matrix());
  require(herm <= 1e-10, ErrorKind::Validation, "Hamiltonian is not Hermitian (deviation " + std::to_string(herm) + ")");
  const Eigen::Index d = h.side();
  const Matrix id = Matrix::Identity(d, d);
  Matrix gen = -kI * (kron(id, h.matrix()) - kron(h.matrix().transpose(), id));
  for (const auto& l : collapse) {
    require(l.dims() == h.dims(), ErrorKind::Shape,
            "collapse operator dims " + dims_string(l.dims()) + " differ from Hamiltonian dims " + dims_string(h.dims()));
    const Matrix& lm = l.matrix();
    const Matrix ldl = lm.adjoint() * lm;
    gen += kron(lm.conjugate(), lm) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
  }
  return {std::move(gen), h.dims()};
}

/// exp(dt * l), the step matrix of a time-independent generator.
inline Superoperator propagator(const Superoperator& l, double dt) {
  require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidParameter, "propagator step must be positive");
  return {expm(dt * l.matrix()), l.hilbert_dims()};
}

/// Step size with ||dt * l|| <= 1, using sqrt(||l||_1 ||l||_inf) as the norm estimate.
inline double default_step(const Superoperator& l) {
  const Matrix& m = l.matrix();
  const double n1 = one_norm(m);
  const double ninf = m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  const double est = std::sqrt(n1 * ninf);
  return est > 0.0 ? 1.0 / est : 1.0;
}

namespace detail {

inline DensityMatrix checked_snapshot(const Matrix& m, const Dims& dims, int step, double t) {
  const double drift = std::abs(m.trace().real() - 1.0);
  if (drift > 1e-6)
    fail(ErrorKind::NumericalInstability,
         "trace drift " + std::to_string(drift) + " at step " + std::to_string(step) + " (t=" + std::to_string(t) + ")");
  try {
    return DensityMatrix(0.5 * (m + m.adjoint()), dims);
  } catch (const Error& e) {
    fail(ErrorKind::NumericalInstability,
         "state invalid at step " + std::to_string(step) + " (t=" + std::to_string(t) + "): " + e.what());
  }
}

}  // namespace detail

/// rho(t_n) = M^n rho(t0) with M = exp(dt l), one step matrix for every step.
inline std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const Superoperator& l, const TimeGrid& grid) {
  require(rho0.dims() == l.hilbert_dims(), ErrorKind::Shape,
          "evolve: state dims " + dims_string(rho0.dims()) + " vs generator dims " + dims_string(l.hilbert_dims()));
  std::vector<DensityMatrix> out;
  out.reserve(grid.size());
  out.push_back(rho0);
  if (grid.degenerate()) return out;
  const Matrix step = propagator(l, grid.dt()).matrix();
  const Eigen::Index d = rho0.side();
  Vector v = vec(rho0.matrix());
  for (int n = 1; n <= grid.n_steps(); ++n) {
    v = step * v;
    out.push_back(detail::checked_snapshot(unvec(v, d), rho0.dims(), n, grid.time(n)));
  }
  return out;
}

}  // namespace nmqt
