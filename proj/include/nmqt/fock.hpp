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

// Truncated Fock-space algebra.
//
// Quadrature convention used throughout the library:
//   x = (a + a^dag) / 2,   p = (a - a^dag) / (2i),
// so the vacuum has Var(x) = Var(p) = 1/4 and exp[2i(p0 x - x0 p)] equals the
// displacement exp[beta a^dag - conj(beta) a] with beta = x0 + i p0.
//
// Subsystem order for composite objects is [R, B, ancillas...].

#pragma once

#include <nmqt/error.hpp>
#include <nmqt/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nmqt {

using Dims = std::vector<int>;

inline long long dims_product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1LL, std::multiplies<>());
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

namespace detail {

inline void check_dims(const Dims& dims, Eigen::Index side) {
  require(!dims.empty(), ErrorKind::InvalidDimension, "dims list is empty");
  for (int d : dims) require(d >= 1, ErrorKind::InvalidDimension, "subsystem dimension < 1 in " + dims_string(dims));
  require(dims_product(dims) == side, ErrorKind::Shape,
          "dims " + dims_string(dims) + " do not match side length " + std::to_string(side));
}

inline void check_mode_dim(int dim) {
  require(dim >= 2, ErrorKind::InvalidDimension, "mode dimension must be >= 2, got " + std::to_string(dim));
}

}  // namespace detail

/// Square complex matrix tagged with its subsystem dimensions.
class Operator {
 public:
  Operator() = default;
  Operator(Matrix data, Dims dims) : data_(std::move(data)), dims_(std::move(dims)) {
    require(data_.rows() == data_.cols(), ErrorKind::Shape, "operator matrix must be square");
    detail::check_dims(dims_, data_.rows());
  }
  explicit Operator(Matrix data) : Operator(data, Dims{static_cast<int>(data.rows())}) {}

  const Matrix& matrix() const { return data_; }
  const Dims& dims() const { return dims_; }
  Eigen::Index side() const { return data_.rows(); }

  Operator adjoint() const { return {data_.adjoint(), dims_}; }

  friend Operator operator+(const Operator& a, const Operator& b) {
    require(a.dims_ == b.dims_, ErrorKind::Shape, "operator dims mismatch in sum");
    return {a.data_ + b.data_, a.dims_};
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    require(a.dims_ == b.dims_, ErrorKind::Shape, "operator dims mismatch in difference");
    return {a.data_ - b.data_, a.dims_};
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    require(a.dims_ == b.dims_, ErrorKind::Shape, "operator dims mismatch in product");
    return {a.data_ * b.data_, a.dims_};
  }
  friend Operator operator*(cplx s, const Operator& a) { return {s * a.data_, a.dims_}; }
  friend Operator operator*(double s, const Operator& a) { return {s * a.data_, a.dims_}; }

 private:
  Matrix data_;
  Dims dims_;
};

/// Normalized pure state.
class StateVector {
 public:
  static constexpr double kNormTol = 1e-10;

  StateVector() = default;
  StateVector(Vector amplitudes, Dims dims) : amps_(std::move(amplitudes)), dims_(std::move(dims)) {
    detail::check_dims(dims_, amps_.size());
    require(std::abs(amps_.norm() - 1.0) <= kNormTol, ErrorKind::Validation,
            "state vector norm deviates from 1 by " + std::to_string(std::abs(amps_.norm() - 1.0)));
  }

  /// Renormalizes before validating; used after truncating an infinite sum.
  static StateVector normalized(Vector amplitudes, Dims dims) {
    const double n = amplitudes.norm();
    require(n > 0.0 && std::isfinite(n), ErrorKind::DegenerateState, "cannot normalize a zero vector");
    return {amplitudes / n, std::move(dims)};
  }

  const Vector& amplitudes() const { return amps_; }
  const Dims& dims() const { return dims_; }
  Eigen::Index size() const { return amps_.size(); }

 private:
  Vector amps_;
  Dims dims_;
};

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-8;
  static constexpr double kEigenSlack = -1e-8;

  DensityMatrix() = default;
  DensityMatrix(Matrix data, Dims dims) : op_(std::move(data), std::move(dims)) { validate(); }
  explicit DensityMatrix(Operator op) : op_(std::move(op)) { validate(); }

  static DensityMatrix from_pure(const StateVector& psi) {
    const Vector& v = psi.amplitudes();
    Matrix m = v * v.adjoint();
    return {0.5 * (m + m.adjoint()), psi.dims()};
  }

  /// Divides by the trace and symmetrizes before validating.
  static DensityMatrix normalized(const Matrix& data, Dims dims) {
    const cplx tr = data.trace();
    require(std::abs(tr) > 0.0 && std::isfinite(std::abs(tr)), ErrorKind::DegenerateState,
            "cannot normalize an operator with zero trace");
    Matrix m = data / tr;
    return {0.5 * (m + m.adjoint()), std::move(dims)};
  }

  const Matrix& matrix() const { return op_.matrix(); }
  const Dims& dims() const { return op_.dims(); }
  const Operator& op() const { return op_; }
  Eigen::Index side() const { return op_.side(); }

 private:
  void validate() const {
    const Matrix& m = op_.matrix();
    const double herm = hermiticity_error(m);
    require(herm <= kHermitianTol, ErrorKind::Validation,
            "density matrix not Hermitian (max deviation " + std::to_string(herm) + ")");
    const double tr = m.trace().real();
    require(std::abs(tr - 1.0) <= kTraceTol, ErrorKind::Validation,
            "density matrix trace is " + std::to_string(tr));
    const double min_eig = hermitian_eigenvalues(m)(0);
    require(min_eig >= kEigenSlack, ErrorKind::Validation,
            "density matrix has eigenvalue " + std::to_string(min_eig));
  }

  Operator op_;
};

// ---------------------------------------------------------------------------
// Elementary operators

inline Operator identity(int dim) {
  require(dim >= 1, ErrorKind::InvalidDimension, "identity dimension must be >= 1");
  return Operator(Matrix::Identity(dim, dim));
}

inline Operator destroy(int dim) {
  detail::check_mode_dim(dim);
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(a));
}

inline Operator number(int dim) {
  const Operator a = destroy(dim);
  return a.adjoint() * a;
}

/// Parity operator diag((-1)^n).
inline Operator parity(int dim) {
  detail::check_mode_dim(dim);
  Matrix p = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return Operator(std::move(p));
}

/// exp(beta a^dag - conj(beta) a) on the truncated space.
inline Operator displacement(int dim, cplx beta) {
  const Matrix a = destroy(dim).matrix();
  return Operator(expm(beta * a.adjoint() - std::conj(beta) * a));
}

/// exp(1/2 conj(xi) a^2 - 1/2 xi a^dag^2) on the truncated space.
inline Operator squeeze(int dim, cplx xi) {
  const Matrix a = destroy(dim).matrix();
  const Matrix gen = 0.5 * std::conj(xi) * a * a - 0.5 * xi * a.adjoint() * a.adjoint();
  return Operator(expm(gen));
}

/// Matrix elements <m|D(beta)|n>, 0 <= m < rows, 0 <= n < cols, of the
/// untruncated displacement operator (associated-Laguerre closed form).
///
/// Unlike `displacement`, the block is exact for every entry, so it stays
/// faithful for |beta| comparable to the truncation, where the exponential of
/// a truncated generator wraps amplitude back into the kept levels.
inline Matrix displacement_block(int rows, int cols, cplx beta) {
  require(rows >= 1 && cols >= 1, ErrorKind::InvalidDimension, "displacement block needs positive extents");
  const double x = std::norm(beta);
  const double r = std::abs(beta);
  const double phase = std::arg(beta);
  Matrix d(rows, cols);
  for (int m = 0; m < rows; ++m) {
    for (int n = 0; n < cols; ++n) {
      const int lo = std::min(m, n);
      const int k = std::abs(m - n);
      double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(k), x);
      double log_mag = 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + k + 1.0)) - 0.5 * x;
      double mag;
      if (k == 0) {
        mag = std::exp(log_mag);
      } else if (r == 0.0) {
        mag = 0.0;
      } else {
        mag = std::exp(log_mag + k * std::log(r));
      }
      // m >= n: beta^k ; m < n: (-conj beta)^k
      cplx ph = (m >= n) ? std::polar(1.0, k * phase) : std::polar(1.0, -k * phase) * ((k % 2) ? -1.0 : 1.0);
      d(m, n) = mag * lag * ph;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Pure states

/// How strictly constructors police the Fock cutoff.
enum class TruncationGuard { Enforce, Skip };

namespace detail {

inline void check_mean_photons(double mean, int dim, TruncationGuard guard, const std::string& what) {
  if (guard == TruncationGuard::Skip) return;
  require(mean <= dim / 4.0, ErrorKind::InadequateTruncation,
          what + ": mean photon number " + std::to_string(mean) + " exceeds dim/4 = " + std::to_string(dim / 4.0));
}

// Coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!) for n < dim.
inline Vector coherent_amplitudes(int dim, cplx alpha) {
  Vector v(dim);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

}  // namespace detail

inline StateVector fock_state(int dim, int n) {
  detail::check_mode_dim(dim);
  require(n >= 0 && n < dim, ErrorKind::Index, "Fock level " + std::to_string(n) + " outside truncation");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return {v, Dims{dim}};
}

inline StateVector vacuum(int dim) { return fock_state(dim, 0); }

/// D(alpha)|0> truncated to `dim` levels and renormalized.
inline StateVector coherent(int dim, cplx alpha, TruncationGuard guard = TruncationGuard::Enforce) {
  detail::check_mode_dim(dim);
  detail::check_mean_photons(std::norm(alpha), dim, guard, "coherent state");
  return StateVector::normalized(detail::coherent_amplitudes(dim, alpha), Dims{dim});
}

/// (|alpha> + e^{i theta}|-alpha>) / N with N = sqrt(2(1 + e^{-2|alpha|^2} cos theta)).
inline StateVector cat(int dim, cplx alpha, double theta, TruncationGuard guard = TruncationGuard::Enforce) {
  detail::check_mode_dim(dim);
  detail::check_mean_photons(std::norm(alpha), dim, guard, "cat state");
  const double n2 = 2.0 * (1.0 + std::exp(-2.0 * std::norm(alpha)) * std::cos(theta));
  require(n2 > 1e-12, ErrorKind::DegenerateState, "cat normalization vanishes (alpha=0, theta=pi)");
  const Vector plus = detail::coherent_amplitudes(dim, alpha);
  const Vector minus = detail::coherent_amplitudes(dim, -alpha);
  Vector v = (plus + std::polar(1.0, theta) * minus) / std::sqrt(n2);
  // Exact parity zeros survive roundoff in the sum.
  const cplx eps = std::polar(1.0, theta);
  if (std::abs(eps - 1.0) < 1e-15 || std::abs(eps + 1.0) < 1e-15) {
    const int drop = std::abs(eps - 1.0) < 1e-15 ? 1 : 0;
    for (int n = drop; n < dim; n += 2) v(n) = 0.0;
  }
  return StateVector::normalized(std::move(v), Dims{dim});
}

/// Squeezed coherent state D(alpha) S(r_s e^{i theta}) |0>.
///
/// Built in an enlarged working space, then truncated to `dim` and renormalized.
inline StateVector squeezed_coherent(int dim, cplx alpha, double r_s, double theta,
                                     TruncationGuard guard = TruncationGuard::Enforce) {
  detail::check_mode_dim(dim);
  require(r_s >= 0.0, ErrorKind::InvalidParameter, "squeezing magnitude must be >= 0");
  const double mean = std::norm(alpha) + std::sinh(r_s) * std::sinh(r_s);
  detail::check_mean_photons(mean, dim, guard, "squeezed state");
  const int work = std::max({4 * dim, 80, static_cast<int>(16 * mean) + 40});
  Vector v0 = Vector::Zero(work);
  v0(0) = 1.0;
  const Vector v = displacement(work, alpha).matrix() * (squeeze(work, std::polar(r_s, theta)).matrix() * v0);
  return StateVector::normalized(v.head(dim), Dims{dim});
}

/// Two-mode squeezed vacuum sqrt(1-q^2) sum_n q^n |n>|n>, q = tanh r.
inline StateVector tmsv(int dim_r, int dim_b, double r) {
  detail::check_mode_dim(dim_r);
  detail::check_mode_dim(dim_b);
  require(r >= 0.0 && std::isfinite(r), ErrorKind::InvalidParameter, "squeezing parameter must be >= 0");
  const double q = std::tanh(r);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_r) * dim_b);
  double amp = std::sqrt(1.0 - q * q);
  for (int n = 0; n < std::min(dim_r, dim_b); ++n) {
    v(static_cast<Eigen::Index>(n) * dim_b + n) = amp;
    amp *= q;
  }
  return StateVector::normalized(std::move(v), Dims{dim_r, dim_b});
}

// ---------------------------------------------------------------------------
// Composition

inline Operator tensor(std::span<const Operator> parts) {
  require(!parts.empty(), ErrorKind::Shape, "tensor of an empty list");
  Matrix m = parts[0].matrix();
  Dims dims = parts[0].dims();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    m = kron(m, parts[i].matrix());
    dims.insert(dims.end(), parts[i].dims().begin(), parts[i].dims().end());
  }
  return {std::move(m), std::move(dims)};
}

inline StateVector tensor(std::span<const StateVector> parts) {
  require(!parts.empty(), ErrorKind::Shape, "tensor of an empty list");
  Vector v = parts[0].amplitudes();
  Dims dims = parts[0].dims();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    v = kron(v, parts[i].amplitudes());
    dims.insert(dims.end(), parts[i].dims().begin(), parts[i].dims().end());
  }
  return StateVector::normalized(std::move(v), std::move(dims));
}

inline DensityMatrix tensor(std::span<const DensityMatrix> parts) {
  require(!parts.empty(), ErrorKind::Shape, "tensor of an empty list");
  Matrix m = parts[0].matrix();
  Dims dims = parts[0].dims();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    m = kron(m, parts[i].matrix());
    dims.insert(dims.end(), parts[i].dims().begin(), parts[i].dims().end());
  }
  return {std::move(m), std::move(dims)};
}

inline Operator tensor(std::initializer_list<Operator> parts) { return tensor(std::span(parts.begin(), parts.size())); }
inline StateVector tensor(std::initializer_list<StateVector> parts) {
  return tensor(std::span(parts.begin(), parts.size()));
}
inline DensityMatrix tensor(std::initializer_list<DensityMatrix> parts) {
  return tensor(std::span(parts.begin(), parts.size()));
}

/// Heterogeneous factor list for callers that assemble products at runtime.
using Factor = std::variant<Operator, StateVector>;

inline Factor tensor(const std::vector<Factor>& parts) {
  require(!parts.empty(), ErrorKind::Shape, "tensor of an empty list");
  const std::size_t kind = parts.front().index();
  for (const auto& p : parts)
    require(p.index() == kind, ErrorKind::Type, "tensor factors mix operators and state vectors");
  if (kind == 0) {
    std::vector<Operator> ops;
    for (const auto& p : parts) ops.push_back(std::get<Operator>(p));
    return tensor(std::span<const Operator>(ops));
  }
  std::vector<StateVector> vs;
  for (const auto& p : parts) vs.push_back(std::get<StateVector>(p));
  return tensor(std::span<const StateVector>(vs));
}

/// `op` acting on subsystem `which` of a register with dimensions `dims`.
inline Operator embed(const Operator& op, std::size_t which, const Dims& dims) {
  require(which < dims.size(), ErrorKind::Index, "embed: subsystem index out of range");
  require(op.side() == dims[which], ErrorKind::Shape, "embed: operator side does not match subsystem");
  std::vector<Operator> parts;
  for (std::size_t k = 0; k < dims.size(); ++k) parts.push_back(k == which ? op : identity(dims[k]));
  Operator full = tensor(std::span<const Operator>(parts));
  return {full.matrix(), dims};
}

// ---------------------------------------------------------------------------
// Partial operations

namespace detail {

inline std::vector<long long> strides(const Dims& dims) {
  std::vector<long long> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

inline void check_subsystem(std::size_t idx, const Dims& dims) {
  require(idx < dims.size(), ErrorKind::Index,
          "subsystem index " + std::to_string(idx) + " out of range for dims " + dims_string(dims));
}

}  // namespace detail

/// Partial trace keeping the subsystems in `keep` (original order preserved).
inline Matrix ptrace(const Matrix& rho, const Dims& dims, std::vector<std::size_t> keep) {
  require(!keep.empty(), ErrorKind::Index, "ptrace: keep set is empty");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (auto k : keep) detail::check_subsystem(k, dims);
  require(dims_product(dims) == rho.rows(), ErrorKind::Shape, "ptrace: dims do not match matrix");

  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);

  const auto st = detail::strides(dims);
  Dims kd, td;
  for (auto k : keep) kd.push_back(dims[k]);
  for (auto k : traced) td.push_back(dims[k]);
  const long long nk = dims_product(kd);
  const long long nt = traced.empty() ? 1 : dims_product(td);

  // Offsets into the full index for every kept / traced multi-index.
  auto offsets = [&](const std::vector<std::size_t>& subs, long long count) {
    std::vector<long long> off(count, 0);
    for (long long i = 0; i < count; ++i) {
      long long rem = i;
      long long o = 0;
      for (int j = static_cast<int>(subs.size()) - 1; j >= 0; --j) {
        const int d = dims[subs[j]];
        o += (rem % d) * st[subs[j]];
        rem /= d;
      }
      off[i] = o;
    }
    return off;
  };
  const auto ko = offsets(keep, nk);
  const auto to = offsets(traced, nt);

  Matrix out = Matrix::Zero(nk, nk);
  for (long long i = 0; i < nk; ++i)
    for (long long j = 0; j < nk; ++j) {
      cplx acc = 0.0;
      for (long long t = 0; t < nt; ++t) acc += rho(ko[i] + to[t], ko[j] + to[t]);
      out(i, j) = acc;
    }
  return out;
}

inline DensityMatrix ptrace(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
  std::vector<std::size_t> k = keep;
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  for (auto i : k) detail::check_subsystem(i, rho.dims());
  Dims kd;
  for (auto i : k) kd.push_back(rho.dims()[i]);
  Matrix red = ptrace(rho.matrix(), rho.dims(), k);
  return {0.5 * (red + red.adjoint()), kd};
}

/// Transposes the row/column indices belonging to subsystem `which`.
inline Matrix ptranspose(const Matrix& rho, const Dims& dims, std::size_t which) {
  detail::check_subsystem(which, dims);
  require(dims_product(dims) == rho.rows(), ErrorKind::Shape, "ptranspose: dims do not match matrix");
  const auto st = detail::strides(dims);
  const long long s = st[which];
  const int d = dims[which];
  const Eigen::Index n = rho.rows();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long long di = (i / s) % d;
    for (Eigen::Index j = 0; j < n; ++j) {
      const long long dj = (j / s) % d;
      out(i + (dj - di) * s, j + (di - dj) * s) = rho(i, j);
    }
  }
  return out;
}

inline Operator ptranspose(const DensityMatrix& rho, std::size_t which) {
  return {ptranspose(rho.matrix(), rho.dims(), which), rho.dims()};
}

inline double trace_norm(const Operator& x) { return trace_norm(x.matrix()); }

/// Expectation <psi|op|psi>.
inline cplx expect(const Operator& op, const StateVector& psi) {
  require(op.side() == psi.size(), ErrorKind::Shape, "expect: dimension mismatch");
  return psi.amplitudes().dot(op.matrix() * psi.amplitudes());
}

inline cplx expect(const Operator& op, const DensityMatrix& rho) {
  require(op.side() == rho.side(), ErrorKind::Shape, "expect: dimension mismatch");
  return (op.matrix() * rho.matrix()).trace();
}

}  // namespace nmqt
