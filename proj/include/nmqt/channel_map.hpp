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

// The single-mode dynamical map of a channel,
//   E_t(X) = tr_A[ exp(t L_BA) (X kron |0><0|_A) ],
// and its extension id_R kron E_t to the two-mode resource.
//
// Every channel model conserves the total excitation number of B + ancillas
// (H commutes with it, each collapse operator lowers it by one). Two facts
// follow and are used to keep the joint evolution small:
//   * |i><j|_B kron |0><0|_A only ever reaches states with at most max(i, j)
//     excitations, so the joint space can be cut to N_tot <= mode_dim - 1
//     without changing the result;
//   * |n><m| with N_tot(n) - N_tot(m) = k stays in charge sector k, so the
//     restricted generator is block diagonal with one block per k.
// `channel_map_dense` keeps the plain full-space route for cross-checking.

#pragma once

#include <nmqt/channels.hpp>
#include <nmqt/error.hpp>
#include <nmqt/fock.hpp>
#include <nmqt/linalg.hpp>
#include <nmqt/master.hpp>

#include <Eigen/SparseCore>

#include <cmath>
#include <map>
#include <vector>

namespace nmqt {

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// Sectors up to this size get a dense step matrix; larger ones are stepped by
/// applying the exponential to the fed-in columns only.
inline constexpr Eigen::Index kDenseSectorLimit = 800;

/// exp(t G) V by a Taylor series, with t split so that each piece has
/// |t G|_1 <= 1/2; terms are summed until they drop below roundoff.
inline void expm_action(const SparseMatrix& g, double t, int pieces, Matrix& v) {
  const double h = t / pieces;
  for (int p = 0; p < pieces; ++p) {
    Matrix term = v;
    for (int k = 1; k <= 60; ++k) {
      term = (g * term).eval() * (h / k);
      v += term;
      if (term.cwiseAbs().maxCoeff() <= 1e-17 * v.cwiseAbs().maxCoeff()) break;
    }
  }
}

/// One charge sector of the excitation-restricted Liouvillian.
struct ChargeSector {
  int charge = 0;
  std::vector<std::pair<int, int>> pairs;  // (row state, column state), restricted indices
  SparseMatrix generator;
  Matrix step;        // dense exp(dt G); empty for large sectors
  int pieces = 1;     // Taylor pieces per step for large sectors
  // Columns fed in: (mode-B i, mode-B j) and the local index of |i,0><j,0|.
  std::vector<std::pair<int, int>> inputs;
  std::vector<int> input_local;
  // Entries diagonal in the ancillas: (local index, B row, B column).
  struct Readout {
    int local;
    int b_row;
    int b_col;
  };
  std::vector<Readout> readout;
};

}  // namespace detail

/// Time evolution of the channel map on a fixed grid step.
///
/// One step matrix per charge sector is exponentiated once and reused for every
/// step, so E_{t_n} for all grid times costs n small matrix products. Large
/// sectors skip the dense exponential and propagate only the columns fed in.
class ChannelDynamics {
 public:
  /// Sectors larger than `dense_limit` are stepped without a dense exponential.
  ChannelDynamics(const ChannelSpec& spec, double dt, Eigen::Index dense_limit = detail::kDenseSectorLimit)
      : spec_(spec), dt_(dt), dense_limit_(dense_limit) {
    validate(spec_);
    require(dt >= 0.0 && std::isfinite(dt), ErrorKind::InvalidParameter, "channel step must be >= 0");
    build();
  }

  const ChannelSpec& spec() const { return spec_; }
  double dt() const { return dt_; }
  int mode_dim() const { return spec_.mode_dim; }

  /// Size of the excitation-restricted joint basis.
  int restricted_dim() const { return static_cast<int>(states_.size()); }

  /// Largest charge-sector block.
  int largest_sector() const {
    int m = 0;
    for (const auto& s : sectors_) m = std::max(m, static_cast<int>(s.pairs.size()));
    return m;
  }

  /// Calls visit(n, E_{n dt}) for n = 0..n_steps; E_0 is the identity.
  template <class Visitor>
  void run(int n_steps, Visitor&& visit) const {
    require(n_steps >= 0, ErrorKind::InvalidParameter, "negative step count");
    require(n_steps == 0 || dt_ > 0.0, ErrorKind::InvalidParameter, "stepping needs dt > 0");
    const int nb = spec_.mode_dim;
    std::vector<Matrix> cols(sectors_.size());
    for (std::size_t s = 0; s < sectors_.size(); ++s) {
      const auto& sec = sectors_[s];
      cols[s] = Matrix::Zero(static_cast<Eigen::Index>(sec.pairs.size()), static_cast<Eigen::Index>(sec.inputs.size()));
      for (std::size_t c = 0; c < sec.inputs.size(); ++c) cols[s](sec.input_local[c], static_cast<Eigen::Index>(c)) = 1.0;
    }
    Matrix e(nb * nb, nb * nb);
    for (int n = 0; n <= n_steps; ++n) {
      if (n > 0)
        for (std::size_t s = 0; s < sectors_.size(); ++s)
          if (cols[s].size()) advance(sectors_[s], cols[s]);
      e.setZero();
      for (std::size_t s = 0; s < sectors_.size(); ++s) {
        const auto& sec = sectors_[s];
        for (std::size_t c = 0; c < sec.inputs.size(); ++c) {
          const auto [i, j] = sec.inputs[c];
          const Eigen::Index col = i + static_cast<Eigen::Index>(j) * nb;
          for (const auto& r : sec.readout)
            e(r.b_row + static_cast<Eigen::Index>(r.b_col) * nb, col) += cols[s](r.local, static_cast<Eigen::Index>(c));
        }
      }
      visit(n, Superoperator(e, Dims{nb}));
    }
  }

 private:
  void advance(const detail::ChargeSector& sec, Matrix& v) const {
    if (sec.step.size())
      v = (sec.step * v).eval();
    else
      detail::expm_action(sec.generator, dt_, sec.pieces, v);
  }

  void build() {
    const JointModel model = assemble(spec_);
    const Dims& dims = model.dims;
    const long long full = dims_product(dims);
    const int cap = spec_.mode_dim - 1;

    // Excitation count of every full basis state; keep those within the cap.
    std::vector<int> charge_full(full);
    std::vector<int> to_restricted(full, -1);
    const auto st = detail::strides(dims);
    for (long long idx = 0; idx < full; ++idx) {
      int q = 0;
      for (std::size_t k = 0; k < dims.size(); ++k) q += static_cast<int>((idx / st[k]) % dims[k]);
      charge_full[idx] = q;
      if (q <= cap) {
        to_restricted[idx] = static_cast<int>(states_.size());
        states_.push_back(idx);
        charges_.push_back(q);
      }
    }
    const int ds = static_cast<int>(states_.size());

    auto restrict = [&](const Matrix& m) {
      Matrix r(ds, ds);
      for (int a = 0; a < ds; ++a)
        for (int b = 0; b < ds; ++b) r(a, b) = m(states_[a], states_[b]);
      return r;
    };
    const double tol = 1e-14;
    const Matrix h = restrict(model.hamiltonian.matrix());
    std::vector<Matrix> ls;
    for (const auto& l : model.collapse) ls.push_back(restrict(l.matrix()));

    // The sector decomposition is only valid for charge-respecting operators.
    for (long long a = 0; a < full; ++a)
      for (long long b = 0; b < full; ++b) {
        if (std::abs(model.hamiltonian.matrix()(a, b)) > tol)
          require(charge_full[a] == charge_full[b], ErrorKind::Unsupported,
                  "Hamiltonian does not conserve the excitation number");
        for (const auto& l : model.collapse)
          if (std::abs(l.matrix()(a, b)) > tol)
            require(charge_full[a] == charge_full[b] - 1, ErrorKind::Unsupported,
                    "collapse operator does not lower the excitation number by one");
      }

    Matrix k_sum = Matrix::Zero(ds, ds);
    for (const auto& l : ls) k_sum += l.adjoint() * l;

    // Column nonzeros for the sparse assembly below.
    auto nonzeros = [&](const Matrix& m) {
      std::vector<std::vector<std::pair<int, cplx>>> nz(ds);
      for (int b = 0; b < ds; ++b)
        for (int a = 0; a < ds; ++a)
          if (std::abs(m(a, b)) > tol) nz[b].push_back({a, m(a, b)});
      return nz;
    };
    const auto h_nz = nonzeros(h);
    const auto k_nz = nonzeros(k_sum);
    std::vector<std::vector<std::vector<std::pair<int, cplx>>>> l_nz;
    for (const auto& l : ls) l_nz.push_back(nonzeros(l));

    // Sector membership of every restricted pair (n, m).
    std::map<int, int> sector_of_charge;
    std::vector<int> local(static_cast<std::size_t>(ds) * ds, -1);
    for (int n = 0; n < ds; ++n)
      for (int m = 0; m < ds; ++m) {
        const int k = charges_[n] - charges_[m];
        auto it = sector_of_charge.find(k);
        if (it == sector_of_charge.end()) {
          it = sector_of_charge.emplace(k, static_cast<int>(sectors_.size())).first;
          sectors_.emplace_back();
          sectors_.back().charge = k;
        }
        auto& sec = sectors_[it->second];
        local[static_cast<std::size_t>(n) * ds + m] = static_cast<int>(sec.pairs.size());
        sec.pairs.push_back({n, m});
      }
    auto loc = [&](int n, int m) { return local[static_cast<std::size_t>(n) * ds + m]; };

    const int nb = spec_.mode_dim;
    const long long b_stride = st[0];
    for (auto& sec : sectors_) {
      const auto sz = static_cast<Eigen::Index>(sec.pairs.size());
      std::vector<Eigen::Triplet<cplx>> trip;
      auto add = [&](int row, Eigen::Index col, cplx v) { trip.emplace_back(row, static_cast<int>(col), v); };
      for (Eigen::Index c = 0; c < sz; ++c) {
        const auto [n, m] = sec.pairs[c];
        // -i H |n><m|
        for (const auto& [a, v] : h_nz[n]) add(loc(a, m), c, -kI * v);
        // +i |n><m| H = +i sum_b H(m, b) |n><b|; H Hermitian so H(m,b) = conj(H(b,m)).
        for (const auto& [b, v] : h_nz[m]) add(loc(n, b), c, kI * std::conj(v));
        // L |n><m| L^dag
        for (const auto& lz : l_nz)
          for (const auto& [a, va] : lz[n])
            for (const auto& [b, vb] : lz[m]) add(loc(a, b), c, va * std::conj(vb));
        // -1/2 K |n><m| - 1/2 |n><m| K with K = sum L^dag L Hermitian
        for (const auto& [a, v] : k_nz[n]) add(loc(a, m), c, -0.5 * v);
        for (const auto& [b, v] : k_nz[m]) add(loc(n, b), c, -0.5 * std::conj(v));
      }
      sec.generator.resize(sz, sz);
      sec.generator.setFromTriplets(trip.begin(), trip.end());
      if (dt_ <= 0.0) {
        sec.step = Matrix::Identity(sz, sz);
      } else if (sz <= dense_limit_) {
        sec.step = expm(dt_ * Matrix(sec.generator));
      } else {
        double norm = 0.0;
        for (Eigen::Index c = 0; c < sz; ++c) {
          double col = 0.0;
          for (detail::SparseMatrix::InnerIterator it(sec.generator, c); it; ++it) col += std::abs(it.value());
          norm = std::max(norm, col);
        }
        sec.pieces = std::max(1, static_cast<int>(std::ceil(2.0 * norm * dt_)));
      }

      for (Eigen::Index c = 0; c < sz; ++c) {
        const auto [n, m] = sec.pairs[c];
        const long long fn = states_[n], fm = states_[m];
        if (fn % b_stride == fm % b_stride)
          sec.readout.push_back({static_cast<int>(c), static_cast<int>(fn / b_stride), static_cast<int>(fm / b_stride)});
      }
    }
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) {
        const int n = to_restricted[i * b_stride];
        const int m = to_restricted[j * b_stride];
        auto& sec = sectors_[sector_of_charge.at(charges_[n] - charges_[m])];
        sec.inputs.push_back({i, j});
        sec.input_local.push_back(loc(n, m));
      }
    // Sectors nobody feeds into never influence the map.
    std::erase_if(sectors_, [](const detail::ChargeSector& s) { return s.inputs.empty(); });
  }

  ChannelSpec spec_;
  double dt_;
  Eigen::Index dense_limit_;
  std::vector<long long> states_;
  std::vector<int> charges_;
  std::vector<detail::ChargeSector> sectors_;
};

/// E_t on mode B alone.
inline Superoperator channel_map(const ChannelSpec& spec, double t) {
  require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidParameter, "channel_map needs t >= 0");
  if (t == 0.0) return Superoperator::identity(Dims{spec.mode_dim});
  ChannelDynamics dyn(spec, t);
  Superoperator out;
  dyn.run(1, [&](int n, const Superoperator& e) {
    if (n == 1) out = e;
  });
  return out;
}

/// E_t by exponentiating the full joint generator; reference route.
inline Superoperator channel_map_dense(const ChannelSpec& spec, double t) {
  require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidParameter, "channel_map needs t >= 0");
  const JointModel model = assemble(spec);
  const Superoperator gen = liouvillian(model.hamiltonian, model.collapse);
  const long long dj = dims_product(model.dims);
  const int nb = spec.mode_dim;
  const long long da = dj / nb;
  const Matrix step = t > 0.0 ? expm(t * gen.matrix()) : Matrix::Identity(dj * dj, dj * dj);
  Matrix e = Matrix::Zero(nb * nb, nb * nb);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      // |i><j| kron |0><0|_A  sits at joint row i*da, column j*da.
      const Eigen::Index in = i * da + static_cast<Eigen::Index>(j * da) * dj;
      const Vector out = step.col(in);
      const Matrix full = unvec(out, dj);
      const Matrix red = ptrace(full, model.dims, {0});
      e.col(i + static_cast<Eigen::Index>(j) * nb) = vec(red);
    }
  return {std::move(e), Dims{nb}};
}

/// (id_R kron E)(rho_RB) for rho_RB on R kron B.
inline Matrix apply_on_b(const Superoperator& e, const Matrix& rho_rb, int dim_r) {
  const Eigen::Index nb = e.hilbert_side();
  require(rho_rb.rows() == dim_r * nb && rho_rb.cols() == dim_r * nb, ErrorKind::Shape,
          "apply_on_b: resource dims do not match the channel mode");
  // Stack every R block rho^{ij} = <i|_R rho |j>_R as a column, map them together.
  Matrix blocks(nb * nb, static_cast<Eigen::Index>(dim_r) * dim_r);
  for (int i = 0; i < dim_r; ++i)
    for (int j = 0; j < dim_r; ++j) {
      const Matrix blk = rho_rb.block(i * nb, j * nb, nb, nb);
      blocks.col(i + static_cast<Eigen::Index>(j) * dim_r) = vec(blk);
    }
  const Matrix mapped = e.matrix() * blocks;
  Matrix out(rho_rb.rows(), rho_rb.cols());
  for (int i = 0; i < dim_r; ++i)
    for (int j = 0; j < dim_r; ++j)
      out.block(i * nb, j * nb, nb, nb) = unvec(mapped.col(i + static_cast<Eigen::Index>(j) * dim_r), nb);
  return out;
}

inline DensityMatrix apply_on_b(const Superoperator& e, const DensityMatrix& rho_rb) {
  require(rho_rb.dims().size() == 2, ErrorKind::Shape, "apply_on_b expects a two-mode R kron B state");
  const Matrix out = apply_on_b(e, rho_rb.matrix(), rho_rb.dims()[0]);
  return {0.5 * (out + out.adjoint()), rho_rb.dims()};
}

/// rho_B(t_n) = E_{t_n}(rho_B(0)) over a grid, via the channel map.
inline std::vector<DensityMatrix> evolve_through_channel(const ChannelSpec& spec, const DensityMatrix& rho_b,
                                                         const TimeGrid& grid) {
  require(rho_b.dims() == Dims{spec.mode_dim}, ErrorKind::Shape, "state does not live on the channel mode");
  std::vector<DensityMatrix> out;
  if (grid.degenerate()) return {rho_b};
  ChannelDynamics dyn(spec, grid.dt());
  dyn.run(grid.n_steps(), [&](int n, const Superoperator& e) {
    const Matrix m = e.apply(rho_b.matrix());
    out.push_back(detail::checked_snapshot(m, rho_b.dims(), n, grid.time(n)));
  });
  return out;
}

}  // namespace nmqt
