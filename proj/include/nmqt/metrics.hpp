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

// Entanglement and non-Markovianity quantifiers.

#pragma once

#include <nmqt/channel_map.hpp>
#include <nmqt/channels.hpp>
#include <nmqt/error.hpp>
#include <nmqt/fock.hpp>
#include <nmqt/master.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace nmqt {

/// A labelled time series.
class MetricSeries {
 public:
  MetricSeries() = default;
  MetricSeries(std::string label, std::vector<double> times, std::vector<double> values)
      : label_(std::move(label)), times_(std::move(times)), values_(std::move(values)) {
    require(times_.size() == values_.size(), ErrorKind::Shape, "series '" + label_ + "': times and values differ in length");
    for (std::size_t i = 1; i < times_.size(); ++i)
      require(times_[i] > times_[i - 1], ErrorKind::InvalidParameter, "series '" + label_ + "': times not increasing");
  }

  const std::string& label() const { return label_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double back() const { return values_.back(); }

 private:
  std::string label_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// log2 of the trace norm of the partial transpose on subsystem `split`.
inline double log_negativity(const DensityMatrix& rho, std::size_t split = 1) {
  require(rho.dims().size() >= 2, ErrorKind::InvalidSplit, "log-negativity needs at least two subsystems");
  require(split < rho.dims().size(), ErrorKind::InvalidSplit, "split index out of range");
  const Matrix pt = ptranspose(rho.matrix(), rho.dims(), split);
  const double tn = trace_norm(pt, 1e-9);
  return std::max(0.0, std::log2(tn));
}

/// tr|rho1 - rho2| / 2.
inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  require(rho1.dims() == rho2.dims(), ErrorKind::Shape,
          "trace distance of states with dims " + dims_string(rho1.dims()) + " and " + dims_string(rho2.dims()));
  const Matrix diff = rho1.matrix() - rho2.matrix();
  return std::clamp(0.5 * trace_norm(Matrix(0.5 * (diff + diff.adjoint())), 1e-9), 0.0, 1.0);
}

/// Cumulative sum of positive increments of a sampled curve.
inline std::vector<double> cumulative_backflow(const std::vector<double>& d) {
  std::vector<double> n(d.size(), 0.0);
  for (std::size_t k = 1; k < d.size(); ++k) n[k] = n[k - 1] + std::max(d[k] - d[k - 1], 0.0);
  return n;
}

/// E_N(t) of a two-mode squeezed vacuum whose B mode crosses the channel.
inline MetricSeries entanglement_series(const ChannelSpec& spec, double r, int dim_r, const TimeGrid& grid) {
  const DensityMatrix rho0 = DensityMatrix::from_pure(tmsv(dim_r, spec.mode_dim, r));
  std::vector<double> en;
  en.reserve(grid.size());
  if (grid.degenerate()) {
    en.push_back(log_negativity(rho0));
  } else {
    ChannelDynamics dyn(spec, grid.dt());
    dyn.run(grid.n_steps(), [&](int n, const Superoperator& e) {
      en.push_back(log_negativity(detail::checked_snapshot(apply_on_b(e, rho0.matrix(), dim_r), rho0.dims(), n, grid.time(n))));
    });
  }
  return MetricSeries("log_negativity", grid.times(), std::move(en));
}

struct StatePair {
  DensityMatrix first;
  DensityMatrix second;
  std::string label;
};

struct BlpResult {
  MetricSeries distance;
  MetricSeries backflow;
  /// Steps where |D(t_k) - D(t_{k-1})| exceeded 0.1; the grid is too coarse there.
  std::vector<std::string> warnings;
};

inline constexpr double kBlpResolutionLimit = 0.1;

/// Trace distance of a pair evolved through the channel, and its cumulative
/// positive increments (the discrete BLP integral).
inline BlpResult blp_series(const ChannelSpec& spec, const StatePair& pair, const TimeGrid& grid) {
  const Dims mode{spec.mode_dim};
  require(pair.first.dims() == mode && pair.second.dims() == mode, ErrorKind::Shape,
          "BLP pair must live on the channel mode (dims " + dims_string(mode) + ")");
  std::vector<double> d;
  d.reserve(grid.size());
  if (grid.degenerate()) {
    d.push_back(trace_distance(pair.first, pair.second));
  } else {
    ChannelDynamics dyn(spec, grid.dt());
    dyn.run(grid.n_steps(), [&](int n, const Superoperator& e) {
      const auto r1 = detail::checked_snapshot(e.apply(pair.first.matrix()), mode, n, grid.time(n));
      const auto r2 = detail::checked_snapshot(e.apply(pair.second.matrix()), mode, n, grid.time(n));
      d.push_back(trace_distance(r1, r2));
    });
  }
  BlpResult out;
  for (std::size_t k = 1; k < d.size(); ++k)
    if (std::abs(d[k] - d[k - 1]) > kBlpResolutionLimit)
      out.warnings.push_back("trace distance jumps by " + std::to_string(std::abs(d[k] - d[k - 1])) + " at t=" +
                             std::to_string(grid.time(static_cast<int>(k))) + "; refine the time grid");
  const auto t = grid.times();
  out.backflow = MetricSeries("blp", t, cumulative_backflow(d));
  out.distance = MetricSeries("trace_distance", t, std::move(d));
  return out;
}

/// Default candidate pairs: (|0>, |1>) and (|alpha>, |-alpha>) for alpha in {0.5, 1}.
inline std::vector<StatePair> default_blp_candidates(int mode_dim) {
  std::vector<StatePair> c;
  c.push_back({DensityMatrix::from_pure(fock_state(mode_dim, 0)), DensityMatrix::from_pure(fock_state(mode_dim, 1)),
               "fock01"});
  for (double a : {0.5, 1.0}) {
    if (a * a > mode_dim / 4.0) continue;
    c.push_back({DensityMatrix::from_pure(coherent(mode_dim, a)), DensityMatrix::from_pure(coherent(mode_dim, -a)),
                 "coherent_pm" + std::to_string(a).substr(0, 3)});
  }
  return c;
}

struct BlpMax {
  double value = 0.0;
  std::size_t best = 0;
  std::vector<double> per_candidate;
};

/// Max over candidates of the accumulated backflow at the end of the grid.
inline BlpMax blp_max_detail(const ChannelSpec& spec, const std::vector<StatePair>& candidates, const TimeGrid& grid) {
  require(!candidates.empty(), ErrorKind::InvalidParameter, "BLP maximization needs at least one candidate pair");
  for (const auto& p : candidates)
    require(p.first.dims() == Dims{spec.mode_dim} && p.second.dims() == Dims{spec.mode_dim}, ErrorKind::Shape,
            "BLP candidate does not live on the channel mode");
  // One channel evolution serves every pair.
  std::vector<std::vector<double>> d(candidates.size());
  if (grid.degenerate()) {
    for (std::size_t c = 0; c < candidates.size(); ++c) d[c].push_back(0.0);
  } else {
    ChannelDynamics dyn(spec, grid.dt());
    const Dims mode{spec.mode_dim};
    dyn.run(grid.n_steps(), [&](int n, const Superoperator& e) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto r1 = detail::checked_snapshot(e.apply(candidates[c].first.matrix()), mode, n, grid.time(n));
        const auto r2 = detail::checked_snapshot(e.apply(candidates[c].second.matrix()), mode, n, grid.time(n));
        d[c].push_back(trace_distance(r1, r2));
      }
    });
  }
  BlpMax out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double v = cumulative_backflow(d[c]).back();
    out.per_candidate.push_back(v);
    if (c == 0 || v > out.value) {
      out.value = v;
      out.best = c;
    }
  }
  return out;
}

inline double blp_max(const ChannelSpec& spec, const std::vector<StatePair>& candidates, const TimeGrid& grid) {
  return blp_max_detail(spec, candidates, grid).value;
}

}  // namespace nmqt
