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

// Augmented-system models of quantum channels driven by Lorentzian noise.
//
// Mode B (the channel) couples to damped ancilla oscillators through
//   H_BA,k = i (c_k^dag z_k - z_k^dag c_k),  c_k = -sqrt(gamma_k)/2 a_k,  z_k = sqrt(kappa_k) a_B,
// with H_A,k = omega_k a_k^dag a_k and collapse operator sqrt(gamma_k) a_k.
// H_B and H_R are multiples of the identity and drop out of every generator.
//
// All rates are given in the same physical unit as omega_b (e.g. GHz); time is
// measured in units of 1/omega_b, so every generator entry is divided by omega_b.

#pragma once

#include <nmqt/error.hpp>
#include <nmqt/fock.hpp>
#include <nmqt/master.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace nmqt {

inline constexpr double kDefaultOmegaB = 10.0;
inline constexpr int kDefaultAncillaDim = 5;

struct AncillaSpec {
  double omega = kDefaultOmegaB;
  double gamma = 1.0;
  double kappa = 0.0;
  int dim = kDefaultAncillaDim;
};

struct ChannelSpec {
  int mode_dim = 8;
  double omega_b = kDefaultOmegaB;
  std::vector<AncillaSpec> ancillas;
  bool markovian_reference = false;
  /// Direct couplings sqrt(kappa_k) a_B of a Markovian reference channel.
  std::vector<double> kappas;
};

/// Every violated constraint, each prefixed by its field path.
inline std::vector<std::string> validation_errors(const ChannelSpec& spec, const std::string& path = "channel") {
  std::vector<std::string> errs;
  auto bad = [&](bool cond, const std::string& field, const std::string& msg) {
    if (cond) errs.push_back(path + "." + field + ": " + msg);
  };
  bad(spec.mode_dim < 2, "mode_dim", "must be >= 2");
  bad(!(spec.omega_b > 0.0) || !std::isfinite(spec.omega_b), "omega_b", "must be positive");
  if (spec.markovian_reference) {
    bad(spec.kappas.empty(), "kappas", "Markovian reference needs at least one coupling");
    bad(!spec.ancillas.empty(), "ancillas", "Markovian reference has no ancillas");
    for (std::size_t k = 0; k < spec.kappas.size(); ++k)
      bad(!(spec.kappas[k] >= 0.0) || !std::isfinite(spec.kappas[k]), "kappas[" + std::to_string(k) + "]", "must be >= 0");
  } else {
    bad(spec.ancillas.empty(), "ancillas", "non-Markovian channel needs at least one ancilla");
    for (std::size_t k = 0; k < spec.ancillas.size(); ++k) {
      const auto& a = spec.ancillas[k];
      const std::string p = "ancillas[" + std::to_string(k) + "]";
      bad(!(a.gamma > 0.0) || !std::isfinite(a.gamma), p + ".gamma", "must be > 0");
      bad(!(a.kappa >= 0.0) || !std::isfinite(a.kappa), p + ".kappa", "must be >= 0");
      bad(!std::isfinite(a.omega), p + ".omega", "must be finite");
      bad(a.dim < 2, p + ".dim", "must be >= 2");
    }
  }
  return errs;
}

inline void validate(const ChannelSpec& spec) {
  const auto errs = validation_errors(spec);
  if (errs.empty()) return;
  std::string msg;
  for (const auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
  fail(ErrorKind::InvalidParameter, msg);
}

/// Single damped oscillator at resonance (omega_0 = omega_b).
inline ChannelSpec lorentzian_channel(double gamma0, double kappa0, double omega0 = kDefaultOmegaB, int mode_dim = 8,
                                      int anc_dim = kDefaultAncillaDim) {
  require(gamma0 > 0.0, ErrorKind::InvalidParameter, "gamma0 must be > 0");
  require(kappa0 >= 0.0, ErrorKind::InvalidParameter, "kappa0 must be >= 0");
  require(omega0 > 0.0, ErrorKind::InvalidParameter, "omega0 must be > 0");
  ChannelSpec spec;
  spec.mode_dim = mode_dim;
  spec.omega_b = omega0;
  spec.ancillas.push_back({omega0, gamma0, kappa0, anc_dim});
  validate(spec);
  return spec;
}

struct LorentzianTerm {
  double omega;
  double gamma;
  double kappa;
};

inline ChannelSpec two_lorentzian_channel(const LorentzianTerm& first, const LorentzianTerm& second, double omega_b,
                                          int mode_dim = 8, int anc_dim1 = kDefaultAncillaDim,
                                          int anc_dim2 = kDefaultAncillaDim) {
  for (const auto* t : {&first, &second}) {
    require(t->gamma > 0.0, ErrorKind::InvalidParameter, "gamma_k must be > 0");
    require(t->kappa >= 0.0, ErrorKind::InvalidParameter, "kappa_k must be >= 0");
  }
  ChannelSpec spec;
  spec.mode_dim = mode_dim;
  spec.omega_b = omega_b;
  spec.ancillas.push_back({first.omega, first.gamma, first.kappa, anc_dim1});
  spec.ancillas.push_back({second.omega, second.gamma, second.kappa, anc_dim2});
  validate(spec);
  return spec;
}

/// White-noise limit: drho_B/dt = sum_k D[sqrt(kappa_k) a_B] rho_B.
inline ChannelSpec markovian_reference(const std::vector<double>& kappas, int mode_dim = 8,
                                       double omega_b = kDefaultOmegaB) {
  require(!kappas.empty(), ErrorKind::InvalidParameter, "Markovian reference needs at least one kappa");
  ChannelSpec spec;
  spec.mode_dim = mode_dim;
  spec.omega_b = omega_b;
  spec.markovian_reference = true;
  spec.kappas = kappas;
  validate(spec);
  return spec;
}

/// The Markovian channel a non-Markovian spec reduces to; depends only on the kappas.
inline ChannelSpec markovian_reference_of(const ChannelSpec& spec) {
  if (spec.markovian_reference) return spec;
  std::vector<double> kappas;
  for (const auto& a : spec.ancillas) kappas.push_back(a.kappa);
  return markovian_reference(kappas, spec.mode_dim, spec.omega_b);
}

/// Sum of Lorentzians (gamma_k^2/4) / (gamma_k^2/4 + (omega - omega_k)^2).
inline std::vector<double> psd(const ChannelSpec& spec, const std::vector<double>& omegas) {
  require(!spec.markovian_reference, ErrorKind::Unsupported, "white-noise reference has no Lorentzian spectrum");
  std::vector<double> s(omegas.size(), 0.0);
  for (std::size_t i = 0; i < omegas.size(); ++i)
    for (const auto& a : spec.ancillas) {
      const double hw2 = 0.25 * a.gamma * a.gamma;
      const double det = omegas[i] - a.omega;
      s[i] += hw2 / (hw2 + det * det);
    }
  return s;
}

/// Dimensionless Hamiltonian and collapse operators on B (+ ancillas).
struct JointModel {
  Dims dims;
  Operator hamiltonian;
  std::vector<Operator> collapse;
};

inline JointModel assemble(const ChannelSpec& spec) {
  validate(spec);
  const double wb = spec.omega_b;
  JointModel m;
  m.dims.push_back(spec.mode_dim);
  for (const auto& a : spec.ancillas) m.dims.push_back(a.dim);
  const long long d = dims_product(m.dims);
  const Operator a_b = embed(destroy(spec.mode_dim), 0, m.dims);
  Matrix h = Matrix::Zero(d, d);
  if (spec.markovian_reference) {
    for (double k : spec.kappas) m.collapse.push_back(std::sqrt(k / wb) * a_b);
  } else {
    for (std::size_t k = 0; k < spec.ancillas.size(); ++k) {
      const auto& anc = spec.ancillas[k];
      const Matrix a_k = embed(destroy(anc.dim), k + 1, m.dims).matrix();
      const Matrix c = -0.5 * std::sqrt(anc.gamma / wb) * a_k;
      const Matrix z = std::sqrt(anc.kappa / wb) * a_b.matrix();
      h += (anc.omega / wb) * a_k.adjoint() * a_k;
      h += kI * (c.adjoint() * z - z.adjoint() * c);
      m.collapse.push_back(Operator(std::sqrt(anc.gamma / wb) * a_k, m.dims));
    }
  }
  m.hamiltonian = Operator(std::move(h), m.dims);
  return m;
}

/// Joint generator on B (+ ancillas).
inline Superoperator generator(const ChannelSpec& spec) {
  const JointModel m = assemble(spec);
  return liouvillian(m.hamiltonian, m.collapse);
}

}  // namespace nmqt
