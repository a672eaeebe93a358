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

#include "helpers.hpp"

#include <nmqt/teleport.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace nmqt;
using nmqt::testing::random_density;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an nmqt::Error");
  return ErrorKind::Validation;
}

double closed_form(double r) { return 1.0 / (1.0 + std::exp(-2.0 * r)); }

DensityMatrix resource(int dim, double r) { return DensityMatrix::from_pure(tmsv(dim, dim, r)); }

TeleportConfig config(const InputState& in, double r, int dim, ChannelSpec channel) {
  TeleportConfig c;
  c.input = in;
  c.r = r;
  c.dim_r = dim;
  c.channel = std::move(channel);
  c.grid = QuadratureGrid::for_input(in);
  return c;
}

// Phase-space oracle for an ideal channel. The input Wigner function is a sum of
// Gaussians with (possibly complex) centers and vacuum variance 1/4; unity-gain
// teleportation convolves it with variance e^{-2r}/2, and tr[rho sigma] equals
// pi times the overlap integral of the two Wigner functions.
struct Blob {
  cplx weight, mx, mp;
};

std::vector<Blob> cat_blobs(double a, double theta) {
  const double n2 = 2.0 * (1.0 + std::exp(-2.0 * a * a) * std::cos(theta));
  const double c = std::exp(-2.0 * a * a) / n2;
  return {{1.0 / n2, a, 0.0},
          {1.0 / n2, -a, 0.0},
          {c * std::polar(1.0, -theta), 0.0, cplx(0.0, -a)},
          {c * std::polar(1.0, theta), 0.0, cplx(0.0, a)}};
}

double phase_space_fidelity(const std::vector<Blob>& blobs, double r) {
  const double s = 0.5 + 0.5 * std::exp(-2.0 * r);
  cplx f = 0.0;
  for (const auto& k : blobs)
    for (const auto& l : blobs) {
      const cplx dx = k.mx - l.mx, dp = k.mp - l.mp;
      f += k.weight * l.weight * std::exp(-(dx * dx + dp * dp) / (2.0 * s)) / (2.0 * s);
    }
  return f.real();
}

}  // namespace

TEST_CASE("quadrature grid: validation and nodes") {
  const QuadratureGrid g(5.0, 61);
  CHECK(g.nodes().front() == -5.0);
  CHECK(g.nodes()[30] == 0.0);
  CHECK(g.refined().points() == 121);
  double w = 0.0;
  for (double v : g.weights()) w += v;
  CHECK(std::abs(w - 10.0) < 1e-12);
  CHECK(kind_of([] { QuadratureGrid(5.0, 19); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { QuadratureGrid(5.0, 60); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { QuadratureGrid(0.0, 61); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("bell_project: positivity, normalization, vacuum peak, shape check") {
  const int dim = 8;
  const DensityMatrix rho_e = InputState::coherent(1.0).density(dim);
  const DensityMatrix rho_rb = resource(dim, 0.346);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k = 0; k < 50; ++k) CHECK(bell_project(rho_e, rho_rb, u(gen), u(gen)).probability >= 0.0);
  const QuadratureGrid g = QuadratureGrid::for_input(InputState::coherent(1.0));
  const auto x = g.nodes();
  const auto w = g.weights();
  double total = 0.0;
  for (int i = 0; i < g.points(); ++i)
    for (int j = 0; j < g.points(); ++j) total += w[i] * w[j] * bell_project(rho_e, rho_rb, x[i], x[j]).probability;
  CHECK(std::abs(total - 1.0) <= 2e-2);
  const DensityMatrix vac = DensityMatrix::from_pure(vacuum(dim));
  const DensityMatrix r0 = resource(dim, 0.0);
  double best = -1.0;
  int bi = -1, bj = -1;
  for (int i = 0; i < g.points(); ++i)
    for (int j = 0; j < g.points(); ++j) {
      const double p = bell_project(vac, r0, x[i], x[j]).probability;
      if (p > best) best = p, bi = i, bj = j;
    }
  CHECK(bi == g.points() / 2);
  CHECK(bj == g.points() / 2);
  CHECK(std::abs(bell_project(vac, r0, 0.7, 0.0).probability - bell_project(vac, r0, 0.0, 0.7).probability) < 1e-12);
  CHECK(kind_of([&] { bell_project(InputState::coherent(1.0).density(6), rho_rb, 0.0, 0.0); }) == ErrorKind::Shape);
}

TEST_CASE("reconstruct: origin, trace, near-EPR limit, negligible outcomes") {
  const int dim = 8;
  const DensityMatrix rho_e = InputState::coherent(0.5).density(dim);
  const DensityMatrix rho_rb = resource(dim, 0.346);
  const BellOutcome o = bell_project(rho_e, rho_rb, 0.0, 0.0);
  const DensityMatrix out = reconstruct(o, 0.0, 0.0);
  CHECK((out.matrix() - o.sigma / o.probability).cwiseAbs().maxCoeff() <= 1e-12);
  const DensityMatrix moved = reconstruct(bell_project(rho_e, rho_rb, 0.4, -0.3), 0.4, -0.3);
  CHECK(std::abs(moved.matrix().trace().real() - 1.0) <= 1e-9);
  const int big = 20;
  const DensityMatrix in = InputState::coherent(0.5).density(big);
  const DensityMatrix epr = resource(big, 2.0);
  for (const auto& [xm, pp] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.3, -0.2}, {-0.5, 0.4}}) {
    const DensityMatrix res = reconstruct(bell_project(in, epr, xm, pp), xm, pp);
    CHECK(fidelity_single(in, res) >= 0.95);
  }
  const DensityMatrix vac = DensityMatrix::from_pure(vacuum(dim));
  CHECK(kind_of([&] { reconstruct(bell_project(vac, resource(dim, 0.0), 8.0, 8.0), 8.0, 8.0); }) ==
        ErrorKind::NegligibleProbability);
}

TEST_CASE("fidelity_single: pure, orthogonal, brute-force mixed pair") {
  const DensityMatrix c = InputState::coherent(0.7).density(8);
  CHECK(std::abs(fidelity_single(c, c) - 1.0) <= 1e-12);
  CHECK(fidelity_single(DensityMatrix::from_pure(fock_state(4, 0)), DensityMatrix::from_pure(fock_state(4, 2))) == 0.0);
  const DensityMatrix a = random_density(4), b = random_density(4);
  cplx brute = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) brute += a.matrix()(i, j) * b.matrix()(j, i);
  CHECK(std::abs(fidelity_single(a, b) - brute.real()) <= 1e-12);
  CHECK(kind_of([&] { fidelity_single(a, c); }) == ErrorKind::Shape);
}

TEST_CASE("average_fidelity: closed form for coherent input") {
  const int dim = 10;
  for (double r : {0.0, 0.346, 0.6}) {
    const TeleportConfig c = config(InputState::coherent(1.0), r, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
    CHECK(std::abs(average_fidelity(c, resource(dim, r)) - closed_form(r)) <= 5e-3);
  }
}

TEST_CASE("average_fidelity: cat inputs match the phase-space oracle") {
  const int dim = 10;
  const double r = 0.4;
  for (double theta : {0.0, kPi}) {
    const InputState in = InputState::cat(1.0, theta);
    const TeleportConfig c = config(in, r, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
    CHECK(std::abs(average_fidelity(c, resource(dim, r)) - phase_space_fidelity(cat_blobs(1.0, theta), r)) <= 2e-3);
  }
  // The 2/3 benchmark is met by the coherent input at this squeezing; the cat
  // inputs stay below it (0.512 even, 0.383 odd), as the oracle above confirms.
  const TeleportConfig c = config(InputState::coherent(1.0), r, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
  CHECK(average_fidelity(c, resource(dim, r)) >= 2.0 / 3.0);
  CHECK(phase_space_fidelity(cat_blobs(1.0, 0.0), r) < 2.0 / 3.0);
}

TEST_CASE("average_fidelity: the refinement gate rejects a coarse grid") {
  const int dim = 8;
  TeleportConfig c = config(InputState::coherent(1.0), 0.346, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
  c.grid = QuadratureGrid(30.0, 21);
  CHECK(kind_of([&] { average_fidelity(c, resource(dim, 0.346)); }) == ErrorKind::Resolution);
}

TEST_CASE("fidelity kernel equals the direct integral on an evolved resource") {
  const int dim = 8;
  const ChannelSpec spec = lorentzian_channel(0.8, 4.0, 10.0, dim);
  const InputState in = InputState::squeezed(0.6, 0.5, 0.3);
  const TeleportConfig c = config(in, 0.346, dim, spec);
  const DensityMatrix rho = apply_on_b(channel_map(spec, 7.0), resource(dim, 0.346));
  const FidelityKernel k(in, dim, dim, c.grid);
  CHECK(std::abs(k.average(rho.matrix()) - average_fidelity(c, rho)) <= 1e-12);
}

TEST_CASE("relative_fidelity: unit baseline and invalid baseline") {
  const MetricSeries f("fidelity", {0.0, 1.0, 2.0}, {0.6, 0.55, 0.57});
  const MetricSeries r = relative_fidelity(f);
  CHECK(r[0] == 1.0);
  CHECK(std::abs(r[1] - 0.55 / 0.6) < 1e-15);
  CHECK(kind_of([] { relative_fidelity(MetricSeries("f", {0.0, 1.0}, {0.0, 0.1})); }) == ErrorKind::InvalidBaseline);
}

TEST_CASE("wigner: vacuum and odd cat at the origin, normalization") {
  const double two_over_pi = 2.0 / kPi;
  CHECK(std::abs(wigner(DensityMatrix::from_pure(vacuum(10)), {0.0}, {0.0})(0, 0) - two_over_pi) <= 1e-6);
  CHECK(std::abs(wigner(InputState::cat(1.0, kPi).density(12), {0.0}, {0.0})(0, 0) + two_over_pi) <= 1e-4);
  const auto xs = linspace(-4.0, 4.0, 81);
  const RMatrix w = wigner(InputState::coherent(cplx(0.5, 0.2)).density(10), xs, xs);
  const double h = xs[1] - xs[0];
  CHECK(std::abs(w.sum() * h * h - 1.0) <= 2e-2);
  // Coherent-state Wigner function is the Gaussian (2/pi) exp(-2|beta - alpha|^2).
  const double ref = two_over_pi * std::exp(-2.0 * (std::pow(xs[44] - 0.5, 2) + std::pow(xs[38] - 0.2, 2)));
  CHECK(std::abs(w(44, 38) - ref) <= 1e-6);
  CHECK(kind_of([] { wigner(DensityMatrix::from_pure(tmsv(3, 3, 0.2)), {0.0}, {0.0}); }) == ErrorKind::Shape);
}

TEST_CASE("ellipse: coherent circle and squeezed ellipse") {
  const EllipseDiagnostics c = ellipse(InputState::coherent(1.0).density(12));
  CHECK(std::abs(c.amplitude - 1.0) <= 1e-6);
  CHECK(std::abs(c.major - 0.5) <= 1e-5);
  CHECK(std::abs(c.flattening) <= 1e-4);
  const EllipseDiagnostics s = ellipse(InputState::squeezed(0.0, 0.5).density(30));
  CHECK(std::abs(s.major / s.minor - std::exp(1.0)) <= 1e-4);
  CHECK(std::abs(std::abs(s.angle_deg) - 90.0) <= 1e-6);
}

TEST_CASE("averaged output: unity gain keeps the mean amplitude") {
  const int dim = 10;
  const InputState in = InputState::coherent(cplx(0.6, -0.3));
  const DensityMatrix out = averaged_output(in, resource(dim, 0.346), QuadratureGrid::for_input(in));
  const EllipseDiagnostics e = ellipse(out);
  CHECK(std::abs(e.center_x - 0.6) <= 2e-3);
  CHECK(std::abs(e.center_p + 0.3) <= 2e-3);
  // Output variance: vacuum plus the e^{-2r}/2 teleportation noise.
  CHECK(std::abs(e.major * e.major - (0.25 + 0.5 * std::exp(-0.692))) <= 5e-3);
}

TEST_CASE("run_teleportation: ideal channel, Markovian monotonicity, invariants") {
  const int dim = 8;
  TeleportConfig c = config(InputState::coherent(1.0), 0.346, dim, lorentzian_channel(0.8, 0.0, 10.0, dim));
  c.times = TimeGrid(0.0, 20.0, 100);
  const TeleportResult ideal = run_teleportation(c);
  for (std::size_t i = 0; i < ideal.fidelity.size(); ++i) CHECK(std::abs(ideal.fidelity[i] - ideal.fidelity[0]) <= 1e-6);
  CHECK(ideal.relative[0] == 1.0);
  c.channel = markovian_reference({4.0}, dim);
  const TeleportResult mk = run_teleportation(c);
  for (std::size_t i = 1; i < mk.fidelity.size(); ++i) {
    CHECK(mk.fidelity[i] <= mk.fidelity[i - 1] + 1e-6);
    CHECK(mk.fidelity[i] >= 0.0);
    CHECK(mk.fidelity[i] <= 1.0);
  }
}

TEST_CASE("run_teleportation: Lorentzian channel holds F above 1/2 and above Markov for t <= 20") {
  const int dim = 8;
  TeleportConfig c = config(InputState::coherent(1.0), 0.346, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
  c.times = TimeGrid(0.0, 20.0, 200);
  const TeleportResult nm = run_teleportation(c);
  c.channel = markovian_reference_of(c.channel);
  const TeleportResult mk = run_teleportation(c);
  for (std::size_t i = 0; i < nm.fidelity.size(); ++i) {
    CHECK(nm.fidelity[i] > 0.5);
    CHECK(nm.fidelity[i] >= mk.fidelity[i] - 1e-3);
  }
  CHECK(nm.fidelity.back() - mk.fidelity.back() > 0.05);
}

TEST_CASE("run_teleportation: errors carry the transit time; validation runs first") {
  const int dim = 8;
  TeleportConfig c = config(InputState::coherent(1.0), 0.346, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
  c.times = TimeGrid(0.0, 1.0, 2);
  c.grid = QuadratureGrid(30.0, 21);
  try {
    run_teleportation(c);
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resolution);
    CHECK(std::string(e.what()).find("t=") != std::string::npos);
  }
  TeleportConfig bad = config(InputState::coherent(1.0), 0.346, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
  bad.input = InputState::coherent(2.0);
  bad.r = -1.0;
  try {
    run_teleportation(bad);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("teleport.r") != std::string::npos);
    CHECK(std::string(e.what()).find("teleport.input") != std::string::npos);
  }
}

TEST_CASE("run_teleportation: snapshots at requested times") {
  const int dim = 8;
  TeleportConfig c = config(InputState::cat(1.0, kPi), 0.4, dim, lorentzian_channel(0.8, 4.0, 10.0, dim));
  c.times = TimeGrid(0.0, 2.0, 20);
  c.snapshot_times = {0.0, 1.04};
  const TeleportResult r = run_teleportation(c);
  REQUIRE(r.snapshots.size() == 2);
  CHECK(r.snapshots[0].time == 0.0);
  CHECK(std::abs(r.snapshots[1].time - 1.0) < 1e-12);
  CHECK(wigner(r.snapshots[0].rho_out, {0.0}, {0.0})(0, 0) < 0.0);
}
