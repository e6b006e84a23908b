#include "doctest.h"

#include "nhtop/invariants.hpp"

#include <random>

using namespace nhtop;

namespace {
const Complex I1(0.0, 1.0);

ModelSpec sphere(double R, double gamma = 1.0) {
  return make_spec(Family::NH2, Embedding::Sphere2D, gamma, 2.0, 2.5, R);
}
ModelSpec s3spec(Family f, double R, double gamma = 1.0) {
  return make_spec(f, Embedding::S3, gamma, 2.0, 2.5, R);
}
ModelSpec s4spec(double R, double gamma = 1.0) {
  return make_spec(Family::NH4, Embedding::S4, gamma, 2.0, 2.5, R);
}

QuadratureGrid grid2(int a, int b) {
  QuadratureGrid g;
  g.dims = {a, b};
  return g;
}

// Independent 1D oracle for the unweighted sphere Chern number: the
// integrand is phase-independent, so integrate the band two-form weighted by
// tanh^3 over theta alone. The two-form is built from projector stencils of
// the analytic eigensystem, bypassing the connection/curvature machinery.
double nt_chern_oracle(const ModelSpec& m, double T, WeightConvention conv, int nodes) {
  const double h = 1e-5;
  const auto proj = [&](double th, double ph, int band) {
    const EigenSystem es = analytic_eigensystem(m, {th, ph});
    return Matrix(es.right.col(band) * es.left.row(band));
  };
  double acc = 0.0;
  const double step = M_PI / nodes;
  for (int k = 0; k < nodes; ++k) {
    const double th = (k + 0.5) * step, ph = 0.8;
    const Matrix dth = (proj(th + h, ph, 0) - proj(th - h, ph, 0)) / (2.0 * h);
    const Matrix dph = (proj(th, ph + h, 0) - proj(th, ph - h, 0)) / (2.0 * h);
    const Matrix P = proj(th, ph, 0);
    const Complex band_form = (P * (dth * dph - dph * dth)).trace();
    const EigenSystem es = analytic_eigensystem(m, {th, ph});
    const double eff = effective_energy(es.energies[1], conv);
    const double t = std::tanh(std::abs(eff) / T);
    // the lower-band two-form carries the positive orientation; the sorted
    // ground band flips role across the principal branch cut
    const double sign = (m.R < m.gamma && std::cos(th) < 0.0) ? -1.0 : 1.0;
    acc += t * t * t * sign * (I1 * band_form).real() * step;
  }
  return acc;  // phi integral contributes 2 pi / (2 pi)
}

}  // namespace

TEST_CASE("quadrature grid validation") {
  QuadratureGrid g = grid2(100, 200);
  g.validate(2);
  CHECK_THROWS_AS(grid2(4, 200).validate(2), InvalidConfig);
  CHECK_THROWS_AS(grid2(100, 200).validate(3), InvalidConfig);
  QuadratureGrid odd = grid2(101, 200);
  odd.rule = Rule::Simpson;
  CHECK_THROWS_AS(odd.validate(2), InvalidConfig);
}

TEST_CASE("integrate: smooth reference integrals") {
  // int_0^pi sin^3 = 4/3 on the polar direction, full circle on the periodic one
  const std::vector<DirectionSpec> dom{{0.0, M_PI, false}, {0.0, 2.0 * M_PI, true}};
  const auto f = [](const ParamPoint& p) { return std::pow(std::sin(p[0]), 3); };
  for (Rule rule : {Rule::Trapezoid, Rule::Simpson}) {
    const IntegralValue v = integrate(dom, {64, 32}, rule, f);
    CHECK(v.value == doctest::Approx(4.0 / 3.0 * 2.0 * M_PI).epsilon(1e-4));
  }
}

TEST_CASE("integrate: exclusion accounting") {
  const std::vector<DirectionSpec> dom{{0.0, 1.0, false}};
  const auto f = [](const ParamPoint& p) -> double {
    if (p[0] > 0.5) throw DivergentWeight("half the domain excluded");
    return 1.0;
  };
  const IntegralValue v = integrate(dom, {64, }, Rule::Trapezoid, f);
  CHECK(v.excluded > 20);
  CHECK(v.value == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("thermal chern number: quantized plateaus") {
  const QuadratureGrid g = grid2(100, 200);
  const InvariantResult topological = thermal_chern_2d(sphere(2.0), 0.5, g);
  CHECK(std::abs(topological.value - 1.0) < 1e-3);
  CHECK(topological.refinement_delta < 1e-3);

  const InvariantResult trivial = thermal_chern_2d(sphere(0.5), 0.5, g);
  CHECK(std::abs(trivial.value) < 1e-3);

  // hermitian reduction: the standard two-band monopole
  const InvariantResult herm = nt_chern_2d(sphere(2.0, 0.0), 0.01, g);
  CHECK(std::abs(herm.value - 1.0) < 1e-3);
}

TEST_CASE("thermal chern number: weighted value is temperature independent") {
  const QuadratureGrid g = grid2(64, 128);
  const double ref = thermal_chern_2d(sphere(2.0), 0.1, g).value;
  for (double T : {0.5, 1.5, 3.0})
    CHECK(thermal_chern_2d(sphere(2.0), T, g).value == doctest::Approx(ref).epsilon(1e-4));
}

TEST_CASE("nt chern number: oracle and monotonicity") {
  const QuadratureGrid g = grid2(100, 200);
  const ModelSpec m = sphere(2.0);
  for (WeightConvention conv : {WeightConvention::Abs, WeightConvention::Re}) {
    const double oracle = nt_chern_oracle(m, 0.5, conv, 2000);
    const InvariantResult nt = nt_chern_2d(m, 0.5, g, conv);
    CHECK(std::abs(nt.value - oracle) < 1e-3);
  }
  // strictly decreasing in T
  double prev = 1.0;
  for (double T : {1.0, 2.0, 5.0}) {
    const double v = nt_chern_2d(m, T, g).value;
    CHECK(v < prev);
    prev = v;
  }
  // NT equals the weighted invariant in the low-temperature limit
  const double w0 = thermal_chern_2d(m, 0.01, g).value;
  const double n0 = nt_chern_2d(m, 0.01, g).value;
  CHECK(std::abs(w0 - n0) < 1e-2);
}

TEST_CASE("closed and generic connections give the same quadrature") {
  const ModelSpec m = sphere(2.0);
  const QuadratureGrid g = grid2(48, 96);
  const double closed = nt_chern_2d(m, 0.6, g).value;
  const double generic = nt_chern_2d(m, 0.6, g, WeightConvention::Abs, true).value;
  CHECK(closed == doctest::Approx(generic).epsilon(1e-7));
}

TEST_CASE("refinement delta contracts under doubling") {
  const ModelSpec m = sphere(2.0);
  const double d1 = nt_chern_2d(m, 0.7, grid2(32, 64)).refinement_delta;
  const double d2 = nt_chern_2d(m, 0.7, grid2(64, 128)).refinement_delta;
  CHECK(d2 <= 0.5 * d1 + 1e-12);
}

TEST_CASE("bures metric: hermitian properties") {
  const ModelSpec m = s3spec(Family::Hermitian3, 2.0, 0.0);
  // T -> infinity: d(rho) -> 0
  const Eigen::Matrix3cd hot = bures_metric(m, {0.7, 1.1, 2.0}, 1e6);
  CHECK(hot.cwiseAbs().maxCoeff() < 1e-8);

  // symmetry and reality at random points
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> a(0.1, M_PI / 2.0 - 0.1), ph(0.0, 2.0 * M_PI);
  for (int k = 0; k < 50; ++k) {
    const ParamPoint p{a(rng), ph(rng), ph(rng)};
    const Eigen::Matrix3cd G = bures_metric(m, p, 0.8);
    CHECK((G - G.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    for (int i = 0; i < 3; ++i) CHECK(G(i, i).real() > -1e-10);
  }
}

TEST_CASE("bures metric: pure-state quantum metric oracle") {
  // gamma = 0, T -> 0: the metric reduces to the ground-state fidelity
  // susceptibility Re<du|(1 - |u><u|)|du>
  const ModelSpec m = s3spec(Family::Hermitian3, 2.0, 0.0);
  const ParamPoint p{0.6, 1.3, 2.1};
  const double h = 1e-5;
  const Eigen::Matrix3cd G = bures_metric(m, p, 0.02, h);

  const auto ground = [&](const ParamPoint& q) {
    const EigenSystem es = model_eigensystem(m, q);
    return Vector(es.right.col(0));
  };
  const Vector u0 = ground(p);
  std::array<Vector, 3> du;
  for (int mu = 0; mu < 3; ++mu) {
    Vector up = ground(p.shifted(mu, h));
    Vector um = ground(p.shifted(mu, -h));
    // phase lock both sides onto the central vector
    const Complex op = u0.adjoint() * up, om = u0.adjoint() * um;
    up *= std::conj(op) / std::abs(op);
    um *= std::conj(om) / std::abs(om);
    du[mu] = (up - um) / (2.0 * h);
  }
  for (int mu = 0; mu < 3; ++mu)
    for (int nu = 0; nu < 3; ++nu) {
      const Complex proj = (du[mu].adjoint() * du[nu])(0) -
                           (du[mu].adjoint() * u0)(0) * (u0.adjoint() * du[nu])(0);
      CHECK(G(mu, nu).real() == doctest::Approx(proj.real()).epsilon(5e-4));
    }
}

TEST_CASE("bures metric: non-hermitian branch matches at gamma -> 0") {
  const ModelSpec herm = s3spec(Family::Hermitian3, 2.0, 0.0);
  const ModelSpec nh = s3spec(Family::NH3, 2.0, 1e-7);
  const ParamPoint p{0.6, 1.0, 2.0};
  const Eigen::Matrix3cd Gh = bures_metric(herm, p, 0.4);
  const Eigen::Matrix3cd Gn = bures_metric(nh, p, 0.4);
  CHECK((Gh - Gn).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("thermal three-form is non-negative") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> a(0.1, M_PI / 2.0 - 0.1), ph(0.0, 2.0 * M_PI);
  for (Family f : {Family::Hermitian3, Family::NH3}) {
    const ModelSpec m = s3spec(f, 2.0, f == Family::Hermitian3 ? 0.0 : 1.0);
    for (int k = 0; k < 20; ++k) {
      const ParamPoint p{a(rng), ph(rng), ph(rng)};
      CHECK(thermal_three_form(m, p, 0.6) >= 0.0);
    }
  }
}

TEST_CASE("dd invariant: hermitian quantization and nt decay") {
  QuadratureGrid g;
  g.dims = {32, 32, 32};
  const ModelSpec m = s3spec(Family::Hermitian3, 2.0, 0.0);
  for (double T : {0.2, 1.0, 2.0})
    CHECK(std::abs(dd_invariant(m, T, g, true).value - 1.0) < 1e-2);
  double prev = 1.1;
  for (double T : {0.2, 0.8, 1.6, 2.4}) {
    const double v = dd_invariant(m, T, g, false).value;
    CHECK(v < prev + 1e-4);
    prev = v;
  }
}

TEST_CASE("dd invariant: non-hermitian enclosure") {
  QuadratureGrid g;
  g.dims = {32, 32, 32};
  // sphere enclosing the exceptional surface: starts at 1, decreases
  const ModelSpec in = s3spec(Family::NH3, 2.0);
  const double low = dd_invariant(in, 0.05, g, false).value;
  CHECK(std::abs(low - 1.0) < 2e-2);
  const double mid = dd_invariant(in, 1.0, g, false).value;
  CHECK(mid < low);
  // sphere not enclosing it: compatible with zero at moderate temperature
  const ModelSpec out = s3spec(Family::NH3, 0.5);
  CHECK(std::abs(dd_invariant(out, 1.0, g, false).value) < 1e-2);
  CHECK(std::abs(dd_invariant(out, 2.0, g, false).value) < 1e-2);
}

TEST_CASE("first chern numbers on the hypersphere vanish") {
  QuadratureGrid g;
  g.dims = {32, 32, 24, 24};
  const InvariantResult r = first_chern_4d(s4spec(2.0), 0.5, g);
  CHECK(r.value < 1e-6);
}

TEST_CASE("second chern number: plateaus and consistency") {
  QuadratureGrid g;
  g.dims = {24, 24, 16, 16};
  // the weighted invariant sits on an integer plateau for R > gamma
  const InvariantResult c2 = second_chern(s4spec(2.0), 0.5, g, true);
  CHECK(std::abs(c2.value - 2.0) < 2e-2);
  // temperature independence of the weighted value
  const InvariantResult c2b = second_chern(s4spec(2.0), 1.5, g, true);
  CHECK(std::abs(c2b.value - c2.value) < 2e-2);
  // trivial phase inside the exceptional hypersphere
  CHECK(std::abs(second_chern(s4spec(0.5), 0.5, g, true).value) < 1e-2);
  // full epsilon contraction agrees with the symmetry-reduced integrand
  const InvariantResult eps = second_chern(s4spec(2.0), 0.5, g, true, WeightConvention::Abs, true);
  CHECK(eps.value == doctest::Approx(c2.value).epsilon(1e-6));
}

TEST_CASE("second chern number: nt reduction and oracle") {
  QuadratureGrid g;
  g.dims = {24, 24, 16, 16};
  const InvariantResult nt = second_chern(s4spec(2.0), 0.5, g, false);
  CHECK(nt.cross_check_delta < 1e-2);  // reduced 1D vs full 4D quadrature
  CHECK(nt.value < 2.0);
  // decreasing with temperature
  const InvariantResult nt2 = second_chern(s4spec(2.0), 1.5, g, false);
  CHECK(nt2.value < nt.value);
  // matches the weighted invariant at low temperature
  const InvariantResult cold = second_chern(s4spec(2.0), 0.02, g, false);
  CHECK(std::abs(cold.value - 2.0) < 1e-2);
}

TEST_CASE("hypersphere trace component pattern") {
  const ModelSpec m = s4spec(2.0);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> th(0.4, M_PI - 0.4), t2(0.25, M_PI / 2.0 - 0.25),
      ph(0.0, 2.0 * M_PI);
  for (int k = 0; k < 5; ++k) {
    const ParamPoint p{th(rng), t2(rng), ph(rng), ph(rng)};
    const TraceCheckReport rep = trace_component_checks(m, p, 0.5);
    CHECK(rep.max_relative_residual < 1e-4);
    // coefficient ratio: trace2 / trace1 = -f/2
    CHECK(rep.traces[1] / rep.traces[0] == doctest::Approx(-rep.f / 2.0).epsilon(1e-6));
    CHECK(rep.traces[2] == doctest::Approx(rep.traces[1]).epsilon(1e-6));
  }
  // near the polar axis all four traces die with sin^6(theta1); the bound
  // here is the roundoff floor of the curvature stencils
  const TraceCheckReport pole = trace_component_checks(m, {1e-3, 0.7, 0.9, 1.7}, 0.5);
  for (double t : pole.traces) CHECK(std::abs(t) < 1e-9);
}

TEST_CASE("integer quantization across the sweep window") {
  const QuadratureGrid g = grid2(64, 128);
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> Rdist(0.2, 3.0), Tdist(0.1, 3.0);
  int checked = 0;
  while (checked < 6) {
    const double R = Rdist(rng), T = Tdist(rng);
    if (std::abs(R - 1.0) <= 0.1) continue;
    const InvariantResult r = thermal_chern_2d(sphere(R), T, g);
    const double nearest = std::round(r.value);
    CHECK(std::abs(r.value - nearest) < 1e-2);
    ++checked;
  }
}
