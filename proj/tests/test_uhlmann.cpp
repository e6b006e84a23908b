#include "doctest.h"

#include "nhtop/uhlmann.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <random>

using namespace nhtop;

namespace {
const Complex I1(0.0, 1.0);

ModelSpec fig1_loop() { return make_spec(Family::NH2, Embedding::Loop2D, 1.0, 2.0, 2.5); }
ModelSpec sphere(double R = 2.0) {
  return make_spec(Family::NH2, Embedding::Sphere2D, 1.0, 2.0, 2.5, R);
}
ModelSpec hypersphere(double R = 2.0, double gamma = 1.0) {
  return make_spec(Family::NH4, Embedding::S4, gamma, 2.0, 2.5, R);
}
}  // namespace

TEST_CASE("connection vanishes in the maximally mixed limit") {
  const ModelSpec m = fig1_loop();
  const Matrix A = connection_generic_at(m, {1.3}, 0, 1e8);
  CHECK(max_abs(A) < 1e-7);
}

TEST_CASE("generic vs closed two-level connection") {
  const ModelSpec loop = fig1_loop();
  for (double theta : {0.0, 1.0}) {
    const Matrix a = connection_generic_at(loop, {theta}, 0, 0.5);
    const Matrix b = connection_closed_2d(loop, {theta}, 0, 0.5);
    CHECK(max_abs(Matrix(a - b)) < 1e-6);
    CHECK(std::abs(b.trace()) < 1e-12);  // off-diagonal dyad structure
  }
  // random sphere points, both directions, both conventions
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> th(0.2, M_PI - 0.2), ph(0.0, 2.0 * M_PI);
  const ModelSpec s = sphere();
  for (int k = 0; k < 25; ++k) {
    const ParamPoint p{th(rng), ph(rng)};
    for (int dir = 0; dir < 2; ++dir)
      for (WeightConvention conv : {WeightConvention::Re, WeightConvention::Abs}) {
        const Matrix a = connection_generic_at(s, p, dir, 0.5, defaults::stencil_h, conv);
        const Matrix b = connection_closed_2d(s, p, dir, 0.5, conv);
        CHECK(max_abs(Matrix(a - b)) < 1e-6);
      }
  }
}

TEST_CASE("two-level connection reduces to pure transport at low temperature") {
  // gamma = 0, T -> 0: the f-amplitude saturates and the connection becomes
  // the off-diagonal band transport 2 Pi d(Pi) - d(Pi), whose curvature is
  // the band two-form d(Pi) ^ d(Pi)
  const ModelSpec m = make_spec(Family::NH2, Embedding::Sphere2D, 0.0, 2.0, 2.5, 2.0);
  const ParamPoint p{1.1, 0.7};
  for (int dir = 0; dir < 2; ++dir) {
    const Matrix A = connection_generic_at(m, p, dir, 0.005);
    const MatrixField ground = [&](const ParamPoint& q) {
      const EigenSystem es = model_eigensystem(m, q);
      return Matrix(es.right.col(0) * es.left.row(0));
    };
    const Matrix dP = finite_diff(ground, p, dir, defaults::stencil_h);
    const Matrix P0 = ground(p);
    const Matrix expected = 2.0 * P0 * dP - dP;
    CHECK(max_abs(Matrix(A - expected)) < 1e-5);
  }
}

TEST_CASE("four-level closed components") {
  const ModelSpec m = hypersphere();
  // theta1 -> 0: the sin^2(theta1) prefactors (against the sin(theta1)
  // normalizer product) drive every transverse component to zero linearly
  for (double t1 : {1e-3, 1e-4}) {
    const auto near_pole = connection_components_4d(m, {t1, 0.7, 0.9, 1.7}, 0.5);
    for (int dir = 1; dir < 4; ++dir) CHECK(max_abs(near_pole[dir]) < t1);
  }
  // the pole itself is a coordinate singularity of the closed-form frame
  CHECK_THROWS_AS(connection_components_4d(m, {1e-9, 0.7, 0.9, 1.7}, 0.5), NoClosedForm);

  // direction-wise match against the generic projector sandwich
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> th(0.3, M_PI - 0.3), t2(0.2, M_PI / 2.0 - 0.2),
      ph(0.0, 2.0 * M_PI);
  for (int k = 0; k < 10; ++k) {
    const ParamPoint p{th(rng), t2(rng), ph(rng), ph(rng)};
    const auto closed = connection_components_4d(m, p, 0.5);
    for (int dir = 0; dir < 4; ++dir) {
      const Matrix gen = connection_generic_at(m, p, dir, 0.5);
      CHECK(max_abs(Matrix(closed[dir] - gen)) < 1e-5);
    }
  }
}

TEST_CASE("four-level hermitian limit reproduces the non-abelian band curvature") {
  // gamma = 0, T -> 0: F_U = dPi ^ dPi, so Pi F_U Pi equals the Berry
  // curvature of the degenerate lower doublet
  const ModelSpec m = hypersphere(2.0, 0.0);
  const double T = 0.005, h = defaults::stencil_h;
  const ParamPoint p{1.2, 0.8, 0.9, 1.6};
  const PointConnection A = [&](const ParamPoint& q, int dir) {
    return connection_components_4d(m, q, T)[dir];
  };
  const auto proj = [&](const ParamPoint& q) {
    return analytic_eigensystem(m, q).group_projector(0);
  };
  for (auto [mu, nu] : std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {0, 2}}) {
    const Matrix F = curvature_at(A, p, mu, nu, h);
    const Matrix dPm =
        (proj(p.shifted(mu, h)) - proj(p.shifted(mu, -h))) / (2.0 * h);
    const Matrix dPn =
        (proj(p.shifted(nu, h)) - proj(p.shifted(nu, -h))) / (2.0 * h);
    const Matrix P0 = proj(p);
    const Matrix berry = P0 * (dPm * dPn - dPn * dPm) * P0;
    CHECK(max_abs(Matrix(P0 * F * P0 - berry)) < 1e-5);
  }
}

TEST_CASE("curvature: zero and pure-gauge fields") {
  const PointConnection zero = [](const ParamPoint&, int) { return Matrix(Matrix::Zero(2, 2)); };
  CHECK(max_abs(curvature_at(zero, {0.3, 0.4}, 0, 1, 1e-4)) == 0.0);

  // A = g^{-1} dg for g(x, y) = exp(i x sz / 2) exp(i y sx / 3)
  const auto s = pauli_basis();
  const auto g = [&](const ParamPoint& p) {
    return Matrix(Matrix(I1 * p[0] / 2.0 * s[2]).exp() * Matrix(I1 * p[1] / 3.0 * s[0]).exp());
  };
  const PointConnection pure = [&](const ParamPoint& p, int dir) {
    const double h = 1e-6;
    const Matrix dg = (g(p.shifted(dir, h)) - g(p.shifted(dir, -h))) / (2.0 * h);
    return Matrix(g(p).inverse() * dg);
  };
  const Matrix F = curvature_at(pure, {0.7, 1.1}, 0, 1, 1e-4);
  CHECK(max_abs(F) < 1e-6);
}

TEST_CASE("curvature: antisymmetry and lattice stencils") {
  const ModelSpec m = sphere();
  const double T = 0.5;
  const PointConnection A = [&](const ParamPoint& q, int dir) {
    return connection_generic_at(m, q, dir, T);
  };
  const ParamPoint p{1.0, 0.8};
  const Matrix Fmn = curvature_at(A, p, 0, 1, 1e-5);
  const Matrix Fnm = curvature_at(A, p, 1, 0, 1e-5);
  CHECK(max_abs(Matrix(Fmn + Fnm)) < 1e-10);

  // lattice curvature agrees with the functional stencil on a fine grid
  ConnectionField field;
  field.dims = {48, 48};
  field.bounds = {{0.8, 1.2}, {0.6, 1.0}};
  field.components.resize(2);
  for (int i = 0; i < field.dims[0]; ++i)
    for (int j = 0; j < field.dims[1]; ++j) {
      const ParamPoint q = field.node({i, j});
      field.components[0].push_back(connection_generic_at(m, q, 0, T));
      field.components[1].push_back(connection_generic_at(m, q, 1, T));
    }
  const auto F_lattice = curvature(field, 0, 1, {false, false});
  CHECK(F_lattice.size() == size_t(46 * 46));
  // compare the central interior sample
  const ParamPoint center = field.node({24, 24});
  const Matrix F_ref = curvature_at(A, center, 0, 1, 1e-5);
  size_t idx = 0;
  double best = 1e9;
  Matrix best_F;
  for (int i = 1; i < 47; ++i)
    for (int j = 1; j < 47; ++j, ++idx) {
      const ParamPoint q = field.node({i, j});
      const double d = std::hypot(q[0] - center[0], q[1] - center[1]);
      if (d < best) {
        best = d;
        best_F = F_lattice[idx];
      }
    }
  CHECK(max_abs(Matrix(best_F - F_ref)) < 1e-4);
}

TEST_CASE("hypersphere curvature traces vanish pointwise") {
  const ModelSpec m = hypersphere();
  const PointConnection A = [&](const ParamPoint& q, int dir) {
    return connection_components_4d(m, q, 0.5)[dir];
  };
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> th(0.4, M_PI - 0.4), t2(0.3, M_PI / 2.0 - 0.3),
      ph(0.0, 2.0 * M_PI);
  for (int k = 0; k < 5; ++k) {
    const ParamPoint p{th(rng), t2(rng), ph(rng), ph(rng)};
    const ThermalState ts = density_matrix(analytic_eigensystem(m, p), 0.5);
    const Matrix F_t = curvature_at(A, p, 0, 1, defaults::stencil_h);
    const Matrix F_p = curvature_at(A, p, 2, 3, defaults::stencil_h);
    CHECK(std::abs((ts.rho * F_t).trace()) < 1e-8);
    CHECK(std::abs((ts.rho * F_p).trace()) < 1e-8);
  }
}

TEST_CASE("uhlmann phase: figure-one loop plateaus") {
  const ModelSpec m = fig1_loop();
  const Holonomy low = uhlmann_phase(m, 2, 0.5);
  CHECK(std::abs(std::abs(low.phase) - M_PI) < 5e-3);
  const Holonomy high = uhlmann_phase(m, 2, 3.0);
  CHECK(std::abs(high.phase) < 5e-3);
}

TEST_CASE("uhlmann phase: displacement plateaus") {
  // d < gamma: the loop encloses both exceptional points -> unwrapped 2 pi
  ModelSpec m = make_spec(Family::NH2, Embedding::Loop2D, 1.0, 2.0, 0.5);
  CHECK(std::abs(std::abs(uhlmann_phase(m, 2, 0.5).unwrapped_phase) - 2.0 * M_PI) < 5e-3);
  // gamma < d < 3 gamma: encircles the ring -> pi
  m.d = 2.5;
  CHECK(std::abs(std::abs(uhlmann_phase(m, 2, 0.5).unwrapped_phase) - M_PI) < 5e-3);
  // d > 3 gamma: disengaged -> 0
  m.d = 3.5;
  CHECK(std::abs(uhlmann_phase(m, 2, 0.5).unwrapped_phase) < 5e-3);
}

TEST_CASE("uhlmann phase: four-level loop") {
  const ModelSpec m = make_spec(Family::NH4, Embedding::Loop4D, 1.0, 2.0, 2.5);
  const Holonomy h = uhlmann_phase(m, 2, 0.5, 400);
  CHECK(std::abs(std::abs(h.phase) - M_PI) < 5e-3);
}

TEST_CASE("uhlmann phase: two-winding values are 0 or pi") {
  const ModelSpec m = fig1_loop();
  for (double T : {0.3, 0.8, 1.5, 2.4, 3.0}) {
    const double ph = std::abs(uhlmann_phase(m, 2, T, 400).phase);
    CHECK(std::min(ph, std::abs(ph - M_PI)) < 5e-3);
  }
}

TEST_CASE("uhlmann phase: sample-density stability") {
  const ModelSpec m = fig1_loop();
  const Holonomy a = uhlmann_phase(m, 2, 0.5, 800);
  const Holonomy b = uhlmann_phase(m, 2, 0.5, 1600);
  CHECK(std::abs(a.phase - b.phase) < 1e-6);
}

TEST_CASE("uhlmann phase: gauge invariance of the transported trace") {
  // rescaling each eigenpair |u> -> c |u>, <uL| -> <uL|/c leaves the
  // connection samples unchanged, hence the phase
  const ModelSpec m = fig1_loop();
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  for (double theta : {0.4, 2.2, 4.9}) {
    const ParamPoint p{theta};
    const EigenSystem es = model_eigensystem(m, p);
    EigenSystem gauged = es;
    for (int n = 0; n < es.dim(); ++n) {
      const Complex c = std::exp(I1 * phase(rng)) * (0.5 + 1.5 * phase(rng) / (2.0 * M_PI));
      gauged.right.col(n) *= c;
      gauged.left.row(n) /= c;
    }
    const std::vector<double> P = boltzmann_weights(es.energies, 0.5, WeightConvention::Abs);
    const Matrix s1 = matrix_sqrt_biortho(P, es);
    const Matrix s2 = matrix_sqrt_biortho(P, gauged);
    CHECK(max_abs(Matrix(s1 - s2)) < 1e-8);
  }
}

TEST_CASE("uhlmann phase: naive exponential flag") {
  // the commuting-free naive exponential stays close on this smooth loop
  const ModelSpec m = fig1_loop();
  const Holonomy ordered = uhlmann_phase(m, 2, 0.5, 800);
  const Holonomy naive = uhlmann_phase(m, 2, 0.5, 800, WeightConvention::Abs, true);
  CHECK(std::abs(std::abs(ordered.phase) - M_PI) < 5e-3);
  CHECK(std::isfinite(naive.phase));
  CHECK(std::abs(std::abs(naive.phase) - M_PI) < 0.2);
}

TEST_CASE("uhlmann phase: input validation") {
  const ModelSpec m = fig1_loop();
  CHECK_THROWS_AS(uhlmann_phase(m, 3, 0.5), InvalidConfig);
  CHECK_THROWS_AS(uhlmann_phase(m, 2, 0.5, 4), InvalidConfig);
  CHECK_THROWS_AS(uhlmann_phase(sphere(), 2, 0.5), IncompatibleEmbedding);
}

TEST_CASE("connection field sampling along the loop") {
  const ModelSpec m = fig1_loop();
  const ConnectionField f = connection_generic(m, 64, 0.5);
  CHECK(f.dims[0] == 64);
  CHECK(f.components[0].size() == 64);
  // samples match pointwise evaluation
  const ParamPoint p = f.node({10});
  CHECK(max_abs(Matrix(f.components[0][10] - connection_generic_at(m, p, 0, 0.5))) < 1e-14);
}
