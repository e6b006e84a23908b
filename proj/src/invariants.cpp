#include "nhtop/invariants.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace nhtop {

namespace {
const Complex I1(0.0, 1.0);
int g_threads = 1;
}

void set_worker_threads(int n) { g_threads = std::max(1, n); }
int worker_threads() { return g_threads; }

void QuadratureGrid::validate(int expected_dims) const {
  if (static_cast<int>(dims.size()) != expected_dims)
    throw InvalidConfig("grid dimension count does not match embedding");
  for (int n : dims) {
    if (n < 8) throw InvalidConfig("grid needs at least 8 samples per direction");
    if (rule == Rule::Simpson && n % 2 != 0)
      throw InvalidConfig("Simpson rule needs even interval counts");
  }
}

QuadratureGrid QuadratureGrid::halved() const {
  QuadratureGrid g = *this;
  for (int& n : g.dims) n = std::max(8, n / 2 / 2 * 2);
  return g;
}

std::vector<DirectionSpec> integration_domain(Embedding e) {
  switch (e) {
    case Embedding::Sphere2D:
      return {{0.0, M_PI, false}, {0.0, 2.0 * M_PI, true}};
    case Embedding::S3:
      return {{0.0, M_PI / 2.0, false}, {0.0, 2.0 * M_PI, true}, {0.0, 2.0 * M_PI, true}};
    case Embedding::S4:
      return {{0.0, M_PI, false},
              {0.0, M_PI / 2.0, false},
              {0.0, 2.0 * M_PI, true},
              {0.0, 2.0 * M_PI, true}};
    case Embedding::Loop2D:
    case Embedding::Loop4D:
      return {{0.0, 2.0 * M_PI, true}};
  }
  throw IncompatibleEmbedding("no integration domain for embedding");
}

QuadratureGrid default_grid(Embedding e) {
  QuadratureGrid g;
  switch (e) {
    case Embedding::Sphere2D: g.dims = {200, 400}; break;
    case Embedding::S3: g.dims = {64, 64, 64}; break;
    case Embedding::S4: g.dims = {48, 48, 32, 32}; break;
    case Embedding::Loop2D:
    case Embedding::Loop4D: g.dims = {800}; break;
  }
  return g;
}

namespace {

struct Nodes {
  std::vector<double> x;
  std::vector<double> w;
};

Nodes direction_nodes(const DirectionSpec& d, int n, Rule rule) {
  Nodes out;
  if (d.periodic || rule == Rule::Trapezoid) {
    // midpoint rule: open nodes, uniform weights (exact composite for the
    // periodic directions, endpoint-free for the polar ones)
    const double step = (d.hi - d.lo) / n;
    for (int i = 0; i < n; ++i) {
      out.x.push_back(d.lo + (i + 0.5) * step);
      out.w.push_back(step);
    }
    return out;
  }
  // composite Simpson on the closed interval; pole values vanish
  // analytically, so the endpoint nodes are dropped with zero weight
  const double step = (d.hi - d.lo) / n;
  for (int i = 1; i < n; ++i) {
    out.x.push_back(d.lo + i * step);
    out.w.push_back((i % 2 == 1 ? 4.0 : 2.0) * step / 3.0);
  }
  return out;
}

template <typename Fn>
void parallel_chunks(size_t total, Fn&& fn) {
  constexpr size_t kChunk = 2048;  // fixed: reduction order independent of threads
  const size_t nchunks = (total + kChunk - 1) / kChunk;
  const int nthreads = std::min<size_t>(worker_threads(), std::max<size_t>(nchunks, 1));
  if (nthreads <= 1) {
    for (size_t c = 0; c < nchunks; ++c)
      fn(c, c * kChunk, std::min(total, (c + 1) * kChunk));
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      while (true) {
        const size_t c = next.fetch_add(1);
        if (c >= nchunks) break;
        fn(c, c * kChunk, std::min(total, (c + 1) * kChunk));
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace

IntegralValue integrate(const std::vector<DirectionSpec>& domain, const std::vector<int>& dims,
                        Rule rule, const std::function<double(const ParamPoint&)>& f) {
  const int D = static_cast<int>(domain.size());
  std::vector<Nodes> nodes(D);
  std::vector<size_t> counts(D);
  size_t total = 1;
  for (int d = 0; d < D; ++d) {
    nodes[d] = direction_nodes(domain[d], dims[d], rule);
    counts[d] = nodes[d].x.size();
    total *= counts[d];
  }

  const size_t nchunks = (total + 2047) / 2048;
  std::vector<double> chunk_sum(nchunks, 0.0);
  std::vector<long> chunk_excluded(nchunks, 0);
  std::exception_ptr fail;

  parallel_chunks(total, [&](size_t c, size_t begin, size_t end) {
    double acc = 0.0;
    long excl = 0;
    ParamPoint p;
    p.dim = D;
    for (size_t idx = begin; idx < end; ++idx) {
      size_t rem = idx;
      double weight = 1.0;
      for (int d = D - 1; d >= 0; --d) {
        const size_t i = rem % counts[d];
        rem /= counts[d];
        p.c[d] = nodes[d].x[i];
        weight *= nodes[d].w[i];
      }
      try {
        acc += weight * f(p);
      } catch (const DivergentWeight&) {
        ++excl;
      } catch (const NearExceptionalPoint&) {
        ++excl;
      } catch (const DenominatorUnderflow&) {
        ++excl;
      } catch (...) {
        if (!fail) fail = std::current_exception();
        break;
      }
    }
    chunk_sum[c] = acc;
    chunk_excluded[c] = excl;
  });
  if (fail) std::rethrow_exception(fail);

  IntegralValue out;
  for (size_t c = 0; c < nchunks; ++c) {
    out.value += chunk_sum[c];
    out.excluded += chunk_excluded[c];
  }
  return out;
}

namespace {

// Sign of the branch-continuous eigenvalue relative to the principal square
// root: E^2 = R^2 - gamma^2 + 2 i gamma R cos(theta) crosses the principal
// cut at theta = pi/2 when R < gamma, so the continuously-tracked branch
// changes sign there. Odd-power restoring weights ride this branch.
double branch_sign(const ModelSpec& spec, double polar_angle) {
  return (spec.R < spec.gamma && std::cos(polar_angle) < 0.0) ? -1.0 : 1.0;
}

// (i/2pi) [lambda] Tr(rho F^{theta phi}) at a node of the two-level sphere.
// The closed two-level connection drives the production quadrature (its
// agreement with the generic form is certified separately); the generic
// evaluator is kept behind the flag for cross-path tests.
double chern2d_integrand(const ModelSpec& spec, const ParamPoint& p, double T,
                         WeightConvention conv, bool weighted, double h, bool use_generic) {
  const PointConnection A = [&](const ParamPoint& q, int dir) {
    return use_generic ? connection_generic_at(spec, q, dir, T, h, conv)
                       : connection_closed_2d(spec, q, dir, T, conv, h);
  };
  const Matrix F = curvature_at(A, p, 0, 1, h);
  const EigenSystem es = analytic_eigensystem(spec, p);
  const ThermalState ts = density_matrix(es, T, conv);
  double val = (I1 / (2.0 * M_PI) * (ts.rho * F).trace()).real();
  if (weighted) {
    const double eff = effective_energy(es.energies[es.dim() - 1], conv);
    val *= lambda_weight(WeightKind::Chern1, Complex(eff, 0.0), T) * branch_sign(spec, p[0]);
  }
  return val;
}

InvariantResult chern_2d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                         WeightConvention conv, bool weighted, bool use_generic = false) {
  spec.validate();
  if (spec.family != Family::NH2 || spec.embedding != Embedding::Sphere2D)
    throw IncompatibleEmbedding("chern_2d: two-level sphere embedding required");
  grid.validate(2);
  const auto dom = integration_domain(spec.embedding);
  const double h = defaults::stencil_h;
  const auto f = [&](const ParamPoint& p) {
    return chern2d_integrand(spec, p, T, conv, weighted, h, use_generic);
  };
  const IntegralValue full = integrate(dom, grid.dims, grid.rule, f);
  const IntegralValue half = integrate(dom, grid.halved().dims, grid.rule, f);
  InvariantResult r;
  r.value = full.value;
  r.grid = grid;
  r.refinement_delta = std::abs(full.value - half.value);
  r.excluded_points = full.excluded;
  return r;
}

}  // namespace

InvariantResult thermal_chern_2d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                                 WeightConvention conv, bool use_generic_connection) {
  return chern_2d(spec, T, grid, conv, true, use_generic_connection);
}

InvariantResult nt_chern_2d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                            WeightConvention conv, bool use_generic_connection) {
  return chern_2d(spec, T, grid, conv, false, use_generic_connection);
}

Eigen::Matrix3cd bures_metric(const ModelSpec& spec, const ParamPoint& p, double T, double h,
                              WeightConvention conv) {
  spec.validate();
  if (spec.embedding != Embedding::S3)
    throw IncompatibleEmbedding("bures_metric: three-level sphere embedding required");
  const int D = 3;
  Eigen::Matrix3cd G = Eigen::Matrix3cd::Zero();

  if (spec.family == Family::Hermitian3) {
    const EigenSystem es = model_eigensystem(spec, p);
    const std::vector<double> P = boltzmann_weights(es.energies, T, conv);
    // d(rho) along each direction; the rho field is basis-free
    std::array<Matrix, 3> drho;
    const MatrixField rho_field = [&](const ParamPoint& q) {
      const EigenSystem e = model_eigensystem(spec, q);
      return density_matrix(e, T, conv).rho;
    };
    for (int mu = 0; mu < D; ++mu) drho[mu] = finite_diff(rho_field, p, mu, h);
    for (int mu = 0; mu < D; ++mu)
      for (int nu = 0; nu < D; ++nu) {
        Complex g = 0.0;
        for (int m = 0; m < es.dim(); ++m)
          for (int n = 0; n < es.dim(); ++n) {
            const double den = P[m] + P[n];
            if (den < 1e-300) throw DenominatorUnderflow("bures_metric: weight sum underflow");
            // a pair contributes at most (P_m + P_n) |<m|du n>|^2; below the
            // stencil roundoff floor the quotient would only amplify noise
            if (den < 1e-12) continue;
            const Complex a = es.right.col(m).adjoint() * drho[mu] * es.right.col(n);
            const Complex b = es.right.col(n).adjoint() * drho[nu] * es.right.col(m);
            g += a * b / den;
          }
        G(mu, nu) = 0.5 * g;
      }
    return G;
  }

  // Non-Hermitian variant: the same bilinear with the biorthogonal frame,
  // X^{mn}_mu = P_m <du_m^L|u_n> + P_n <u_m^L|du_n> paired against its
  // index-reversed partner (reduces to the Hermitian form at gamma = 0).
  std::array<FrameWithDerivative, 3> fr;
  for (int mu = 0; mu < D; ++mu)
    fr[mu] = biorthogonal_frame_derivative(spec, p, mu, h, false);
  const EigenSystem& es = fr[0].es;
  const std::vector<double> P = boltzmann_weights(es.energies, T, conv);
  const int n = es.dim();
  std::array<Eigen::Matrix3cd, 3> X, Y;
  for (int mu = 0; mu < D; ++mu)
    for (int m = 0; m < n; ++m)
      for (int nn = 0; nn < n; ++nn) {
        const Complex dwm_un = fr[mu].dw.row(m) * es.right.col(nn);
        const Complex wm_dun = es.left.row(m) * fr[mu].du.col(nn);
        const Complex wn_dum = es.left.row(nn) * fr[mu].du.col(m);
        const Complex dwn_um = fr[mu].dw.row(nn) * es.right.col(m);
        X[mu](m, nn) = P[m] * dwm_un + P[nn] * wm_dun;
        Y[mu](m, nn) = P[m] * wn_dum + P[nn] * dwn_um;
      }
  for (int mu = 0; mu < D; ++mu)
    for (int nu = 0; nu < D; ++nu) {
      Complex g = 0.0;
      for (int m = 0; m < n; ++m)
        for (int nn = 0; nn < n; ++nn) {
          const double den = P[m] + P[nn];
          if (den < 1e-300) throw DenominatorUnderflow("bures_metric: weight sum underflow");
          if (den < 1e-12) continue;  // negligible pair, quotient would be noise
          g += X[mu](m, nn) * Y[nu](m, nn) / den;
        }
      G(mu, nu) = 0.5 * g;
    }
  return G;
}

double thermal_three_form(const ModelSpec& spec, const ParamPoint& p, double T, double h,
                          WeightConvention conv) {
  const Eigen::Matrix3cd G = bures_metric(spec, p, T, h, conv);
  // Complex Gram combination with the principal root; its real part is
  // non-negative and reduces to 4 sqrt(G^aa (G^11 G^22 - |G^12|^2)) whenever
  // the metric is Hermitian.
  const Complex gram = G(0, 0) * (G(1, 1) * G(2, 2) - G(1, 2) * G(2, 1));
  return 4.0 * std::sqrt(gram).real();
}

InvariantResult dd_invariant(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                             bool weighted, WeightConvention conv) {
  spec.validate();
  if (spec.embedding != Embedding::S3)
    throw IncompatibleEmbedding("dd_invariant: three-level sphere embedding required");
  grid.validate(3);
  const auto dom = integration_domain(spec.embedding);
  const double h = defaults::stencil_h;
  const auto f = [&](const ParamPoint& p) {
    double v = thermal_three_form(spec, p, T, h, conv) / (2.0 * M_PI * M_PI);
    if (weighted) {
      const EigenSystem es = model_eigensystem(spec, p);
      const double eff = effective_energy(es.energies[es.dim() - 1], conv);
      v *= lambda_weight(WeightKind::DD, Complex(eff, 0.0), T, p[0]);
    }
    return v;
  };
  const IntegralValue full = integrate(dom, grid.dims, grid.rule, f);
  const IntegralValue half = integrate(dom, grid.halved().dims, grid.rule, f);
  InvariantResult r;
  r.value = full.value;
  r.grid = grid;
  r.refinement_delta = std::abs(full.value - half.value);
  r.excluded_points = full.excluded;
  return r;
}

namespace {

// Closed-form connection evaluator for the hypersphere.
PointConnection closed_connection_4d(const ModelSpec& spec, double T, WeightConvention conv) {
  return [spec, T, conv](const ParamPoint& q, int dir) {
    return connection_component_4d(spec, q, T, conv, dir);
  };
}

double upper_eff_energy(const ModelSpec& spec, const ParamPoint& p, WeightConvention conv) {
  const EigenSystem es = analytic_eigensystem(spec, p);
  return effective_energy(es.energies[es.dim() - 1], conv);
}

// Re Tr(rho F^{phi1 phi2} F^{theta1 theta2}) at a hypersphere node
// (directions: 0=theta1, 1=theta2, 2=phi1, 3=phi2).
double c2_reduced_trace(const ModelSpec& spec, const ParamPoint& p, double T,
                        WeightConvention conv, double h) {
  const PointConnection A = closed_connection_4d(spec, T, conv);
  const Matrix Fp = curvature_at(A, p, 2, 3, h);
  const Matrix Ft = curvature_at(A, p, 0, 1, h);
  const ThermalState ts = density_matrix(analytic_eigensystem(spec, p), T, conv);
  return (ts.rho * Fp * Ft).trace().real();
}

// Full epsilon contraction Tr(rho [F^{p1p2}F^{t1t2} - F^{p1t1}F^{p2t2} + F^{p1t2}F^{p2t1}]).
double c2_eps_trace(const ModelSpec& spec, const ParamPoint& p, double T, WeightConvention conv,
                    double h) {
  const PointConnection A = closed_connection_4d(spec, T, conv);
  const Matrix F_p1p2 = curvature_at(A, p, 2, 3, h);
  const Matrix F_t1t2 = curvature_at(A, p, 0, 1, h);
  const Matrix F_p1t1 = curvature_at(A, p, 2, 0, h);
  const Matrix F_p2t2 = curvature_at(A, p, 3, 1, h);
  const Matrix F_p1t2 = curvature_at(A, p, 2, 1, h);
  const Matrix F_p2t1 = curvature_at(A, p, 3, 0, h);
  const ThermalState ts = density_matrix(analytic_eigensystem(spec, p), T, conv);
  const Matrix comb = F_p1p2 * F_t1t2 - F_p1t1 * F_p2t2 + F_p1t2 * F_p2t1;
  return (ts.rho * comb).trace().real();
}

}  // namespace

InvariantResult first_chern_4d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                               WeightConvention conv) {
  spec.validate();
  if (spec.family != Family::NH4 || spec.embedding != Embedding::S4)
    throw IncompatibleEmbedding("first_chern_4d: hypersphere embedding required");
  grid.validate(4);
  const auto dom = integration_domain(spec.embedding);
  const double h = defaults::stencil_h;
  // generic fixed values for the two spectator coordinates
  const std::array<double, 4> fixed{1.1, 0.6, 0.8, 1.3};

  double worst = 0.0;
  long excluded = 0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = mu + 1; nu < 4; ++nu) {
      const std::vector<DirectionSpec> sub{dom[mu], dom[nu]};
      const std::vector<int> dims{grid.dims[mu], grid.dims[nu]};
      for (bool weighted : {true, false}) {
        const auto f = [&](const ParamPoint& q) {
          ParamPoint p;
          p.dim = 4;
          for (int d = 0; d < 4; ++d) p.c[d] = fixed[d];
          p.c[mu] = q[0];
          p.c[nu] = q[1];
          const PointConnection A = closed_connection_4d(spec, T, conv);
          const Matrix F = curvature_at(A, p, mu, nu, h);
          const ThermalState ts = density_matrix(analytic_eigensystem(spec, p), T, conv);
          double v = (I1 / (2.0 * M_PI) * (ts.rho * F).trace()).real();
          if (weighted)
            v *= lambda_weight(WeightKind::Chern1,
                               Complex(upper_eff_energy(spec, p, conv), 0.0), T);
          return v;
        };
        const IntegralValue iv = integrate(sub, dims, grid.rule, f);
        worst = std::max(worst, std::abs(iv.value));
        excluded += iv.excluded;
      }
    }
  InvariantResult r;
  r.value = worst;
  r.grid = grid;
  r.excluded_points = excluded;
  return r;
}

InvariantResult second_chern(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                             bool weighted, WeightConvention conv, bool full_eps_sum) {
  spec.validate();
  if (spec.family != Family::NH4 || spec.embedding != Embedding::S4)
    throw IncompatibleEmbedding("second_chern: hypersphere embedding required");
  grid.validate(4);
  const auto dom = integration_domain(spec.embedding);
  const double h = defaults::stencil_h;

  // Orientation fixed so the Hermitian zero-temperature reference is positive.
  const double orient = -1.0;

  const auto node_value = [&](const ParamPoint& p) {
    double tr = full_eps_sum ? c2_eps_trace(spec, p, T, conv, h)
                             : 3.0 * c2_reduced_trace(spec, p, T, conv, h);
    double v = orient * tr / (M_PI * M_PI);
    if (weighted)
      v *= lambda_weight(WeightKind::Chern2, Complex(upper_eff_energy(spec, p, conv), 0.0), T) *
           branch_sign(spec, p[0]);
    return v;
  };

  InvariantResult r;
  r.grid = grid;
  if (weighted) {
    const IntegralValue full = integrate(dom, grid.dims, grid.rule, node_value);
    const IntegralValue half = integrate(dom, grid.halved().dims, grid.rule, node_value);
    r.value = full.value;
    r.refinement_delta = std::abs(full.value - half.value);
    r.excluded_points = full.excluded;
    return r;
  }

  // Unweighted: reduced integral over theta1 (the integrand factorizes as
  // sin(2 theta2) in theta2 and is phase-independent), cross-checked against
  // a coarse full-4D quadrature.
  const int n1d = std::max(grid.dims[0], 200);
  const std::vector<DirectionSpec> dom1{dom[0]};
  const auto reduced = [&](const ParamPoint& q) {
    ParamPoint p;
    p.dim = 4;
    p.c[0] = q[0];
    p.c[1] = M_PI / 4.0;  // sin(2 theta2) = 1 reference slice
    p.c[2] = 0.0;
    p.c[3] = 0.0;
    return orient * 12.0 * c2_reduced_trace(spec, p, T, conv, h);
  };
  const IntegralValue v1 = integrate(dom1, {2 * n1d}, grid.rule, reduced);
  const IntegralValue v1_half = integrate(dom1, {n1d}, grid.rule, reduced);

  std::vector<int> coarse(4);
  for (int d = 0; d < 4; ++d) coarse[d] = std::max(12, grid.dims[d] / 2);
  const IntegralValue v4 = integrate(dom, coarse, grid.rule, node_value);

  r.value = v1.value;
  r.refinement_delta = std::abs(v1.value - v1_half.value);
  r.excluded_points = v1.excluded + v4.excluded;
  r.cross_check_delta = std::abs(v1.value - v4.value);
  return r;
}

TraceCheckReport trace_component_checks(const ModelSpec& spec, const ParamPoint& p, double T,
                                        WeightConvention conv) {
  spec.validate();
  if (spec.family != Family::NH4 || spec.embedding != Embedding::S4)
    throw IncompatibleEmbedding("trace_component_checks: hypersphere embedding required");
  const double h = defaults::stencil_h;
  const PointConnection A = closed_connection_4d(spec, T, conv);

  const auto dpart = [&](int mu, int nu) {
    const Matrix dmu_Anu = (A(p.shifted(mu, h), nu) - A(p.shifted(mu, -h), nu)) / (2.0 * h);
    const Matrix dnu_Amu = (A(p.shifted(nu, h), mu) - A(p.shifted(nu, -h), mu)) / (2.0 * h);
    return Matrix(dmu_Anu - dnu_Amu);
  };
  const auto cpart = [&](int mu, int nu) {
    const Matrix a = A(p, mu), b = A(p, nu);
    return Matrix(a * b - b * a);
  };

  const Matrix dphi = dpart(2, 3);   // d_phi1 A^phi2 - d_phi2 A^phi1
  const Matrix dth = dpart(0, 1);    // d_theta1 A^theta2 - d_theta2 A^theta1
  const Matrix cphi = cpart(2, 3);   // [A^phi1, A^phi2]
  const Matrix cth = cpart(0, 1);    // [A^theta1, A^theta2]

  const EigenSystem es = analytic_eigensystem(spec, p);
  const ThermalState ts = density_matrix(es, T, conv);
  const std::vector<double>& P = ts.weights;

  TraceCheckReport rep;
  rep.traces = {(ts.rho * dphi * dth).trace().real(), (ts.rho * dphi * cth).trace().real(),
                (ts.rho * cphi * dth).trace().real(), (ts.rho * cphi * cth).trace().real()};
  rep.f = f_pair(P[0], P[2]);
  const double eff = effective_energy(es.energies[es.dim() - 1], conv);
  rep.tanh_x = std::tanh(std::abs(eff) / T);

  const double f = rep.f, t = rep.tanh_x;
  const std::array<double, 4> coeff{4.0 * t * f * f, -2.0 * t * f * f * f,
                                    -2.0 * t * f * f * f, t * f * f * f * f};
  rep.common_factor = rep.traces[0] / coeff[0];
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    rep.predicted[k] = coeff[k] * rep.common_factor;
    const double scale = std::max(std::abs(rep.traces[k]), 1e-300);
    worst = std::max(worst, std::abs(rep.traces[k] - rep.predicted[k]) / scale);
  }
  rep.max_relative_residual = worst;
  return rep;
}

}  // namespace nhtop
