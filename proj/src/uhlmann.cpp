#include "nhtop/uhlmann.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace nhtop {

namespace {
const Complex I1(0.0, 1.0);

double principal(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}
}  // namespace

ParamPoint ConnectionField::node(const std::vector<int>& idx) const {
  ParamPoint p;
  p.dim = dim();
  for (int d = 0; d < dim(); ++d) p.c[d] = bounds[d].first + (idx[d] + 0.5) * step(d);
  return p;
}

size_t ConnectionField::flat(const std::vector<int>& idx) const {
  size_t f = 0;
  for (int d = 0; d < dim(); ++d) f = f * dims[d] + idx[d];
  return f;
}

Matrix sqrt_rho_at(const ModelSpec& spec, const ParamPoint& p, double T, WeightConvention conv) {
  const EigenSystem es = model_eigensystem(spec, p);
  return matrix_sqrt_biortho(boltzmann_weights(es.energies, T, conv), es);
}

Matrix connection_generic_at(const ModelSpec& spec, const ParamPoint& p, int direction, double T,
                             double h, WeightConvention conv) {
  const EigenSystem es = model_eigensystem(spec, p);
  const std::vector<double> P = boltzmann_weights(es.energies, T, conv);
  const Matrix s0 = matrix_sqrt_biortho(P, es);
  const Matrix sp = sqrt_rho_at(spec, p.shifted(direction, h), T, conv);
  const Matrix sm = sqrt_rho_at(spec, p.shifted(direction, -h), T, conv);
  const Matrix ds = (sp - sm) / (2.0 * h);
  const Matrix C = s0 * ds - ds * s0;

  const int ng = static_cast<int>(es.groups.size());
  std::vector<Matrix> proj(ng);
  std::vector<double> Pg(ng);
  for (int g = 0; g < ng; ++g) {
    proj[g] = es.group_projector(g);
    double sum = 0.0;
    for (int n : es.groups[g]) sum += P[n];
    Pg[g] = sum / es.groups[g].size();  // per-state weight of the cluster
  }

  Matrix A = Matrix::Zero(es.dim(), es.dim());
  for (int m = 0; m < ng; ++m)
    for (int n = 0; n < ng; ++n) {
      if (m == n) continue;  // band-diagonal block of the commutator vanishes
      const double den = Pg[m] + Pg[n];
      if (den < 1e-300)
        throw DenominatorUnderflow("connection_generic_at: P_m + P_n underflow");
      A += (proj[m] * C * proj[n]) / den;
    }
  return A;
}

ConnectionField connection_generic(const ModelSpec& spec, int samples, double T, double h,
                                   WeightConvention conv) {
  spec.validate();
  if (spec.embedding != Embedding::Loop2D && spec.embedding != Embedding::Loop4D)
    throw IncompatibleEmbedding("connection_generic: loop sampling needs a loop embedding");
  ConnectionField f;
  f.dims = {samples};
  f.bounds = {{0.0, 2.0 * M_PI}};
  f.components.resize(1);
  f.components[0].reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const ParamPoint p = f.node({k});
    f.components[0].push_back(connection_generic_at(spec, p, 0, T, h, conv));
  }
  return f;
}

namespace {

EigenSystem frame_at(const ModelSpec& spec, const ParamPoint& p, bool analytic) {
  return analytic ? analytic_eigensystem(spec, p) : model_eigensystem(spec, p);
}

// Match the columns of `other` onto `base`: clusters by eigenvalue distance,
// within near-degenerate clusters by biorthogonal overlap magnitude.
std::vector<int> match_frames(const EigenSystem& base, const EigenSystem& other) {
  const int n = base.dim();
  std::vector<int> assign(n, -1);
  std::vector<bool> used(n, false);
  for (int i = 0; i < n; ++i) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::max();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double de = std::abs(base.energies[i] - other.energies[j]);
      const double ov = std::abs(Complex(base.left.row(i) * other.right.col(j)));
      const double cost = de - 1e-3 * ov;  // overlap breaks degenerate ties
      if (cost < best_cost) {
        best_cost = cost;
        best = j;
      }
    }
    assign[i] = best;
    used[best] = true;
  }
  return assign;
}

}  // namespace

FrameWithDerivative biorthogonal_frame_derivative(const ModelSpec& spec, const ParamPoint& p,
                                                  int direction, double h, bool analytic) {
  FrameWithDerivative fd;
  fd.es = frame_at(spec, p, analytic);
  const int n = fd.es.dim();
  Matrix up(n, n), um(n, n), wp(n, n), wm(n, n);
  for (int side = 0; side < 2; ++side) {
    const double hh = side == 0 ? h : -h;
    const EigenSystem es = frame_at(spec, p.shifted(direction, hh), analytic);
    const std::vector<int> asg = match_frames(fd.es, es);
    for (int i = 0; i < n; ++i) {
      Vector u = es.right.col(asg[i]);
      Eigen::Matrix<Complex, 1, Eigen::Dynamic, Eigen::RowMajor, 1, 4> w =
          es.left.row(asg[i]);
      const Complex o = fd.es.left.row(i) * u;
      if (std::abs(o) < 1e-12)
        throw AmbiguousTracking("frame_derivative: vanishing overlap during gauge lock");
      const Complex t = std::conj(o) / std::abs(o);
      u *= t;
      w /= t;
      if (side == 0) {
        up.col(i) = u;
        wp.row(i) = w;
      } else {
        um.col(i) = u;
        wm.row(i) = w;
      }
    }
  }
  fd.du = (up - um) / (2.0 * h);
  fd.dw = (wp - wm) / (2.0 * h);
  return fd;
}

Matrix connection_closed_2d(const ModelSpec& spec, const ParamPoint& p, int direction, double T,
                            WeightConvention conv, double h) {
  spec.validate();
  if (spec.family != Family::NH2)
    throw IncompatibleEmbedding("connection_closed_2d: two-level family only");
  const bool analytic = spec.embedding == Embedding::Sphere2D;
  const FrameWithDerivative fd = biorthogonal_frame_derivative(spec, p, direction, h, analytic);
  const std::vector<double> P = boltzmann_weights(fd.es.energies, T, conv);
  const double f = f_pair(P[0], P[1]);

  const auto u1 = fd.es.right.col(0);
  const auto u2 = fd.es.right.col(1);
  const auto w1 = fd.es.left.row(0);
  const auto w2 = fd.es.left.row(1);
  const Complex dw1_u2 = fd.dw.row(0) * u2;   // <du_1^L|u_2>
  const Complex w2_du1 = w2 * fd.du.col(0);   // <u_2^L|du_1>
  Matrix A = f * (dw1_u2 * (u1 * w2) - w2_du1 * (u2 * w1));
  return A;
}

namespace {

std::array<Matrix, 4> components_4d_impl(const ModelSpec& spec, const ParamPoint& p, double T,
                                         WeightConvention conv, int only_dir) {
  spec.validate();
  if (spec.family != Family::NH4 || spec.embedding != Embedding::S4)
    throw IncompatibleEmbedding("connection_components_4d: four-level hypersphere only");

  const EigenSystem es = analytic_eigensystem(spec, p);
  const std::vector<double> P = boltzmann_weights(es.energies, T, conv);
  const double f = f_pair(P[0], P[2]);  // per-state weights of the two bands

  // Frame data in the same variables as the closed-form eigenvectors.
  const double S = spec.R;
  const double t1 = p[0], t2 = p[1], p1 = p[2], p2 = p[3];
  const Complex a = S * std::sin(t1) * std::cos(t2) * std::exp(I1 * p1);
  const Complex b = S * std::sin(t1) * std::sin(t2) * std::exp(I1 * p2);
  const Complex z(S * std::cos(t1), spec.gamma);
  const std::array<Complex, 2> E{es.energies[0], es.energies[2]};
  const std::array<Complex, 2> N{es.norms[0], es.norms[2]};

  // Direction derivatives of (a, b, z, E_n).
  std::array<Complex, 4> da, db, dz;
  std::array<std::array<Complex, 2>, 4> dE;
  const double ct1 = std::cos(t1), st1 = std::sin(t1);
  da[0] = S * ct1 * std::cos(t2) * std::exp(I1 * p1);
  db[0] = S * ct1 * std::sin(t2) * std::exp(I1 * p2);
  dz[0] = -S * st1;
  da[1] = -S * st1 * std::sin(t2) * std::exp(I1 * p1);
  db[1] = S * st1 * std::cos(t2) * std::exp(I1 * p2);
  dz[1] = 0.0;
  da[2] = I1 * a;
  db[2] = 0.0;
  dz[2] = 0.0;
  da[3] = 0.0;
  db[3] = I1 * b;
  dz[3] = 0.0;
  for (int n = 0; n < 2; ++n) {
    dE[0][n] = -I1 * spec.gamma * S * st1 / E[n];  // d(E^2) = -2 i gamma S sin(t1) dt1
    dE[1][n] = dE[2][n] = dE[3][n] = 0.0;
  }

  // Unnormalized pairings w~_m^j . d(u~_n^k); normalized coefficient is
  // (pairing)/(N_m N_n) since the cross overlaps vanish identically.
  std::array<Matrix, 4> A;
  for (int mu = 0; mu < 4; ++mu) {
    if (only_dir >= 0 && mu != only_dir) continue;
    Matrix Am = Matrix::Zero(4, 4);
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) {
        if (m == n) continue;
        const Complex Emz = E[m] + z, dEnz = dE[mu][n] + dz[mu];
        const Complex caa =
            (std::conj(b) * db[mu] + std::conj(a) * da[mu] + Emz * dEnz) / (N[m] * N[n]);
        const Complex cbb =
            (a * std::conj(da[mu]) + b * std::conj(db[mu]) + Emz * dEnz) / (N[m] * N[n]);
        const Complex cab =
            (std::conj(b) * std::conj(da[mu]) - std::conj(a) * std::conj(db[mu])) /
            (N[m] * N[n]);
        const Complex cba = (a * db[mu] - b * da[mu]) / (N[m] * N[n]);
        const int ma = 2 * m, mb = 2 * m + 1, na = 2 * n, nb = 2 * n + 1;
        Am -= f * caa * (es.right.col(ma) * es.left.row(na));
        Am -= f * cbb * (es.right.col(mb) * es.left.row(nb));
        Am -= f * cab * (es.right.col(ma) * es.left.row(nb));
        Am -= f * cba * (es.right.col(mb) * es.left.row(na));
      }
    A[mu] = Am;
  }
  return A;
}

}  // namespace

std::array<Matrix, 4> connection_components_4d(const ModelSpec& spec, const ParamPoint& p,
                                               double T, WeightConvention conv) {
  return components_4d_impl(spec, p, T, conv, -1);
}

Matrix connection_component_4d(const ModelSpec& spec, const ParamPoint& p, double T,
                               WeightConvention conv, int direction) {
  return components_4d_impl(spec, p, T, conv, direction)[direction];
}

Matrix curvature_at(const PointConnection& A, const ParamPoint& p, int mu, int nu, double h) {
  const Matrix dmu_Anu =
      (A(p.shifted(mu, h), nu) - A(p.shifted(mu, -h), nu)) / (2.0 * h);
  const Matrix dnu_Amu =
      (A(p.shifted(nu, h), mu) - A(p.shifted(nu, -h), mu)) / (2.0 * h);
  const Matrix Amu = A(p, mu);
  const Matrix Anu = A(p, nu);
  return dmu_Anu - dnu_Amu + Amu * Anu - Anu * Amu;
}

std::vector<Matrix> curvature(const ConnectionField& field, int mu, int nu,
                              const std::vector<bool>& periodic) {
  const int D = field.dim();
  std::vector<int> idx(D, 0);
  std::vector<Matrix> out;
  const auto in_range = [&](const std::vector<int>& i) {
    for (int d = 0; d < D; ++d)
      if (i[d] < 0 || i[d] >= field.dims[d]) return false;
    return true;
  };
  const auto sample = [&](std::vector<int> i, int dir) -> const Matrix& {
    for (int d = 0; d < D; ++d) {
      if (i[d] < 0) i[d] += field.dims[d];
      if (i[d] >= field.dims[d]) i[d] -= field.dims[d];
    }
    return field.components[dir][field.flat(i)];
  };
  // walk the full lattice; skip non-interior points of aperiodic directions
  size_t total = 1;
  for (int d = 0; d < D; ++d) total *= field.dims[d];
  for (size_t f = 0; f < total; ++f) {
    size_t rem = f;
    for (int d = D - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % field.dims[d]);
      rem /= field.dims[d];
    }
    bool interior = true;
    for (int d : {mu, nu})
      if (!periodic[d] && (idx[d] == 0 || idx[d] == field.dims[d] - 1)) interior = false;
    if (!interior) continue;
    auto shift = [&](int dir, int by) {
      std::vector<int> j = idx;
      j[dir] += by;
      return j;
    };
    (void)in_range;
    const Matrix dmu_Anu =
        (sample(shift(mu, 1), nu) - sample(shift(mu, -1), nu)) / (2.0 * field.step(mu));
    const Matrix dnu_Amu =
        (sample(shift(nu, 1), mu) - sample(shift(nu, -1), mu)) / (2.0 * field.step(nu));
    const Matrix& Amu = field.components[mu][field.flat(idx)];
    const Matrix& Anu = field.components[nu][field.flat(idx)];
    out.push_back(dmu_Anu - dnu_Amu + Amu * Anu - Anu * Amu);
  }
  return out;
}

Holonomy uhlmann_phase(const ModelSpec& spec, int windings, double T, int samples,
                       WeightConvention conv, bool naive_exponential, double h) {
  spec.validate();
  if (spec.embedding != Embedding::Loop2D && spec.embedding != Embedding::Loop4D)
    throw IncompatibleEmbedding("uhlmann_phase: loop embedding required");
  if (windings != 1 && windings != 2)
    throw InvalidConfig("uhlmann_phase: windings must be 1 or 2");
  if (samples < 16) throw InvalidConfig("uhlmann_phase: too few samples");

  const int total = samples * windings;
  const double step = 2.0 * M_PI / samples;

  ParamPoint origin;
  origin.dim = 1;
  origin.c[0] = 0.0;
  const ThermalState ts0 = density_matrix(model_eigensystem(spec, origin), T, conv);

  std::vector<Matrix> A;
  A.reserve(total);
  for (int k = 0; k < total; ++k) {
    ParamPoint p;
    p.dim = 1;
    p.c[0] = (k + 0.5) * step;
    A.push_back(connection_generic_at(spec, p, 0, T, h, conv));
  }

  Holonomy hol;
  std::vector<Complex> traces;
  if (naive_exponential) {
    Matrix sum = Matrix::Zero(A.front().rows(), A.front().cols());
    for (const Matrix& a : A) sum += a * step;
    hol.transport = sum.exp();
    traces = {(ts0.rho * hol.transport).trace()};
  } else {
    hol.transport = path_ordered_exp_traced(A, step, ts0.rho, traces);
  }

  double prev = 0.0;  // arg Tr(rho0 * Identity) = 0
  double acc = 0.0;
  for (const Complex& g : traces) {
    const double cur = std::arg(g);
    acc += principal(cur - prev);
    prev = cur;
  }
  hol.unwrapped_phase = acc;
  hol.phase = principal(std::arg(traces.back()));
  return hol;
}

}  // namespace nhtop
