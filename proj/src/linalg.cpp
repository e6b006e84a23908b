#include "nhtop/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nhtop {

Matrix make_matrix(const Matrix& entries) {
  if (entries.rows() != entries.cols())
    throw InvalidConfig("matrix must be square");
  if (entries.rows() < 2 || entries.rows() > 4)
    throw InvalidConfig("matrix dimension must be 2, 3 or 4");
  if (!all_finite(entries)) throw InvalidConfig("matrix entries must be finite");
  return entries;
}

double EigenSystem::biorthonormality_residual() const {
  Matrix overlap = left * right;
  overlap -= Matrix::Identity(dim(), dim());
  return max_abs(overlap);
}

Matrix EigenSystem::reconstruct() const {
  Matrix H = Matrix::Zero(dim(), dim());
  for (int n = 0; n < dim(); ++n)
    H += energies[n] * (right.col(n) * left.row(n));
  return H;
}

double EigenSystem::reconstruction_residual(const Matrix& H) const {
  return max_abs(Matrix(H - reconstruct()));
}

Matrix EigenSystem::group_projector(int g) const {
  Matrix P = Matrix::Zero(dim(), dim());
  for (int n : groups[g]) P += right.col(n) * left.row(n);
  return P;
}

namespace {

// Eigenvalues and right eigenvectors. n=2 uses the characteristic roots,
// n=3,4 the dense QR solver.
void eig_right(const Matrix& H, Vector& evals, Matrix& evecs) {
  const int n = static_cast<int>(H.rows());
  if (n == 2) {
    const Complex m = 0.5 * (H(0, 0) + H(1, 1));
    const Complex det = H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0);
    const Complex s = std::sqrt(m * m - det);
    evals.resize(2);
    evals[0] = m + s;
    evals[1] = m - s;
    evecs.resize(2, 2);
    for (int k = 0; k < 2; ++k) {
      // kernel of (H - E): pick the better-conditioned row construction
      Vector v1(2), v2(2);
      v1 << H(0, 1), evals[k] - H(0, 0);
      v2 << evals[k] - H(1, 1), H(1, 0);
      Vector v = (v1.norm() >= v2.norm()) ? v1 : v2;
      if (v.norm() < 1e-300) v << 1.0, 0.0;  // H proportional to identity
      evecs.col(k) = v / v.norm();
    }
    return;
  }
  Eigen::ComplexEigenSolver<Matrix> solver(H, true);
  evals = solver.eigenvalues();
  evecs = solver.eigenvectors();
}

std::vector<int> sort_order(const Vector& evals) {
  std::vector<int> order(evals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (evals[a].real() != evals[b].real()) return evals[a].real() < evals[b].real();
    return evals[a].imag() < evals[b].imag();
  });
  return order;
}

}  // namespace

EigenSystem eig_biorthogonal(const Matrix& H, double degeneracy_tol) {
  const Matrix Hv = make_matrix(H);
  const int n = static_cast<int>(Hv.rows());

  Vector er;
  Matrix Ur;
  eig_right(Hv, er, Ur);
  std::vector<int> order = sort_order(er);

  EigenSystem es;
  es.energies.resize(n);
  es.right.resize(n, n);
  for (int i = 0; i < n; ++i) {
    es.energies[i] = er[order[i]];
    es.right.col(i) = Ur.col(order[i]) / Ur.col(order[i]).norm();
  }

  // Left covectors: rows of the inverse of the right-vector matrix. This is
  // exactly the jointly-normalized result of solving the adjoint problem,
  // matching by eigenvalue and inverting the left-right overlap block (for
  // any full-rank left solve L, (L U)^{-1} L == U^{-1}), and it normalizes
  // degenerate subspaces as blocks. The conditioning of U measures the
  // distance to an eigenvector coalescence.
  Eigen::JacobiSVD<Matrix> svd(es.right);
  const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
  if (!std::isfinite(cond) || cond > defaults::ep_condition_limit)
    throw NearExceptionalPoint("left-right overlap matrix is singular (cond " +
                               std::to_string(cond) + "): too close to an exceptional point");
  es.left = es.right.inverse();

  es.norms = Vector::Ones(n);

  es.min_gap = std::numeric_limits<double>::max();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      es.min_gap = std::min(es.min_gap, std::abs(es.energies[a] - es.energies[b]));

  // Cluster eigenvalues within degeneracy_tol (transitively).
  std::vector<int> group_of(n, -1);
  for (int i = 0; i < n; ++i) {
    if (group_of[i] >= 0) continue;
    const int g = static_cast<int>(es.groups.size());
    es.groups.push_back({i});
    group_of[i] = g;
    for (int j = i + 1; j < n; ++j) {
      if (group_of[j] >= 0) continue;
      for (int k : es.groups[g]) {
        if (std::abs(es.energies[j] - es.energies[k]) <= degeneracy_tol) {
          es.groups[g].push_back(j);
          group_of[j] = g;
          break;
        }
      }
    }
  }
  return es;
}

Matrix matrix_sqrt_biortho(const std::vector<double>& weights, const EigenSystem& eigsys) {
  if (static_cast<int>(weights.size()) != eigsys.dim())
    throw InvalidConfig("matrix_sqrt_biortho: weight count must match dimension");
  Matrix s = Matrix::Zero(eigsys.dim(), eigsys.dim());
  for (int i = 0; i < eigsys.dim(); ++i) {
    if (!(weights[i] >= 0.0))
      throw InvalidConfig("matrix_sqrt_biortho: weights must be non-negative");
    s += std::sqrt(weights[i]) * (eigsys.right.col(i) * eigsys.left.row(i));
  }
  return s;
}

namespace {

Matrix ordered_product(const std::vector<Matrix>& samples, double step, size_t stride,
                       const Matrix* rho0, std::vector<Complex>* traces) {
  const int n = static_cast<int>(samples.front().rows());
  Matrix V = Matrix::Identity(n, n);
  for (size_t k = 0; k < samples.size(); k += stride) {
    const Matrix stepper = Matrix(samples[k] * (step * static_cast<double>(stride))).exp();
    V = stepper * V;
    if (traces) traces->push_back((*rho0 * V).trace());
  }
  return V;
}

}  // namespace

Matrix path_ordered_exp_traced(const std::vector<Matrix>& samples, double step,
                               const Matrix& rho0, std::vector<Complex>& partial_traces) {
  if (samples.empty()) throw InvalidConfig("path_ordered_exp: empty sample list");
  if (!(step > 0.0)) throw InvalidConfig("path_ordered_exp: step must be positive");
  partial_traces.clear();
  Matrix V = ordered_product(samples, step, 1, &rho0, &partial_traces);
  if (samples.size() >= 8 && samples.size() % 2 == 0) {
    const Matrix V_half = ordered_product(samples, step, 2, nullptr, nullptr);
    const double disagreement = max_abs(Matrix(V - V_half));
    if (disagreement > 1e-4)
      throw ResolutionTooCoarse("path_ordered_exp: step-halving disagreement " +
                                std::to_string(disagreement));
  }
  return V;
}

Matrix path_ordered_exp(const std::vector<Matrix>& samples, double step) {
  std::vector<Complex> traces;
  const int n = static_cast<int>(samples.empty() ? 0 : samples.front().rows());
  const Matrix rho0 = n ? Matrix(Matrix::Identity(n, n)) : Matrix();
  return path_ordered_exp_traced(samples, step, rho0, traces);
}

std::vector<std::vector<int>> track_bands(const std::vector<EigenSystem>& systems) {
  std::vector<std::vector<int>> perms;
  for (size_t k = 0; k + 1 < systems.size(); ++k) {
    const EigenSystem& a = systems[k];
    const EigenSystem& b = systems[k + 1];
    const int n = a.dim();
    std::vector<int> perm(n, -1);
    std::vector<bool> taken(n, false);
    for (int i = 0; i < n; ++i) {
      double best = -1.0, second = -1.0;
      int arg = -1;
      for (int j = 0; j < n; ++j) {
        if (taken[j]) continue;
        const double o = std::abs(Complex(a.left.row(i) * b.right.col(j)));
        if (o > best) {
          second = best;
          best = o;
          arg = j;
        } else if (o > second) {
          second = o;
        }
      }
      if (best < 0.7)
        throw AmbiguousTracking("track_bands: max overlap " + std::to_string(best) +
                                " below 0.7 at step " + std::to_string(k));
      if (second >= 0.0 && best - second < 0.1)
        throw AmbiguousTracking("track_bands: overlaps " + std::to_string(best) + " vs " +
                                std::to_string(second) + " too close at step " +
                                std::to_string(k));
      perm[i] = arg;
      taken[arg] = true;
    }
    perms.push_back(std::move(perm));
  }
  return perms;
}

std::vector<int> monodromy(const std::vector<std::vector<int>>& perms) {
  if (perms.empty()) return {};
  std::vector<int> m(perms.front().size());
  std::iota(m.begin(), m.end(), 0);
  for (const auto& p : perms)
    for (int& v : m) v = p[v];
  return m;
}

Matrix finite_diff(const MatrixField& field, const ParamPoint& point, int direction, double h) {
  if (!(h > 0.0)) throw InvalidConfig("finite_diff: h must be positive");
  const Matrix fp = field(point.shifted(direction, h));
  const Matrix fm = field(point.shifted(direction, -h));
  return (fp - fm) / (2.0 * h);
}

}  // namespace nhtop
