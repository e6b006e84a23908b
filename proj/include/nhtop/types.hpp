#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhtop {

using Complex = std::complex<double>;

// All model Hamiltonians are dense n x n with n <= 4, so matrices are
// heap-free (fixed max size) while keeping runtime dimension.
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1>;

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool all_finite(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

/// Validating constructor for the dense complex carrier: square, dim in
/// {2,3,4}, every entry finite.
Matrix make_matrix(const Matrix& entries);

// A point in the parameter manifold of an embedding (angles in radians,
// radii in units of gamma). Fixed capacity 4 keeps hot loops allocation-free.
struct ParamPoint {
  std::array<double, 4> c{};
  int dim = 0;

  ParamPoint() = default;
  ParamPoint(std::initializer_list<double> v) {
    dim = static_cast<int>(v.size());
    if (dim > 4) throw std::invalid_argument("ParamPoint: at most 4 coordinates");
    int i = 0;
    for (double x : v) c[i++] = x;
  }
  double operator[](int i) const { return c[i]; }
  double& operator[](int i) { return c[i]; }
  ParamPoint shifted(int direction, double h) const {
    ParamPoint p = *this;
    p.c[direction] += h;
    return p;
  }
};

// Error taxonomy. Numerical guards throw; sweep drivers catch and record.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};
struct NearExceptionalPoint : Error {
  explicit NearExceptionalPoint(const std::string& what) : Error(what) {}
};
struct ResolutionTooCoarse : Error {
  explicit ResolutionTooCoarse(const std::string& what) : Error(what) {}
};
struct AmbiguousTracking : Error {
  explicit AmbiguousTracking(const std::string& what) : Error(what) {}
};
struct DivergentWeight : Error {
  explicit DivergentWeight(const std::string& what) : Error(what) {}
};
struct DenominatorUnderflow : Error {
  explicit DenominatorUnderflow(const std::string& what) : Error(what) {}
};
struct IncompatibleEmbedding : Error {
  explicit IncompatibleEmbedding(const std::string& what) : Error(what) {}
};
struct NoClosedForm : Error {
  explicit NoClosedForm(const std::string& what) : Error(what) {}
};
struct NoTransition : Error {
  explicit NoTransition(const std::string& what) : Error(what) {}
};
struct InvalidConfig : Error {
  explicit InvalidConfig(const std::string& what) : Error(what) {}
};

namespace defaults {
inline constexpr double stencil_h = 1e-5;            // loop-parameter units
inline constexpr double degeneracy_tol_scale = 1e-8; // times gamma
inline constexpr double ep_condition_limit = 1e12;   // left/right overlap cond
inline constexpr double weight_tanh_floor = 1e-8;    // DivergentWeight guard
}  // namespace defaults

}  // namespace nhtop
