#pragma once

#include <array>
#include <functional>

#include "nhtop/models.hpp"
#include "nhtop/thermal.hpp"

namespace nhtop {

/// Pointwise connection evaluator: component along `direction` at `p`.
using PointConnection = std::function<Matrix(const ParamPoint&, int direction)>;

/// Matrix-valued one-form sampled on a parameter lattice (one component per
/// embedding direction). Midpoint nodes: x_i = lo + (i + 1/2) step.
struct ConnectionField {
  std::vector<int> dims;
  std::vector<std::pair<double, double>> bounds;
  std::vector<std::vector<Matrix>> components;  // components[dir][flat index]

  int dim() const { return static_cast<int>(dims.size()); }
  double step(int dir) const {
    return (bounds[dir].second - bounds[dir].first) / dims[dir];
  }
  ParamPoint node(const std::vector<int>& idx) const;
  size_t flat(const std::vector<int>& idx) const;
};

struct Holonomy {
  Matrix transport;              // path-ordered product
  double phase = 0.0;            // arg Tr(rho0 transport), principal value
  double unwrapped_phase = 0.0;  // cumulative phase of the partial traces
};

/// sqrt(rho) at a parameter point (numeric eigensystem + Boltzmann weights).
Matrix sqrt_rho_at(const ModelSpec& spec, const ParamPoint& p, double T,
                   WeightConvention conv = WeightConvention::Abs);

/// Generic Uhlmann connection component: the group-projector sandwich of
/// [sqrt(rho), d_mu sqrt(rho)] divided by P_m + P_n. The commutator is
/// oriented so that the closed two-level form and the T->0 Chern limits are
/// reproduced with positive sign.
Matrix connection_generic_at(const ModelSpec& spec, const ParamPoint& p, int direction,
                             double T, double h = defaults::stencil_h,
                             WeightConvention conv = WeightConvention::Abs);

/// Samples the generic connection along a closed loop (Loop2D / Loop4D
/// embeddings), one winding, at `samples` midpoint nodes.
ConnectionField connection_generic(const ModelSpec& spec, int samples, double T,
                                   double h = defaults::stencil_h,
                                   WeightConvention conv = WeightConvention::Abs);

/// Closed two-level form of the connection (final line of the parallel
/// transport solution): f(T) (|u1><u2^L| <du1^L|u2> - |u2><u1^L| <u2^L|du1>),
/// with gauge-smoothed derivatives (analytic frame on the sphere embedding).
Matrix connection_closed_2d(const ModelSpec& spec, const ParamPoint& p, int direction, double T,
                            WeightConvention conv = WeightConvention::Abs,
                            double h = defaults::stencil_h);

/// The four closed-form components (theta1, theta2, phi1, phi2) of the
/// four-level hypersphere connection, assembled from the analytic
/// alpha/beta frame with exact eigenvector derivatives.
std::array<Matrix, 4> connection_components_4d(const ModelSpec& spec, const ParamPoint& p,
                                               double T,
                                               WeightConvention conv = WeightConvention::Abs);

/// Single component of the above (cheaper inside curvature stencils).
Matrix connection_component_4d(const ModelSpec& spec, const ParamPoint& p, double T,
                               WeightConvention conv, int direction);

/// Eigenframe at p together with gauge-smoothed central-difference
/// derivatives of the right vectors (du, columns) and left covectors (dw,
/// rows): the +-h frames are matched to the base frame and rescaled so the
/// biorthogonal overlap <u_n^L(p)|u_n(p +- h)> is real and positive.
struct FrameWithDerivative {
  EigenSystem es;
  Matrix du;
  Matrix dw;
};

FrameWithDerivative biorthogonal_frame_derivative(const ModelSpec& spec, const ParamPoint& p,
                                                  int direction, double h, bool analytic);

/// F^{mu nu} = d_mu A^nu - d_nu A^mu + [A^mu, A^nu] from a pointwise
/// evaluator (fresh stencil of width h).
Matrix curvature_at(const PointConnection& A, const ParamPoint& p, int mu, int nu, double h);

/// Lattice version: F at every interior lattice point (central differences
/// across neighboring samples; periodic directions wrap).
std::vector<Matrix> curvature(const ConnectionField& field, int mu, int nu,
                              const std::vector<bool>& periodic);

/// Uhlmann phase of `windings` traversals of the model's loop embedding:
/// arg Tr(rho_0 P exp(int A dtheta)) with rho_0 anchored at theta = 0.
/// `naive_exponential` replaces the ordered product by exp(sum A dtheta).
Holonomy uhlmann_phase(const ModelSpec& spec, int windings, double T, int samples = 800,
                       WeightConvention conv = WeightConvention::Abs,
                       bool naive_exponential = false,
                       double h = defaults::stencil_h);

}  // namespace nhtop
