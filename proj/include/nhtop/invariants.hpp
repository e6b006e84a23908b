#pragma once

#include "nhtop/uhlmann.hpp"

namespace nhtop {

enum class Rule { Trapezoid, Simpson };

/// Per-direction sample counts + rule over the embedding's canonical bounds
/// (theta in [0,pi], phi in [0,2pi), alpha in [0,pi/2], theta2 in [0,pi/2]).
/// Nodes sit strictly inside open intervals (half-step offset), so
/// coordinate poles are never evaluated; Simpson uses closed stencils with
/// the analytically-vanishing pole values.
struct QuadratureGrid {
  std::vector<int> dims;
  Rule rule = Rule::Trapezoid;

  void validate(int expected_dims) const;
  QuadratureGrid halved() const;
};

struct DirectionSpec {
  double lo = 0.0;
  double hi = 0.0;
  bool periodic = false;
};

std::vector<DirectionSpec> integration_domain(Embedding e);
QuadratureGrid default_grid(Embedding e);

struct InvariantResult {
  double value = 0.0;
  QuadratureGrid grid;
  double refinement_delta = 0.0;  // |value - value at half resolution|
  long excluded_points = 0;       // EP-guard / divergent-weight skips
  double cross_check_delta = 0.0; // reduced-vs-full oracle gap, when applicable
};

/// Number of worker threads used by quadratures and sweeps (results are
/// bit-identical for any setting; reduction order is fixed by chunk index).
void set_worker_threads(int n);
int worker_threads();

struct IntegralValue {
  double value = 0.0;
  long excluded = 0;
};

/// Deterministic streaming quadrature over the product grid.
IntegralValue integrate(const std::vector<DirectionSpec>& domain, const std::vector<int>& dims,
                        Rule rule, const std::function<double(const ParamPoint&)>& f);

/// Thermal Uhlmann-Chern number C_U = (i/2pi) int lambda(E,T) Tr(rho F) over
/// the two-level parameter sphere; quantized to an integer for R != gamma.
/// The closed-form connection drives the quadrature; use_generic_connection
/// switches to the projector-sandwich evaluator for cross-path checks.
InvariantResult thermal_chern_2d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                                 WeightConvention conv = WeightConvention::Abs,
                                 bool use_generic_connection = false);

/// Same integral without the restoring weight (decays with temperature).
InvariantResult nt_chern_2d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                            WeightConvention conv = WeightConvention::Abs,
                            bool use_generic_connection = false);

/// Bures metric at a point of the three-level sphere: the Hermitian family
/// uses the spectral form built from d(rho); the non-Hermitian family the
/// right-eigenvector form (complex off-diagonals, no symmetry guarantee).
Eigen::Matrix3cd bures_metric(const ModelSpec& spec, const ParamPoint& p, double T,
                              double h = defaults::stencil_h,
                              WeightConvention conv = WeightConvention::Re);

/// Thermal three-form M_B = 4 sqrt(G^aa (G^p1p1 G^p2p2 - |G^p1p2|^2)) >= 0.
double thermal_three_form(const ModelSpec& spec, const ParamPoint& p, double T,
                          double h = defaults::stencil_h,
                          WeightConvention conv = WeightConvention::Re);

/// Dixmier-Douady invariant (1/2pi^2) int [w] M_B over the parameter S^3;
/// weighted restores the integer, unweighted decays with temperature.
/// The smooth Re(E) effective energies are the sane default here: the
/// three-level spectrum has no +-pair structure away from gamma = 0.
InvariantResult dd_invariant(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                             bool weighted, WeightConvention conv = WeightConvention::Re);

/// Largest first-Chern integral over the six coordinate planes of the
/// four-level hypersphere (all vanish; reported as a residual).
InvariantResult first_chern_4d(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                               WeightConvention conv = WeightConvention::Abs);

/// Second thermal Uhlmann-Chern number over the hypersphere. Weighted:
/// full 4D quadrature of the symmetry-reduced integrand (or the complete
/// epsilon contraction when full_eps_sum). Unweighted: reduced 1D integral
/// cross-checked against a coarse full-4D quadrature (cross_check_delta).
InvariantResult second_chern(const ModelSpec& spec, double T, const QuadratureGrid& grid,
                             bool weighted, WeightConvention conv = WeightConvention::Abs,
                             bool full_eps_sum = false);

struct TraceCheckReport {
  std::array<double, 4> traces{};        // the four curvature trace products
  std::array<double, 4> predicted{};     // coefficient pattern * common factor
  double common_factor = 0.0;            // fitted from the first trace
  double max_relative_residual = 0.0;
  double f = 0.0;                        // thermal amplitude at the point
  double tanh_x = 0.0;
};

/// Checks the four displayed trace products of the hypersphere curvature
/// against the coefficient pattern {4 t f^2, -2 t f^3, -2 t f^3, t f^4}.
TraceCheckReport trace_component_checks(const ModelSpec& spec, const ParamPoint& p, double T,
                                        WeightConvention conv = WeightConvention::Abs);

}  // namespace nhtop
