#pragma once

#include <functional>
#include <vector>

#include "nhtop/types.hpp"

namespace nhtop {

/// Matched right/left eigenpairs of a (generally non-Hermitian) matrix,
/// jointly biorthonormalized: left.row(m) * right.col(n) == delta_mn.
struct EigenSystem {
  Vector energies;   // eigenvalues, sorted by (Re, Im) ascending
  Matrix right;      // column n = |u_n>
  Matrix left;       // row n = <u_n^L| (covector, pairs linearly: no conjugation)
  Vector norms;      // normalization constants used for each pair
  std::vector<std::vector<int>> groups;  // indices clustered within degeneracy_tol
  double min_gap = 0.0;                  // min pairwise |E_m - E_n|: distance to nearest EP

  int dim() const { return static_cast<int>(energies.size()); }

  /// max |<u_m^L|u_n> - delta_mn|
  double biorthonormality_residual() const;
  /// max-norm of H - sum_n E_n |u_n><u_n^L| against the given H
  double reconstruction_residual(const Matrix& H) const;
  /// sum_n E_n |u_n><u_n^L|
  Matrix reconstruct() const;
  /// spectral projector of group g: sum_{n in g} |u_n><u_n^L|
  Matrix group_projector(int g) const;
};

/// Biorthogonal eigendecomposition of a dense n<=4 matrix. Closed-form roots
/// for n=2, dense solver for n=3,4; left solutions are obtained from the
/// adjoint problem, matched to the right ones by eigenvalue, and jointly
/// normalized through the inverse of the left-right overlap block (so
/// degenerate subspaces are biorthonormalized as blocks, not vector-wise).
///
/// Throws NearExceptionalPoint when the overlap matrix has condition number
/// above defaults::ep_condition_limit; min_gap reports the distance to the
/// nearest eigenvalue coalescence.
EigenSystem eig_biorthogonal(const Matrix& H, double degeneracy_tol);

/// sqrt(rho) = sum_n sqrt(P_n) |u_n><u_n^L| in the biorthogonal functional
/// calculus (weights must be >= 0).
Matrix matrix_sqrt_biortho(const std::vector<double>& weights, const EigenSystem& eigsys);

/// Ordered product prod_k exp(A_k * step), first sample applied first
/// (i.e. result = exp(A_{N-1} h) ... exp(A_1 h) exp(A_0 h)).
/// Self-checks against the half-density product and throws
/// ResolutionTooCoarse when the two disagree beyond 1e-4 in max norm.
Matrix path_ordered_exp(const std::vector<Matrix>& samples, double step);

/// As above but also records Tr(rho0 * partial product) after every step;
/// used for continuous phase unwrapping.
Matrix path_ordered_exp_traced(const std::vector<Matrix>& samples, double step,
                               const Matrix& rho0, std::vector<Complex>& partial_traces);

/// For each consecutive pair of eigensystems, the permutation p with
/// p[n] = index at step k+1 of the band that was n at step k, chosen by
/// maximizing |<u_n^L(k)|u_m(k+1)>|. Throws AmbiguousTracking when the best
/// and runner-up overlaps differ by < 0.1.
std::vector<std::vector<int>> track_bands(const std::vector<EigenSystem>& systems);

/// Composition of the per-step permutations over a closed loop.
std::vector<int> monodromy(const std::vector<std::vector<int>>& perms);

using MatrixField = std::function<Matrix(const ParamPoint&)>;

/// Central difference (f(x + h e_dir) - f(x - h e_dir)) / 2h.
Matrix finite_diff(const MatrixField& field, const ParamPoint& point, int direction, double h);

}  // namespace nhtop
