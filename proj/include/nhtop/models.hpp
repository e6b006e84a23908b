#pragma once

#include <array>

#include "nhtop/linalg.hpp"
#include "nhtop/types.hpp"

namespace nhtop {

enum class Family { NH2, NH3, NH4, Hermitian3 };
enum class Embedding { Loop2D, Sphere2D, S3, Loop4D, S4 };

const char* to_string(Family f);
const char* to_string(Embedding e);
Family family_from_string(const std::string& s);
Embedding embedding_from_string(const std::string& s);

/// A model family with its gain/loss rate and parameter-space embedding.
/// r/d are the loop radius and center displacement, R the sphere (or
/// hypersphere) radius; at the default gamma = 1 all of them are measured in
/// units of gamma. gamma = 0 gives the Hermitian reduction of each family.
struct ModelSpec {
  Family family = Family::NH2;
  double gamma = 1.0;
  Embedding embedding = Embedding::Loop2D;
  double r = 2.0;  // loop radius (times gamma)
  double d = 2.5;  // loop center displacement (times gamma)
  double R = 2.0;  // sphere radius (times gamma)

  void validate() const;
  int matrix_dim() const;
  int embedding_dim() const;
  double energy_scale() const;
};

ModelSpec make_spec(Family f, Embedding e, double gamma = 1.0, double r = 2.0, double d = 2.5,
                    double R = 2.0);

std::array<Matrix, 3> pauli_basis();
std::array<Matrix, 8> gell_mann_basis();

/// Five mutually anticommuting Hermitian 4x4 involutions. The representation
/// is pinned by requiring the model's closed-form eigenvectors (see
/// analytic_eigensystem) to be exact eigenvectors of q.Gamma + i gamma Gamma4.
std::array<Matrix, 5> dirac_basis();

/// Embedding map: parameter point -> control vector q (length 3 for the
/// two-level family, 4 for the three-level one, 5 for the four-level one).
std::vector<double> embed(const ModelSpec& spec, const ParamPoint& p);

/// Model Hamiltonian at the embedded parameter value.
Matrix hamiltonian(const ModelSpec& spec, const ParamPoint& p);

/// Closed-form biorthonormalized eigensystem where one exists (NH2 sphere,
/// NH4 loop, NH4 hypersphere); throws NoClosedForm otherwise. For NH4 the
/// degenerate columns are ordered [u1_alpha, u1_beta, u2_alpha, u2_beta]
/// (alpha has vanishing first component, beta vanishing third).
EigenSystem analytic_eigensystem(const ModelSpec& spec, const ParamPoint& p);

/// Numeric eigensystem of hamiltonian(spec, p) with the model's default
/// degeneracy tolerance.
EigenSystem model_eigensystem(const ModelSpec& spec, const ParamPoint& p);

}  // namespace nhtop
