#pragma once

#include "nhtop/linalg.hpp"
#include "nhtop/types.hpp"

namespace nhtop {

/// How a complex eigenvalue is mapped to the real effective energy entering
/// the Boltzmann factor. "Re" takes Re(E) (smooth through PT-broken arcs,
/// where it makes the pair weights equal); "Abs" takes sign(Re E) * |E|
/// (reduces to Re on real spectra, keeps |E| as the scale otherwise).
enum class WeightConvention { Re, Abs };

const char* to_string(WeightConvention c);
WeightConvention weight_convention_from_string(const std::string& s);

double effective_energy(Complex E, WeightConvention conv);

/// Boltzmann weights P_n = exp(-eff(E_n)/T)/Z, normalized over the list
/// (degenerate levels appear as repeated entries, so multiplicity is counted
/// in Z automatically).
std::vector<double> boltzmann_weights(const Vector& energies, double T,
                                      WeightConvention conv = WeightConvention::Abs);

struct ThermalState {
  double temperature = 0.0;
  std::vector<double> weights;  // one per eigenvalue, sum = 1
  EigenSystem eigsys;
  Matrix rho;
};

/// rho = sum_n P_n |u_n><u_n^L| over the biorthogonal (or orthogonal) basis.
ThermalState density_matrix(const EigenSystem& eigsys, double T,
                            WeightConvention conv = WeightConvention::Abs);

/// f(T) = 1 - sech(|E|/T), the thermal transport amplitude of a +-E pair.
double f_factor(Complex E, double T);

/// The pair amplitude written directly in the weights actually used:
/// 1 - 2 sqrt(P_m P_n) / (P_m + P_n). Equals f_factor(E, T) whenever the
/// weights derive from effective energies +-|E|.
double f_pair(double Pm, double Pn);

enum class WeightKind { Chern1, DD, Chern2 };

/// Quantization-restoring scalar weights: 1/tanh^3(|E|/T) for the first
/// Chern number, 1/tanh^5(|E|/T) for the second, and the three-level
/// inverse-thermal factor for the DD invariant (see dd_lambda1_closed_form).
/// Throws DivergentWeight when |tanh(|E|/T)| < defaults::weight_tanh_floor.
double lambda_weight(WeightKind kind, Complex E, double T, double extra = 0.0);

/// The displayed closed form
///   lambda_1 = 2 sqrt(2) sin(2a) sinh^2(x/2) sinh(x) / sqrt(cosh(x) (1+2cosh(x))^3),
/// x = E_+/T. On the three-level sphere this expression equals the thermal
/// three-form M_B itself; the restoring weight used by lambda_weight(DD) is
/// sin(2a) / (2 lambda_1), whose T->0 limit is 1.
double dd_lambda1_closed_form(double x, double alpha);

}  // namespace nhtop
