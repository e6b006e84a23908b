#include "nhtop/thermal.hpp"

#include <algorithm>
#include <cmath>

namespace nhtop {

const char* to_string(WeightConvention c) {
  return c == WeightConvention::Re ? "re" : "abs";
}

WeightConvention weight_convention_from_string(const std::string& s) {
  if (s == "re") return WeightConvention::Re;
  if (s == "abs") return WeightConvention::Abs;
  throw InvalidConfig("unknown weight convention: " + s);
}

double effective_energy(Complex E, WeightConvention conv) {
  if (conv == WeightConvention::Re) return E.real();
  const double m = std::abs(E);
  if (std::abs(E.real()) <= 1e-12 * m) return 0.0;  // PT-broken: real parts degenerate
  return E.real() > 0.0 ? m : -m;
}

std::vector<double> boltzmann_weights(const Vector& energies, double T, WeightConvention conv) {
  if (!(T > 0.0)) throw InvalidConfig("boltzmann_weights: T must be > 0");
  const int n = static_cast<int>(energies.size());
  std::vector<double> eff(n);
  for (int i = 0; i < n; ++i) eff[i] = effective_energy(energies[i], conv);
  const double e0 = *std::min_element(eff.begin(), eff.end());
  std::vector<double> w(n);
  double Z = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::exp(-(eff[i] - e0) / T);
    Z += w[i];
  }
  for (double& x : w) x /= Z;
  return w;
}

ThermalState density_matrix(const EigenSystem& eigsys, double T, WeightConvention conv) {
  ThermalState ts;
  ts.temperature = T;
  ts.eigsys = eigsys;
  ts.weights = boltzmann_weights(eigsys.energies, T, conv);
  ts.rho = Matrix::Zero(eigsys.dim(), eigsys.dim());
  for (int n = 0; n < eigsys.dim(); ++n)
    ts.rho += ts.weights[n] * (eigsys.right.col(n) * eigsys.left.row(n));
  return ts;
}

double f_factor(Complex E, double T) {
  if (!(T > 0.0)) throw InvalidConfig("f_factor: T must be > 0");
  return 1.0 - 1.0 / std::cosh(std::abs(E) / T);
}

double f_pair(double Pm, double Pn) {
  const double s = Pm + Pn;
  if (s < 1e-300) throw DenominatorUnderflow("f_pair: weight sum underflow");
  return 1.0 - 2.0 * std::sqrt(Pm * Pn) / s;
}

double dd_lambda1_closed_form(double x, double alpha) {
  const double Z = 1.0 + 2.0 * std::cosh(x);
  const double num = std::pow(std::sinh(0.5 * x), 2) * std::sinh(x);
  return 2.0 * std::sqrt(2.0) * std::sin(2.0 * alpha) * num /
         std::sqrt(std::cosh(x) * Z * Z * Z);
}

double lambda_weight(WeightKind kind, Complex E, double T, double extra) {
  if (!(T > 0.0)) throw InvalidConfig("lambda_weight: T must be > 0");
  const double x = std::abs(E) / T;
  switch (kind) {
    case WeightKind::Chern1:
    case WeightKind::Chern2: {
      const double t = std::tanh(x);
      if (std::abs(t) < defaults::weight_tanh_floor)
        throw DivergentWeight("lambda_weight: tanh(E/T) vanishes, weight diverges");
      const int pw = (kind == WeightKind::Chern1) ? 3 : 5;
      return 1.0 / std::pow(t, pw);
    }
    case WeightKind::DD: {
      // sin(2a) / (2 lambda_1) evaluated without the sin(2a) cancellation so
      // alpha-independent; restores DD_B = 1 on the three-level sphere.
      const double Z = 1.0 + 2.0 * std::cosh(x);
      const double num = std::pow(std::sinh(0.5 * x), 2) * std::sinh(x);
      if (num < 1e-300 * std::sqrt(std::cosh(x) * Z * Z * Z))
        throw DivergentWeight("lambda_weight: DD weight diverges as E/T -> 0");
      (void)extra;
      return std::sqrt(std::cosh(x) * Z * Z * Z) / (4.0 * std::sqrt(2.0) * num);
    }
  }
  throw InvalidConfig("lambda_weight: unknown kind");
}

}  // namespace nhtop
