#include "hyl/ideal_gas.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hyl/bose.hpp"
#include "hyl/errors.hpp"

namespace hyl {

void GasParams::validate() const {
  if (d < 1) throw Error(ErrorKind::domain, "GasParams: dimension must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::domain, "GasParams: beta must be positive and finite");
  }
}

double thermal_prefactor(int d, double beta) {
  return std::pow(4.0 * std::numbers::pi * beta, -0.5 * d);
}

CycleWeight cycle_weight(const GasParams& gas, long k) {
  const double kd = static_cast<double>(k);
  const double q = thermal_prefactor(gas.d, gas.beta) * std::pow(kd, -(1.0 + 0.5 * gas.d));
  return {k, q, q * std::exp(gas.beta * gas.alpha * kd)};
}

double pressure_p0(const GasParams& gas) {
  gas.validate();
  if (gas.alpha > 0.0) {
    throw Error(ErrorKind::domain, "pressure_p0: diverges for alpha > 0");
  }
  return thermal_prefactor(gas.d, gas.beta) * bose(1.0 + 0.5 * gas.d, gas.beta * gas.alpha) / gas.beta;
}

double pressure_p0_deriv(const GasParams& gas, int order) {
  gas.validate();
  if (gas.alpha > 0.0) {
    throw Error(ErrorKind::domain, "pressure_p0_deriv: diverges for alpha > 0");
  }
  const double pre = thermal_prefactor(gas.d, gas.beta);
  const double u = gas.beta * gas.alpha;
  switch (order) {
    case 1: return pre * bose(0.5 * gas.d, u);
    case 2: return gas.beta * pre * bose(0.5 * gas.d - 1.0, u);
    default: throw Error(ErrorKind::domain, "pressure_p0_deriv: order must be 1 or 2");
  }
}

double critical_density(int d, double beta) {
  if (d <= 2) return kInfinity;
  return thermal_prefactor(d, beta) * zeta_value(0.5 * d);
}

double s_beta(const GasParams& gas, double x, double tol) {
  gas.validate();
  if (!(x > 0.0)) throw Error(ErrorKind::domain, "s_beta: requires x > 0");
  if (x >= critical_density(gas.d, gas.beta)) return 0.0;
  const double pre = thermal_prefactor(gas.d, gas.beta);
  const double u = inverse_bose(0.5 * gas.d, x / pre);
  const double s = u / gas.beta;
  const double residual = std::abs(pre * bose(0.5 * gas.d, u) - x);
  if (u < 0.0 && residual > tol * std::max(1.0, x)) {
    throw Error(ErrorKind::tolerance_not_reached,
                "s_beta: residual " + std::to_string(residual) + " above tolerance");
  }
  return s;
}

double free_energy_from_s(const GasParams& gas, double x, double s) {
  return s * x - pressure_p0(gas.with_alpha(s));
}

double free_energy_f0(const GasParams& gas, double x) {
  if (x == 0.0) return 0.0;
  return free_energy_from_s(gas, x, s_beta(gas, x));
}

}  // namespace hyl
