#pragma once

#include <limits>

namespace hyl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Ideal Bose gas context: dimension, inverse temperature and the chemical
/// potential of the reference process.
struct GasParams {
  int d = 3;
  double beta = 1.0;
  double alpha = -1.0;

  GasParams with_alpha(double a) const { return {d, beta, a}; }
  void validate() const;
};

struct CycleWeight {
  long k;
  double q;       // (4 pi beta)^{-d/2} k^{-(1+d/2)}
  double tilted;  // q e^{beta alpha k}
};

/// (4 pi beta)^{-d/2}
double thermal_prefactor(int d, double beta);

CycleWeight cycle_weight(const GasParams& gas, long k);

/// p0(beta, alpha) = (1/beta) sum_k q_k e^{beta alpha k}. Throws ErrorKind::domain for alpha > 0.
double pressure_p0(const GasParams& gas);

/// First (order 1) or second (order 2) alpha-derivative of p0.
/// Throws ErrorKind::divergence where the underlying Bose order is <= 1 at alpha = 0.
double pressure_p0_deriv(const GasParams& gas, int order);

/// (4 pi beta)^{-d/2} zeta(d/2) for d >= 3, +infinity for d = 1, 2.
double critical_density(int d, double beta);

/// Inverse of alpha -> p0'(beta, alpha), clamped to 0 at and above the critical density.
/// Only gas.d and gas.beta are used.
double s_beta(const GasParams& gas, double x, double tol = 1e-10);

/// f0(beta, x) = s x - p0(beta, s), s = s_beta(x). f0(beta, 0) = 0.
double free_energy_f0(const GasParams& gas, double x);

/// Same as free_energy_f0 when s = s_beta(x) is already known.
double free_energy_from_s(const GasParams& gas, double x, double s);

}  // namespace hyl
