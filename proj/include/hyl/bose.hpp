#pragma once

// Bose (polylogarithm) functions, Riemann zeta and the expansion of g(n, u)
// around u = 0.
//
// Convention used throughout the library:
//
//     g(n, u) = sum_{k >= 1} k^{-n} e^{u k},   u <= 0,
//
// i.e. g(n, u) = Li_n(e^u). Physical evaluations always have u = beta * alpha <= 0.

namespace hyl {

/// Largest number of terms the direct series may use before giving up.
inline constexpr long kBoseSeriesTermCap = 10'000'000;

/// Orders closer than this to a positive integer use the logarithmic branch of
/// the small-|u| expansion.
inline constexpr double kIntegerOrderThreshold = 1e-9;

/// Riemann zeta, analytically continued to s < 1. Throws ErrorKind::pole at s = 1.
double zeta_value(double s);

/// Direct series sum_{k>=1} k^{-n} e^{uk} to absolute accuracy `tol`.
/// At u = 0 this is zeta(n) (n > 1). Throws ErrorKind::divergence for u > 0 or
/// (u = 0, n <= 1), ErrorKind::tolerance_not_reached past kBoseSeriesTermCap terms.
double bose_g(double n, double u, double tol = 1e-12);

/// Small-argument expansion
///
///     g(n, u) = Gamma(1-n) (-u)^{n-1} + sum_k zeta(n-k) u^k / k!          n not in N
///     g(n, u) = u^{n-1}/(n-1)! [ -log(-u) + H_{n-1} ] + sum_{k != n-1} ...  n in N
///
/// valid for 0 < |u| < 2*pi. For u > 0 the real part of the principal-branch
/// continuation is returned. Throws ErrorKind::domain for |u| >= 2*pi or u = 0.
double bose_g_expansion(double n, double u);

/// Evaluation used by the higher modules: the direct series (relative accuracy)
/// for u <= -1/2, the expansion for -1/2 < u < 0, zeta at u = 0.
double bose(double n, double u);

/// log g(n, u), accurate also where g underflows (u -> -infinity).
double log_bose(double n, double u);

/// Unique u <= 0 with g(n, u) = target (target > 0). Returns 0 when n > 1 and
/// target >= zeta(n), i.e. when the equation has no solution with u < 0.
double inverse_bose(double n, double target);

}  // namespace hyl
