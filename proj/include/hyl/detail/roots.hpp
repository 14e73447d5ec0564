#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "hyl/errors.hpp"

namespace hyl::detail {

/// Root of a continuous function on a bracket [lo, hi] with f(lo), f(hi) of
/// opposite sign (or zero). Converges to ~full double precision in the argument.
template <class F>
double find_root(F&& f, double lo, double hi, double f_lo, double f_hi, int bits = 50) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw Error(ErrorKind::no_solution, "find_root: interval [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "] does not bracket a root");
  }
  std::uintmax_t max_iter = 400;
  boost::math::tools::eps_tolerance<double> tol(bits);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, max_iter);
  return 0.5 * (a + b);
}

template <class F>
double find_root(F&& f, double lo, double hi, int bits = 50) {
  return find_root(f, lo, hi, f(lo), f(hi), bits);
}

}  // namespace hyl::detail
