#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyl {

enum class ErrorKind {
  divergence,          // series or integral diverges at the requested argument
  domain,              // argument outside the operation's domain
  pole,                // zeta at s = 1
  tolerance_not_reached,
  no_solution,         // e.g. x_tilde_2 below mu_t
  ambiguous,           // value undefined at a coexistence point
  state_space_too_large,
  tail_mass,           // k_max does not certify the requested tail bound
  insufficient_samples,
  cutoff,              // D_K cutoff K >= k_max
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for every numeric-domain failure in the library.
/// The CLI maps all of these onto exit code 3.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised at a coexistence point, where the density is double valued.
/// Carries both candidate values so callers can report the interval.
class AmbiguousValue : public Error {
 public:
  AmbiguousValue(const std::string& what, double low, double high)
      : Error(ErrorKind::ambiguous, what), low_(low), high_(high) {}
  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

 private:
  double low_;
  double high_;
};

}  // namespace hyl
