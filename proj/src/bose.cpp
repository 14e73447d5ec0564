#include "hyl/bose.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "hyl/detail/roots.hpp"
#include "hyl/errors.hpp"

namespace hyl {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::divergence: return "divergent";
    case ErrorKind::domain: return "domain";
    case ErrorKind::pole: return "pole";
    case ErrorKind::tolerance_not_reached: return "tolerance-not-reached";
    case ErrorKind::no_solution: return "no-solution";
    case ErrorKind::ambiguous: return "coexistence";
    case ErrorKind::state_space_too_large: return "state-space-too-large";
    case ErrorKind::tail_mass: return "tail-mass";
    case ErrorKind::insufficient_samples: return "insufficient-samples";
    case ErrorKind::cutoff: return "cutoff";
  }
  return "unknown";
}

namespace {

constexpr double kPi = std::numbers::pi;

// sin(pi x), exactly zero at integers.
double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
  if (r > 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  if (r > 0.5) return std::sin(kPi * (1.0 - r));
  if (r < -0.5) return std::sin(kPi * (-1.0 - r));
  return std::sin(kPi * r);
}

// cos(pi x), exactly zero at half integers.
double cos_pi(double x) {
  double r = std::fmod(std::abs(x), 2.0);
  if (r == 0.5 || r == 1.5) return 0.0;
  if (r == 0.0) return 1.0;
  if (r == 1.0) return -1.0;
  return std::cos(kPi * r);
}

// Borwein's accelerated alternating series for the Dirichlet eta function.
constexpr int kEtaTerms = 64;

const std::array<double, kEtaTerms + 1>& eta_weights() {
  static const std::array<double, kEtaTerms + 1> d = [] {
    std::array<double, kEtaTerms + 1> out{};
    const double n = kEtaTerms;
    double t = 1.0 / n;
    double acc = t;
    out[0] = n * acc;
    for (int i = 0; i < kEtaTerms; ++i) {
      t *= (n + i) * 4.0 * (n - i) / ((2.0 * i + 1.0) * (2.0 * i + 2.0));
      acc += t;
      out[i + 1] = n * acc;
    }
    return out;
  }();
  return d;
}

double eta_borwein(double s) {
  const auto& d = eta_weights();
  const double dn = d[kEtaTerms];
  double sum = 0.0;
  for (int k = kEtaTerms - 1; k >= 0; --k) {
    const double term = (d[k] - dn) * std::exp(-s * std::log(k + 1.0));
    sum += (k % 2 == 0) ? term : -term;
  }
  return -sum / dn;
}

// Direct series with a geometric bound on the neglected tail. Stops once the
// tail bound is below abs_tol or below rel_tol times the partial sum.
double bose_series(double n, double u, double abs_tol, double rel_tol) {
  const double q = std::exp(u);
  const double grow = std::max(0.0, -n);
  double sum = 0.0;
  double comp = 0.0;
  for (long k = 1; k <= kBoseSeriesTermCap; ++k) {
    const double kd = static_cast<double>(k);
    const double term = std::exp(u * kd - n * std::log(kd));
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;

    const double rho = q * std::pow(1.0 + 1.0 / (kd + 1.0), grow);
    if (rho < 1.0) {
      const double next = term * std::pow(kd / (kd + 1.0), n) * q;
      const double tail = next / (1.0 - rho);
      if (tail <= abs_tol || tail <= rel_tol * sum) return sum;
    }
  }
  throw Error(ErrorKind::tolerance_not_reached,
              "bose_g: series for n=" + std::to_string(n) + ", u=" + std::to_string(u) +
                  " did not reach tolerance within " + std::to_string(kBoseSeriesTermCap) + " terms");
}

}  // namespace

double zeta_value(double s) {
  if (s == 1.0) throw Error(ErrorKind::pole, "zeta: pole at s = 1");
  if (s >= 40.0) {
    return 1.0 + std::exp2(-s) + std::pow(3.0, -s) + std::exp2(-2.0 * s) + std::pow(5.0, -s);
  }
  if (s >= 0.0) {
    // zeta = eta / (1 - 2^{1-s})
    const double denom = -std::expm1((1.0 - s) * std::numbers::ln2);
    return eta_borwein(s) / denom;
  }
  // reflection: zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1-s) zeta(1-s)
  const double sn = sin_pi(0.5 * s);
  if (sn == 0.0) return 0.0;  // trivial zeros
  const double z1 = zeta_value(1.0 - s);
  if (1.0 - s < 170.0) {
    return std::exp2(s) * std::pow(kPi, s - 1.0) * sn * std::tgamma(1.0 - s) * z1;
  }
  const double log_mag = s * std::numbers::ln2 + (s - 1.0) * std::log(kPi) + std::lgamma(1.0 - s) +
                         std::log(std::abs(sn) * z1);
  return std::copysign(std::exp(log_mag), sn);
}

double bose_g(double n, double u, double tol) {
  if (u > 0.0) {
    throw Error(ErrorKind::divergence, "bose_g: series diverges for u > 0 (u=" + std::to_string(u) + ")");
  }
  if (u == 0.0) {
    if (n <= 1.0) {
      throw Error(ErrorKind::divergence,
                  "bose_g: divergent at u = 0 for order n <= 1 (n=" + std::to_string(n) + ")");
    }
    return zeta_value(n);
  }
  return bose_series(n, u, tol, 0.0);
}

double bose_g_expansion(double n, double u) {
  if (!(std::abs(u) < 2.0 * kPi)) {
    throw Error(ErrorKind::domain, "bose_g_expansion: requires |u| < 2*pi (u=" + std::to_string(u) + ")");
  }
  if (u == 0.0) throw Error(ErrorKind::domain, "bose_g_expansion: singular at u = 0");

  const double alpha = -u;
  const double abs_alpha = std::abs(alpha);
  const double nr = std::round(n);
  const bool integer_branch = std::abs(n - nr) < kIntegerOrderThreshold && nr >= 1.0;
  const int order = static_cast<int>(nr);

  double sum = 0.0;
  int skip = -1;
  if (integer_branch) {
    skip = order - 1;
    double harmonic = 0.0;
    for (int m = 1; m < order; ++m) harmonic += 1.0 / m;
    // (-alpha)^{n-1} / (n-1)! ; only the real part of -log(alpha) survives for alpha < 0
    const double coef = std::pow(u, order - 1) / std::tgamma(static_cast<double>(order));
    sum += coef * (-std::log(abs_alpha) + harmonic);
  } else {
    double lead = std::tgamma(1.0 - n) * std::pow(abs_alpha, n - 1.0);
    if (alpha < 0.0) lead *= cos_pi(n - 1.0);
    sum += lead;
  }

  constexpr int kMaxTerms = 160;
  constexpr double kEps = 1e-17;
  double power = 1.0;  // u^k / k!
  int small_in_row = 0;
  for (int k = 0; k <= kMaxTerms; ++k) {
    if (k > 0) power *= u / k;
    if (k == skip) continue;
    const double z = integer_branch ? zeta_value(static_cast<double>(order - k)) : zeta_value(n - k);
    const double term = z * power;
    sum += term;
    if (term == 0.0) continue;
    if (std::abs(term) <= kEps * std::max(std::abs(sum), 1e-300)) {
      if (++small_in_row >= 2 && k > 3) break;
    } else {
      small_in_row = 0;
    }
  }
  return sum;
}

double bose(double n, double u) {
  if (u > 0.0) {
    throw Error(ErrorKind::divergence, "bose: series diverges for u > 0 (u=" + std::to_string(u) + ")");
  }
  if (u == 0.0) return bose_g(n, 0.0);
  if (u <= -0.5) return bose_series(n, u, 0.0, 1e-17);
  return bose_g_expansion(n, u);
}

double log_bose(double n, double u) {
  if (u < -30.0) {
    // g = e^u (1 + sum_{k>=2} k^{-n} e^{u(k-1)})
    double rest = 0.0;
    for (int k = 2; k < 64; ++k) {
      const double term = std::exp(u * (k - 1) - n * std::log(static_cast<double>(k)));
      rest += term;
      if (term < 1e-18 * (1.0 + rest)) break;
    }
    return u + std::log1p(rest);
  }
  return std::log(bose(n, u));
}

double inverse_bose(double n, double target) {
  if (!(target > 0.0)) {
    throw Error(ErrorKind::domain, "inverse_bose: target must be positive");
  }
  if (n > 1.0 && target >= zeta_value(n)) return 0.0;
  const double log_target = std::log(target);
  auto f = [&](double u) { return log_bose(n, u) - log_target; };

  // g(n, u) >= e^u for every n, so any root lies at u <= log_target.
  double hi = std::min(log_target, -1.0);
  double f_hi = f(hi);
  double lo = hi;
  double f_lo = f_hi;
  if (f_hi < 0.0) {
    // root between hi and 0: halve toward zero
    while (f_hi < 0.0) {
      lo = hi;
      f_lo = f_hi;
      hi *= 0.5;
      if (hi > -1e-300) return 0.0;
      f_hi = f(hi);
    }
  } else {
    while (f_lo >= 0.0) {
      hi = lo;
      f_hi = f_lo;
      lo *= 2.0;
      f_lo = f(lo);
    }
  }
  return detail::find_root(f, lo, hi, f_lo, f_hi, 52);
}

}  // namespace hyl
