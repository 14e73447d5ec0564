#include "hyl/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "hyl/bose.hpp"
#include "hyl/detail/roots.hpp"
#include "hyl/errors.hpp"

namespace hyl {

namespace {

constexpr double kPi = std::numbers::pi;
// Smallest |s| we resolve; below this s is treated as 0- (d <= 2 at huge mu).
constexpr double kTinySlope = 1e-300;
constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

bool close_rel(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

Kappa Kappa::finite(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::domain, "Kappa::finite: value must be positive and finite");
  }
  return Kappa(Kind::finite, value);
}

Kappa Kappa::from_value(double value) {
  if (value == 0.0) return zero();
  if (std::isinf(value) && value > 0.0) return infinite();
  return finite(value);
}

void HylParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::domain, "HylParams: a must be positive");
  if (!(b >= 0.0) || !(b < a)) throw Error(ErrorKind::domain, "HylParams: requires a > b >= 0");
  if (!std::isfinite(mu)) throw Error(ErrorKind::domain, "HylParams: mu must be finite");
}

bool in_cone(double x, double y, Kappa kappa) {
  if (x < 0.0 || y < 0.0) return false;
  if (y == 0.0) return true;
  switch (kappa.kind()) {
    case Kappa::Kind::zero: return true;
    case Kappa::Kind::finite: return y >= kappa.value();
    case Kappa::Kind::infinite: return false;
  }
  return false;
}

PhasePoint make_point(double x, double y, Kappa kappa) { return {x, y, in_cone(x, y, kappa)}; }

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::subcritical: return "subcritical";
    case Regime::coexistence: return "coexistence";
    case Regime::intermediate: return "intermediate";
    case Regime::supercritical: return "supercritical";
  }
  return "unknown";
}

HylModel::HylModel(const GasParams& gas, double a, double b, Kappa kappa)
    : gas_(gas), a_(a), b_(b), kappa_(kappa) {
  gas_.validate();
  HylParams{a, b, 0.0, kappa}.validate();
  rho_c_ = hyl::critical_density(gas_.d, gas_.beta);
  compute_transitions();
}

double HylModel::dp0(double s) const {
  return thermal_prefactor(gas_.d, gas_.beta) * bose(0.5 * gas_.d, gas_.beta * s);
}

double HylModel::p0(double s) const {
  return thermal_prefactor(gas_.d, gas_.beta) * bose(1.0 + 0.5 * gas_.d, gas_.beta * s) / gas_.beta;
}

double HylModel::phi(double s) const {
  if (s == 0.0) return a_ * rho_c_;
  return a_ * dp0(s) - (a_ - b_) / b_ * s;
}

bool HylModel::at_transition(double mu, double transition) const {
  return std::isfinite(transition) && close_rel(mu, transition, kTransitionBand);
}

// ---------------------------------------------------------------------------
// Stationary points

Stationary HylModel::tilde1(double mu) const {
  if (gas_.d >= 3 && mu >= a_ * rho_c_) return {mu / a_, 0.0};

  // h(s) = s + a p0'(s) - mu is increasing on s < 0, with h(-inf) = -inf.
  auto h = [&](double s) { return s + a_ * dp0(s) - mu; };
  double hi = 0.0;
  double h_hi = 0.0;
  if (gas_.d >= 3) {
    h_hi = a_ * rho_c_ - mu;
  } else {
    hi = std::min(mu, -1.0);
    h_hi = h(hi);
    while (h_hi <= 0.0) {
      hi *= 0.5;
      if (-hi < kTinySlope) return {(mu - hi) / a_, hi};
      h_hi = h(hi);
    }
  }
  const double lo = std::min(hi, mu) - 1.0 - a_ * (hi < 0.0 ? dp0(hi) : rho_c_);
  const double s = detail::find_root(h, lo, hi, h(lo), h_hi, 52);
  if (s == 0.0) return {rho_c_, 0.0};
  return {dp0(s), s};
}

Stationary HylModel::tilde2(double mu) const {
  if (b_ == 0.0) throw Error(ErrorKind::domain, "x_tilde_2: undefined for b = 0");
  const double mt = tp_.mu_t;
  if (mu < mt && !close_rel(mu, mt, 1e-12)) {
    throw Error(ErrorKind::no_solution,
                "x_tilde_2: no solution for mu=" + std::to_string(mu) + " < mu_t=" + std::to_string(mt));
  }
  const double sb = tp_.s_bar;
  if (mu <= mt) return {sb == 0.0 ? rho_c_ : dp0(sb), sb};

  // phi is convex with minimum mu_t at s_bar; the minimal x corresponds to the
  // root on the decreasing branch s <= s_bar.
  const double c = (a_ - b_) / b_;
  auto f = [&](double s) { return phi(s) - mu; };
  const double lo = -mu / c - 1.0;
  const double s = detail::find_root(f, lo, sb, f(lo), mt - mu, 52);
  return {s == 0.0 ? rho_c_ : dp0(s), s};
}

Stationary HylModel::tilde3(double mu) const {
  if (kappa_.is_infinite()) throw Error(ErrorKind::domain, "x_tilde_3: undefined for kappa = inf");
  return tilde1(mu - a_ * kappa_.value());
}

// ---------------------------------------------------------------------------
// Objective

double HylModel::objective_at(double mu, double x, double s, double y) const {
  const double f0 = (x == 0.0) ? 0.0 : s * x - p0(s);
  const double t = x + y;
  return f0 - mu * t + 0.5 * a_ * t * t - 0.5 * b_ * y * y;
}

double HylModel::objective(double mu, double x, double y) const {
  if (!in_cone(x, y, kappa_)) return kInfinity;
  return objective_at(mu, x, x == 0.0 ? 0.0 : s_beta(gas_, x), y);
}

double HylModel::f1(double mu) const {
  const Stationary p = tilde1(mu);
  return objective_at(mu, p.x, p.s, 0.0);
}

double HylModel::f2(double mu) const {
  const Stationary p = tilde2(mu);
  return objective_at(mu, p.x, p.s, y_tilde(mu, p.x));
}

double HylModel::f3(double mu) const {
  const Stationary p = tilde3(mu);
  return objective_at(mu, p.x, p.s, kappa_.value());
}

double HylModel::branch_gap(double mu) const { return f1(mu) - f2(mu); }

double HylModel::pinned_gap(double mu) const { return f1(mu) - f3(mu); }

double HylModel::condensate_gap(double mu) const {
  // Region y < kappa: J = F(x, 0) for x >= mu/a, and f0(x) - mu^2/(2a) along
  // y = mu/a - x. f0 is nonincreasing, so the second piece is bounded below by
  // its value at x = mu/a.
  double low = f1(mu);
  if (mu > 0.0) {
    const double xm = mu / a_;
    low = std::min(low, free_energy_f0(gas_, xm) - mu * mu / (2.0 * a_));
  }
  // Region y >= kappa: the pinned point and, once it lies in the region, the
  // free supercritical point.
  double high = f3(mu);
  if (b_ > 0.0 && mu >= tp_.mu_t) {
    const Stationary p = tilde2(mu);
    const double y = y_tilde(mu, p.x);
    if (y >= kappa_.value()) high = std::min(high, objective_at(mu, p.x, p.s, y));
  }
  return low - high;
}

// ---------------------------------------------------------------------------
// Transitions

void HylModel::compute_transitions() {
  tp_.mu_c = a_ * rho_c_;
  if (b_ == 0.0) return;  // mean-field: no supercritical branch

  // stationarity of phi: a p0''(s) = c, i.e. g(d/2-1, beta s) = C_d beta^{d/2-1}
  const double target = constant_c(gas_.d, a_, b_) * std::pow(gas_.beta, 0.5 * gas_.d - 1.0);
  const double u = inverse_bose(0.5 * gas_.d - 1.0, target);
  tp_.s_bar = u / gas_.beta;
  tp_.mu_t = (u == 0.0) ? tp_.mu_c : phi(tp_.s_bar);
  tp_.mu_star = solve_mu_star();

  if (!kappa_.is_finite_positive()) return;
  const double kappa = kappa_.value();
  const double closed = (a_ - b_) * kappa + a_ * dp0(-b_ * kappa);
  tp_.mu_r_closed_form = closed;
  // The closed form is phi(-b kappa); it is the infimum only when -b kappa lies
  // on the decreasing branch of phi. Otherwise the condition already holds at mu_t.
  tp_.mu_r = (-b_ * kappa <= tp_.s_bar) ? closed : tp_.mu_t;
  tp_.mu_star_kappa = solve_mu_star_kappa();
  tp_.mu_hat_star_kappa = solve_mu_hat_star_kappa();
}

double HylModel::solve_mu_star() const {
  const double lo = tp_.mu_t;
  if (gas_.d >= 3 && lo >= tp_.mu_c) return tp_.mu_c;
  const double g_lo = branch_gap(lo);
  if (g_lo >= 0.0) return lo;

  double hi = tp_.mu_c;
  double g_hi;
  if (std::isfinite(hi)) {
    g_hi = branch_gap(hi);
    if (g_hi <= 0.0) return hi;
  } else {
    const double step = std::max(std::abs(lo), 1e-3);
    hi = lo + step;
    g_hi = branch_gap(hi);
    for (int j = 0; g_hi <= 0.0; ++j) {
      if (j > 200) throw Error(ErrorKind::no_solution, "mu_star: no sign change found");
      hi = lo + step * std::exp2(j + 1);
      g_hi = branch_gap(hi);
    }
  }
  return detail::find_root([&](double m) { return branch_gap(m); }, lo, hi, g_lo, g_hi, 50);
}

double HylModel::solve_mu_star_kappa() const {
  const double mr = *tp_.mu_r;
  const double ms = tp_.mu_star;
  if (mr <= ms) return ms;
  auto g = [&](double m) { return pinned_gap(m); };
  return detail::find_root(g, ms, mr, g(ms), g(mr), 50);
}

double HylModel::solve_mu_hat_star_kappa() const {
  const double lo = *tp_.mu_star_kappa;
  const double hi = std::max(lo, *tp_.mu_r);
  if (hi <= lo) return lo;

  auto g = [&](double m) { return condensate_gap(m); };
  auto scale = [&](double m) { return 1e-12 * std::max(1.0, std::abs(f1(m))); };
  const double g_lo = g(lo);
  double root = lo;
  if (g_lo < -scale(lo)) {
    root = detail::find_root(g, lo, hi, g_lo, g(hi), 50);
  }

  // Monotonicity is not established analytically, so confirm a single crossing.
  constexpr int kProbe = 50;
  int changes = 0;
  int prev = 0;
  for (int i = 0; i <= kProbe; ++i) {
    const double m = lo + (hi - lo) * i / kProbe;
    const double v = g(m);
    const int sign = (std::abs(v) <= scale(m)) ? 0 : (v > 0.0 ? 1 : -1);
    if (sign != 0 && prev != 0 && sign != prev) ++changes;
    if (sign != 0) prev = sign;
  }
  if (changes > 1) {
    throw Error(ErrorKind::ambiguous, "mu_hat_star_kappa: branch comparison changes sign more than once");
  }
  return root;
}

double HylModel::condensation_threshold() const {
  if (b_ == 0.0 || kappa_.is_infinite()) return kInfinity;
  if (kappa_.is_zero()) return tp_.mu_star;
  return *tp_.mu_star_kappa;
}

// ---------------------------------------------------------------------------
// Zero set, pressure, densities

ZeroSet HylModel::zero_set(double mu) const {
  ZeroSet out;
  auto p1 = [&] {
    const Stationary s = tilde1(mu);
    return make_point(s.x, 0.0, kappa_);
  };
  auto p2 = [&] {
    const Stationary s = tilde2(mu);
    return make_point(s.x, std::max(0.0, y_tilde(mu, s.x)), kappa_);
  };
  auto p3 = [&] {
    const Stationary s = tilde3(mu);
    return make_point(s.x, kappa_.value(), kappa_);
  };

  const double threshold = condensation_threshold();
  if (!std::isfinite(threshold) || (mu < threshold && !at_transition(mu, threshold))) {
    out.regime = Regime::subcritical;
    out.points = {p1()};
    return out;
  }

  const bool pinned_window = kappa_.is_finite_positive() && *tp_.mu_r > tp_.mu_star;
  if (at_transition(mu, threshold)) {
    out.regime = Regime::coexistence;
    const PhasePoint first = p1();
    const PhasePoint second = pinned_window ? p3() : p2();
    out.points = {first};
    if (!close_rel(first.x, second.x, 1e-12) || !close_rel(first.y, second.y, 1e-12)) {
      out.points.push_back(second);
    }
    return out;
  }
  if (pinned_window && mu <= *tp_.mu_r) {
    out.regime = Regime::intermediate;
    out.points = {p3()};
    return out;
  }
  out.regime = Regime::supercritical;
  out.points = {p2()};
  return out;
}

double HylModel::pressure(double mu) const {
  const ZeroSet zs = zero_set(mu);
  double best = kInfinity;
  for (const PhasePoint& p : zs.points) best = std::min(best, objective(mu, p.x, p.y));
  return -best;
}

double HylModel::rate_function(double mu, const PhasePoint& p) const {
  const double f = objective(mu, p.x, p.y);
  if (!std::isfinite(f)) return kInfinity;
  return f + pressure(mu);
}

double HylModel::pressure_sub(double mu) const {
  auto psi = [&](double s) { return (mu - s) * (mu - s) / (2.0 * a_) + p0(s); };
  if (gas_.d >= 3 && mu >= a_ * rho_c_) return psi(0.0);  // infimum at the boundary

  // psi is convex in s; bracket the sign change of its slope, then minimise in
  // t = log(-s) so that minimisers close to s = 0 are resolved.
  auto slope = [&](double s) { return (s - mu) / a_ + dp0(s); };
  const double m = std::min(mu, 0.0) - 1.0;
  const double s_lo = m - 1.0 - a_ * dp0(m);
  double s_hi = -1.0;
  while (slope(s_hi) <= 0.0) {
    s_hi *= 0.5;
    if (-s_hi < kTinySlope) return psi(s_hi);
  }
  auto in_t = [&](double t) { return psi(-std::exp(t)); };
  const auto [t, v] = boost::math::tools::brent_find_minima(in_t, std::log(-s_hi), std::log(-s_lo), kBrentBits);
  (void)t;
  return v;
}

double HylModel::pressure_sup(double mu) const {
  if (b_ == 0.0) throw Error(ErrorKind::domain, "pressure_sup: undefined for b = 0");
  if (mu < tp_.mu_t && !close_rel(mu, tp_.mu_t, 1e-12)) {
    throw Error(ErrorKind::no_solution, "pressure_sup: requires mu >= mu_t");
  }
  auto neg_psi = [&](double s) {
    return -((mu - s) * (mu - s) / (2.0 * a_) - s * s / (2.0 * b_) + p0(s));
  };
  const double c = (a_ - b_) / b_;
  const double lo = -std::max(mu, 0.0) / c - 1.0;
  const auto [s, v] = boost::math::tools::brent_find_minima(neg_psi, lo, tp_.s_bar, kBrentBits);
  (void)s;
  return -v;
}

double HylModel::pressure_pinned(double mu) const {
  if (!kappa_.is_finite_positive()) throw Error(ErrorKind::domain, "pressure_pinned: requires finite kappa > 0");
  const double k = kappa_.value();
  return pressure_sub(mu - a_ * k) + mu * k - 0.5 * (a_ - b_) * k * k;
}

double HylModel::condensate_rho(double mu) const {
  const ZeroSet zs = zero_set(mu);
  if (zs.points.size() == 2) {
    const double lo = std::min(zs.points[0].y, zs.points[1].y);
    const double hi = std::max(zs.points[0].y, zs.points[1].y);
    throw AmbiguousValue("condensate_rho: two zeroes at mu=" + std::to_string(mu), lo, hi);
  }
  return zs.points.front().y;
}

double HylModel::condensate_delta(double mu) const {
  auto free_part = [&] { return std::isfinite(rho_c_) ? std::max(0.0, mu / a_ - rho_c_) : 0.0; };
  if (kappa_.is_infinite() || b_ == 0.0) return free_part();
  if (kappa_.is_zero()) return condensate_rho(mu);

  const double hat = *tp_.mu_hat_star_kappa;
  if (at_transition(mu, hat)) {
    const double lo = free_part();
    const double hi = zero_set(mu).points.back().y;
    throw AmbiguousValue("condensate_delta: undefined at mu_hat_star_kappa", std::min(lo, hi),
                         std::max(lo, hi));
  }
  if (mu < hat) return free_part();
  return condensate_rho(mu);
}

// ---------------------------------------------------------------------------
// Free functions

namespace {
HylModel model_of(const GasParams& gas, const HylParams& hyl) {
  hyl.validate();
  return HylModel(gas, hyl);
}
}  // namespace

double rate_function_value(const GasParams& gas, const HylParams& hyl, const PhasePoint& p) {
  return model_of(gas, hyl).rate_function(hyl.mu, p);
}

double x_tilde_1(const GasParams& gas, const HylParams& hyl) { return model_of(gas, hyl).tilde1(hyl.mu).x; }

double x_tilde_2(const GasParams& gas, const HylParams& hyl) { return model_of(gas, hyl).tilde2(hyl.mu).x; }

double x_tilde_3(const GasParams& gas, const HylParams& hyl) { return model_of(gas, hyl).tilde3(hyl.mu).x; }

double mu_t(const GasParams& gas, const HylParams& hyl) {
  if (hyl.b == 0.0) return kInfinity;
  return model_of(gas, hyl).transitions().mu_t;
}

double mu_r_closed_form(const GasParams& gas, const HylParams& hyl) {
  if (!hyl.kappa.is_finite_positive()) throw Error(ErrorKind::domain, "mu_r: requires finite kappa > 0");
  if (hyl.b == 0.0) throw Error(ErrorKind::domain, "mu_r: undefined for b = 0");
  return *model_of(gas, hyl).transitions().mu_r_closed_form;
}

double mu_r(const GasParams& gas, const HylParams& hyl) {
  if (!hyl.kappa.is_finite_positive()) throw Error(ErrorKind::domain, "mu_r: requires finite kappa > 0");
  if (hyl.b == 0.0) throw Error(ErrorKind::domain, "mu_r: undefined for b = 0");
  return *model_of(gas, hyl).transitions().mu_r;
}

double mu_star(const GasParams& gas, const HylParams& hyl) { return model_of(gas, hyl).transitions().mu_star; }

double mu_star_kappa(const GasParams& gas, const HylParams& hyl) {
  if (!hyl.kappa.is_finite_positive()) {
    throw Error(ErrorKind::domain, "mu_star_kappa: requires finite kappa > 0");
  }
  const HylModel m = model_of(gas, hyl);
  return m.transitions().mu_star_kappa.value_or(m.transitions().mu_star);
}

ZeroSet zero_set(const GasParams& gas, const HylParams& hyl) { return model_of(gas, hyl).zero_set(hyl.mu); }

double pressure(const GasParams& gas, const HylParams& hyl) { return model_of(gas, hyl).pressure(hyl.mu); }

double condensate_rho(const GasParams& gas, const HylParams& hyl) {
  return model_of(gas, hyl).condensate_rho(hyl.mu);
}

double condensate_delta(const GasParams& gas, const HylParams& hyl) {
  return model_of(gas, hyl).condensate_delta(hyl.mu);
}

double constant_c(int d, double a, double b) {
  if (!(b > 0.0)) throw Error(ErrorKind::domain, "constant_c: requires b > 0");
  return std::pow(4.0 * kPi, 0.5 * d) / a * (a - b) / b;
}

double beta_t(int d, double a, double b) {
  if (d < 5) throw Error(ErrorKind::domain, "beta_t: defined for d >= 5 only");
  if (!(b > 0.0) || !(a > b)) throw Error(ErrorKind::domain, "beta_t: requires a > b > 0");
  const double base = a / std::pow(4.0 * kPi, 0.5 * d) * b / (a - b) * zeta_value(0.5 * d - 1.0);
  return std::pow(base, 2.0 / (d - 2.0));
}

double mu_t_closed_form_d2(double beta, double a, double b) {
  const double c2 = constant_c(2, a, b);
  return a / (4.0 * kPi) * ((1.0 + c2) * std::log1p(c2) - c2 * std::log(c2)) / beta;
}

}  // namespace hyl
