#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hyl/ideal_gas.hpp"

namespace hyl {

/// Scaling parameter kappa = lim m_L / |L| in [0, infinity]. The three regimes
/// have different phase structure, so the kind is explicit.
class Kappa {
 public:
  enum class Kind { zero, finite, infinite };

  static Kappa zero() { return Kappa(Kind::zero, 0.0); }
  static Kappa infinite() { return Kappa(Kind::infinite, kInfinity); }
  static Kappa finite(double value);
  /// 0 -> zero, +inf -> infinite, otherwise finite (value must be positive).
  static Kappa from_value(double value);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_finite_positive() const { return kind_ == Kind::finite; }
  bool is_infinite() const { return kind_ == Kind::infinite; }

  friend bool operator==(const Kappa&, const Kappa&) = default;

 private:
  Kappa(Kind kind, double value) : kind_(kind), value_(value) {}
  Kind kind_;
  double value_;
};

struct HylParams {
  double a = 1.0;
  double b = 0.5;
  double mu = 0.0;
  Kappa kappa = Kappa::zero();

  HylParams with_mu(double m) const { return {a, b, m, kappa}; }
  void validate() const;
};

/// (x, y): mass in cycles shorter than m_L and in cycles of length >= m_L.
struct PhasePoint {
  double x = 0.0;
  double y = 0.0;
  bool in_cone = true;
};

/// Membership in K(kappa) = R_+ x ({0} u [kappa, inf)).
bool in_cone(double x, double y, Kappa kappa);
PhasePoint make_point(double x, double y, Kappa kappa);

enum class Regime { subcritical, coexistence, intermediate, supercritical };
std::string_view to_string(Regime regime);

struct ZeroSet {
  std::vector<PhasePoint> points;
  Regime regime = Regime::subcritical;
};

/// Transition chemical potentials. For b = 0 (mean-field degeneration) mu_t and
/// mu_star are +infinity: the supercritical branch never appears.
struct TransitionPotentials {
  double mu_t = kInfinity;
  double mu_c = kInfinity;
  double mu_star = kInfinity;
  std::optional<double> mu_r;               // finite kappa only (infimum definition)
  std::optional<double> mu_r_closed_form;   // (a-b) kappa + a p0'(beta, -b kappa)
  std::optional<double> mu_star_kappa;      // finite kappa only
  std::optional<double> mu_hat_star_kappa;  // finite kappa only
  double s_bar = 0.0;                       // minimiser of a p0'(s) - (a-b)/b s over s <= 0
};

/// Stationary point of the reduced problem together with its conjugate slope
/// s = s_beta(x).
struct Stationary {
  double x = 0.0;
  double s = 0.0;
};

/// The variational problem for fixed (gas, a, b, kappa); the chemical potential
/// is supplied per query. Transition potentials are computed once on
/// construction, which is what makes sweeps over mu cheap.
class HylModel {
 public:
  HylModel(const GasParams& gas, double a, double b, Kappa kappa);
  HylModel(const GasParams& gas, const HylParams& hyl) : HylModel(gas, hyl.a, hyl.b, hyl.kappa) {}

  const GasParams& gas() const { return gas_; }
  double a() const { return a_; }
  double b() const { return b_; }
  Kappa kappa() const { return kappa_; }
  const TransitionPotentials& transitions() const { return tp_; }
  double critical_density() const { return rho_c_; }

  /// F_mu(x, y) = f0(x) - mu (x+y) + a/2 (x+y)^2 - b/2 y^2 on K(kappa), +inf elsewhere.
  double objective(double mu, double x, double y) const;
  /// F_mu at a point whose s = s_beta(x) is known.
  double objective_at(double mu, double x, double s, double y) const;

  Stationary tilde1(double mu) const;
  Stationary tilde2(double mu) const;
  Stationary tilde3(double mu) const;
  /// y-coordinate attached to x_tilde_2: (mu - a x) / (a - b).
  double y_tilde(double mu, double x) const { return (mu - a_ * x) / (a_ - b_); }

  ZeroSet zero_set(double mu) const;
  double pressure(double mu) const;
  double rate_function(double mu, const PhasePoint& p) const;

  /// inf_{s<0} { (mu - s)^2/(2a) + p0(beta, s) }, by direct minimisation over s.
  double pressure_sub(double mu) const;
  /// Local maximum over s <= s_bar of (mu - s)^2/(2a) - s^2/(2b) + p0(beta, s).
  double pressure_sup(double mu) const;
  /// p_sub(mu - a kappa) + mu kappa - (a-b)/2 kappa^2 (pinned branch y = kappa).
  double pressure_pinned(double mu) const;

  double condensate_rho(double mu) const;
  double condensate_delta(double mu) const;

  /// F_mu(x_tilde_1, 0) - F_mu(x_tilde_2, y_tilde): increasing, root at mu_star.
  double branch_gap(double mu) const;
  /// F_mu(x_tilde_1, 0) - F_mu(x_tilde_3, kappa): nondecreasing, root at mu_star_kappa.
  double pinned_gap(double mu) const;
  /// Branch comparison of the double-limit functional J^kappa_inf: min over
  /// {0 <= y < kappa} minus min over {y >= kappa}.
  double condensate_gap(double mu) const;

  /// Relative band used to decide that mu sits on a transition.
  static constexpr double kTransitionBand = 1e-9;
  bool at_transition(double mu, double transition) const;

 private:
  double dp0(double s) const;   // p0'(beta, s)
  double p0(double s) const;    // p0(beta, s)
  double phi(double s) const;   // a p0'(s) - (a-b)/b s
  double f1(double mu) const;   // F at (x_tilde_1, 0)
  double f2(double mu) const;   // F at (x_tilde_2, y_tilde)
  double f3(double mu) const;   // F at (x_tilde_3, kappa)
  void compute_transitions();
  double solve_mu_star() const;
  double solve_mu_star_kappa() const;
  double solve_mu_hat_star_kappa() const;
  /// mu at which the zero set switches from (x1, 0) to a condensed point.
  double condensation_threshold() const;

  GasParams gas_;
  double a_;
  double b_;
  Kappa kappa_;
  double rho_c_;
  TransitionPotentials tp_;
};

// Free-function surface over (gas, hyl) for one-off evaluations.

double rate_function_value(const GasParams& gas, const HylParams& hyl, const PhasePoint& p);
double x_tilde_1(const GasParams& gas, const HylParams& hyl);
double x_tilde_2(const GasParams& gas, const HylParams& hyl);
double x_tilde_3(const GasParams& gas, const HylParams& hyl);
double mu_t(const GasParams& gas, const HylParams& hyl);
/// Closed form (a-b) kappa + a p0'(beta, -b kappa). Throws for kappa in {0, inf} or b = 0.
double mu_r_closed_form(const GasParams& gas, const HylParams& hyl);
/// inf { s >= mu_t : x_tilde_2(s) <= (s - kappa (a-b)) / a }.
double mu_r(const GasParams& gas, const HylParams& hyl);
double mu_star(const GasParams& gas, const HylParams& hyl);
double mu_star_kappa(const GasParams& gas, const HylParams& hyl);
ZeroSet zero_set(const GasParams& gas, const HylParams& hyl);
double pressure(const GasParams& gas, const HylParams& hyl);
double condensate_rho(const GasParams& gas, const HylParams& hyl);
double condensate_delta(const GasParams& gas, const HylParams& hyl);

/// (a/(4pi)^{d/2} b/(a-b) zeta(d/2-1))^{2/(d-2)} for d >= 5; throws otherwise.
double beta_t(int d, double a, double b);
/// (4 pi)^{d/2} / a * (a-b)/b.
double constant_c(int d, double a, double b);
/// a/(4 pi) ((1+C2) log(1+C2) - C2 log C2) / beta.
double mu_t_closed_form_d2(double beta, double a, double b);

}  // namespace hyl
