#include "hyl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

#include "hyl/errors.hpp"

namespace hyl::sim {

long default_cutoff(Kappa kappa, double volume) {
  switch (kappa.kind()) {
    case Kappa::Kind::zero: return std::max(1L, static_cast<long>(std::ceil(std::sqrt(volume))));
    case Kappa::Kind::finite: return std::max(1L, static_cast<long>(std::ceil(kappa.value() * volume)));
    case Kappa::Kind::infinite: return std::max(1L, static_cast<long>(std::ceil(volume * volume)));
  }
  return 1;
}

double reference_tail(const GasParams& gas, long k_max, double volume) {
  if (!(gas.alpha < 0.0)) throw Error(ErrorKind::domain, "reference_tail: requires alpha < 0");
  // k q_k e^{beta alpha k} and q_k e^{beta alpha k} both decrease at least
  // geometrically with ratio e^{beta alpha}.
  const CycleWeight w = cycle_weight(gas, k_max + 1);
  const double geom = 1.0 / (-std::expm1(gas.beta * gas.alpha));
  const double density = static_cast<double>(k_max + 1) * w.tilted * geom;
  const double count = volume * w.tilted * geom;
  return std::max(density, count);
}

void validate_hamiltonian(const HylParams& hyl) {
  if (!(hyl.a >= 0.0) || !std::isfinite(hyl.a)) throw Error(ErrorKind::domain, "simulator: a must be >= 0");
  if (!(hyl.b >= 0.0) || !(hyl.b <= hyl.a)) throw Error(ErrorKind::domain, "simulator: requires a >= b >= 0");
  if (!std::isfinite(hyl.mu)) throw Error(ErrorKind::domain, "simulator: mu must be finite");
}

VolumeSchedule make_schedule(const GasParams& gas, const HylParams& hyl, double volume,
                             const SchedulePolicy& policy) {
  gas.validate();
  validate_hamiltonian(hyl);
  if (!(volume > 0.0)) throw Error(ErrorKind::domain, "make_schedule: volume must be positive");
  VolumeSchedule s;
  s.volume = volume;
  s.kappa_target = hyl.kappa;
  s.eps_tail = policy.eps_tail;
  s.m_cutoff = policy.m_cutoff.value_or(default_cutoff(hyl.kappa, volume));
  if (s.m_cutoff < 1) throw Error(ErrorKind::domain, "make_schedule: m_cutoff must be >= 1");

  if (policy.k_max) {
    s.k_max = *policy.k_max;
  } else {
    long k_ref = 1;
    while (reference_tail(gas, k_ref, volume) > policy.eps_tail) ++k_ref;
    // Without confinement (a = b) nothing bounds the long cycles; the reference tail decides.
    const double stiffness = hyl.a - hyl.b;
    const long k_long = stiffness > 0.0 ? static_cast<long>(std::ceil(policy.long_cycle_factor *
                                                                       std::max(hyl.mu, 0.0) * volume / stiffness))
                                        : 1;
    s.k_max = std::max({k_ref, k_long, s.m_cutoff});
  }
  if (s.k_max < 1) throw Error(ErrorKind::domain, "make_schedule: k_max must be >= 1");
  return s;
}

double CycleCountConfig::density_above(long K) const {
  double sum = 0.0;
  for (long k = K + 1; k <= k_max(); ++k) sum += static_cast<double>(k) * static_cast<double>(count(k));
  return sum / volume;
}

std::pair<double, double> pair_density(const CycleCountConfig& cfg, const VolumeSchedule& sched) {
  double low = 0.0;
  double high = 0.0;
  for (long k = 1; k <= cfg.k_max(); ++k) {
    const double mass = static_cast<double>(k) * static_cast<double>(cfg.count(k));
    (k < sched.m_cutoff ? low : high) += mass;
  }
  return {low / cfg.volume, high / cfg.volume};
}

namespace {

double energy_of(const HylParams& hyl, const GasParams& gas, double volume, double mass, double s2) {
  return -(hyl.mu - gas.alpha) * mass + 0.5 * hyl.a * mass * mass / volume - 0.5 * hyl.b * s2 / volume;
}

}  // namespace

double hamiltonian(const CycleCountConfig& cfg, const HylParams& hyl, const GasParams& gas,
                   const VolumeSchedule& sched) {
  double mass = 0.0;
  double s2 = 0.0;
  for (long k = 1; k <= cfg.k_max(); ++k) {
    const double km = static_cast<double>(k) * static_cast<double>(cfg.count(k));
    mass += km;
    if (k >= sched.m_cutoff) s2 += km * km;
  }
  return energy_of(hyl, gas, cfg.volume, mass, s2);
}

CycleCountConfig sample_reference(const GasParams& gas, const VolumeSchedule& sched, std::mt19937_64& rng) {
  gas.validate();
  const double tail = reference_tail(gas, sched.k_max, sched.volume);
  if (tail > sched.eps_tail) {
    throw Error(ErrorKind::tail_mass, "sample_reference: k_max=" + std::to_string(sched.k_max) +
                                          " leaves tail " + std::to_string(tail) + " above eps_tail");
  }
  CycleCountConfig cfg{std::vector<long>(static_cast<std::size_t>(sched.k_max), 0), sched.volume};
  for (long k = 1; k <= sched.k_max; ++k) {
    const double mean = sched.volume * cycle_weight(gas, k).tilted;
    if (mean <= 0.0) continue;
    std::poisson_distribution<long> pois(mean);
    cfg.counts[static_cast<std::size_t>(k - 1)] = pois(rng);
  }
  return cfg;
}

CycleCountConfig sample_reference(const GasParams& gas, const VolumeSchedule& sched, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_reference(gas, sched, rng);
}

// ---------------------------------------------------------------------------
// Exact enumeration

namespace {

struct Enumeration {
  long k_max = 0;
  int cap = 0;
  long total = 0;
  std::vector<double> log_pmf;  // [k-1][n]
  double shift = 0.0;           // upper bound on -beta H over the capped space
  double p0_trunc = 0.0;
};

struct Partial {
  double w = 0.0;
  double q = 0.0;
  double w_m1 = 0.0;
  double w_m2 = 0.0;
};

Enumeration prepare(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, int cap) {
  gas.validate();
  validate_hamiltonian(hyl);
  if (cap < 0) throw Error(ErrorKind::domain, "exact_pressure_finite: count_cap must be >= 0");
  const double states = std::pow(cap + 1.0, static_cast<double>(sched.k_max));
  if (states > kMaxEnumerationStates) {
    throw Error(ErrorKind::state_space_too_large,
                "exact_pressure_finite: " + std::to_string(states) + " states exceed the enumeration limit");
  }
  Enumeration e;
  e.k_max = sched.k_max;
  e.cap = cap;
  e.total = static_cast<long>(std::llround(states));
  e.log_pmf.resize(static_cast<std::size_t>(e.k_max * (cap + 1)));
  double mass_max = 0.0;
  double rate_sum = 0.0;
  for (long k = 1; k <= e.k_max; ++k) {
    const double r = sched.volume * cycle_weight(gas, k).tilted;
    rate_sum += r;
    mass_max += static_cast<double>(k * cap);
    for (int n = 0; n <= cap; ++n) {
      e.log_pmf[static_cast<std::size_t>((k - 1) * (cap + 1) + n)] = n * std::log(r) - r - std::lgamma(n + 1.0);
    }
  }
  e.p0_trunc = rate_sum / (gas.beta * sched.volume);

  // S2 <= mass^2, so -beta H <= beta max_M { (mu - alpha) M - (a - b) M^2 / (2V) }.
  const double drift = hyl.mu - gas.alpha;
  const double stiff = hyl.a - hyl.b;
  double m_best = drift > 0.0 ? std::min(mass_max, sched.volume * drift / stiff) : 0.0;
  e.shift = gas.beta * (drift * m_best - 0.5 * stiff * m_best * m_best / sched.volume);
  if (!std::isfinite(e.shift)) throw Error(ErrorKind::domain, "exact_pressure_finite: H not bounded below");
  return e;
}

void accumulate_range(const Enumeration& e, const GasParams& gas, const HylParams& hyl,
                      const VolumeSchedule& sched, long lo, long hi, Partial& out) {
  std::vector<int> digit(static_cast<std::size_t>(e.k_max), 0);
  long rest = lo;
  for (long k = 0; k < e.k_max; ++k) {
    digit[static_cast<std::size_t>(k)] = static_cast<int>(rest % (e.cap + 1));
    rest /= (e.cap + 1);
  }
  for (long idx = lo; idx < hi; ++idx) {
    double log_q = 0.0;
    double mass = 0.0;
    double low = 0.0;
    double s2 = 0.0;
    for (long k = 1; k <= e.k_max; ++k) {
      const int n = digit[static_cast<std::size_t>(k - 1)];
      log_q += e.log_pmf[static_cast<std::size_t>((k - 1) * (e.cap + 1) + n)];
      const double km = static_cast<double>(k * n);
      mass += km;
      if (k < sched.m_cutoff) {
        low += km;
      } else {
        s2 += km * km;
      }
    }
    const double neg_bh = -gas.beta * energy_of(hyl, gas, sched.volume, mass, s2);
    const double w = std::exp(log_q + neg_bh - e.shift);
    out.w += w;
    out.q += std::exp(log_q);
    out.w_m1 += w * low / sched.volume;
    out.w_m2 += w * (mass - low) / sched.volume;

    for (std::size_t k = 0; k < digit.size(); ++k) {
      if (++digit[k] <= e.cap) break;
      digit[k] = 0;
    }
  }
}

ExactResult finish(const Enumeration& e, const GasParams& gas, const VolumeSchedule& sched, const Partial& p) {
  ExactResult r;
  r.states = e.total;
  r.captured_mass = p.q;
  r.neglected_mass = std::max(0.0, 1.0 - p.q);
  r.log_sum = std::log(p.w) + e.shift;
  r.pressure = e.p0_trunc + r.log_sum / (gas.beta * sched.volume);
  r.mean_weight = std::exp(r.log_sum - std::log(p.q));
  r.m1 = p.w_m1 / p.w;
  r.m2 = p.w_m2 / p.w;
  return r;
}

}  // namespace

ExactResult exact_pressure_finite(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched,
                                  int count_cap) {
  const Enumeration e = prepare(gas, hyl, sched, count_cap);
  Partial p;
  accumulate_range(e, gas, hyl, sched, 0, e.total, p);
  return finish(e, gas, sched, p);
}

ExactResult exact_pressure_finite_parallel(const GasParams& gas, const HylParams& hyl,
                                           const VolumeSchedule& sched, int count_cap, int threads) {
  const Enumeration e = prepare(gas, hyl, sched, count_cap);
  constexpr long kChunks = 1024;
  const long n_chunks = std::min(kChunks, e.total);
  std::vector<Partial> parts(static_cast<std::size_t>(n_chunks));
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (long c = 0; c < n_chunks; ++c) {
    const long lo = e.total * c / n_chunks;
    const long hi = e.total * (c + 1) / n_chunks;
    accumulate_range(e, gas, hyl, sched, lo, hi, parts[static_cast<std::size_t>(c)]);
  }
  Partial sum;
  for (const Partial& p : parts) {
    sum.w += p.w;
    sum.q += p.q;
    sum.w_m1 += p.w_m1;
    sum.w_m2 += p.w_m2;
  }
  return finish(e, gas, sched, sum);
}

// ---------------------------------------------------------------------------
// Metropolis-Hastings chain

MetropolisChain::MetropolisChain(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched,
                                 const ChainOptions& opts, std::uint64_t seed)
    : gas_(gas), hyl_(hyl), sched_(sched), opts_(opts), rng_(seed) {
  gas_.validate();
  validate_hamiltonian(hyl_);
  const double psum = opts_.p_local + opts_.p_teleport + opts_.p_shift;
  if (!(opts_.p_local >= 0.0 && opts_.p_teleport >= 0.0 && opts_.p_shift >= 0.0) || std::abs(psum - 1.0) > 1e-12) {
    throw Error(ErrorKind::domain, "MetropolisChain: move probabilities must be nonnegative and sum to 1");
  }
  if (sched_.m_cutoff > sched_.k_max && opts_.p_teleport > 0.0) {
    throw Error(ErrorKind::domain, "MetropolisChain: teleport moves need m_cutoff <= k_max");
  }
  const auto n = static_cast<std::size_t>(sched_.k_max);
  std::vector<double> rates(n);
  log_rate_.resize(n);
  for (long k = 1; k <= sched_.k_max; ++k) {
    const double r = sched_.volume * cycle_weight(gas_, k).tilted;
    rates[static_cast<std::size_t>(k - 1)] = r;
    log_rate_[static_cast<std::size_t>(k - 1)] = std::log(r);
  }
  local_pick_ = std::discrete_distribution<long>(rates.begin(), rates.end());
  cfg_ = CycleCountConfig{std::vector<long>(n, 0), sched_.volume};
  slot_.assign(n, -1);
  span_ = opts_.shift_span > 0 ? opts_.shift_span
                               : std::max(2L, static_cast<long>(std::ceil(std::sqrt(static_cast<double>(sched_.k_max)))));
}

double MetropolisChain::energy() const {
  return energy_of(hyl_, gas_, sched_.volume, static_cast<double>(mass_), static_cast<double>(s2_));
}

double MetropolisChain::log_target(const CycleCountConfig& cfg) const {
  double lq = 0.0;
  for (long k = 1; k <= cfg.k_max(); ++k) {
    const long n = cfg.count(k);
    if (n < 0 || (opts_.count_cap && n > *opts_.count_cap)) return -kInfinity;
    lq += n * log_rate_[static_cast<std::size_t>(k - 1)] - std::lgamma(n + 1.0);
  }
  return lq - gas_.beta * opts_.tilt * hamiltonian(cfg, hyl_, gas_, sched_);
}

double MetropolisChain::proposal_probability(const CycleCountConfig& from, const CycleCountConfig& to) const {
  std::vector<long> diff_k;
  for (long k = 1; k <= from.k_max(); ++k) {
    if (from.count(k) != to.count(k)) diff_k.push_back(k);
  }
  const double pm = 0.5;  // sign of the +-1 step
  if (diff_k.size() == 1) {
    const long k = diff_k[0];
    if (std::abs(from.count(k) - to.count(k)) != 1) return 0.0;
    const auto& w = local_pick_.probabilities();
    double p = opts_.p_local * w[static_cast<std::size_t>(k - 1)] * pm;
    if (k >= sched_.m_cutoff) p += opts_.p_teleport * pm / static_cast<double>(sched_.k_max - sched_.m_cutoff + 1);
    return p;
  }
  if (diff_k.size() == 2) {
    long src = 0;
    long dst = 0;
    for (long k : diff_k) {
      const long d = to.count(k) - from.count(k);
      if (d == -1) src = k;
      else if (d == 1) dst = k;
      else return 0.0;
    }
    if (src == 0 || dst == 0 || std::abs(dst - src) > span_) return 0.0;
    long occupied = 0;
    for (long k = 1; k <= from.k_max(); ++k) occupied += from.count(k) > 0;
    return opts_.p_shift / static_cast<double>(occupied) * pm / static_cast<double>(span_);
  }
  return 0.0;
}

bool MetropolisChain::accept(double log_ratio) {
  ++proposed_;
  if (log_ratio >= 0.0 || std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng_)) < log_ratio) {
    ++accepted_;
    return true;
  }
  return false;
}

void MetropolisChain::apply(long k, int delta) {
  const auto i = static_cast<std::size_t>(k - 1);
  const long before = cfg_.counts[i];
  const long after = before + delta;
  cfg_.counts[i] = after;
  mass_ += static_cast<long long>(delta) * k;
  if (k < sched_.m_cutoff) {
    low_mass_ += static_cast<long long>(delta) * k;
  } else {
    const long long kk = static_cast<long long>(k) * k;
    s2_ += kk * (static_cast<long long>(after) * after - static_cast<long long>(before) * before);
  }
  if (before == 0 && after > 0) {
    slot_[i] = static_cast<long>(occupied_.size());
    occupied_.push_back(k);
  } else if (before > 0 && after == 0) {
    const long pos = slot_[i];
    const long last = occupied_.back();
    occupied_[static_cast<std::size_t>(pos)] = last;
    slot_[static_cast<std::size_t>(last - 1)] = pos;
    occupied_.pop_back();
    slot_[i] = -1;
  }
}

void MetropolisChain::propose_count(long k, int delta) {
  const long n = cfg_.count(k);
  if ((delta < 0 && n == 0) || (delta > 0 && opts_.count_cap && n >= *opts_.count_cap)) {
    ++proposed_;
    return;
  }
  const double lr = log_rate_[static_cast<std::size_t>(k - 1)];
  const double d_log_q = delta > 0 ? lr - std::log(n + 1.0) : std::log(static_cast<double>(n)) - lr;

  const double v = sched_.volume;
  const double m0 = static_cast<double>(mass_);
  const double m1 = m0 + delta * static_cast<double>(k);
  double d_h = -(hyl_.mu - gas_.alpha) * delta * static_cast<double>(k) + 0.5 * hyl_.a * (m1 * m1 - m0 * m0) / v;
  if (k >= sched_.m_cutoff) {
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    d_h -= 0.5 * hyl_.b * kd * kd * ((nd + delta) * (nd + delta) - nd * nd) / v;
  }
  if (accept(d_log_q - gas_.beta * opts_.tilt * d_h)) apply(k, delta);
}

void MetropolisChain::propose_shift() {
  if (occupied_.empty()) {
    ++proposed_;
    return;
  }
  const long n_occ = static_cast<long>(occupied_.size());
  const long src = occupied_[static_cast<std::size_t>(std::uniform_int_distribution<long>(0, n_occ - 1)(rng_))];
  long jump = std::uniform_int_distribution<long>(1, span_)(rng_);
  if (std::uniform_int_distribution<int>(0, 1)(rng_) == 0) jump = -jump;
  const long dst = src + jump;
  if (dst < 1 || dst > sched_.k_max || (opts_.count_cap && cfg_.count(dst) >= *opts_.count_cap)) {
    ++proposed_;
    return;
  }
  const long ns = cfg_.count(src);
  const long nd = cfg_.count(dst);
  const double d_log_q = std::log(static_cast<double>(ns)) - log_rate_[static_cast<std::size_t>(src - 1)] +
                         log_rate_[static_cast<std::size_t>(dst - 1)] - std::log(nd + 1.0);

  const double v = sched_.volume;
  const double m0 = static_cast<double>(mass_);
  const double m1 = m0 + static_cast<double>(dst - src);
  double d_h = -(hyl_.mu - gas_.alpha) * static_cast<double>(dst - src) + 0.5 * hyl_.a * (m1 * m1 - m0 * m0) / v;
  auto ds2 = [&](long k, long before, long after) {
    if (k < sched_.m_cutoff) return 0.0;
    const double kk = static_cast<double>(k) * static_cast<double>(k);
    return kk * (static_cast<double>(after) * after - static_cast<double>(before) * before);
  };
  d_h -= 0.5 * hyl_.b * (ds2(src, ns, ns - 1) + ds2(dst, nd, nd + 1)) / v;

  // Hastings factor for picking the source among occupied lengths.
  const long n_occ_after = n_occ - (ns == 1 ? 1 : 0) + (nd == 0 ? 1 : 0);
  const double hastings = std::log(static_cast<double>(n_occ)) - std::log(static_cast<double>(n_occ_after));
  if (accept(d_log_q - gas_.beta * opts_.tilt * d_h + hastings)) {
    apply(src, -1);
    apply(dst, +1);
  }
}

void MetropolisChain::step() {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  if (u < opts_.p_local) {
    const long k = local_pick_(rng_) + 1;
    propose_count(k, std::uniform_int_distribution<int>(0, 1)(rng_) ? 1 : -1);
  } else if (u < opts_.p_local + opts_.p_teleport) {
    const long k = std::uniform_int_distribution<long>(sched_.m_cutoff, sched_.k_max)(rng_);
    propose_count(k, std::uniform_int_distribution<int>(0, 1)(rng_) ? 1 : -1);
  } else {
    propose_shift();
  }
}

void mcmc_run(MetropolisChain& chain, long n_steps, long burn_in, long thin,
              const std::function<void(const MetropolisChain&)>& sink) {
  if (!(n_steps > burn_in) || burn_in < 0) throw Error(ErrorKind::domain, "mcmc: requires n_steps > burn_in >= 0");
  if (thin < 1) throw Error(ErrorKind::domain, "mcmc: thin must be >= 1");
  for (long i = 0; i < burn_in; ++i) chain.step();
  for (long i = burn_in; i < n_steps; ++i) {
    chain.step();
    if ((i - burn_in) % thin == 0) sink(chain);
  }
}

std::vector<CycleCountConfig> mcmc_sample(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched,
                                          long n_steps, long burn_in, std::uint64_t seed, const ChainOptions& opts,
                                          long thin) {
  MetropolisChain chain(gas, hyl, sched, opts, seed);
  std::vector<CycleCountConfig> out;
  out.reserve(static_cast<std::size_t>((n_steps - burn_in) / std::max(thin, 1L) + 1));
  mcmc_run(chain, n_steps, burn_in, thin, [&](const MetropolisChain& c) { out.push_back(c.state()); });
  return out;
}

}  // namespace hyl::sim
