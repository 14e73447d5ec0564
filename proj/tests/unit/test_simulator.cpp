#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hyl/errors.hpp"
#include "hyl/estimators.hpp"
#include "hyl/simulator.hpp"

using namespace hyl;
using namespace hyl::sim;

namespace {

// Small instance with rates of order one so the tilt matters.
const GasParams kGas{3, 0.3, -0.05};
const HylParams kHyl{1.0, 0.5, 0.5, Kappa::zero()};
const VolumeSchedule kTiny{10.0, 2, Kappa::zero(), 4, 1.0};
constexpr int kCap = 3;

double rate(const GasParams& g, double volume, long k) {
  return volume * std::pow(4 * std::numbers::pi * g.beta, -0.5 * g.d) * std::pow(static_cast<double>(k), -1.0 - 0.5 * g.d) *
         std::exp(g.beta * g.alpha * static_cast<double>(k));
}

double energy_direct(const std::vector<long>& n, const HylParams& h, const GasParams& g, double volume, long m) {
  double mass = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    mass += k * n[i];
    if (static_cast<long>(i + 1) >= m) s2 += k * k * n[i] * n[i];
  }
  return -(h.mu - g.alpha) * mass + 0.5 * h.a * mass * mass / volume - 0.5 * h.b * s2 / volume;
}

// Unnormalised tilted weights of every capped count vector, indexed base cap+1.
std::vector<double> brute_weights(const GasParams& g, const HylParams& h, const VolumeSchedule& s, int cap,
                                  double* q_total = nullptr) {
  const long n_states = static_cast<long>(std::pow(cap + 1, s.k_max));
  std::vector<double> w(static_cast<std::size_t>(n_states));
  double qt = 0.0;
  for (long idx = 0; idx < n_states; ++idx) {
    std::vector<long> n(static_cast<std::size_t>(s.k_max));
    long rest = idx;
    double q = 1.0;
    for (long k = 1; k <= s.k_max; ++k) {
      n[static_cast<std::size_t>(k - 1)] = rest % (cap + 1);
      rest /= cap + 1;
      const double r = rate(g, s.volume, k);
      const long nk = n[static_cast<std::size_t>(k - 1)];
      q *= std::exp(-r) * std::pow(r, static_cast<double>(nk)) / std::tgamma(nk + 1.0);
    }
    qt += q;
    w[static_cast<std::size_t>(idx)] = q * std::exp(-g.beta * energy_direct(n, h, g, s.volume, s.m_cutoff));
  }
  if (q_total) *q_total = qt;
  return w;
}

long state_index(const CycleCountConfig& c, int cap) {
  long idx = 0;
  for (long k = c.k_max(); k >= 1; --k) idx = idx * (cap + 1) + c.count(k);
  return idx;
}

}  // namespace

TEST_CASE("hamiltonian matches the direct formula") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> cnt(0, 5);
  for (int rep = 0; rep < 20; ++rep) {
    CycleCountConfig c{std::vector<long>(7), 12.0};
    for (auto& n : c.counts) n = cnt(rng);
    const VolumeSchedule s{12.0, 3, Kappa::zero(), 7, 1.0};
    CHECK(hamiltonian(c, kHyl, kGas, s) ==
          doctest::Approx(energy_direct(c.counts, kHyl, kGas, 12.0, 3)).epsilon(1e-13));
    const auto [x, y] = pair_density(c, s);
    CHECK(x + y == doctest::Approx(static_cast<double>(c.density_above(0))).epsilon(1e-14));
  }
  CycleCountConfig empty{std::vector<long>(4, 0), 5.0};
  CHECK(hamiltonian(empty, kHyl, kGas, kTiny) == 0.0);
}

TEST_CASE("default cutoffs") {
  CHECK(default_cutoff(Kappa::zero(), 16.0) == 4);
  CHECK(default_cutoff(Kappa::zero(), 17.0) == 5);
  CHECK(default_cutoff(Kappa::finite(0.25), 10.0) == 3);
  CHECK(default_cutoff(Kappa::finite(1e-6), 10.0) == 1);
  CHECK(default_cutoff(Kappa::infinite(), 3.0) == 9);
}

TEST_CASE("schedule certifies the reference tail") {
  const GasParams g{3, 1.0, -0.2};
  const auto s = make_schedule(g, HylParams{1.0, 0.5, 0.1, Kappa::zero()}, 50.0);
  CHECK(reference_tail(g, s.k_max, 50.0) <= s.eps_tail);
  CHECK(s.k_max >= s.m_cutoff);
  CHECK_THROWS_AS(make_schedule(g, HylParams{1.0, 0.5, 0.1, Kappa::zero()}, -1.0), Error);
  CHECK_THROWS_AS(validate_hamiltonian(HylParams{1.0, 1.5, 0.0, Kappa::zero()}), Error);
  CHECK_NOTHROW(validate_hamiltonian(HylParams{0.0, 0.0, 0.0, Kappa::zero()}));
}

TEST_CASE("reference sampler: Poisson means and variances") {
  const GasParams g{3, 0.3, -0.05};
  const auto s = make_schedule(g, HylParams{1.0, 0.5, 0.0, Kappa::zero()}, 10.0);
  const int n = 100000;
  std::mt19937_64 rng(17);
  std::vector<double> sum(4, 0.0), sum_sq(4, 0.0);
  double density = 0.0, density_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_reference(g, s, rng);
    for (long k = 1; k <= 4; ++k) {
      sum[static_cast<std::size_t>(k - 1)] += static_cast<double>(c.count(k));
      sum_sq[static_cast<std::size_t>(k - 1)] += static_cast<double>(c.count(k) * c.count(k));
    }
    const double rho = c.density_above(0);
    density += rho;
    density_sq += rho * rho;
  }
  for (long k = 1; k <= 4; ++k) {
    CAPTURE(k);
    const double mean = rate(g, 10.0, k);
    const double m = sum[static_cast<std::size_t>(k - 1)] / n;
    const double var = sum_sq[static_cast<std::size_t>(k - 1)] / n - m * m;
    CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / n));
    CHECK(var == doctest::Approx(mean).epsilon(0.03));
  }
  density /= n;
  const double se = std::sqrt((density_sq / n - density * density) / n);
  const double p0_prime = pressure_p0_deriv(g, 1);
  CHECK(std::abs(density - p0_prime) < 4.0 * se + 2.0 * s.eps_tail);
}

TEST_CASE("reference sampler refuses an uncertified k_max") {
  VolumeSchedule s{10.0, 2, Kappa::zero(), 3, 1e-8};
  CHECK_THROWS_AS(sample_reference(kGas, s, 1), Error);
  try {
    sample_reference(kGas, s, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::tail_mass);
  }
}

TEST_CASE("exact enumeration against a brute-force sum") {
  double q_total = 0.0;
  const auto w = brute_weights(kGas, kHyl, kTiny, kCap, &q_total);
  double z = 0.0, zm1 = 0.0, zm2 = 0.0;
  for (std::size_t idx = 0; idx < w.size(); ++idx) {
    long rest = static_cast<long>(idx);
    double low = 0.0, high = 0.0;
    for (long k = 1; k <= kTiny.k_max; ++k) {
      const double km = static_cast<double>(k * (rest % (kCap + 1)));
      rest /= kCap + 1;
      (k < kTiny.m_cutoff ? low : high) += km;
    }
    z += w[idx];
    zm1 += w[idx] * low / kTiny.volume;
    zm2 += w[idx] * high / kTiny.volume;
  }
  const auto r = exact_pressure_finite(kGas, kHyl, kTiny, kCap);
  CHECK(r.states == 256);
  CHECK(r.log_sum == doctest::Approx(std::log(z)).epsilon(1e-12));
  CHECK(r.captured_mass == doctest::Approx(q_total).epsilon(1e-12));
  CHECK(r.neglected_mass == doctest::Approx(1.0 - q_total).epsilon(1e-9).scale(1e-12));
  CHECK(r.m1 == doctest::Approx(zm1 / z).epsilon(1e-12));
  CHECK(r.m2 == doctest::Approx(zm2 / z).epsilon(1e-12));
  double p0_trunc = 0.0;
  for (long k = 1; k <= kTiny.k_max; ++k) p0_trunc += rate(kGas, 1.0, k) / kGas.beta;
  CHECK(r.pressure == doctest::Approx(p0_trunc + std::log(z) / (kGas.beta * kTiny.volume)).epsilon(1e-12));
}

TEST_CASE("exact enumeration: zero interaction gives the truncated ideal-gas pressure") {
  const HylParams free{0.0, 0.0, kGas.alpha, Kappa::zero()};
  const VolumeSchedule s{10.0, 2, Kappa::zero(), 6, 1.0};
  const auto r = exact_pressure_finite(kGas, free, s, 8);
  double p0_trunc = 0.0;
  for (long k = 1; k <= s.k_max; ++k) p0_trunc += rate(kGas, 1.0, k) / kGas.beta;
  CHECK(r.mean_weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.pressure == doctest::Approx(p0_trunc + std::log(r.captured_mass) / (kGas.beta * 10.0)).epsilon(1e-12));
  CHECK(r.neglected_mass < 1e-4);
}

TEST_CASE("exact pressure increases with b") {
  double prev = -kInfinity;
  for (double b : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const auto r = exact_pressure_finite(kGas, HylParams{1.0, b, 0.5, Kappa::zero()}, kTiny, kCap);
    CHECK(r.pressure > prev);
    prev = r.pressure;
  }
}

TEST_CASE("parallel enumeration is bit-identical to the serial sum") {
  const VolumeSchedule s{10.0, 2, Kappa::zero(), 7, 1.0};
  const auto ref = exact_pressure_finite(kGas, kHyl, s, 4);
  for (int threads : {1, 2, 3}) {
    const auto par = exact_pressure_finite_parallel(kGas, kHyl, s, 4, threads);
    CHECK(par.log_sum == doctest::Approx(ref.log_sum).epsilon(1e-13));
    CHECK(par.m2 == doctest::Approx(ref.m2).epsilon(1e-13));
    const auto again = exact_pressure_finite_parallel(kGas, kHyl, s, 4, 1);
    CHECK(par.log_sum == again.log_sum);
    CHECK(par.m1 == again.m1);
  }
}

TEST_CASE("enumeration size limit") {
  const VolumeSchedule s{10.0, 2, Kappa::zero(), 40, 1.0};
  try {
    exact_pressure_finite(kGas, kHyl, s, 3);
    FAIL("expected state_space_too_large");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::state_space_too_large);
  }
}

TEST_CASE("chain log-target differences match the direct weights") {
  ChainOptions opts;
  opts.count_cap = kCap;
  MetropolisChain chain(kGas, kHyl, kTiny, opts, 1);
  const auto w = brute_weights(kGas, kHyl, kTiny, kCap);
  CycleCountConfig base{{0, 0, 0, 0}, kTiny.volume};
  const double base_log = chain.log_target(base);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long> cnt(0, kCap);
  for (int rep = 0; rep < 50; ++rep) {
    CycleCountConfig c{{cnt(rng), cnt(rng), cnt(rng), cnt(rng)}, kTiny.volume};
    CHECK(chain.log_target(c) - base_log ==
          doctest::Approx(std::log(w[static_cast<std::size_t>(state_index(c, kCap))] / w[0])).epsilon(1e-11));
  }
  CycleCountConfig over{{kCap + 1, 0, 0, 0}, kTiny.volume};
  CHECK(std::isinf(chain.log_target(over)));
}

TEST_CASE("every proposed move has a reverse move") {
  ChainOptions opts;
  opts.count_cap = kCap;
  MetropolisChain chain(kGas, kHyl, kTiny, opts, 2);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<long> cnt(0, kCap - 1);
  std::uniform_int_distribution<long> pick(1, kTiny.k_max);
  for (int rep = 0; rep < 200; ++rep) {
    CycleCountConfig from{{cnt(rng), cnt(rng), cnt(rng), cnt(rng)}, kTiny.volume};
    CycleCountConfig to = from;
    const long k = pick(rng);
    if (rep % 2 == 0) {
      to.counts[static_cast<std::size_t>(k - 1)] += 1;
    } else {
      const long j = pick(rng);
      if (j == k || from.count(k) == 0) continue;
      to.counts[static_cast<std::size_t>(k - 1)] -= 1;
      to.counts[static_cast<std::size_t>(j - 1)] += 1;
    }
    const double fwd = chain.proposal_probability(from, to);
    const double rev = chain.proposal_probability(to, from);
    CHECK((fwd > 0.0) == (rev > 0.0));
  }
}

TEST_CASE("chain samples the tilted measure on a capped space") {
  ChainOptions opts;
  opts.count_cap = kCap;
  const auto w = brute_weights(kGas, kHyl, kTiny, kCap);
  double z = 0.0;
  for (double x : w) z += x;
  MetropolisChain chain(kGas, kHyl, kTiny, opts, 7);
  std::vector<double> freq(w.size(), 0.0);
  const long n = 4'000'000;
  mcmc_run(chain, n + 10'000, 10'000, 1, [&](const MetropolisChain& c) { freq[static_cast<std::size_t>(state_index(c.state(), kCap))] += 1.0; });
  double tv = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) tv += std::abs(freq[i] / n - w[i] / z);
  tv *= 0.5;
  MESSAGE("total variation " << tv);
  CHECK(tv < 0.01);
  CHECK(chain.accepted() > 0);
}

TEST_CASE("chains are reproducible from the seed") {
  const auto a = mcmc_sample(kGas, kHyl, kTiny, 5000, 100, 42);
  const auto b = mcmc_sample(kGas, kHyl, kTiny, 5000, 100, 42);
  const auto c = mcmc_sample(kGas, kHyl, kTiny, 5000, 100, 43);
  REQUIRE(a.size() == b.size());
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].counts == b[i].counts;
    differ = differ || a[i].counts != c[i].counts;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("zero-tilt chain reproduces the Poisson reference") {
  const GasParams g{3, 1.0, -1.0};
  const auto s = make_schedule(g, HylParams{0.0, 0.0, 0.0, Kappa::zero()}, 4.0);
  ChainOptions opts;
  opts.tilt = 0.0;
  MetropolisChain chain(g, HylParams{1.0, 0.5, 0.0, Kappa::zero()}, s, opts, 11);
  const double r1 = rate(g, 4.0, 1);
  std::vector<long> n1;
  // one sample per ~10 expected local moves at k = 1
  const long thin = 2000;
  mcmc_run(chain, 40'000'000 + 10'000, 10'000, thin, [&](const MetropolisChain& c) { n1.push_back(c.state().count(1)); });
  const auto gof = poisson_gof(n1, r1);
  MESSAGE("N_1 GOF p = " << gof.p_value);
  CHECK(gof.p_value > 0.01);
}

TEST_CASE("Poisson GOF rejects a shifted law") {
  std::mt19937_64 rng(1);
  std::poisson_distribution<long> pois(3.0);
  std::vector<long> x(20000);
  for (auto& v : x) v = pois(rng);
  CHECK(poisson_gof(x, 3.0).p_value > 0.001);
  CHECK(poisson_gof(x, 3.3).p_value < 1e-6);
}

TEST_CASE("long-cycle density vanishes deep in the subcritical regime") {
  const GasParams g{3, 1.0, -1.0};
  const HylParams h{1.0, 0.5, 0.0572 - 0.3, Kappa::zero()};
  const auto s = make_schedule(g, h, 64.0);
  const auto sum = run_summary(g, h, s, 1'000'000, 50'000, 5);
  CHECK(sum.m2.mean < 2e-3);
  CHECK(sum.m1.mean > 0.0);
}

TEST_CASE("D_K cutoffs") {
  const auto stream = mcmc_sample(kGas, kHyl, kTiny, 20'000, 1000, 3);
  CHECK_THROWS_AS(estimate_DK(stream, kTiny.k_max, kTiny), Error);
  try {
    estimate_DK(stream, 10, kTiny);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cutoff);
  }
  std::vector<CycleCountConfig> low(100, CycleCountConfig{{3, 1, 0, 0}, kTiny.volume});
  CHECK(estimate_DK(low, 2, kTiny).mean == 0.0);
  CHECK(estimate_DK(low, 1, kTiny).mean == doctest::Approx(0.2));
}

TEST_CASE("batch means: too few samples") {
  try {
    batch_means(std::vector<double>(10, 1.0), 0);
    FAIL("expected insufficient_samples");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_samples);
  }
  StreamingBatchMeans s(1000);
  for (int i = 0; i < 500; ++i) s.add(1.0);
  CHECK_THROWS_AS(s.finish(0), Error);
}

TEST_CASE("streaming batch means agrees with the stored version") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> x(100'000);
  double prev = 0.0;
  for (auto& v : x) v = prev = 0.9 * prev + nd(rng);  // tau_int = (1 + 0.9) / (2 (1 - 0.9)) = 9.5
  StreamingBatchMeans s(static_cast<long>(x.size()));
  for (double v : x) s.add(v);
  const auto a = batch_means(x, 1);
  const auto b = s.finish(1);
  CHECK(b.mean == doctest::Approx(a.mean).epsilon(1e-12).scale(1e-12));
  CHECK(b.std_error == doctest::Approx(a.std_error).epsilon(1e-10));
  CHECK(a.tau_int == doctest::Approx(9.5).epsilon(0.25));
  CHECK(b.tau_int == doctest::Approx(9.5).epsilon(0.4));
}
