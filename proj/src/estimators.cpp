#include "hyl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <omp.h>

#include "hyl/errors.hpp"

namespace hyl::sim {

SimEstimate batch_means(const std::vector<double>& series, std::uint64_t seed, int n_batches) {
  n_batches = std::clamp(n_batches, kMinBatches, kMaxBatches);
  const long n = static_cast<long>(series.size());
  if (n < n_batches) {
    throw Error(ErrorKind::insufficient_samples, "batch_means: " + std::to_string(n) + " samples for " +
                                                     std::to_string(n_batches) + " batches");
  }
  const long per = n / n_batches;
  const long used = per * n_batches;
  std::vector<double> means(static_cast<std::size_t>(n_batches));
  for (int b = 0; b < n_batches; ++b) {
    const auto first = series.begin() + b * per;
    means[static_cast<std::size_t>(b)] = std::accumulate(first, first + per, 0.0) / static_cast<double>(per);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / n_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (n_batches - 1);

  SimEstimate est;
  est.mean = grand;
  est.std_error = std::sqrt(var / n_batches);
  est.n_samples = used;
  est.seed = seed;
  est.n_batches = n_batches;
  est.tau_int = integrated_autocorrelation(series);
  return est;
}

StreamingBatchMeans::StreamingBatchMeans(long n_expected, int n_batches)
    : n_batches_(std::clamp(n_batches, kMinBatches, kMaxBatches)) {
  per_ = std::max<long>(1, n_expected / n_batches_);
  means_.reserve(static_cast<std::size_t>(n_batches_));
}

void StreamingBatchMeans::add(double x) {
  if (static_cast<int>(means_.size()) == n_batches_) return;  // tail beyond the last full batch
  ++n_;
  sum_ += x;
  sum_sq_ += x * x;
  batch_sum_ += x;
  if (++in_batch_ == per_) {
    means_.push_back(batch_sum_ / static_cast<double>(per_));
    batch_sum_ = 0.0;
    in_batch_ = 0;
  }
}

SimEstimate StreamingBatchMeans::finish(std::uint64_t seed) const {
  if (static_cast<int>(means_.size()) < n_batches_) {
    throw Error(ErrorKind::insufficient_samples, "batch_means: " + std::to_string(means_.size()) + " of " +
                                                     std::to_string(n_batches_) + " batches filled");
  }
  const double grand = std::accumulate(means_.begin(), means_.end(), 0.0) / n_batches_;
  double var = 0.0;
  for (double m : means_) var += (m - grand) * (m - grand);
  var /= (n_batches_ - 1);

  SimEstimate est;
  est.mean = grand;
  est.std_error = std::sqrt(var / n_batches_);
  est.n_samples = per_ * n_batches_;
  est.seed = seed;
  est.n_batches = n_batches_;
  const double n = static_cast<double>(n_);
  const double sample_var = sum_sq_ / n - (sum_ / n) * (sum_ / n);
  est.tau_int = sample_var > 0.0 ? std::max(0.5, 0.5 * static_cast<double>(per_) * var / sample_var) : 0.5;
  return est;
}

double integrated_autocorrelation(const std::vector<double>& series, double window_factor) {
  const long n = static_cast<long>(series.size());
  if (n < 4) return 0.5;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  auto autocov = [&](long t) {
    double s = 0.0;
    for (long i = 0; i + t < n; ++i) s += (series[i] - mean) * (series[i + t] - mean);
    return s / static_cast<double>(n - t);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return 0.5;
  double tau = 0.5;
  for (long t = 1; t < n / 2; ++t) {
    tau += autocov(t) / c0;
    if (static_cast<double>(t) >= window_factor * tau) break;
  }
  return std::max(tau, 0.5);
}

std::pair<SimEstimate, SimEstimate> estimate_pair_density(const std::vector<CycleCountConfig>& stream,
                                                          const VolumeSchedule& sched, std::uint64_t seed) {
  if (stream.empty()) throw Error(ErrorKind::insufficient_samples, "estimate_pair_density: empty stream");
  std::vector<double> m1;
  std::vector<double> m2;
  m1.reserve(stream.size());
  m2.reserve(stream.size());
  for (const auto& cfg : stream) {
    const auto [x, y] = pair_density(cfg, sched);
    m1.push_back(x);
    m2.push_back(y);
  }
  return {batch_means(m1, seed), batch_means(m2, seed)};
}

SimEstimate estimate_DK(const std::vector<CycleCountConfig>& stream, long K, const VolumeSchedule& sched,
                        std::uint64_t seed) {
  if (K >= sched.k_max) {
    throw Error(ErrorKind::cutoff, "estimate_DK: K=" + std::to_string(K) + " must be below k_max=" +
                                       std::to_string(sched.k_max));
  }
  if (stream.empty()) throw Error(ErrorKind::insufficient_samples, "estimate_DK: empty stream");
  std::vector<double> d;
  d.reserve(stream.size());
  for (const auto& cfg : stream) d.push_back(cfg.density_above(K));
  return batch_means(d, seed);
}

GofResult poisson_gof(const std::vector<long>& samples, double mean) {
  GofResult out;
  const double n = static_cast<double>(samples.size());
  if (samples.empty() || !(mean > 0.0)) return out;

  // Bins 0..last-1 individually, last collects the upper tail.
  std::vector<double> expected;
  double pmf = std::exp(-mean);
  double cum = 0.0;
  for (long j = 0;; ++j) {
    if (j > 0) pmf *= mean / static_cast<double>(j);
    if (pmf * n < 5.0 && static_cast<double>(j) > mean) break;
    expected.push_back(pmf * n);
    cum += pmf;
  }
  std::vector<double> observed(expected.size() + 1, 0.0);
  for (long s : samples) {
    const auto bin = static_cast<std::size_t>(std::min<long>(s, static_cast<long>(expected.size())));
    observed[bin] += 1.0;
  }
  expected.push_back(std::max(0.0, 1.0 - cum) * n);
  // merge an under-populated tail into its neighbour
  while (expected.size() > 1 && expected.back() < 5.0) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }
  if (expected.size() < 2) return out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double diff = observed[i] - expected[i];
    out.statistic += diff * diff / expected[i];
  }
  out.dof = static_cast<int>(expected.size()) - 1;
  out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.dof), out.statistic));
  return out;
}

ChainSeries run_series(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, long n_steps,
                       long burn_in, std::uint64_t seed, const ChainOptions& opts, long thin) {
  MetropolisChain chain(gas, hyl, sched, opts, seed);
  ChainSeries out;
  const auto kept = static_cast<std::size_t>((n_steps - burn_in) / thin + 1);
  out.m1.reserve(kept);
  out.m2.reserve(kept);
  out.weight.reserve(kept);
  out.energy.reserve(kept);
  mcmc_run(chain, n_steps, burn_in, thin, [&](const MetropolisChain& c) {
    const double h = c.energy();
    out.m1.push_back(c.m1());
    out.m2.push_back(c.m2());
    out.energy.push_back(h);
    out.weight.push_back(std::exp(-gas.beta * h));
  });
  out.acceptance = chain.proposed() > 0 ? static_cast<double>(chain.accepted()) / chain.proposed() : 0.0;
  return out;
}

ChainSummary run_summary(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, long n_steps,
                         long burn_in, std::uint64_t seed, const ChainOptions& opts, long thin) {
  MetropolisChain chain(gas, hyl, sched, opts, seed);
  const long kept = (n_steps - burn_in) / thin;
  StreamingBatchMeans m1(kept), m2(kept), weight(kept), energy(kept);
  mcmc_run(chain, n_steps, burn_in, thin, [&](const MetropolisChain& c) {
    const double h = c.energy();
    m1.add(c.m1());
    m2.add(c.m2());
    energy.add(h);
    weight.add(std::exp(-gas.beta * h));
  });
  ChainSummary out;
  out.m1 = m1.finish(seed);
  out.m2 = m2.finish(seed);
  out.weight = weight.finish(seed);
  out.energy = energy.finish(seed);
  out.acceptance = chain.proposed() > 0 ? static_cast<double>(chain.accepted()) / chain.proposed() : 0.0;
  return out;
}

namespace {

template <int N>
void gauss_nodes(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  // abscissa() lists the nonnegative half; mirror it onto [-1, 1], then map to [0, 1].
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool centre = (N % 2 == 1) && i == 0;
    x.push_back(0.5 * (1.0 + a[i]));
    w.push_back(0.5 * wt[i]);
    if (!centre) {
      x.push_back(0.5 * (1.0 - a[i]));
      w.push_back(0.5 * wt[i]);
    }
  }
}

void legendre_on_unit(int nodes, std::vector<double>& x, std::vector<double>& w) {
  switch (nodes) {
    case 4: gauss_nodes<4>(x, w); break;
    case 8: gauss_nodes<8>(x, w); break;
    case 16: gauss_nodes<16>(x, w); break;
    default: throw Error(ErrorKind::domain, "pressure_ti: nodes must be 4, 8 or 16");
  }
}

}  // namespace

SimEstimate pressure_ti(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, std::uint64_t seed,
                        const PressureOptions& opts) {
  std::vector<double> x;
  std::vector<double> w;
  legendre_on_unit(opts.nodes, x, w);
  const long nn = static_cast<long>(x.size());
  std::vector<SimEstimate> node(static_cast<std::size_t>(nn));
  std::vector<std::string> failure(static_cast<std::size_t>(nn));
  const int nt = opts.threads > 0 ? opts.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (long i = 0; i < nn; ++i) {
    try {
      ChainOptions co = opts.chain;
      co.tilt = x[static_cast<std::size_t>(i)];
      const ChainSeries s =
          run_series(gas, hyl, sched, opts.n_steps, opts.burn_in, seed + static_cast<std::uint64_t>(i), co, opts.thin);
      node[static_cast<std::size_t>(i)] = batch_means(s.energy, seed + static_cast<std::uint64_t>(i));
    } catch (const std::exception& e) {
      failure[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& f : failure) {
    if (!f.empty()) throw Error(ErrorKind::insufficient_samples, "pressure_ti: " + f);
  }

  double p0_trunc = 0.0;
  for (long k = 1; k <= sched.k_max; ++k) p0_trunc += cycle_weight(gas, k).tilted;
  p0_trunc /= gas.beta;

  // log E_Q[e^{-beta H}] = -beta int_0^1 E_t[H] dt
  double integral = 0.0;
  double var = 0.0;
  double tau = 0.5;
  long samples = 0;
  for (long i = 0; i < nn; ++i) {
    const auto& e = node[static_cast<std::size_t>(i)];
    integral += w[static_cast<std::size_t>(i)] * e.mean;
    var += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)] * e.std_error * e.std_error;
    tau = std::max(tau, e.tau_int);
    samples += e.n_samples;
  }
  SimEstimate out;
  out.mean = p0_trunc - integral / sched.volume;
  out.std_error = std::sqrt(var) / sched.volume;
  out.n_samples = samples;
  out.seed = seed;
  out.tau_int = tau;
  out.n_batches = node.front().n_batches;
  return out;
}

}  // namespace hyl::sim
