#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hyl/simulator.hpp"

namespace hyl::sim {

struct SimEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  double tau_int = 0.5;  // integrated autocorrelation time, in samples
  int n_batches = 0;
};

inline constexpr int kMinBatches = 20;
inline constexpr int kMaxBatches = 100;

/// Batch-means estimate; n_batches is clamped to [20, 100]. Throws
/// ErrorKind::insufficient_samples when there are fewer samples than batches.
SimEstimate batch_means(const std::vector<double>& series, std::uint64_t seed, int n_batches = 50);

/// Batch means over a stream of known length, keeping only running sums so
/// long chains need no stored series. tau_int comes from the batch variance.
class StreamingBatchMeans {
 public:
  explicit StreamingBatchMeans(long n_expected, int n_batches = 50);
  void add(double x);
  long count() const { return n_; }
  /// Throws ErrorKind::insufficient_samples before n_batches full batches exist.
  SimEstimate finish(std::uint64_t seed) const;

 private:
  long per_ = 1;
  int n_batches_ = 50;
  long n_ = 0;
  long in_batch_ = 0;
  double batch_sum_ = 0.0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::vector<double> means_;
};

/// Sokal's self-consistent window estimate of tau_int = 1/2 + sum_t rho(t).
double integrated_autocorrelation(const std::vector<double>& series, double window_factor = 5.0);

std::pair<SimEstimate, SimEstimate> estimate_pair_density(const std::vector<CycleCountConfig>& stream,
                                                          const VolumeSchedule& sched, std::uint64_t seed = 0);

/// D_K = sum_{k > K} k N_k / V. Throws ErrorKind::cutoff when K >= k_max.
SimEstimate estimate_DK(const std::vector<CycleCountConfig>& stream, long K, const VolumeSchedule& sched,
                        std::uint64_t seed = 0);

struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square test of integer samples against Poisson(mean); bins with
/// expected count below 5 are merged into the tail.
GofResult poisson_gof(const std::vector<long>& samples, double mean);

/// Independent-chain statistics for one observable recorded on every kept sample.
struct ChainSeries {
  std::vector<double> m1;
  std::vector<double> m2;
  std::vector<double> weight;  // e^{-beta H}
  std::vector<double> energy;  // H
  double acceptance = 0.0;
};

ChainSeries run_series(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, long n_steps,
                       long burn_in, std::uint64_t seed, const ChainOptions& opts = {}, long thin = 1);

/// Streaming estimates of E[M1], E[M2] and E[e^{-beta H}] from one chain.
struct ChainSummary {
  SimEstimate m1;
  SimEstimate m2;
  SimEstimate weight;
  SimEstimate energy;
  double acceptance = 0.0;
};

ChainSummary run_summary(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, long n_steps,
                         long burn_in, std::uint64_t seed, const ChainOptions& opts = {}, long thin = 1);

struct PressureOptions {
  int nodes = 8;  // Gauss-Legendre nodes in the tilt parameter
  long n_steps = 200'000;
  long burn_in = 20'000;
  long thin = 10;
  int threads = 0;
  /// Reuse the caller's chain options (count cap, move mix); tilt is overridden.
  ChainOptions chain;
};

/// Finite-volume pressure p0_trunc + (1/(beta V)) log E_Q[e^{-beta H}] by
/// thermodynamic integration: d/dt log E_Q[e^{-t beta H}] = -beta E_t[H].
/// Nodes run as independent chains (seed + node index), in parallel.
SimEstimate pressure_ti(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched, std::uint64_t seed,
                        const PressureOptions& opts = {});

}  // namespace hyl::sim
