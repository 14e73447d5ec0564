#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "hyl/ideal_gas.hpp"
#include "hyl/variational.hpp"

namespace hyl::sim {

/// Finite-volume geometry: |Lambda|, the counter-term cutoff m and the largest
/// cycle length kept.
struct VolumeSchedule {
  double volume = 1.0;
  long m_cutoff = 1;
  Kappa kappa_target = Kappa::zero();
  long k_max = 1;
  double eps_tail = 1e-8;
};

struct SchedulePolicy {
  double eps_tail = 1e-8;
  /// k_max also covers mu V / (a - b) times this factor, so that the tilted
  /// measure's long cycles are representable.
  double long_cycle_factor = 3.0;
  std::optional<long> m_cutoff;  // overrides the kappa-dependent default
  std::optional<long> k_max;     // overrides the tail-bound policy
};

/// The Hamiltonian is defined for a >= b >= 0 (a = b = 0 gives the reference
/// process); the variational model additionally needs a > b.
void validate_hamiltonian(const HylParams& hyl);

/// Default cutoff: max(1, ceil(kappa V)) for finite kappa, ceil(sqrt V) for
/// kappa = 0 and ceil(V^2) for kappa = infinity.
long default_cutoff(Kappa kappa, double volume);

/// Upper bound on the larger of the neglected reference density
/// sum_{k > k_max} k q_k e^{beta alpha k} and mean count V sum_{k > k_max} q_k e^{beta alpha k}.
double reference_tail(const GasParams& gas, long k_max, double volume);

VolumeSchedule make_schedule(const GasParams& gas, const HylParams& hyl, double volume,
                             const SchedulePolicy& policy = {});

/// Cycle counts N_k = |Lambda| lambda_k for k = 1..k_max (counts[k-1]).
struct CycleCountConfig {
  std::vector<long> counts;
  double volume = 1.0;

  long count(long k) const { return counts[static_cast<std::size_t>(k - 1)]; }
  long k_max() const { return static_cast<long>(counts.size()); }
  /// sum_{k > K} k N_k / V
  double density_above(long K) const;
};

/// sum k N_k / V split at the cutoff: (k < m, k >= m).
std::pair<double, double> pair_density(const CycleCountConfig& cfg, const VolumeSchedule& sched);

double hamiltonian(const CycleCountConfig& cfg, const HylParams& hyl, const GasParams& gas,
                   const VolumeSchedule& sched);

/// Independent Poisson counts with means V q_k e^{beta alpha k}, k <= k_max.
/// Throws ErrorKind::tail_mass when k_max does not certify sched.eps_tail.
CycleCountConfig sample_reference(const GasParams& gas, const VolumeSchedule& sched, std::uint64_t seed);
CycleCountConfig sample_reference(const GasParams& gas, const VolumeSchedule& sched, std::mt19937_64& rng);

struct ExactResult {
  double pressure = 0.0;        // p0 truncated + log(sum) / (beta V)
  double log_sum = 0.0;         // log sum_{N <= cap} Q(N) e^{-beta H(N)}
  double captured_mass = 0.0;   // Q(N_k <= cap for all k)
  double neglected_mass = 0.0;  // 1 - captured_mass (reported error bound)
  double mean_weight = 0.0;     // E_Q[e^{-beta H} | N <= cap]
  double m1 = 0.0;              // tilted E[M1] on the capped space
  double m2 = 0.0;              // tilted E[M2] on the capped space
  long states = 0;
};

/// Largest enumeration exact_pressure_finite accepts.
inline constexpr double kMaxEnumerationStates = 1e8;

/// Exact sum over all count vectors with N_k <= count_cap.
ExactResult exact_pressure_finite(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched,
                                  int count_cap);
/// Same sum split into fixed chunks evaluated with OpenMP. The chunking does
/// not depend on the thread count, so the result is reproducible bit for bit.
ExactResult exact_pressure_finite_parallel(const GasParams& gas, const HylParams& hyl,
                                           const VolumeSchedule& sched, int count_cap, int threads = 0);

struct ChainOptions {
  double p_local = 0.8;     // k drawn proportional to the reference rate, N_k +- 1
  double p_teleport = 0.1;  // k uniform on [m, k_max], N_k +- 1
  double p_shift = 0.1;     // move one cycle from length k to k +- j
  long shift_span = 0;      // j in [1, span]; 0 picks max(2, ceil(sqrt(k_max)))
  std::optional<int> count_cap;
  /// Multiplies H in the target (1 = tilted measure, 0 = reference process).
  double tilt = 1.0;
};

/// Metropolis-Hastings chain targeting Q(N) e^{-beta tilt H(N)} on the
/// truncated (and optionally capped) count space.
class MetropolisChain {
 public:
  MetropolisChain(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched,
                  const ChainOptions& opts, std::uint64_t seed);

  void step();
  const CycleCountConfig& state() const { return cfg_; }
  double energy() const;     // H of the current state
  double m1() const { return static_cast<double>(low_mass_) / sched_.volume; }
  double m2() const { return static_cast<double>(mass_ - low_mass_) / sched_.volume; }
  long accepted() const { return accepted_; }
  long proposed() const { return proposed_; }

  /// log pi(c) up to a constant, for detailed-balance checks.
  double log_target(const CycleCountConfig& cfg) const;
  /// Probability that one step proposes `to` from `from` (single-change moves only).
  double proposal_probability(const CycleCountConfig& from, const CycleCountConfig& to) const;

 private:
  void propose_count(long k, int delta);
  void propose_shift();
  bool accept(double log_ratio);
  void apply(long k, int delta);

  GasParams gas_;
  HylParams hyl_;
  VolumeSchedule sched_;
  ChainOptions opts_;
  std::mt19937_64 rng_;
  std::discrete_distribution<long> local_pick_;
  std::vector<double> log_rate_;  // log(V q_k e^{beta alpha k})
  CycleCountConfig cfg_;
  long long mass_ = 0;      // sum k N_k
  long long low_mass_ = 0;  // sum_{k < m} k N_k
  long long s2_ = 0;        // sum_{k >= m} (k N_k)^2
  std::vector<long> occupied_;
  std::vector<long> slot_;  // index into occupied_, -1 when N_k = 0
  long span_ = 1;
  long accepted_ = 0;
  long proposed_ = 0;
};

/// Runs burn_in + n_steps steps and passes every thin-th post-burn-in state to sink.
void mcmc_run(MetropolisChain& chain, long n_steps, long burn_in, long thin,
              const std::function<void(const MetropolisChain&)>& sink);

/// Stored post-burn-in stream of configurations.
std::vector<CycleCountConfig> mcmc_sample(const GasParams& gas, const HylParams& hyl, const VolumeSchedule& sched,
                                          long n_steps, long burn_in, std::uint64_t seed,
                                          const ChainOptions& opts = {}, long thin = 1);

}  // namespace hyl::sim
