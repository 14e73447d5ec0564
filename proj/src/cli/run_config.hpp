#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyl/variational.hpp"

namespace hyl::cli {

/// Bad flags, inconsistent parameters or unreadable config files (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid written lo:hi:n on the command line.
struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  std::vector<double> values() const;
};

Grid parse_grid(const std::string& text);
std::string format_grid(const Grid& g);
Kappa parse_kappa(const std::string& text);

struct RunConfig {
  std::string command;

  // model
  int d = 3;
  std::optional<double> beta;
  std::optional<Grid> beta_grid;
  double alpha = -1.0;
  double a = 1.0;
  double b = 0.5;
  std::optional<double> mu;
  std::optional<Grid> mu_grid;
  Kappa kappa = Kappa::zero();

  // bose
  std::vector<double> n_values;
  std::vector<double> u_values;

  // simulation
  std::vector<double> volumes;
  std::uint64_t seed = 1;
  long steps = 200'000;
  long burn_in = 20'000;
  long thin = 1;
  std::optional<long> k_max;
  std::optional<long> m_cutoff;
  double eps_tail = 1e-8;
  bool exact = false;
  int count_cap = 3;
  int ti_nodes = 4;  // 0 disables the thermodynamic-integration pressure
  std::vector<long> dk;

  // output
  std::string format = "csv";
  std::string out;  // empty: stdout
  int precision = 12;

  /// Not serialised: taken from HYL_THREADS at run time.
  int threads = 0;

  std::vector<double> betas() const;
  std::vector<double> mus() const;
  /// Throws ConfigError naming the violated invariant.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Reads the "config" object of a file written with --format json.
RunConfig load_config_file(const std::string& path);

/// min(HYL_THREADS, OpenMP default); HYL_THREADS must be a positive integer when set.
int thread_cap();

}  // namespace hyl::cli
