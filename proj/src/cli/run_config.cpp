#include "cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <omp.h>

namespace hyl::cli {

namespace {

double parse_double(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw ConfigError(what + ": not a number: '" + text + "'");
  return v;
}

}  // namespace

std::vector<double> Grid::values() const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  if (n > 1) out.back() = hi;
  return out;
}

Grid parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw ConfigError("grid '" + text + "': expected lo:hi:n");
  Grid g;
  g.lo = parse_double(text.substr(0, c1), "grid lo");
  g.hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "grid hi");
  const std::string ns = text.substr(c2 + 1);
  const auto [ptr, ec] = std::from_chars(ns.data(), ns.data() + ns.size(), g.n);
  if (ec != std::errc() || ptr != ns.data() + ns.size() || g.n < 1) {
    throw ConfigError("grid '" + text + "': n must be a positive integer");
  }
  if (!std::isfinite(g.lo) || !std::isfinite(g.hi)) throw ConfigError("grid '" + text + "': bounds must be finite");
  if (g.n > 1 && !(g.hi > g.lo)) throw ConfigError("grid '" + text + "': not strictly increasing");
  if (g.n == 1 && g.hi != g.lo) throw ConfigError("grid '" + text + "': a single point needs lo == hi");
  return g;
}

std::string format_grid(const Grid& g) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g:%.17g:%d", g.lo, g.hi, g.n);
  return buf;
}

Kappa parse_kappa(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf") return Kappa::infinite();
  const double v = parse_double(text, "kappa");
  if (!(v >= 0.0)) throw ConfigError("kappa must be >= 0 or 'inf'");
  return Kappa::from_value(v);
}

std::vector<double> RunConfig::betas() const {
  if (beta_grid) return beta_grid->values();
  if (beta) return {*beta};
  return {};
}

std::vector<double> RunConfig::mus() const {
  if (mu_grid) return mu_grid->values();
  if (mu) return {*mu};
  return {};
}

void RunConfig::validate() const {
  if (precision < 6 || precision > 17) throw ConfigError("precision must be in [6, 17]");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (command == "bose") {
    if (n_values.empty() || u_values.empty()) throw ConfigError("bose: --n and --u are required");
    return;
  }
  if (d < 1) throw ConfigError("d must be a positive integer");
  if (beta && beta_grid) throw ConfigError("--beta and --beta-grid are exclusive");
  if (mu && mu_grid) throw ConfigError("--mu and --mu-grid are exclusive");
  if (betas().empty()) throw ConfigError(command + ": --beta or --beta-grid is required");
  for (double bt : betas()) {
    if (!(bt > 0.0) || !std::isfinite(bt)) throw ConfigError("beta must be positive and finite");
  }
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  if (command == "simulate") {
    if (!(a >= 0.0) || !(b >= 0.0) || !(b <= a)) throw ConfigError("simulate: requires a >= b >= 0");
  } else if (!(a > 0.0) || !(b >= 0.0) || !(b < a)) {
    throw ConfigError("requires a > 0 and 0 <= b < a");
  }
  if ((command == "phase-diagram" || command == "pressure" || command == "simulate") && mus().empty()) {
    throw ConfigError(command + ": --mu or --mu-grid is required");
  }
  if (command == "simulate") {
    if (volumes.empty()) throw ConfigError("simulate: --volumes is required");
    for (double v : volumes) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("volumes must be positive");
    }
    if (!(alpha < 0.0)) throw ConfigError("simulate: the reference process needs alpha < 0");
    if (burn_in < 0 || !(steps > burn_in)) throw ConfigError("simulate: requires steps > burn-in >= 0");
    if (thin < 1) throw ConfigError("simulate: thin must be >= 1");
    if (ti_nodes != 0 && ti_nodes != 4 && ti_nodes != 8 && ti_nodes != 16) {
      throw ConfigError("simulate: ti-nodes must be 0, 4, 8 or 16");
    }
    if (count_cap < 1) throw ConfigError("simulate: count-cap must be >= 1");
    if (k_max && *k_max < 1) throw ConfigError("simulate: k-max must be >= 1");
    if (m_cutoff && *m_cutoff < 1) throw ConfigError("simulate: m-cutoff must be >= 1");
    for (long k : dk) {
      if (k < 0) throw ConfigError("simulate: dk cutoffs must be >= 0");
    }
  }
}

nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  json j;
  j["command"] = c.command;
  j["d"] = c.d;
  j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
  j["beta_grid"] = c.beta_grid ? json(format_grid(*c.beta_grid)) : json(nullptr);
  j["alpha"] = c.alpha;
  j["a"] = c.a;
  j["b"] = c.b;
  j["mu"] = c.mu ? json(*c.mu) : json(nullptr);
  j["mu_grid"] = c.mu_grid ? json(format_grid(*c.mu_grid)) : json(nullptr);
  j["kappa"] = c.kappa.is_infinite() ? json("inf") : json(c.kappa.value());
  j["n"] = c.n_values;
  j["u"] = c.u_values;
  j["volumes"] = c.volumes;
  j["seed"] = c.seed;
  j["steps"] = c.steps;
  j["burn_in"] = c.burn_in;
  j["thin"] = c.thin;
  j["k_max"] = c.k_max ? json(*c.k_max) : json(nullptr);
  j["m_cutoff"] = c.m_cutoff ? json(*c.m_cutoff) : json(nullptr);
  j["eps_tail"] = c.eps_tail;
  j["exact"] = c.exact;
  j["count_cap"] = c.count_cap;
  j["ti_nodes"] = c.ti_nodes;
  j["dk"] = c.dk;
  j["format"] = c.format;
  j["precision"] = c.precision;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.d = j.at("d").get<int>();
    if (!j.at("beta").is_null()) c.beta = j.at("beta").get<double>();
    if (!j.at("beta_grid").is_null()) c.beta_grid = parse_grid(j.at("beta_grid").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.a = j.at("a").get<double>();
    c.b = j.at("b").get<double>();
    if (!j.at("mu").is_null()) c.mu = j.at("mu").get<double>();
    if (!j.at("mu_grid").is_null()) c.mu_grid = parse_grid(j.at("mu_grid").get<std::string>());
    const auto& k = j.at("kappa");
    c.kappa = k.is_string() ? parse_kappa(k.get<std::string>()) : Kappa::from_value(k.get<double>());
    c.n_values = j.at("n").get<std::vector<double>>();
    c.u_values = j.at("u").get<std::vector<double>>();
    c.volumes = j.at("volumes").get<std::vector<double>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.steps = j.at("steps").get<long>();
    c.burn_in = j.at("burn_in").get<long>();
    c.thin = j.at("thin").get<long>();
    if (!j.at("k_max").is_null()) c.k_max = j.at("k_max").get<long>();
    if (!j.at("m_cutoff").is_null()) c.m_cutoff = j.at("m_cutoff").get<long>();
    c.eps_tail = j.at("eps_tail").get<double>();
    c.exact = j.at("exact").get<bool>();
    c.count_cap = j.at("count_cap").get<int>();
    c.ti_nodes = j.at("ti_nodes").get<int>();
    c.dk = j.at("dk").get<std::vector<long>>();
    c.format = j.at("format").get<std::string>();
    c.precision = j.at("precision").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: '" + path + "' is not JSON: " + e.what());
  }
  if (!j.contains("config")) throw ConfigError("config: '" + path + "' has no config object");
  return config_from_json(j.at("config"));
}

int thread_cap() {
  const int available = omp_get_max_threads();
  const char* env = std::getenv("HYL_THREADS");
  if (env == nullptr || *env == '\0') return available;
  int n = 0;
  const std::string s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size() || n < 1) {
    throw ConfigError("HYL_THREADS must be a positive integer, got '" + s + "'");
  }
  return std::min(n, available);
}

}  // namespace hyl::cli
