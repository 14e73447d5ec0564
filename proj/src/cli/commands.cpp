#include "cli/commands.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>
#include <omp.h>

#include "hyl/bose.hpp"
#include "hyl/errors.hpp"
#include "hyl/estimators.hpp"
#include "hyl/phase_diagram.hpp"
#include "hyl/simulator.hpp"

namespace hyl::cli {

namespace {

Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

void note_failure(CommandOutput& out, const std::string& what) {
  if (out.failed++ == 0) out.first_error = what;
}

HylModel model_for(const RunConfig& cfg, double beta) {
  return HylModel(GasParams{cfg.d, beta, cfg.alpha}, cfg.a, cfg.b, cfg.kappa);
}

std::string mean_field_notice() { return "b=0: mean-field model, no supercritical branch (mu_t = mu_star = inf)"; }

// The closed form for mu_r describes the branch merger only where -b kappa lies
// on the left branch of phi; elsewhere the definition gives mu_t.
std::string mu_r_check(const TransitionPotentials& tp, double b, Kappa kappa) {
  if (!tp.mu_r || !tp.mu_r_closed_form) return "";
  if (-b * kappa.value() > tp.s_bar) return "closed-form-off-branch";
  const double tol = 1e-6 * std::max(1.0, std::abs(*tp.mu_r));
  return std::abs(*tp.mu_r - *tp.mu_r_closed_form) <= tol ? "PASS" : "FAIL";
}

}  // namespace

CommandOutput cmd_bose(const RunConfig& cfg) {
  CommandOutput out;
  out.table.columns = {"n", "u", "series", "expansion", "discrepancy", "value", "error"};
  for (double n : cfg.n_values) {
    for (double u : cfg.u_values) {
      std::vector<Cell> row{n, u, Cell(), Cell(), Cell(), Cell(), Cell()};
      std::optional<double> series;
      std::optional<double> expansion;
      std::string err;
      try {
        series = bose_g(n, u);
      } catch (const Error& e) {
        err = e.what();
      }
      if (u <= 0.0 && u != 0.0 && std::abs(u) < 2.0 * std::numbers::pi) {
        try {
          expansion = bose_g_expansion(n, u);
        } catch (const Error& e) {
          if (err.empty()) err = e.what();
        }
      }
      row[2] = opt(series);
      row[3] = opt(expansion);
      if (series && expansion) row[4] = std::abs(*series - *expansion);
      if (series) {
        row[5] = bose(n, u);
      } else {
        row[6] = err;
        note_failure(out, err);
      }
      out.table.rows.push_back(std::move(row));
    }
  }
  return out;
}

CommandOutput cmd_phase_diagram(const RunConfig& cfg) {
  PhaseDiagramSpec spec;
  spec.d = cfg.d;
  spec.alpha = cfg.alpha;
  spec.a = cfg.a;
  spec.b = cfg.b;
  spec.kappa = cfg.kappa;
  spec.betas = cfg.betas();
  spec.mus = cfg.mus();
  const auto rows = phase_diagram(spec, cfg.threads);

  CommandOutput out;
  out.table.columns = {"beta",          "mu",     "label",      "regime",   "mu_t",  "mu_c",  "mu_star",
                       "mu_star_kappa", "mu_r",   "mu_hat_star_kappa", "beta_t", "continuous", "pressure",
                       "rho",           "delta",  "error"};
  if (cfg.b == 0.0) out.table.notices.push_back(mean_field_notice());
  for (const auto& r : rows) {
    std::vector<Cell> row{r.beta, r.mu};
    if (!r.error.empty()) {
      row.resize(out.table.columns.size());
      row.back() = r.error;
      note_failure(out, r.error);
      out.table.rows.push_back(std::move(row));
      continue;
    }
    const bool coex = r.regime == Regime::coexistence;
    row.insert(row.end(), {r.label, std::string(to_string(r.regime)), r.tp.mu_t, r.tp.mu_c, r.tp.mu_star,
                           opt(r.tp.mu_star_kappa), opt(r.tp.mu_r), opt(r.tp.mu_hat_star_kappa), opt(r.beta_t),
                           std::string(r.continuous ? "true" : "false"), r.pressure,
                           r.rho ? Cell(*r.rho) : Cell(std::string(coex ? "coexistence" : "")),
                           r.delta ? Cell(*r.delta) : Cell(std::string("coexistence")), Cell()});
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

CommandOutput cmd_transitions(const RunConfig& cfg) {
  CommandOutput out;
  out.table.columns = {"beta",       "mu_t",          "mu_t_closed_d2",    "mu_t_closed_diff", "mu_c",
                       "beta_t",     "continuous",    "mu_star",           "mu_star_residual", "mu_r",
                       "mu_r_closed", "mu_r_check",   "mu_star_kappa",     "mu_hat_star_kappa", "s_bar",
                       "error"};
  if (cfg.b == 0.0) {
    out.table.notices.push_back(mean_field_notice());
    std::cerr << "notice: " << mean_field_notice() << "\n";
  }
  for (double beta : cfg.betas()) {
    std::vector<Cell> row(out.table.columns.size());
    row[0] = beta;
    try {
      const HylModel m = model_for(cfg, beta);
      const auto& tp = m.transitions();
      row[1] = tp.mu_t;
      if (cfg.d == 2 && cfg.b > 0.0) {
        const double closed = mu_t_closed_form_d2(beta, cfg.a, cfg.b);
        row[2] = closed;
        row[3] = std::abs(closed - tp.mu_t);
      }
      row[4] = tp.mu_c;
      if (cfg.d >= 5 && cfg.b > 0.0) row[5] = beta_t(cfg.d, cfg.a, cfg.b);
      row[6] = std::string(cfg.b > 0.0 && tp.mu_t == tp.mu_c ? "true" : "false");
      row[7] = tp.mu_star;
      if (std::isfinite(tp.mu_star)) row[8] = m.branch_gap(tp.mu_star);
      row[9] = opt(tp.mu_r);
      row[10] = opt(tp.mu_r_closed_form);
      row[11] = mu_r_check(tp, cfg.b, cfg.kappa);
      row[12] = opt(tp.mu_star_kappa);
      row[13] = opt(tp.mu_hat_star_kappa);
      if (cfg.b > 0.0) row[14] = tp.s_bar;
    } catch (const std::exception& e) {
      row.back() = std::string(e.what());
      note_failure(out, e.what());
    }
    out.table.rows.push_back(std::move(row));
  }
  return out;
}

CommandOutput cmd_pressure(const RunConfig& cfg) {
  CommandOutput out;
  out.table.columns = {"beta", "mu", "regime", "pressure", "p_sub", "p_sup", "p_pinned", "x", "y", "rho", "delta",
                       "error"};
  if (cfg.b == 0.0) out.table.notices.push_back(mean_field_notice());
  const auto betas = cfg.betas();
  const auto mus = cfg.mus();
  const long nb = static_cast<long>(betas.size());
  const long nm = static_cast<long>(mus.size());
  std::vector<std::vector<Cell>> rows(static_cast<std::size_t>(nb * nm));
  std::vector<std::string> errors(rows.size());

#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads > 0 ? cfg.threads : omp_get_max_threads())
  for (long idx = 0; idx < nb * nm; ++idx) {
    const double beta = betas[static_cast<std::size_t>(idx / nm)];
    const double mu = mus[static_cast<std::size_t>(idx % nm)];
    auto& row = rows[static_cast<std::size_t>(idx)];
    row.assign(12, Cell());
    row[0] = beta;
    row[1] = mu;
    try {
      const HylModel m = model_for(cfg, beta);
      const ZeroSet zs = m.zero_set(mu);
      row[2] = std::string(to_string(zs.regime));
      row[3] = m.pressure(mu);
      row[4] = m.pressure_sub(mu);
      if (cfg.b > 0.0 && mu >= m.transitions().mu_t) {
        try {
          row[5] = m.pressure_sup(mu);
        } catch (const Error&) {
        }
      }
      if (cfg.kappa.is_finite_positive()) row[6] = m.pressure_pinned(mu);
      if (zs.points.size() == 1) {
        row[7] = zs.points[0].x;
        row[8] = zs.points[0].y;
      } else {
        row[7] = std::string("coexistence");
        row[8] = std::string("coexistence");
      }
      try {
        row[9] = m.condensate_rho(mu);
      } catch (const AmbiguousValue&) {
        row[9] = std::string("coexistence");
      }
      try {
        row[10] = m.condensate_delta(mu);
      } catch (const AmbiguousValue&) {
        row[10] = std::string("coexistence");
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(idx)] = e.what();
      row[11] = std::string(e.what());
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) note_failure(out, e);
  }
  out.table.rows = std::move(rows);
  return out;
}

namespace {

struct SimRow {
  std::vector<Cell> cells;
  std::string error;
};

// Zero-tilt Poisson check of N_1, thinned so consecutive records are nearly independent.
double reference_gof(const GasParams& gas, const HylParams& hyl, const sim::VolumeSchedule& sched,
                     std::uint64_t seed, long samples) {
  double total = 0.0;
  for (long k = 1; k <= sched.k_max; ++k) total += cycle_weight(gas, k).tilted;
  const double r1 = cycle_weight(gas, 1).tilted;
  const long thin = static_cast<long>(std::ceil(10.0 * total / (0.8 * r1)));
  sim::ChainOptions co;
  co.tilt = 0.0;
  sim::MetropolisChain chain(gas, hyl, sched, co, seed);
  std::vector<long> n1;
  n1.reserve(static_cast<std::size_t>(samples));
  sim::mcmc_run(chain, (samples + 10) * thin, 10 * thin, thin, [&](const sim::MetropolisChain& c) {
    if (static_cast<long>(n1.size()) < samples) n1.push_back(c.state().count(1));
  });
  return sim::poisson_gof(n1, sched.volume * r1).p_value;
}

void fill_targets(std::vector<Cell>& cells, std::size_t t, const GasParams& gas, const HylParams& hyl) {
  const HylModel model(gas, hyl);
  const ZeroSet zs = model.zero_set(hyl.mu);
  cells[t] = std::string(to_string(zs.regime));
  if (zs.points.size() == 1) {
    cells[t + 1] = zs.points[0].x;
    cells[t + 2] = zs.points[0].y;
  } else {
    cells[t + 1] = std::string("coexistence");
    cells[t + 2] = std::string("coexistence");
  }
  cells[t + 3] = model.pressure(hyl.mu);
  try {
    cells[t + 4] = model.condensate_rho(hyl.mu);
  } catch (const AmbiguousValue&) {
    cells[t + 4] = std::string("coexistence");
  }
}

}  // namespace

CommandOutput cmd_simulate(const RunConfig& cfg) {
  CommandOutput out;
  auto& cols = out.table.columns;
  cols = {"beta",     "mu",      "volume",   "m_cutoff", "k_max",   "seed",   "steps",     "burn_in",
          "thin",     "acceptance", "m1",    "m1_se",    "m1_tau",  "m2",     "m2_se",     "m2_tau",
          "weight",   "weight_se", "pressure_mc", "pressure_mc_se"};
  for (long k : cfg.dk) {
    cols.push_back("dk_" + std::to_string(k));
    cols.push_back("dk_" + std::to_string(k) + "_se");
  }
  const std::size_t tail_at = cols.size();
  for (const char* c : {"ref_gof_p", "ref_check", "target_regime", "target_x", "target_y", "target_pressure",
                        "target_rho", "exact_m1", "exact_m2", "exact_weight", "exact_pressure", "exact_neglected",
                        "exact_check", "error"}) {
    cols.emplace_back(c);
  }
  if (cfg.b == 0.0 && cfg.a > 0.0) out.table.notices.push_back(mean_field_notice());
  if (!(cfg.b < cfg.a)) out.table.notices.push_back("a = b: no variational target, target columns left empty");
  if (cfg.exact) out.table.notices.push_back("chains restricted to N_k <= count_cap to match the enumeration");

  struct Job {
    double beta, mu, volume;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double beta : cfg.betas()) {
    for (double mu : cfg.mus()) {
      for (double v : cfg.volumes) {
        jobs.push_back({beta, mu, v, cfg.seed + 1000 * static_cast<std::uint64_t>(jobs.size())});
      }
    }
  }
  std::vector<SimRow> rows(jobs.size());
  const long nj = static_cast<long>(jobs.size());

#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads > 0 ? cfg.threads : omp_get_max_threads())
  for (long j = 0; j < nj; ++j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    auto& cells = rows[static_cast<std::size_t>(j)].cells;
    cells.assign(cols.size(), Cell());
    cells[0] = job.beta;
    cells[1] = job.mu;
    cells[2] = job.volume;
    cells[5] = static_cast<long>(job.seed);
    cells[6] = cfg.steps;
    cells[7] = cfg.burn_in;
    cells[8] = cfg.thin;
    try {
      const GasParams gas{cfg.d, job.beta, cfg.alpha};
      const HylParams hyl{cfg.a, cfg.b, job.mu, cfg.kappa};
      sim::SchedulePolicy pol;
      pol.eps_tail = cfg.eps_tail;
      pol.k_max = cfg.k_max;
      pol.m_cutoff = cfg.m_cutoff;
      const sim::VolumeSchedule sched = sim::make_schedule(gas, hyl, job.volume, pol);
      cells[3] = sched.m_cutoff;
      cells[4] = sched.k_max;
      for (long k : cfg.dk) {
        if (k >= sched.k_max) {
          throw Error(ErrorKind::cutoff, "dk cutoff " + std::to_string(k) + " must be below k_max " +
                                             std::to_string(sched.k_max));
        }
      }

      sim::ChainOptions co;
      if (cfg.exact) co.count_cap = cfg.count_cap;
      const long kept = (cfg.steps - cfg.burn_in) / cfg.thin;
      sim::MetropolisChain chain(gas, hyl, sched, co, job.seed);
      sim::StreamingBatchMeans m1(kept), m2(kept);
      std::vector<sim::StreamingBatchMeans> dks(cfg.dk.size(), sim::StreamingBatchMeans(kept));
      sim::mcmc_run(chain, cfg.steps, cfg.burn_in, cfg.thin, [&](const sim::MetropolisChain& c) {
        m1.add(c.m1());
        m2.add(c.m2());
        for (std::size_t i = 0; i < dks.size(); ++i) dks[i].add(c.state().density_above(cfg.dk[i]));
      });
      const auto e1 = m1.finish(job.seed);
      const auto e2 = m2.finish(job.seed);
      cells[9] = static_cast<double>(chain.accepted()) / static_cast<double>(chain.proposed());
      cells[10] = e1.mean;
      cells[11] = e1.std_error;
      cells[12] = e1.tau_int;
      cells[13] = e2.mean;
      cells[14] = e2.std_error;
      cells[15] = e2.tau_int;

      sim::ChainOptions zero = co;
      zero.tilt = 0.0;
      const auto ref = sim::run_summary(gas, hyl, sched, cfg.steps, cfg.burn_in, job.seed + 1, zero, cfg.thin);
      cells[16] = ref.weight.mean;
      cells[17] = ref.weight.std_error;

      if (cfg.ti_nodes > 0) {
        sim::PressureOptions po;
        po.nodes = cfg.ti_nodes;
        po.n_steps = cfg.steps;
        po.burn_in = cfg.burn_in;
        po.thin = cfg.thin;
        po.threads = 1;
        po.chain = co;
        const auto p = sim::pressure_ti(gas, hyl, sched, job.seed + 2, po);
        cells[18] = p.mean;
        cells[19] = p.std_error;
      }
      for (std::size_t i = 0; i < dks.size(); ++i) {
        const auto e = dks[i].finish(job.seed);
        cells[20 + 2 * i] = e.mean;
        cells[21 + 2 * i] = e.std_error;
      }

      std::size_t t = tail_at;
      if (!cfg.exact) {
        const double p = reference_gof(gas, hyl, sched, job.seed + 3, 100'000);
        cells[t] = p;
        cells[t + 1] = std::string(p > 0.01 ? "PASS" : "FAIL");
      }
      t += 2;

      // a = b has no variational limit to compare with
      if (cfg.b < cfg.a) fill_targets(cells, t, gas, hyl);
      t += 5;

      if (cfg.exact) {
        const auto ex = sim::exact_pressure_finite(gas, hyl, sched, cfg.count_cap);
        cells[t] = ex.m1;
        cells[t + 1] = ex.m2;
        cells[t + 2] = ex.mean_weight;
        cells[t + 3] = ex.pressure;
        cells[t + 4] = ex.neglected_mass;
        const auto within = [](double exact, const sim::SimEstimate& e) {
          return std::abs(e.mean - exact) <= 3.0 * e.std_error;
        };
        const bool ok = within(ex.m1, e1) && within(ex.m2, e2) && within(ex.mean_weight, ref.weight);
        cells[t + 5] = std::string(ok ? "PASS" : "FAIL");
      }
    } catch (const std::exception& e) {
      rows[static_cast<std::size_t>(j)].error = e.what();
      cells.back() = std::string(e.what());
    }
  }
  for (auto& r : rows) {
    if (!r.error.empty()) note_failure(out, r.error);
    out.table.rows.push_back(std::move(r.cells));
  }
  return out;
}

CommandOutput dispatch(const RunConfig& cfg) {
  if (cfg.command == "bose") return cmd_bose(cfg);
  if (cfg.command == "phase-diagram") return cmd_phase_diagram(cfg);
  if (cfg.command == "transitions") return cmd_transitions(cfg);
  if (cfg.command == "pressure") return cmd_pressure(cfg);
  if (cfg.command == "simulate") return cmd_simulate(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

int exit_code_for(const CommandOutput& out) {
  if (out.failed == 0) return kExitOk;
  return out.failed < static_cast<int>(out.table.rows.size()) ? kExitPartial : kExitNumeric;
}

RunConfig parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"Cycle-count HYL model: special functions, phase diagrams and simulation", "hyl"};
  app.require_subcommand(0, 1);

  RunConfig cfg;
  std::string beta_grid, mu_grid, kappa = "0", config_path;
  std::optional<double> beta, mu;
  std::optional<long> k_max, m_cutoff;

  auto common = [&](CLI::App* s) {
    s->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--out", cfg.out, "output path (default stdout)");
    s->add_option("--precision", cfg.precision, "significant digits, 6..17");
    s->add_option("--config", config_path, "re-run the config stored in a JSON output file");
  };
  auto model = [&](CLI::App* s) {
    s->add_option("--d", cfg.d, "spatial dimension");
    s->add_option("--beta", beta, "inverse temperature");
    s->add_option("--beta-grid", beta_grid, "lo:hi:n");
    s->add_option("--alpha", cfg.alpha, "reference chemical potential (< 0)");
    s->add_option("--a", cfg.a, "mean-field coupling a > 0");
    s->add_option("--b", cfg.b, "counter-term coupling 0 <= b < a");
    s->add_option("--kappa", kappa, "cutoff scaling: 0, positive, or inf");
  };
  auto chem = [&](CLI::App* s) {
    s->add_option("--mu", mu, "chemical potential");
    s->add_option("--mu-grid", mu_grid, "lo:hi:n");
  };

  // `hyl --config FILE` re-runs a stored configuration without naming the command
  common(&app);

  auto* bose_cmd = app.add_subcommand("bose", "g(n,u) by series and expansion");
  bose_cmd->add_option("--n", cfg.n_values, "orders")->delimiter(',');
  bose_cmd->add_option("--u", cfg.u_values, "arguments u <= 0")->delimiter(',');
  common(bose_cmd);

  auto* pd_cmd = app.add_subcommand("phase-diagram", "regime labels and transition potentials on a (beta, mu) grid");
  model(pd_cmd);
  chem(pd_cmd);
  common(pd_cmd);

  auto* tr_cmd = app.add_subcommand("transitions", "transition chemical potentials per beta");
  model(tr_cmd);
  common(tr_cmd);

  auto* pr_cmd = app.add_subcommand("pressure", "variational pressure and its branch formulas");
  model(pr_cmd);
  chem(pr_cmd);
  common(pr_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Metropolis estimates against the variational limit");
  model(sim_cmd);
  chem(sim_cmd);
  common(sim_cmd);
  sim_cmd->add_option("--volumes", cfg.volumes, "v1,v2,...")->delimiter(',');
  sim_cmd->add_option("--seed", cfg.seed, "base seed");
  sim_cmd->add_option("--steps", cfg.steps, "chain length including burn-in");
  sim_cmd->add_option("--burn-in", cfg.burn_in, "discarded initial steps");
  sim_cmd->add_option("--thin", cfg.thin, "record every thin-th step");
  sim_cmd->add_option("--k-max", k_max, "largest cycle length (default: tail bound)");
  sim_cmd->add_option("--m-cutoff", m_cutoff, "counter-term cutoff (default: kappa rule)");
  sim_cmd->add_option("--eps-tail", cfg.eps_tail, "certified reference tail bound");
  sim_cmd->add_flag("--exact", cfg.exact, "compare against exact enumeration (tiny volumes)");
  sim_cmd->add_option("--count-cap", cfg.count_cap, "per-length count cap used with --exact");
  sim_cmd->add_option("--ti-nodes", cfg.ti_nodes, "Gauss nodes for the pressure estimate (0 disables)");
  sim_cmd->add_option("--dk", cfg.dk, "cutoffs K for D_K")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return RunConfig{};
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  CLI::App* chosen = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
  if (chosen == &app && config_path.empty()) throw ConfigError("a subcommand or --config is required");
  if (!config_path.empty()) {
    RunConfig loaded = load_config_file(config_path);
    if (chosen != &app && loaded.command != chosen->get_name()) {
      throw ConfigError("config: file holds a '" + loaded.command + "' run, not '" + chosen->get_name() + "'");
    }
    if (chosen->count("--format")) loaded.format = cfg.format;
    if (chosen->count("--precision")) loaded.precision = cfg.precision;
    loaded.out = cfg.out;
    cfg = loaded;
  } else {
    cfg.command = chosen->get_name();
    cfg.beta = beta;
    cfg.mu = mu;
    cfg.k_max = k_max;
    cfg.m_cutoff = m_cutoff;
    if (!beta_grid.empty()) cfg.beta_grid = parse_grid(beta_grid);
    if (!mu_grid.empty()) cfg.mu_grid = parse_grid(mu_grid);
    cfg.kappa = parse_kappa(kappa);
  }
  cfg.threads = thread_cap();
  cfg.validate();
  return cfg;
}

int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  try {
    cfg = parse_command_line(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "hyl: config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (cfg.command.empty()) return kExitOk;  // help

  try {
    const CommandOutput out = dispatch(cfg);
    emit(out.table, cfg);
    const int code = exit_code_for(out);
    if (code != kExitOk) {
      std::cerr << "hyl: " << out.failed << " of " << out.table.rows.size() << " rows failed; first: "
                << out.first_error << "\n";
    }
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "hyl: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "hyl: numeric error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace hyl::cli
