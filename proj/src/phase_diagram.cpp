#include "hyl/phase_diagram.hpp"

#include <memory>

#include <omp.h>

#include "hyl/errors.hpp"

namespace hyl {

namespace {

void validate(const PhaseDiagramSpec& spec) {
  if (spec.betas.empty() || spec.mus.empty()) {
    throw Error(ErrorKind::domain, "phase_diagram: grids must be nonempty");
  }
  for (std::size_t i = 1; i < spec.betas.size(); ++i) {
    if (!(spec.betas[i] > spec.betas[i - 1])) throw Error(ErrorKind::domain, "phase_diagram: beta grid not increasing");
  }
  for (std::size_t i = 1; i < spec.mus.size(); ++i) {
    if (!(spec.mus[i] > spec.mus[i - 1])) throw Error(ErrorKind::domain, "phase_diagram: mu grid not increasing");
  }
}

struct ModelSlot {
  std::unique_ptr<HylModel> model;
  std::string error;
};

ModelSlot build_model(const PhaseDiagramSpec& spec, double beta) {
  ModelSlot slot;
  try {
    slot.model = std::make_unique<HylModel>(GasParams{spec.d, beta, spec.alpha}, spec.a, spec.b, spec.kappa);
  } catch (const std::exception& e) {
    slot.error = e.what();
  }
  return slot;
}

PhaseDiagramRow row_for(const ModelSlot& slot, double beta, double mu) {
  if (!slot.model) {
    PhaseDiagramRow row;
    row.beta = beta;
    row.mu = mu;
    row.error = slot.error;
    return row;
  }
  return phase_row(*slot.model, mu);
}

}  // namespace

PhaseDiagramRow phase_row(const HylModel& model, double mu) {
  PhaseDiagramRow row;
  row.beta = model.gas().beta;
  row.mu = mu;
  row.tp = model.transitions();
  row.continuous = model.b() > 0.0 && row.tp.mu_t == row.tp.mu_c;
  if (model.gas().d >= 5 && model.b() > 0.0) row.beta_t = beta_t(model.gas().d, model.a(), model.b());
  try {
    const ZeroSet zs = model.zero_set(mu);
    row.regime = zs.regime;
    row.pressure = model.pressure(mu);
    try {
      row.rho = model.condensate_rho(mu);
    } catch (const AmbiguousValue&) {
    }
    try {
      row.delta = model.condensate_delta(mu);
    } catch (const AmbiguousValue&) {
    }
    if (zs.regime == Regime::coexistence) {
      row.label = "coexistence";
    } else {
      const bool condensed = (row.rho && *row.rho > 0.0) || (row.delta && *row.delta > 0.0);
      row.label = condensed ? "B" : "A";
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<PhaseDiagramRow> phase_diagram_serial(const PhaseDiagramSpec& spec) {
  validate(spec);
  const std::size_t nb = spec.betas.size();
  const std::size_t nm = spec.mus.size();
  std::vector<ModelSlot> models(nb);
  for (std::size_t i = 0; i < nb; ++i) models[i] = build_model(spec, spec.betas[i]);

  std::vector<PhaseDiagramRow> rows(nb * nm);
  for (std::size_t idx = 0; idx < nb * nm; ++idx) {
    const std::size_t i = idx / nm;
    rows[idx] = row_for(models[i], spec.betas[i], spec.mus[idx % nm]);
  }
  return rows;
}

std::vector<PhaseDiagramRow> phase_diagram(const PhaseDiagramSpec& spec, int threads) {
  validate(spec);
  const long nb = static_cast<long>(spec.betas.size());
  const long nm = static_cast<long>(spec.mus.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();

  std::vector<ModelSlot> models(nb);
#pragma omp parallel for schedule(dynamic) num_threads(nt)
  for (long i = 0; i < nb; ++i) models[i] = build_model(spec, spec.betas[i]);

  // Rows near a transition cost more root solves; dynamic scheduling balances that.
  std::vector<PhaseDiagramRow> rows(nb * nm);
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
  for (long idx = 0; idx < nb * nm; ++idx) {
    const long i = idx / nm;
    rows[idx] = row_for(models[i], spec.betas[i], spec.mus[idx % nm]);
  }
  return rows;
}

}  // namespace hyl
