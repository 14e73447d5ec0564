#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyl/variational.hpp"

namespace hyl {

/// One (beta, mu) grid point of the phase diagram.
struct PhaseDiagramRow {
  double beta = 0.0;
  double mu = 0.0;
  /// "A" (no condensate), "B" (condensate), or "coexistence" inside the
  /// transition band.
  std::string label;
  Regime regime = Regime::subcritical;
  TransitionPotentials tp;
  bool continuous = false;         // mu_t == mu_c
  std::optional<double> beta_t;    // d >= 5, b > 0
  double pressure = 0.0;
  std::optional<double> rho;       // empty at a coexistence point
  std::optional<double> delta;     // empty at mu_hat_star_kappa
  std::string error;               // empty when the row is valid
};

struct PhaseDiagramSpec {
  int d = 3;
  double alpha = -1.0;
  double a = 1.0;
  double b = 0.5;
  Kappa kappa = Kappa::zero();
  std::vector<double> betas;
  std::vector<double> mus;
};

/// Row for a single grid point of an already constructed model.
PhaseDiagramRow phase_row(const HylModel& model, double mu);

/// Rows ordered by (beta, mu). Failures are recorded per row, never thrown.
std::vector<PhaseDiagramRow> phase_diagram_serial(const PhaseDiagramSpec& spec);

/// OpenMP version of phase_diagram_serial with identical output. `threads` <= 0
/// uses the runtime default.
std::vector<PhaseDiagramRow> phase_diagram(const PhaseDiagramSpec& spec, int threads = 0);

}  // namespace hyl
