#include <doctest.h>

#include <cmath>
#include <cstring>

#include "hyl/errors.hpp"
#include "hyl/phase_diagram.hpp"

using namespace hyl;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

bool same_bits(const std::optional<double>& x, const std::optional<double>& y) {
  if (x.has_value() != y.has_value()) return false;
  return !x || same_bits(*x, *y);
}

}  // namespace

TEST_CASE("parallel rows are bit-identical to the serial reference") {
  for (double kappa : {0.0, 0.1, kInfinity}) {
    PhaseDiagramSpec spec;
    spec.kappa = Kappa::from_value(kappa);
    spec.betas = linspace(0.5, 2.0, 5);
    spec.mus = linspace(-0.2, 0.3, 23);
    const auto ref = phase_diagram_serial(spec);
    for (int threads : {1, 2, 4}) {
      const auto par = phase_diagram(spec, threads);
      REQUIRE(par.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(same_bits(par[i].pressure, ref[i].pressure));
        CHECK(same_bits(par[i].rho, ref[i].rho));
        CHECK(same_bits(par[i].delta, ref[i].delta));
        CHECK(par[i].label == ref[i].label);
        CHECK(par[i].error == ref[i].error);
      }
    }
  }
}

TEST_CASE("rows are ordered by beta then mu") {
  PhaseDiagramSpec spec;
  spec.betas = {0.5, 1.0};
  spec.mus = {0.0, 0.1, 0.2};
  const auto rows = phase_diagram(spec);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].beta == 0.5);
  CHECK(rows[2].mu == 0.2);
  CHECK(rows[3].beta == 1.0);
  CHECK(rows[3].mu == 0.0);
}

TEST_CASE("bad grids are rejected") {
  PhaseDiagramSpec spec;
  spec.betas = {1.0, 0.5};
  spec.mus = {0.0};
  CHECK_THROWS_AS(phase_diagram(spec), Error);
  spec.betas = {};
  CHECK_THROWS_AS(phase_diagram_serial(spec), Error);
}

TEST_CASE("d = 5 transition becomes continuous at beta_t") {
  const double bt = beta_t(5, 1.0, 0.5);
  PhaseDiagramSpec spec;
  spec.d = 5;
  spec.betas = linspace(0.5 * bt, 1.5 * bt, 101);
  spec.mus = {0.0};
  const auto rows = phase_diagram(spec);
  double first_continuous = kInfinity;
  for (const auto& r : rows) {
    REQUIRE(r.beta_t);
    CHECK(*r.beta_t == bt);
    if (r.continuous) first_continuous = std::min(first_continuous, r.beta);
    CHECK(r.continuous == (r.beta >= bt));
  }
  const double step = spec.betas[1] - spec.betas[0];
  CHECK(std::abs(first_continuous - bt) <= step);
}

TEST_CASE("d = 3 labels switch inside the transition band") {
  PhaseDiagramSpec spec;
  spec.betas = {1.0};
  spec.mus = linspace(0.0, 0.1, 201);
  const auto rows = phase_diagram(spec);
  const auto& tp = rows[0].tp;
  CHECK(tp.mu_t < tp.mu_star);
  CHECK(tp.mu_star < tp.mu_c);
  for (const auto& r : rows) {
    CAPTURE(r.mu);
    REQUIRE(r.error.empty());
    if (r.mu < tp.mu_star - HylModel::kTransitionBand) CHECK(r.label == "A");
    if (r.mu > tp.mu_star + HylModel::kTransitionBand) CHECK(r.label == "B");
    if (r.label == "B") CHECK(*r.rho > 0.0);
    if (r.label == "A") CHECK(*r.rho == 0.0);
  }
}

TEST_CASE("coexistence row leaves rho undefined") {
  PhaseDiagramSpec spec;
  spec.betas = {1.0};
  spec.mus = {0.0};
  const double ms = phase_diagram(spec)[0].tp.mu_star;
  spec.mus = {ms};
  const auto row = phase_diagram(spec)[0];
  CHECK(row.label == "coexistence");
  CHECK_FALSE(row.rho);
}

TEST_CASE("d = 1 has no critical density") {
  PhaseDiagramSpec spec;
  spec.d = 1;
  spec.betas = {1.0};
  spec.mus = {0.5, 2.0};
  for (const auto& r : phase_diagram(spec)) {
    CHECK(std::isinf(r.tp.mu_c));
    CHECK_FALSE(r.beta_t);
    CHECK_FALSE(r.continuous);
  }
}

TEST_CASE("kappa = infinity: condensate only through Delta") {
  PhaseDiagramSpec spec;
  spec.kappa = Kappa::infinite();
  spec.betas = {1.0};
  spec.mus = linspace(0.0, 0.2, 21);
  for (const auto& r : phase_diagram(spec)) {
    CHECK(*r.rho == 0.0);
    CHECK((r.label == "B") == (*r.delta > 0.0));
  }
}
