// Serial reference versus OpenMP kernels. Thread count is the benchmark
// argument; 0 means the serial reference.

#include <benchmark/benchmark.h>

#include "hyl/phase_diagram.hpp"
#include "hyl/simulator.hpp"

namespace {

hyl::PhaseDiagramSpec diagram_spec() {
  hyl::PhaseDiagramSpec spec;
  spec.kappa = hyl::Kappa::finite(0.1);
  for (int i = 0; i < 8; ++i) spec.betas.push_back(0.5 + 0.25 * i);
  for (int i = 0; i < 40; ++i) spec.mus.push_back(-0.2 + 0.01 * i);
  return spec;
}

void BM_PhaseDiagram(benchmark::State& state) {
  const auto spec = diagram_spec();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rows = threads == 0 ? hyl::phase_diagram_serial(spec) : hyl::phase_diagram(spec, threads);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(spec.betas.size() * spec.mus.size()));
}
BENCHMARK(BM_PhaseDiagram)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ExactEnumeration(benchmark::State& state) {
  const hyl::GasParams gas{3, 0.3, -0.05};
  const hyl::HylParams hyl{1.0, 0.5, 0.5, hyl::Kappa::zero()};
  const hyl::sim::VolumeSchedule sched{10.0, 2, hyl::Kappa::zero(), 8, 1.0};
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto r = threads == 0 ? hyl::sim::exact_pressure_finite(gas, hyl, sched, 4)
                                : hyl::sim::exact_pressure_finite_parallel(gas, hyl, sched, 4, threads);
    benchmark::DoNotOptimize(r.log_sum);
  }
  state.SetItemsProcessed(state.iterations() * 390625L);
}
BENCHMARK(BM_ExactEnumeration)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
