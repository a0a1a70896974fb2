#include <benchmark/benchmark.h>

#include "lcdc/simulation.hpp"

namespace {

using namespace lcdc;

// Simulated milliseconds per wall second on the desk site.
void BM_DeskRun(benchmark::State& state) {
  ScenarioConfig c;
  c.workload.data_dir = LCDC_DATA_DIR;
  c.workload.load = static_cast<double>(state.range(0)) / 100.0;
  c.run.duration = SimTime::ms(2);
  const RunMode mode = state.range(1) ? RunMode::kGated : RunMode::kAlwaysOn;
  std::uint64_t events = 0;
  for (auto _ : state) events += run_scenario(c, mode).events;
  state.SetItemsProcessed(static_cast<std::int64_t>(events));
  state.SetLabel(mode == RunMode::kGated ? "gated" : "always-on");
}
BENCHMARK(BM_DeskRun)->Args({30, 1})->Args({30, 0})->Args({50, 1})->Unit(benchmark::kMillisecond);

void BM_GenerateWorkload(benchmark::State& state) {
  const Topology topo = build_site(SiteConfig::desk());
  const auto prof = load_profile("fb-web", LCDC_DATA_DIR);
  const double scale = interval_scale_for_load(prof, 0.3, 10e9);
  for (auto _ : state) {
    TrafficRng rng(1);
    benchmark::DoNotOptimize(generate(prof, topo, SimTime::ms(10), rng, scale));
  }
}
BENCHMARK(BM_GenerateWorkload)->Unit(benchmark::kMillisecond);

}  // namespace
