#include <benchmark/benchmark.h>

#include "bevtrack/pipeline.hpp"

namespace {

using namespace bevtrack;

void BM_TrackStressed(benchmark::State& state) {
  ScenarioSpec spec = load_scenario_spec(std::string(BEVTRACK_SOURCE_DIR) + "/scenarios/stressed.json");
  spec.frames = static_cast<int>(state.range(0));
  const Scenario sc = generate_scenario(spec, 1);
  const auto recs = render_all(sc);
  const TrackerConfig cfg = TrackerConfig::wildtrack();
  for (auto _ : state) benchmark::DoNotOptimize(track_records(recs, sc.calibration, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.SetLabel("items = frames");
}
BENCHMARK(BM_TrackStressed)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
