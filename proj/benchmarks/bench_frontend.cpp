#include <benchmark/benchmark.h>

#include "bevtrack/association.hpp"
#include "bevtrack/config.hpp"
#include "bevtrack/fusion.hpp"

#include <random>

namespace {

using namespace bevtrack;

std::vector<BevMeasurement> crowd(int targets, int sensors) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-10.0, 10.0);
  std::normal_distribution<double> jitter(0.0, 0.15);
  std::vector<BevMeasurement> out;
  for (int t = 0; t < targets; ++t) {
    const Vec2 p(pos(rng), pos(rng));
    for (int s = 0; s < sensors; ++s) {
      BevMeasurement m;
      m.z = p + Vec2(jitter(rng), jitter(rng));
      m.r_indep = 0.03 * Mat2::Identity();
      m.r_pose = 0.02 * Mat2::Identity();
      m.confidence = 0.8;
      m.sensor = s;
      out.push_back(m);
    }
  }
  return out;
}

void BM_CascadedCluster(benchmark::State& state) {
  const auto meas = crowd(static_cast<int>(state.range(0)), 7);
  const ClusteringConfig cfg = TrackerConfig::wildtrack().clustering;
  for (auto _ : state) benchmark::DoNotOptimize(cascaded_cluster(meas, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(meas.size()));
}
BENCHMARK(BM_CascadedCluster)->Arg(10)->Arg(20)->Arg(40);

void BM_FuseCluster(benchmark::State& state) {
  const auto meas = crowd(1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fuse_cluster(meas));
}
BENCHMARK(BM_FuseCluster)->DenseRange(2, 7);

}  // namespace
