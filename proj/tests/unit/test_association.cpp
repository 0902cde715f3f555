#include <gtest/gtest.h>

#include "bevtrack/association.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace bevtrack;

namespace {

BevMeasurement meas(double x, double y, SensorId sensor, double confidence = 0.9, double var = 0.1) {
  BevMeasurement m;
  m.z = Vec2(x, y);
  m.r_indep = var * Mat2::Identity();
  m.r_pose = Mat2::Zero();
  m.confidence = confidence;
  m.sensor = sensor;
  return m;
}

std::set<std::set<std::size_t>> as_sets(const std::vector<RawCluster>& clusters) {
  std::set<std::set<std::size_t>> out;
  for (const auto& c : clusters) out.emplace(c.members.begin(), c.members.end());
  return out;
}

}  // namespace

TEST(PairwiseConsistency, CoincidentIsCertain) {
  const auto pc = pairwise_consistency(meas(1, 2, 0), meas(1, 2, 1));
  EXPECT_DOUBLE_EQ(pc.d2, 0.0);
  EXPECT_DOUBLE_EQ(pc.p_same, 1.0);
}

TEST(PairwiseConsistency, ClosedFormSurvival) {
  const auto pc = pairwise_consistency(meas(0, 0, 0, 0.9, 0.5), meas(3, 0, 1, 0.9, 0.5));
  EXPECT_NEAR(pc.d2, 9.0, 1e-12);
  EXPECT_NEAR(pc.p_same, std::exp(-4.5), 1e-12);
  EXPECT_NEAR(pc.p_same, 0.0111, 1e-4);
}

TEST(PairwiseConsistency, GateProbability) {
  EXPECT_NEAR(chi2_2_survival(9.21), 0.0100, 5e-4);
  EXPECT_NEAR(ClusteringConfig{}.tau_p(), 0.0100, 5e-4);
}

TEST(PairwiseConsistency, MonotoneInDistance) {
  double prev = 1.0;
  for (double x = 0.05; x < 3.0; x += 0.05) {
    const double p = pairwise_consistency(meas(0, 0, 0), meas(x, 0, 1)).p_same;
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(BuildGraph, EdgeRules) {
  const ClusteringConfig cfg;
  std::vector<BevMeasurement> coincident = {meas(0, 0, 0), meas(0, 0, 1)};
  EXPECT_EQ(build_graph(coincident, cfg.tau_p(), cfg.tau_euc).edges.size(), 1u);

  std::vector<BevMeasurement> far = {meas(0, 0, 0, 0.9, 100), meas(0.6, 0, 1, 0.9, 100)};
  EXPECT_TRUE(build_graph(far, cfg.tau_p(), cfg.tau_euc).edges.empty());

  std::vector<BevMeasurement> same_sensor = {meas(0, 0, 2), meas(0, 0, 2)};
  EXPECT_TRUE(build_graph(same_sensor, cfg.tau_p(), cfg.tau_euc).edges.empty());
}

TEST(ConnectedComponents, TransitivityAndSingletons) {
  AssociationGraph g;
  g.nodes = {0, 1, 2, 3};
  g.edges = {{0, 1, 0.5}, {1, 2, 0.5}};
  const auto cc = connected_components(g);
  ASSERT_EQ(cc.size(), 1u);
  EXPECT_EQ(cc[0].members, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(connected_components(AssociationGraph{}).empty());
}

TEST(SplitSensorUnique, Unchanged) {
  std::vector<BevMeasurement> m = {meas(0, 0, 1), meas(0, 0, 2)};
  const auto out = split_sensor_unique(RawCluster{{0, 1}}, m);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].members, (std::vector<std::size_t>{0, 1}));
}

TEST(SplitSensorUnique, LeftoverSingleSensorDropped) {
  std::vector<BevMeasurement> m = {meas(0, 0, 1, 0.9), meas(0, 0, 1, 0.5), meas(0, 0, 2, 0.9)};
  const auto out = split_sensor_unique(RawCluster{{0, 1, 2}}, m);
  EXPECT_EQ(as_sets(out), (std::set<std::set<std::size_t>>{{0, 2}}));
}

TEST(SplitSensorUnique, GreedyByConfidence) {
  std::vector<BevMeasurement> m = {meas(0, 0, 1, 0.9), meas(0, 0, 1, 0.8), meas(0, 0, 2, 0.9), meas(0, 0, 2, 0.7)};
  const auto out = split_sensor_unique(RawCluster{{0, 1, 2, 3}}, m);
  EXPECT_EQ(as_sets(out), (std::set<std::set<std::size_t>>{{0, 2}, {1, 3}}));
}

TEST(CascadedCluster, PassesAndThresholds) {
  const ClusteringConfig cfg;
  std::vector<BevMeasurement> high = {meas(0, 0, 0, 0.9), meas(0, 0, 1, 0.8)};
  auto out = cascaded_cluster(high, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].pass, ConfidencePass::High);

  std::vector<BevMeasurement> low = {meas(0, 0, 0, 0.3), meas(0, 0, 1, 0.3)};
  out = cascaded_cluster(low, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].pass, ConfidencePass::Low);

  std::vector<BevMeasurement> junk = {meas(0, 0, 0, 0.1), meas(0, 0, 1, 0.1)};
  EXPECT_TRUE(cascaded_cluster(junk, cfg).empty());
}

TEST(CascadedCluster, SingleSensorRelax) {
  ClusteringConfig cfg;
  std::vector<BevMeasurement> m = {meas(0, 0, 0, 0.9)};
  EXPECT_EQ(cascaded_cluster(m, cfg).size(), 1u);
  cfg.single_sensor_relax = false;
  EXPECT_TRUE(cascaded_cluster(m, cfg).empty());
}

class ClusterProperties : public ::testing::TestWithParam<int> {
 protected:
  std::vector<BevMeasurement> random_frame(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-3, 3), conf(0.15, 1.0), jitter(-0.2, 0.2);
    std::vector<BevMeasurement> out;
    for (int t = 0; t < 6; ++t) {
      const Vec2 c(pos(rng), pos(rng));
      for (SensorId s = 0; s < 4; ++s)
        out.push_back(meas(c.x() + jitter(rng), c.y() + jitter(rng), s, conf(rng), 0.05));
    }
    return out;
  }
};

TEST_P(ClusterProperties, SensorUniqueAndMultiSensor) {
  std::mt19937_64 rng(GetParam());
  const auto m = random_frame(rng);
  for (const auto& c : cascaded_cluster(m, ClusteringConfig{})) {
    std::set<SensorId> sensors;
    for (auto i : c.members) EXPECT_TRUE(sensors.insert(m[i].sensor).second);
    EXPECT_GE(sensors.size(), 2u);
  }
}

TEST_P(ClusterProperties, OrderInvariant) {
  std::mt19937_64 rng(GetParam());
  auto m = random_frame(rng);
  const ClusteringConfig cfg;
  auto key = [](const std::vector<BevMeasurement>& ms, const std::vector<RawCluster>& cs) {
    std::set<std::set<std::pair<double, double>>> out;
    for (const auto& c : cs) {
      std::set<std::pair<double, double>> s;
      for (auto i : c.members) s.emplace(ms[i].z.x(), ms[i].z.y());
      out.insert(s);
    }
    return out;
  };
  const auto before = key(m, cascaded_cluster(m, cfg));
  std::shuffle(m.begin(), m.end(), rng);
  EXPECT_EQ(key(m, cascaded_cluster(m, cfg)), before);
}

TEST_P(ClusterProperties, ShrinkingEuclideanGateNeverMerges) {
  std::mt19937_64 rng(GetParam());
  const auto m = random_frame(rng);
  const ClusteringConfig cfg;
  const auto wide = connected_components(build_graph(m, cfg.tau_p(), 0.8));
  const auto narrow = connected_components(build_graph(m, cfg.tau_p(), 0.3));
  std::vector<int> wide_label(m.size(), -1);
  for (std::size_t c = 0; c < wide.size(); ++c)
    for (auto i : wide[c].members) wide_label[i] = static_cast<int>(c);
  for (const auto& c : narrow)
    for (auto i : c.members) EXPECT_EQ(wide_label[i], wide_label[c.members.front()]);
}

INSTANTIATE_TEST_SUITE_P(Seeds, ClusterProperties, ::testing::Range(1, 21));
