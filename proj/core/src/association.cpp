#include "bevtrack/association.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace bevtrack {

PairConsistency pairwise_consistency(const BevMeasurement& a, const BevMeasurement& b) {
  const Mat2 s = a.total_covariance() + b.total_covariance();
  const Eigen::LDLT<Mat2> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || std::abs(s.determinant()) < 1e-300)
    throw Error(ErrorKind::Numerical, "summed measurement covariance is singular");
  const Vec2 diff = a.z - b.z;
  const double d2 = diff.dot(ldlt.solve(diff));
  return {d2, chi2_2_survival(d2)};
}

AssociationGraph build_graph(std::span<const BevMeasurement> measurements, double tau_p, double tau_euc) {
  std::vector<std::size_t> nodes(measurements.size());
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  return build_graph(measurements, nodes, tau_p, tau_euc);
}

AssociationGraph build_graph(std::span<const BevMeasurement> measurements, std::span<const std::size_t> nodes,
                             double tau_p, double tau_euc) {
  AssociationGraph g;
  g.nodes.assign(nodes.begin(), nodes.end());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto& ma = measurements[nodes[a]];
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const auto& mb = measurements[nodes[b]];
      if (ma.sensor == mb.sensor) continue;
      if ((ma.z - mb.z).norm() > tau_euc) continue;
      const PairConsistency pc = pairwise_consistency(ma, mb);
      if (pc.p_same > tau_p) g.edges.push_back({nodes[a], nodes[b], pc.p_same});
    }
  }
  return g;
}

std::vector<RawCluster> connected_components(const AssociationGraph& g, std::size_t min_size) {
  // Union-find over positions in g.nodes.
  std::vector<std::size_t> parent(g.nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto position = [&](std::size_t node) {
    return static_cast<std::size_t>(std::find(g.nodes.begin(), g.nodes.end(), node) - g.nodes.begin());
  };
  for (const auto& e : g.edges) {
    const std::size_t a = find(position(e.i));
    const std::size_t b = find(position(e.j));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::vector<std::vector<std::size_t>> groups(g.nodes.size());
  for (std::size_t k = 0; k < g.nodes.size(); ++k) groups[find(k)].push_back(g.nodes[k]);

  std::vector<RawCluster> out;
  for (auto& members : groups) {
    if (members.empty() || members.size() < min_size) continue;
    std::sort(members.begin(), members.end());
    out.push_back({std::move(members), ConfidencePass::High});
  }
  std::sort(out.begin(), out.end(), [](const RawCluster& a, const RawCluster& b) { return a.members < b.members; });
  return out;
}

std::vector<RawCluster> split_sensor_unique(const RawCluster& c, std::span<const BevMeasurement> measurements,
                                            std::size_t min_sensors) {
  std::vector<std::size_t> order = c.members;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ma = measurements[a];
    const auto& mb = measurements[b];
    if (ma.confidence != mb.confidence) return ma.confidence > mb.confidence;
    if (ma.sensor != mb.sensor) return ma.sensor < mb.sensor;
    return a < b;
  });

  std::vector<RawCluster> groups;
  std::vector<std::set<SensorId>> sensors;
  for (std::size_t idx : order) {
    const SensorId s = measurements[idx].sensor;
    std::size_t g = 0;
    while (g < groups.size() && sensors[g].contains(s)) ++g;
    if (g == groups.size()) {
      groups.push_back({{}, c.pass});
      sensors.emplace_back();
    }
    groups[g].members.push_back(idx);
    sensors[g].insert(s);
  }

  std::vector<RawCluster> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (sensors[g].size() < min_sensors) continue;
    std::sort(groups[g].members.begin(), groups[g].members.end());
    out.push_back(std::move(groups[g]));
  }
  return out;
}

namespace {

std::vector<RawCluster> cluster_subset(std::span<const BevMeasurement> measurements,
                                       const std::vector<std::size_t>& nodes, const ClusteringConfig& cfg,
                                       std::size_t min_sensors, ConfidencePass pass) {
  const AssociationGraph g = build_graph(measurements, nodes, cfg.tau_p(), cfg.tau_euc);
  std::vector<RawCluster> out;
  for (auto& comp : connected_components(g, min_sensors)) {
    comp.pass = pass;
    for (auto& group : split_sensor_unique(comp, measurements, min_sensors)) out.push_back(std::move(group));
  }
  return out;
}

}  // namespace

std::vector<RawCluster> cascaded_cluster(std::span<const BevMeasurement> measurements, const ClusteringConfig& cfg) {
  std::set<SensorId> present;
  for (const auto& m : measurements) present.insert(m.sensor);
  const std::size_t min_sensors = (cfg.single_sensor_relax && present.size() == 1) ? 1 : 2;

  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const double beta = measurements[i].confidence;
    if (beta >= cfg.tau_high) high.push_back(i);
    else if (beta >= cfg.tau_low) low.push_back(i);
  }

  std::vector<RawCluster> out = cluster_subset(measurements, high, cfg, min_sensors, ConfidencePass::High);
  for (auto& c : cluster_subset(measurements, low, cfg, min_sensors, ConfidencePass::Low)) out.push_back(std::move(c));
  return out;
}

}  // namespace bevtrack
