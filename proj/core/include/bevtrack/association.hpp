#pragma once

#include "bevtrack/config.hpp"
#include "bevtrack/types.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bevtrack {

struct PairConsistency {
  double d2 = 0.0;
  double p_same = 1.0;
};

/// Survival function of chi-square with 2 degrees of freedom.
inline double chi2_2_survival(double d2) { return std::exp(-0.5 * d2); }

/// Mahalanobis distance under summed covariances and its chi-square(2)
/// consistency probability.
PairConsistency pairwise_consistency(const BevMeasurement& a, const BevMeasurement& b);

struct AssociationEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double p_same = 0.0;
};

/// Nodes are indices into the measurement list the graph was built from.
struct AssociationGraph {
  std::vector<std::size_t> nodes;
  std::vector<AssociationEdge> edges;
};

enum class ConfidencePass { High, Low };

struct RawCluster {
  std::vector<std::size_t> members;
  ConfidencePass pass = ConfidencePass::High;
};

/// Cross-sensor graph over `nodes` (all measurements when empty).
AssociationGraph build_graph(std::span<const BevMeasurement> measurements, double tau_p, double tau_euc);
AssociationGraph build_graph(std::span<const BevMeasurement> measurements, std::span<const std::size_t> nodes,
                             double tau_p, double tau_euc);

/// Undirected connected components; components smaller than `min_size` are
/// dropped (singletons by default). Members are sorted ascending.
std::vector<RawCluster> connected_components(const AssociationGraph& g, std::size_t min_size = 2);

/// Splits a component into groups holding at most one measurement per sensor,
/// visiting members by descending confidence (ties: sensor id, then index).
/// Groups spanning fewer than `min_sensors` sensors are dropped.
std::vector<RawCluster> split_sensor_unique(const RawCluster& c, std::span<const BevMeasurement> measurements,
                                            std::size_t min_sensors = 2);

/// Two disjoint clustering passes: beta >= tau_high, then the remaining
/// measurements with beta >= tau_low. Low-pass clusters are labelled Low.
std::vector<RawCluster> cascaded_cluster(std::span<const BevMeasurement> measurements, const ClusteringConfig& cfg);

}  // namespace bevtrack
