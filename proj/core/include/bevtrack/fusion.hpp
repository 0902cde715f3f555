#pragma once

#include "bevtrack/association.hpp"
#include "bevtrack/types.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace bevtrack {

inline constexpr double kFeaturePoolingEpsilon = 1e-8;

/// Output of precision-weighted fusion of independent terms with a shared
/// common-mode term added back once.
struct PrecisionFusion {
  Vec2 z = Vec2::Zero();
  Mat2 p_indep = Mat2::Zero();
  /// Shared common-mode covariance, or zero when members disagree on it.
  Mat2 r_pose = Mat2::Zero();
  Mat2 p_fused = Mat2::Zero();
};

PrecisionFusion fuse_precision_weighted(std::span<const BevMeasurement> members);

/// One fused multi-sensor estimate. Identity fields are filled by the tracker
/// front-end (assign_identities).
struct FusedCluster {
  Vec2 z = Vec2::Zero();
  Mat2 p_indep = Mat2::Identity();
  Mat2 r_pose = Mat2::Zero();
  Mat2 p_fused = Mat2::Identity();
  std::optional<VecX> feature;
  double beta_max = 0.0;
  ClassLabel class_label = 0;
  std::size_t member_count = 0;
  ConfidencePass pass = ConfidencePass::High;

  std::optional<TrackId> hard_id;
  bool birth_candidate = false;
  /// Soft identity distribution over gated tracks, sorted by track id.
  std::vector<std::pair<TrackId, double>> soft_identity;

  double soft_probability(TrackId id) const;
};

/// Throws Error(Numerical) for an empty member list or singular covariances.
FusedCluster fuse_cluster(std::span<const BevMeasurement> members);

/// Confidence-weighted mean of L2-normalised features, normalised with an
/// epsilon guard. Absent when no member carries a feature.
std::optional<VecX> pool_features(std::span<const BevMeasurement> members,
                                  double epsilon = kFeaturePoolingEpsilon);

/// Confidence-weighted class vote; ties go to the class holding the single
/// most confident member.
ClassLabel vote_class(std::span<const BevMeasurement> members);

/// Fuses every raw cluster of a frame.
std::vector<FusedCluster> fuse_clusters(std::span<const BevMeasurement> measurements,
                                        std::span<const RawCluster> clusters);

}  // namespace bevtrack
