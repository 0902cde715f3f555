#include "bevtrack/fusion.hpp"

#include <algorithm>
#include <map>

namespace bevtrack {

namespace {

constexpr double kCommonModeTolerance = 1e-9;

Mat2 checked_inverse(const Mat2& m) {
  const double det = m.determinant();
  if (!(std::abs(det) > 1e-300) || !std::isfinite(det))
    throw Error(ErrorKind::Numerical, "member covariance is singular");
  return m.inverse();
}

}  // namespace

PrecisionFusion fuse_precision_weighted(std::span<const BevMeasurement> members) {
  if (members.empty()) throw Error(ErrorKind::Numerical, "cannot fuse an empty cluster");

  bool shared = true;
  for (const auto& m : members)
    shared = shared && (m.r_pose - members.front().r_pose).norm() <= kCommonModeTolerance;

  Mat2 info = Mat2::Zero();
  Vec2 info_z = Vec2::Zero();
  for (const auto& m : members) {
    const Mat2 r = shared ? m.r_indep : m.total_covariance();
    const Mat2 r_inv = checked_inverse(symmetrize(r));
    info += r_inv;
    info_z += r_inv * m.z;
  }

  PrecisionFusion out;
  out.p_indep = symmetrize(checked_inverse(symmetrize(info)));
  out.z = out.p_indep * info_z;
  out.r_pose = shared ? members.front().r_pose : Mat2::Zero();
  out.p_fused = out.p_indep + out.r_pose;
  return out;
}

double FusedCluster::soft_probability(TrackId id) const {
  for (const auto& [t, p] : soft_identity)
    if (t == id) return p;
  return 0.0;
}

std::optional<VecX> pool_features(std::span<const BevMeasurement> members, double epsilon) {
  std::optional<VecX> sum;
  for (const auto& m : members) {
    if (!m.feature || m.feature->size() == 0) continue;
    const double norm = m.feature->norm();
    if (!(norm > 0.0)) continue;
    const VecX unit = *m.feature / norm;
    if (!sum) sum = VecX::Zero(unit.size());
    if (sum->size() != unit.size()) throw Error(ErrorKind::InvalidDetection, "feature dimensions differ in a cluster");
    *sum += m.confidence * unit;
  }
  if (!sum) return std::nullopt;
  return *sum / (sum->norm() + epsilon);
}

ClassLabel vote_class(std::span<const BevMeasurement> members) {
  std::map<ClassLabel, double> votes;
  std::map<ClassLabel, double> best_single;
  for (const auto& m : members) {
    votes[m.class_label] += m.confidence;
    best_single[m.class_label] = std::max(best_single[m.class_label], m.confidence);
  }
  ClassLabel winner = members.front().class_label;
  double best_vote = -1.0;
  for (const auto& [c, v] : votes) {
    const bool better = v > best_vote || (v == best_vote && best_single[c] > best_single[winner]);
    if (better) {
      winner = c;
      best_vote = v;
    }
  }
  return winner;
}

FusedCluster fuse_cluster(std::span<const BevMeasurement> members) {
  const PrecisionFusion f = fuse_precision_weighted(members);
  FusedCluster c;
  c.z = f.z;
  c.p_indep = f.p_indep;
  c.r_pose = f.r_pose;
  c.p_fused = f.p_fused;
  c.feature = pool_features(members);
  c.member_count = members.size();
  c.class_label = vote_class(members);
  for (const auto& m : members) c.beta_max = std::max(c.beta_max, m.confidence);
  return c;
}

std::vector<FusedCluster> fuse_clusters(std::span<const BevMeasurement> measurements,
                                        std::span<const RawCluster> clusters) {
  std::vector<FusedCluster> out;
  out.reserve(clusters.size());
  std::vector<BevMeasurement> members;
  for (const auto& rc : clusters) {
    members.clear();
    for (std::size_t idx : rc.members) members.push_back(measurements[idx]);
    FusedCluster fc = fuse_cluster(members);
    fc.pass = rc.pass;
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace bevtrack
