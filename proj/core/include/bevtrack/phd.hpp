#pragma once

#include "bevtrack/config.hpp"
#include "bevtrack/fusion.hpp"
#include "bevtrack/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace bevtrack {

/// HMM motion mode. Numeric values follow the 1-based mode index.
enum class MotionMode : int { Stationary = 1, ConstantVelocity = 2, Maneuvering = 3 };
inline constexpr int kNumModes = 3;
inline constexpr std::array<MotionMode, kNumModes> kAllModes = {
    MotionMode::Stationary, MotionMode::ConstantVelocity, MotionMode::Maneuvering};
inline int mode_index(MotionMode m) { return static_cast<int>(m) - 1; }
const char* to_string(MotionMode m);

enum class TrackState { Tentative, Confirmed, Lost };
const char* to_string(TrackState s);
std::optional<TrackState> track_state_from_string(std::string_view s);

/// One weighted Gaussian hypothesis over [x, y, vx, vy].
struct GaussianComponent {
  double weight = 0.0;
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
  TrackId id = 0;
  MotionMode mode = MotionMode::ConstantVelocity;
  std::optional<VecX> feature;
  ClassLabel class_label = 0;
  /// Position before the most recent prediction; reference point for the
  /// turn penalty.
  Vec2 anchor = Vec2::Zero();
};

struct TrackRecord {
  TrackId id = 0;
  TrackState state = TrackState::Tentative;
  int hits = 0;
  int misses = 0;
  int lost_age = 0;
  std::optional<VecX> last_feature;
  ClassLabel class_label = 0;
};

using TrackRecords = std::map<TrackId, TrackRecord>;

struct PoolEntry {
  TrackId id = 0;
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Identity();
  MotionMode mode = MotionMode::ConstantVelocity;
  std::optional<VecX> feature;
  ClassLabel class_label = 0;
};

/// One representative per visible (Tentative or Confirmed) track, sorted by id.
using TrackPool = std::vector<PoolEntry>;

/// Per-class three-mode linear motion model.
class MotionModel {
 public:
  MotionModel(const ClassParams& params, const MotionConfig& motion);

  const Mat4& F(MotionMode m) const { return F_[mode_index(m)]; }
  const Mat4& Q(MotionMode m) const { return Q_[mode_index(m)]; }
  /// P(s_{k+1} = to | s_k = from).
  double transition(MotionMode from, MotionMode to) const { return chain_(mode_index(from), mode_index(to)); }
  const Mat3& chain() const { return chain_; }
  double dt() const { return dt_; }

  static Mat24 H();

 private:
  std::array<Mat4, kNumModes> F_;
  std::array<Mat4, kNumModes> Q_;
  Mat3 chain_;
  double dt_;
};

/// Row-stochastic chain with `pi_stay` on the diagonal and the remainder
/// split equally over the other two modes.
Mat3 mode_transition_matrix(const std::array<double, 3>& pi_stay);

/// Discrete white-noise-acceleration covariance for one step.
Mat4 white_noise_acceleration(double dt, double intensity);

TrackPool export_track_pool(std::span<const GaussianComponent> components, const TrackRecords& records);

/// One-step predicted BEV position and covariance of a pool entry under its
/// own motion mode.
std::pair<Vec2, Mat2> predicted_bev(const PoolEntry& entry, const TrackerConfig& cfg);

/// Closed-loop identity front-end: fills hard_id, birth_candidate and
/// soft_identity of every cluster.
void assign_identities(std::vector<FusedCluster>& clusters, const TrackPool& pool, const TrackerConfig& cfg);

/// Propagates every component into all three destination modes.
std::vector<GaussianComponent> predict(std::span<const GaussianComponent> components, const TrackerConfig& cfg);

struct BirthResult {
  std::vector<GaussianComponent> components;
  std::vector<TrackRecord> records;
};

/// Identity-aware births from high-pass clusters marked as new whose
/// confidence reaches tau_birth. Consumes ids from `next_id`.
BirthResult spawn_births(std::span<const FusedCluster> clusters, TrackId& next_id, const TrackerConfig& cfg);

struct AssociationScore {
  double cost = kInf;
  double d2 = kInf;
};

/// Gated negative log-likelihood with identity, appearance and turn terms.
AssociationScore association_cost(const GaussianComponent& component, const FusedCluster& cluster,
                                  const TrackerConfig& cfg);

double cosine_similarity(const std::optional<VecX>& a, const std::optional<VecX>& b);

struct KalmanPosterior {
  Vec4 mean;
  Mat4 cov;
};

/// Kalman update with the Joseph-form covariance.
KalmanPosterior kalman_update(const Vec4& mean, const Mat4& cov, const Vec2& z, const Mat2& R);

struct MatchReport {
  struct Match {
    std::size_t cluster = 0;
    bool reidentified = false;
  };
  std::map<TrackId, Match> matches;
  std::vector<bool> claimed;

  bool matched(TrackId id) const { return matches.contains(id); }
};

/// Track-level assignment over Confirmed tracks: high-pass clusters first,
/// then the still-unmatched tracks against low-pass clusters. Updates the
/// argmin-cost component of each matched track, boosts it, and applies the
/// miss penalty to every other component of Confirmed tracks.
void update_confirmed(std::vector<GaussianComponent>& components, std::span<const FusedCluster> clusters,
                      const TrackRecords& records, const TrackerConfig& cfg, MatchReport& report);

/// Second pass for Lost (re-identification first) and Tentative tracks over
/// the clusters left unclaimed. A pair is updated only inside the tight gate.
void update_tentative_lost(std::vector<GaussianComponent>& components, std::span<const FusedCluster> clusters,
                           const TrackRecords& records, const TrackerConfig& cfg, MatchReport& report);

/// Prune, merge same-id components by moment matching, keep the dominant
/// mode per id, cap at J_max. Ids in `protect` keep their heaviest component
/// through pruning.
std::vector<GaussianComponent> prune_merge_collapse(std::vector<GaussianComponent> components,
                                                    const TrackerConfig& cfg, const std::set<TrackId>& protect = {});

/// Advances lifecycle counters; deleted tracks are erased from `records`.
void lifecycle_step(TrackRecords& records, const MatchReport& report, const TrackerConfig& cfg);

struct TrackOutput {
  int frame = 0;
  TrackId id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Mat2 cov = Mat2::Identity();
  MotionMode mode = MotionMode::ConstantVelocity;
  TrackState state = TrackState::Confirmed;
};

/// One identity-informed GM-PHD tracking session. Not thread-safe; sessions
/// are independent.
class PhdTracker {
 public:
  explicit PhdTracker(TrackerConfig cfg);

  /// Runs one frame and returns one output per Confirmed track.
  std::vector<TrackOutput> step(int frame, std::vector<FusedCluster> clusters);

  const std::vector<GaussianComponent>& components() const { return components_; }
  const TrackRecords& records() const { return records_; }
  const TrackerConfig& config() const { return cfg_; }
  /// Clusters of the most recent step with identity fields filled.
  const std::vector<FusedCluster>& last_clusters() const { return last_clusters_; }

 private:
  TrackerConfig cfg_;
  std::vector<GaussianComponent> components_;
  TrackRecords records_;
  std::vector<FusedCluster> last_clusters_;
  TrackId next_id_ = 1;
};

}  // namespace bevtrack
