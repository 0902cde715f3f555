#include "bevtrack/phd.hpp"

#include "bevtrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bevtrack {

const char* to_string(MotionMode m) {
  switch (m) {
    case MotionMode::Stationary: return "stationary";
    case MotionMode::ConstantVelocity: return "cv";
    case MotionMode::Maneuvering: return "maneuver";
  }
  return "unknown";
}

const char* to_string(TrackState s) {
  switch (s) {
    case TrackState::Tentative: return "tentative";
    case TrackState::Confirmed: return "confirmed";
    case TrackState::Lost: return "lost";
  }
  return "unknown";
}

std::optional<TrackState> track_state_from_string(std::string_view s) {
  if (s == "tentative") return TrackState::Tentative;
  if (s == "confirmed") return TrackState::Confirmed;
  if (s == "lost") return TrackState::Lost;
  return std::nullopt;
}

Mat3 mode_transition_matrix(const std::array<double, 3>& pi_stay) {
  Mat3 chain;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) chain(i, j) = i == j ? pi_stay[i] : 0.5 * (1.0 - pi_stay[i]);
  return chain;
}

Mat4 white_noise_acceleration(double dt, double intensity) {
  const double a = 0.25 * dt * dt * dt * dt;
  const double b = 0.5 * dt * dt * dt;
  const double c = dt * dt;
  Mat4 q = Mat4::Zero();
  q(0, 0) = q(1, 1) = a;
  q(0, 2) = q(2, 0) = q(1, 3) = q(3, 1) = b;
  q(2, 2) = q(3, 3) = c;
  return intensity * q;
}

MotionModel::MotionModel(const ClassParams& params, const MotionConfig& motion)
    : chain_(mode_transition_matrix(params.pi_stay)), dt_(motion.dt) {
  Mat4 cv = Mat4::Identity();
  cv(0, 2) = cv(1, 3) = motion.dt;
  Mat4 stationary = Mat4::Identity();
  stationary(2, 2) = stationary(3, 3) = motion.stationary_damping;

  F_[mode_index(MotionMode::Stationary)] = stationary;
  F_[mode_index(MotionMode::ConstantVelocity)] = cv;
  F_[mode_index(MotionMode::Maneuvering)] = cv;

  const Mat4 base = white_noise_acceleration(motion.dt, params.Q_scale);
  Q_[mode_index(MotionMode::Stationary)] = base;
  Q_[mode_index(MotionMode::ConstantVelocity)] = base;
  Q_[mode_index(MotionMode::Maneuvering)] = motion.maneuver_noise_factor * base;
}

Mat24 MotionModel::H() {
  Mat24 h = Mat24::Zero();
  h(0, 0) = h(1, 1) = 1.0;
  return h;
}

namespace {

class MotionCache {
 public:
  explicit MotionCache(const TrackerConfig& cfg) : cfg_(cfg) {}
  const MotionModel& get(ClassLabel c) {
    auto it = models_.find(c);
    if (it == models_.end()) it = models_.emplace(c, MotionModel(cfg_.class_params(c), cfg_.motion)).first;
    return it->second;
  }

 private:
  const TrackerConfig& cfg_;
  std::map<ClassLabel, MotionModel> models_;
};

bool heavier(const GaussianComponent& a, const GaussianComponent& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return mode_index(a.mode) < mode_index(b.mode);
}

double mahalanobis2(const Vec2& diff, const Mat2& s) {
  const Eigen::LDLT<Mat2> ldlt(s);
  if (ldlt.info() != Eigen::Success) return kInf;
  return diff.dot(ldlt.solve(diff));
}

std::map<TrackId, std::vector<std::size_t>> group_by_track(std::span<const GaussianComponent> components,
                                                           const TrackRecords& records,
                                                           std::initializer_list<TrackState> states) {
  std::map<TrackId, std::vector<std::size_t>> out;
  for (std::size_t j = 0; j < components.size(); ++j) {
    auto it = records.find(components[j].id);
    if (it == records.end()) continue;
    if (std::find(states.begin(), states.end(), it->second.state) == states.end()) continue;
    out[components[j].id].push_back(j);
  }
  return out;
}

void blend_feature(GaussianComponent& c, const std::optional<VecX>& measured, double momentum) {
  if (!measured) return;
  if (!c.feature || c.feature->size() != measured->size()) {
    c.feature = *measured;
    return;
  }
  VecX f = momentum * *c.feature + (1.0 - momentum) * *measured;
  const double n = f.norm();
  if (n > 0.0) c.feature = f / n;
}

void apply_match(std::vector<GaussianComponent>& components, const std::vector<std::size_t>& track_components,
                 std::size_t winner, const FusedCluster& cluster, const TrackerConfig& cfg) {
  for (std::size_t j : track_components) {
    GaussianComponent& c = components[j];
    if (j == winner) {
      const KalmanPosterior post = kalman_update(c.mean, c.cov, cluster.z, cluster.p_fused);
      c.mean = post.mean;
      c.cov = post.cov;
      c.weight = std::min(c.weight + cfg.tracking.w_boost, 1.0);
      blend_feature(c, cluster.feature, cfg.tracking.feature_momentum);
    } else {
      c.weight *= 1.0 - cfg.class_params(c.class_label).p_D;
    }
  }
}

void apply_miss(std::vector<GaussianComponent>& components, const std::vector<std::size_t>& track_components,
                const TrackerConfig& cfg) {
  for (std::size_t j : track_components) {
    GaussianComponent& c = components[j];
    c.weight *= 1.0 - cfg.class_params(c.class_label).p_D;
  }
}

struct GroupedCost {
  CostMatrix cost;
  std::vector<std::vector<std::size_t>> argmin;  // [row][col] -> component index
};

template <class EntryFn>
GroupedCost grouped_costs(const std::vector<TrackId>& tracks,
                          const std::map<TrackId, std::vector<std::size_t>>& by_track,
                          const std::vector<std::size_t>& cluster_cols, EntryFn entry) {
  GroupedCost g{CostMatrix(tracks.size(), cluster_cols.size(), kInf),
                std::vector<std::vector<std::size_t>>(tracks.size(), std::vector<std::size_t>(cluster_cols.size(), 0))};
  for (std::size_t r = 0; r < tracks.size(); ++r) {
    for (std::size_t c = 0; c < cluster_cols.size(); ++c) {
      for (std::size_t j : by_track.at(tracks[r])) {
        const double cost = entry(j, cluster_cols[c]);
        if (cost < g.cost(r, c)) {
          g.cost(r, c) = cost;
          g.argmin[r][c] = j;
        }
      }
    }
  }
  return g;
}

}  // namespace

TrackPool export_track_pool(std::span<const GaussianComponent> components, const TrackRecords& records) {
  std::map<TrackId, const GaussianComponent*> best;
  for (const auto& c : components) {
    auto rec = records.find(c.id);
    if (rec == records.end() || rec->second.state == TrackState::Lost) continue;
    auto [it, inserted] = best.emplace(c.id, &c);
    if (!inserted && heavier(c, *it->second)) it->second = &c;
  }
  TrackPool pool;
  pool.reserve(best.size());
  for (const auto& [id, c] : best) pool.push_back({id, c->mean, c->cov, c->mode, c->feature, c->class_label});
  return pool;
}

std::pair<Vec2, Mat2> predicted_bev(const PoolEntry& entry, const TrackerConfig& cfg) {
  const MotionModel model(cfg.class_params(entry.class_label), cfg.motion);
  const Mat4& F = model.F(entry.mode);
  const Vec4 m = F * entry.mean;
  const Mat4 P = F * entry.cov * F.transpose() + model.Q(entry.mode);
  const Mat24 H = MotionModel::H();
  return {H * m, symmetrize(Mat2(H * P * H.transpose()))};
}

void assign_identities(std::vector<FusedCluster>& clusters, const TrackPool& pool, const TrackerConfig& cfg) {
  for (auto& c : clusters) {
    c.hard_id.reset();
    c.birth_candidate = true;
    c.soft_identity.clear();
  }
  if (clusters.empty() || pool.empty()) return;

  std::vector<std::pair<Vec2, Mat2>> predicted;
  predicted.reserve(pool.size());
  for (const auto& e : pool) predicted.push_back(predicted_bev(e, cfg));

  CostMatrix cost(clusters.size(), pool.size(), kInf);
  CostMatrix d2(clusters.size(), pool.size(), kInf);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    for (std::size_t t = 0; t < pool.size(); ++t) {
      const double d = mahalanobis2(clusters[i].z - predicted[t].first, clusters[i].p_fused + predicted[t].second);
      d2(i, t) = d;
      if (d < cfg.tracking.tau_gate) cost(i, t) = d;
    }
  }

  const std::vector<double> new_costs(clusters.size(), cfg.tracking.tau_new);
  const CostMatrix full = augment_with_miss_columns(cost, new_costs);
  for (const auto& pr : solve_assignment(full)) {
    if (pr.col < pool.size()) {
      clusters[pr.row].hard_id = pool[pr.col].id;
      clusters[pr.row].birth_candidate = false;
    }
  }

  const double bandwidth = 2.0 * cfg.tracking.sigma_spatial * cfg.tracking.sigma_spatial;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    auto& c = clusters[i];
    std::vector<std::pair<TrackId, double>> scores;
    for (std::size_t t = 0; t < pool.size(); ++t) {
      if (!(d2(i, t) < cfg.tracking.tau_gate)) continue;
      double g = std::exp(-d2(i, t) / bandwidth);
      if (c.hard_id && *c.hard_id == pool[t].id) g = std::max(g, 1.0);
      scores.emplace_back(pool[t].id, g / cfg.tracking.tau_geo);
    }
    if (scores.empty()) continue;
    double top = -kInf;
    for (const auto& [id, s] : scores) top = std::max(top, s);
    double total = 0.0;
    for (auto& [id, s] : scores) {
      s = std::exp(s - top);
      total += s;
    }
    for (auto& [id, s] : scores) s /= total;
    c.soft_identity = std::move(scores);
  }
}

std::vector<GaussianComponent> predict(std::span<const GaussianComponent> components, const TrackerConfig& cfg) {
  MotionCache models(cfg);
  std::vector<GaussianComponent> out;
  out.reserve(components.size() * kNumModes);
  for (const auto& c : components) {
    const MotionModel& model = models.get(c.class_label);
    const double p_s = cfg.class_params(c.class_label).p_S;
    for (MotionMode dest : kAllModes) {
      GaussianComponent p = c;
      const Mat4& F = model.F(dest);
      p.weight = p_s * model.transition(c.mode, dest) * c.weight;
      p.mean = F * c.mean;
      p.cov = symmetrize(Mat4(F * c.cov * F.transpose() + model.Q(dest)));
      p.mode = dest;
      p.anchor = c.mean.head<2>();
      out.push_back(std::move(p));
    }
  }
  return out;
}

BirthResult spawn_births(std::span<const FusedCluster> clusters, TrackId& next_id, const TrackerConfig& cfg) {
  BirthResult out;
  MotionCache models(cfg);
  for (const auto& c : clusters) {
    if (!c.birth_candidate || c.hard_id) continue;
    if (c.pass != ConfidencePass::High) continue;
    if (c.beta_max < cfg.tracking.tau_birth) continue;

    const ClassParams& params = cfg.class_params(c.class_label);
    const MotionModel& model = models.get(c.class_label);
    const TrackId id = next_id++;

    Mat4 P = Mat4::Zero();
    P.topLeftCorner<2, 2>() = c.p_fused;
    P.bottomRightCorner<2, 2>() = params.sigma_v * params.sigma_v * Mat2::Identity();
    for (MotionMode s : kAllModes) {
      GaussianComponent g;
      g.weight = c.beta_max * model.transition(MotionMode::Stationary, s);
      g.mean << c.z, 0.0, 0.0;
      g.cov = P;
      g.id = id;
      g.mode = s;
      g.feature = c.feature;
      g.class_label = c.class_label;
      g.anchor = c.z;
      out.components.push_back(std::move(g));
    }
    TrackRecord rec;
    rec.id = id;
    rec.state = TrackState::Tentative;
    rec.last_feature = c.feature;
    rec.class_label = c.class_label;
    out.records.push_back(std::move(rec));
  }
  return out;
}

double cosine_similarity(const std::optional<VecX>& a, const std::optional<VecX>& b) {
  if (!a || !b || a->size() != b->size() || a->size() == 0) return 0.0;
  const double na = a->norm();
  const double nb = b->norm();
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  return a->dot(*b) / (na * nb);
}

AssociationScore association_cost(const GaussianComponent& component, const FusedCluster& cluster,
                                  const TrackerConfig& cfg) {
  const Mat24 H = MotionModel::H();
  const Mat2 S = symmetrize(Mat2(H * component.cov * H.transpose() + cluster.p_fused));
  const Vec2 innovation = cluster.z - H * component.mean;
  const double d2 = mahalanobis2(innovation, S);

  AssociationScore out;
  out.d2 = d2;
  if (!(d2 < cfg.tracking.tau_gate)) return out;

  const double p_D = std::min(cfg.class_params(component.class_label).p_D, 0.999);
  double cost = 0.5 * (d2 + std::log(S.determinant())) - std::log(p_D);
  cost -= cfg.tracking.lambda_assoc * cluster.soft_probability(component.id);
  cost -= cfg.tracking.mu_sem * cosine_similarity(component.feature, cluster.feature);

  const Vec2 velocity = component.mean.tail<2>();
  const Vec2 displacement = cluster.z - component.anchor;
  const double speed = velocity.norm();
  const double step = displacement.norm();
  if (speed > 1e-9 && step > 1e-9) {
    const double cos_turn = std::clamp(velocity.dot(displacement) / (speed * step), -1.0, 1.0);
    cost += cfg.turn.lambda_turn * speed * (1.0 - cos_turn);
  }
  out.cost = cost;
  return out;
}

KalmanPosterior kalman_update(const Vec4& mean, const Mat4& cov, const Vec2& z, const Mat2& R) {
  const Mat24 H = MotionModel::H();
  const Mat2 S = symmetrize(Mat2(H * cov * H.transpose() + R));
  const Eigen::LDLT<Mat2> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "innovation covariance is singular");
  const Mat42 K = ldlt.solve(H * cov.transpose()).transpose();
  const Mat4 I_KH = Mat4::Identity() - K * H;
  KalmanPosterior post;
  post.mean = mean + K * (z - H * mean);
  post.cov = symmetrize(Mat4(I_KH * cov * I_KH.transpose() + K * R * K.transpose()));
  return post;
}

void update_confirmed(std::vector<GaussianComponent>& components, std::span<const FusedCluster> clusters,
                      const TrackRecords& records, const TrackerConfig& cfg, MatchReport& report) {
  report.claimed.resize(clusters.size(), false);
  const auto by_track = group_by_track(components, records, {TrackState::Confirmed});

  std::vector<TrackId> unmatched;
  for (const auto& [id, comps] : by_track) unmatched.push_back(id);
  std::map<TrackId, std::pair<std::size_t, std::size_t>> decisions;  // track -> (cluster, component)

  for (ConfidencePass pass : {ConfidencePass::High, ConfidencePass::Low}) {
    if (unmatched.empty()) break;
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      if (clusters[i].pass == pass && !report.claimed[i]) cols.push_back(i);
    if (cols.empty()) continue;

    const GroupedCost g = grouped_costs(unmatched, by_track, cols, [&](std::size_t j, std::size_t i) {
      return association_cost(components[j], clusters[i], cfg).cost;
    });
    std::vector<double> misses;
    for (TrackId t : unmatched)
      misses.push_back(miss_cost(cfg.class_params(components[by_track.at(t).front()].class_label).p_D));
    const CostMatrix full = augment_with_miss_columns(g.cost, misses);

    std::vector<TrackId> still;
    std::vector<bool> row_matched(unmatched.size(), false);
    for (const auto& pr : solve_assignment(full)) {
      if (pr.col >= cols.size()) continue;
      row_matched[pr.row] = true;
      decisions[unmatched[pr.row]] = {cols[pr.col], g.argmin[pr.row][pr.col]};
      report.claimed[cols[pr.col]] = true;
    }
    for (std::size_t r = 0; r < unmatched.size(); ++r)
      if (!row_matched[r]) still.push_back(unmatched[r]);
    unmatched = std::move(still);
  }

  for (const auto& [id, comps] : by_track) {
    auto d = decisions.find(id);
    if (d == decisions.end()) {
      apply_miss(components, comps, cfg);
      continue;
    }
    apply_match(components, comps, d->second.second, clusters[d->second.first], cfg);
    report.matches[id] = {d->second.first, false};
  }
}

void update_tentative_lost(std::vector<GaussianComponent>& components, std::span<const FusedCluster> clusters,
                           const TrackRecords& records, const TrackerConfig& cfg, MatchReport& report) {
  report.claimed.resize(clusters.size(), false);

  auto run = [&](TrackState state) {
    const auto by_track = group_by_track(components, records, {state});
    if (by_track.empty()) return;
    std::vector<TrackId> tracks;
    for (const auto& [id, comps] : by_track) tracks.push_back(id);
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      if (!report.claimed[i]) cols.push_back(i);

    std::vector<bool> matched(tracks.size(), false);
    if (!cols.empty()) {
      const GroupedCost g = grouped_costs(tracks, by_track, cols, [&](std::size_t j, std::size_t i) {
        const GaussianComponent& c = components[j];
        const AssociationScore s = association_cost(c, clusters[i], cfg);
        if (!(s.d2 < cfg.tracking.tight_gate)) return kInf;
        if (state != TrackState::Lost) return s.cost;
        const auto& rec = records.at(c.id);
        const auto& f = rec.last_feature ? rec.last_feature : c.feature;
        return s.d2 - cfg.tracking.lambda_reid * cosine_similarity(f, clusters[i].feature);
      });
      for (const auto& pr : solve_assignment(g.cost)) {
        const std::size_t cluster = cols[pr.col];
        matched[pr.row] = true;
        report.claimed[cluster] = true;
        report.matches[tracks[pr.row]] = {cluster, state == TrackState::Lost};
        apply_match(components, by_track.at(tracks[pr.row]), g.argmin[pr.row][pr.col], clusters[cluster], cfg);
      }
    }
    for (std::size_t r = 0; r < tracks.size(); ++r)
      if (!matched[r]) apply_miss(components, by_track.at(tracks[r]), cfg);
  };

  run(TrackState::Lost);
  run(TrackState::Tentative);
}

std::vector<GaussianComponent> prune_merge_collapse(std::vector<GaussianComponent> components,
                                                    const TrackerConfig& cfg, const std::set<TrackId>& protect) {
  std::map<TrackId, std::vector<GaussianComponent>> groups;
  for (auto& c : components) groups[c.id].push_back(std::move(c));

  std::vector<GaussianComponent> out;
  for (auto& [id, group] : groups) {
    std::sort(group.begin(), group.end(), heavier);

    std::vector<GaussianComponent> kept;
    for (const auto& c : group)
      if (c.weight >= cfg.lifecycle.tau_prune) kept.push_back(c);
    if (kept.empty() && protect.contains(id) && !group.empty()) kept.push_back(group.front());
    if (kept.empty()) continue;

    std::vector<GaussianComponent> merged;
    std::vector<bool> used(kept.size(), false);
    for (std::size_t lead = 0; lead < kept.size(); ++lead) {
      if (used[lead]) continue;
      const Eigen::LDLT<Mat4> ldlt(kept[lead].cov);
      std::vector<std::size_t> members;
      for (std::size_t k = lead; k < kept.size(); ++k) {
        if (used[k]) continue;
        const Vec4 diff = kept[k].mean - kept[lead].mean;
        if (k == lead || diff.dot(ldlt.solve(diff)) < cfg.lifecycle.tau_merge) members.push_back(k);
      }
      GaussianComponent m = kept[lead];
      double w = 0.0;
      Vec4 mean = Vec4::Zero();
      for (std::size_t k : members) {
        w += kept[k].weight;
        mean += kept[k].weight * kept[k].mean;
        used[k] = true;
      }
      if (w > 0.0) {
        mean /= w;
        Mat4 cov = Mat4::Zero();
        for (std::size_t k : members) {
          const Vec4 d = kept[k].mean - mean;
          cov += (kept[k].weight / w) * (kept[k].cov + d * d.transpose());
        }
        m.mean = mean;
        m.cov = symmetrize(cov);
      }
      m.weight = std::min(w, 1.0);
      merged.push_back(std::move(m));
    }

    out.push_back(*std::min_element(merged.begin(), merged.end(), heavier));
  }

  if (out.size() > static_cast<std::size_t>(cfg.lifecycle.J_max)) {
    std::stable_sort(out.begin(), out.end(), heavier);
    out.resize(static_cast<std::size_t>(cfg.lifecycle.J_max));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  }
  return out;
}

void lifecycle_step(TrackRecords& records, const MatchReport& report, const TrackerConfig& cfg) {
  const LifecycleConfig& lc = cfg.lifecycle;
  for (auto it = records.begin(); it != records.end();) {
    TrackRecord& r = it->second;
    bool erase = false;
    if (report.matched(r.id)) {
      r.hits += 1;
      r.misses = 0;
      r.lost_age = 0;
      if (r.state == TrackState::Lost) r.state = TrackState::Confirmed;
      else if (r.state == TrackState::Tentative && r.hits >= lc.N_init) r.state = TrackState::Confirmed;
    } else {
      r.hits = std::max(0, r.hits - 1);
      r.misses += 1;
      switch (r.state) {
        case TrackState::Tentative:
          erase = r.misses > lc.tau_tent;
          break;
        case TrackState::Confirmed:
          if (r.misses > lc.tau_confirmed) {
            r.state = TrackState::Lost;
            r.lost_age = 0;
          }
          break;
        case TrackState::Lost:
          r.lost_age += 1;
          erase = r.lost_age > lc.K_max;
          break;
      }
    }
    it = erase ? records.erase(it) : std::next(it);
  }
}

PhdTracker::PhdTracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<TrackOutput> PhdTracker::step(int frame, std::vector<FusedCluster> clusters) {
  // (i) + (ii): closed-loop identity prior from the current pool.
  const TrackPool pool = export_track_pool(components_, records_);
  assign_identities(clusters, pool, cfg_);

  // (iii): prediction and identity-informed birth.
  std::vector<GaussianComponent> predicted = predict(components_, cfg_);
  BirthResult births = spawn_births(clusters, next_id_, cfg_);
  std::set<TrackId> newborn;
  for (auto& rec : births.records) {
    newborn.insert(rec.id);
    records_.emplace(rec.id, std::move(rec));
  }
  for (auto& c : births.components) predicted.push_back(std::move(c));

  // (iv): track-level association and update.
  MatchReport report;
  update_confirmed(predicted, clusters, records_, cfg_, report);
  update_tentative_lost(predicted, clusters, records_, cfg_, report);

  // A birth whose source cluster went to an existing track is withdrawn.
  for (TrackId id : newborn) {
    if (report.matched(id)) continue;
    records_.erase(id);
    std::erase_if(predicted, [id](const GaussianComponent& c) { return c.id == id; });
  }

  // (v): component management and lifecycle.
  std::set<TrackId> live;
  for (const auto& [id, rec] : records_) live.insert(id);
  components_ = prune_merge_collapse(std::move(predicted), cfg_, live);
  lifecycle_step(records_, report, cfg_);

  std::set<TrackId> with_components;
  for (const auto& c : components_) with_components.insert(c.id);
  std::erase_if(components_, [&](const GaussianComponent& c) { return !records_.contains(c.id); });
  std::erase_if(records_, [&](const auto& kv) { return !with_components.contains(kv.first); });

  std::vector<TrackOutput> out;
  for (const auto& c : components_) {
    TrackRecord& rec = records_.at(c.id);
    if (c.feature) rec.last_feature = c.feature;
    rec.class_label = c.class_label;
    if (rec.state != TrackState::Confirmed) continue;
    TrackOutput o;
    o.frame = frame;
    o.id = c.id;
    o.position = c.mean.head<2>();
    o.velocity = c.mean.tail<2>();
    o.cov = c.cov.topLeftCorner<2, 2>();
    o.mode = c.mode;
    o.state = rec.state;
    out.push_back(o);
  }
  last_clusters_ = std::move(clusters);
  return out;
}

}  // namespace bevtrack
