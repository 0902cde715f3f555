#include "bevtrack/metrics.hpp"

#include "bevtrack/assignment.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace bevtrack {

namespace {

using FrameIndex = std::map<int, std::vector<const ObjectRecord*>>;

FrameIndex index_by_frame(std::span<const ObjectRecord> records) {
  FrameIndex out;
  for (const auto& r : records) out[r.frame].push_back(&r);
  for (auto& [f, v] : out)
    std::sort(v.begin(), v.end(), [](const ObjectRecord* a, const ObjectRecord* b) { return a->id < b->id; });
  return out;
}

std::set<int> frame_union(const FrameIndex& a, const FrameIndex& b) {
  std::set<int> frames;
  for (const auto& [f, v] : a) frames.insert(f);
  for (const auto& [f, v] : b) frames.insert(f);
  return frames;
}

const std::vector<const ObjectRecord*>& at_frame(const FrameIndex& idx, int frame) {
  static const std::vector<const ObjectRecord*> empty;
  auto it = idx.find(frame);
  return it == idx.end() ? empty : it->second;
}

double dist(const ObjectRecord* a, const ObjectRecord* b) { return (a->position - b->position).norm(); }

// Distance-gated minimum-cost matching between two lists.
std::vector<AssignedPair> gated_match(const std::vector<const ObjectRecord*>& gt,
                                      const std::vector<const ObjectRecord*>& est, double threshold) {
  CostMatrix cost(gt.size(), est.size(), kInf);
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < est.size(); ++j) {
      const double d = dist(gt[i], est[j]);
      if (d <= threshold) cost(i, j) = d;
    }
  return solve_assignment(cost);
}

}  // namespace

ClearMotResult clear_mot(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                         const EvalConfig& cfg) {
  const FrameIndex g = index_by_frame(gt);
  const FrameIndex t = index_by_frame(tracks);

  ClearMotResult r;
  double distance_sum = 0.0;
  std::map<std::int64_t, std::int64_t> last_match;

  for (int frame : frame_union(g, t)) {
    const auto& gts = at_frame(g, frame);
    const auto& ests = at_frame(t, frame);
    r.gt_count += gts.size();

    std::vector<bool> gt_done(gts.size(), false), est_done(ests.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    for (std::size_t i = 0; i < gts.size(); ++i) {
      auto prev = last_match.find(gts[i]->id);
      if (prev == last_match.end()) continue;
      for (std::size_t j = 0; j < ests.size(); ++j) {
        if (est_done[j] || ests[j]->id != prev->second) continue;
        if (dist(gts[i], ests[j]) <= cfg.match_threshold) {
          gt_done[i] = est_done[j] = true;
          pairs.emplace_back(i, j);
        }
        break;
      }
    }

    std::vector<const ObjectRecord*> gt_rest, est_rest;
    std::vector<std::size_t> gt_map, est_map;
    for (std::size_t i = 0; i < gts.size(); ++i)
      if (!gt_done[i]) {
        gt_rest.push_back(gts[i]);
        gt_map.push_back(i);
      }
    for (std::size_t j = 0; j < ests.size(); ++j)
      if (!est_done[j]) {
        est_rest.push_back(ests[j]);
        est_map.push_back(j);
      }
    for (const auto& pr : gated_match(gt_rest, est_rest, cfg.match_threshold)) {
      const std::size_t i = gt_map[pr.row];
      const std::size_t j = est_map[pr.col];
      auto prev = last_match.find(gts[i]->id);
      if (prev != last_match.end() && prev->second != ests[j]->id) ++r.id_switches;
      pairs.emplace_back(i, j);
    }

    for (const auto& [i, j] : pairs) {
      distance_sum += dist(gts[i], ests[j]);
      last_match[gts[i]->id] = ests[j]->id;
    }
    r.matches += pairs.size();
    r.misses += gts.size() - pairs.size();
    r.false_positives += ests.size() - pairs.size();
  }

  if (r.gt_count == 0) throw Error(ErrorKind::Evaluation, "MOTA is undefined without ground truth");
  r.mota = 100.0 * (1.0 - static_cast<double>(r.misses + r.false_positives + r.id_switches) /
                              static_cast<double>(r.gt_count));
  if (r.matches > 0) {
    r.mean_distance = distance_sum / static_cast<double>(r.matches);
    r.motp = 100.0 * (1.0 - r.mean_distance / cfg.match_threshold);
  }
  return r;
}

Idf1Result idf1(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks, const EvalConfig& cfg) {
  std::map<std::int64_t, std::size_t> gt_ids, tr_ids;
  for (const auto& r : gt) gt_ids.emplace(r.id, 0);
  for (const auto& r : tracks) tr_ids.emplace(r.id, 0);
  std::size_t k = 0;
  for (auto& [id, idx] : gt_ids) idx = k++;
  k = 0;
  for (auto& [id, idx] : tr_ids) idx = k++;

  std::vector<std::vector<std::size_t>> overlap(gt_ids.size(), std::vector<std::size_t>(tr_ids.size(), 0));
  const FrameIndex g = index_by_frame(gt);
  const FrameIndex t = index_by_frame(tracks);
  for (const auto& [frame, gts] : g) {
    const auto& ests = at_frame(t, frame);
    for (const auto* a : gts)
      for (const auto* b : ests)
        if (dist(a, b) <= cfg.match_threshold) ++overlap[gt_ids[a->id]][tr_ids[b->id]];
  }

  CostMatrix cost(gt_ids.size(), tr_ids.size(), kInf);
  for (std::size_t i = 0; i < gt_ids.size(); ++i)
    for (std::size_t j = 0; j < tr_ids.size(); ++j)
      if (overlap[i][j] > 0) cost(i, j) = -static_cast<double>(overlap[i][j]);

  // Maximising matched pairs first does not change the optimum here: every
  // feasible pair has strictly negative cost.
  Idf1Result r;
  for (const auto& pr : solve_assignment(cost)) r.idtp += overlap[pr.row][pr.col];
  r.idfn = gt.size() - r.idtp;
  r.idfp = tracks.size() - r.idtp;
  const double denom = 2.0 * static_cast<double>(r.idtp) + static_cast<double>(r.idfp + r.idfn);
  r.idf1 = denom > 0.0 ? 100.0 * 2.0 * static_cast<double>(r.idtp) / denom : 0.0;
  return r;
}

double gospa(std::span<const Vec2> truth, std::span<const Vec2> estimate, double p, double c, double alpha) {
  const double cp = std::pow(c, p);
  double total = cp / alpha * static_cast<double>(truth.size() + estimate.size());
  if (!truth.empty() && !estimate.empty()) {
    CostMatrix cost(truth.size(), estimate.size(), kInf);
    for (std::size_t i = 0; i < truth.size(); ++i)
      for (std::size_t j = 0; j < estimate.size(); ++j)
        cost(i, j) = std::pow(std::min((truth[i] - estimate[j]).norm(), c), p) - 2.0 * cp / alpha;
    const std::vector<double> leave(truth.size(), 0.0);
    const CostMatrix full = augment_with_miss_columns(cost, leave);
    for (const auto& pr : solve_assignment(full)) total += full(pr.row, pr.col);
  }
  return std::pow(std::max(total, 0.0), 1.0 / p);
}

GospaSeries gospa_series(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                         const EvalConfig& cfg) {
  const FrameIndex g = index_by_frame(gt);
  const FrameIndex t = index_by_frame(tracks);
  GospaSeries s;
  std::vector<Vec2> a, b;
  for (int frame : frame_union(g, t)) {
    a.clear();
    b.clear();
    for (const auto* r : at_frame(g, frame)) a.push_back(r->position);
    for (const auto* r : at_frame(t, frame)) b.push_back(r->position);
    s.frames.push_back(frame);
    s.values.push_back(gospa(a, b, cfg.gospa_p, cfg.gospa_c, cfg.gospa_alpha));
  }
  if (!s.values.empty()) {
    double sum = 0.0;
    for (double v : s.values) sum += v;
    s.mean = sum / static_cast<double>(s.values.size());
  }
  return s;
}

double nees_value(const Vec2& error, const Mat2& cov) {
  const Eigen::LDLT<Mat2> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error(ErrorKind::Numerical, "NEES covariance is not positive definite");
  return error.dot(ldlt.solve(error));
}

const char* to_string(NeesVerdict v) {
  switch (v) {
    case NeesVerdict::Calibrated: return "CALIBRATED";
    case NeesVerdict::Overconfident: return "OVERCONFIDENT";
    case NeesVerdict::Conservative: return "CONSERVATIVE";
  }
  return "UNKNOWN";
}

NeesReport nees_calibration(std::span<const NeesSample> samples, double level) {
  if (samples.empty()) throw Error(ErrorKind::Evaluation, "NEES test needs at least one matched sample");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::Config, "NEES confidence level must lie in (0, 1)");

  NeesReport r;
  r.samples = samples.size();
  std::size_t one = 0, two = 0;
  double sum = 0.0;
  for (const auto& s : samples) {
    const double e = nees_value(s.error, s.cov);
    sum += e;
    one += e <= 1.0;
    two += e <= 4.0;
  }
  const double n = static_cast<double>(samples.size());
  r.mean = sum / n;
  r.coverage_1sigma = static_cast<double>(one) / n;
  r.coverage_2sigma = static_cast<double>(two) / n;

  const boost::math::chi_squared dist(2.0 * n);
  const double tail = 0.5 * (1.0 - level);
  r.ci_low = boost::math::quantile(dist, tail) / n;
  r.ci_high = boost::math::quantile(dist, 1.0 - tail) / n;
  if (r.mean > r.ci_high) r.verdict = NeesVerdict::Overconfident;
  else if (r.mean < r.ci_low) r.verdict = NeesVerdict::Conservative;
  else r.verdict = NeesVerdict::Calibrated;
  return r;
}

std::vector<NeesSample> nees_samples(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks,
                                     const EvalConfig& cfg) {
  const FrameIndex g = index_by_frame(gt);
  const FrameIndex t = index_by_frame(tracks);
  std::vector<NeesSample> out;
  for (const auto& [frame, gts] : g) {
    const auto& ests = at_frame(t, frame);
    for (const auto& pr : gated_match(gts, ests, cfg.match_threshold)) {
      const ObjectRecord* e = ests[pr.col];
      if (!e->cov) continue;
      out.push_back({e->position - gts[pr.row]->position, *e->cov});
    }
  }
  return out;
}

std::vector<ObjectRecord> merge_track_tubes(std::span<const ObjectRecord> tracks, double max_distance, int max_gap) {
  struct Fragment {
    std::int64_t id;
    int start = 0, end = 0;
    Vec2 first = Vec2::Zero(), last = Vec2::Zero();
  };
  std::map<std::int64_t, Fragment> frags;
  for (const auto& r : tracks) {
    auto [it, fresh] = frags.try_emplace(r.id, Fragment{r.id, r.frame, r.frame, r.position, r.position});
    Fragment& f = it->second;
    if (fresh) continue;
    if (r.frame < f.start) {
      f.start = r.frame;
      f.first = r.position;
    }
    if (r.frame > f.end) {
      f.end = r.frame;
      f.last = r.position;
    }
  }

  std::vector<Fragment> order;
  for (const auto& [id, f] : frags) order.push_back(f);
  std::sort(order.begin(), order.end(),
            [](const Fragment& a, const Fragment& b) { return a.end != b.end ? a.end < b.end : a.id < b.id; });

  std::map<std::int64_t, std::int64_t> relabel;
  std::set<std::int64_t> adopted;
  for (const auto& a : order) {
    const Fragment* best = nullptr;
    double best_d = kInf;
    for (const auto& b : order) {
      if (b.id == a.id || adopted.contains(b.id)) continue;
      const int gap = b.start - a.end;
      if (gap <= 0 || gap > max_gap) continue;
      const double d = (b.first - a.last).norm();
      if (d > max_distance) continue;
      if (!best || gap < best->start - a.end || (gap == best->start - a.end && d < best_d)) {
        best = &b;
        best_d = d;
      }
    }
    if (!best) continue;
    adopted.insert(best->id);
    auto root = relabel.find(a.id);
    relabel[best->id] = root == relabel.end() ? a.id : root->second;
  }

  std::vector<ObjectRecord> out(tracks.begin(), tracks.end());
  for (auto& r : out) {
    auto it = relabel.find(r.id);
    if (it != relabel.end()) r.id = it->second;
  }
  return out;
}

EvalReport evaluate(std::span<const ObjectRecord> gt, std::span<const ObjectRecord> tracks, const EvalConfig& cfg) {
  cfg.validate();
  std::vector<ObjectRecord> g, t;
  for (const auto& r : gt)
    if (r.frame >= cfg.warmup_frames) g.push_back(r);
  for (const auto& r : tracks)
    if (r.frame >= cfg.warmup_frames) t.push_back(r);

  EvalReport rep;
  rep.clear = clear_mot(g, t, cfg);
  rep.id = idf1(g, t, cfg);
  rep.gospa = gospa_series(g, t, cfg);
  const std::vector<NeesSample> samples = nees_samples(g, t, cfg);
  if (!samples.empty()) rep.nees = nees_calibration(samples, cfg.nees_level);
  return rep;
}

std::string format_report(const EvalReport& r) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-8s %8s %8s %8s %8s %6s %6s %6s\n", "IDF1", "MOTA", "MOTP", "GOSPA", "matches",
                "FP", "FN", "IDSW");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-8.2f %8.2f %8.2f %8.4f %8zu %6zu %6zu %6zu\n", r.id.idf1, r.clear.mota,
                r.clear.motp, r.gospa.mean, r.clear.matches, r.clear.false_positives, r.clear.misses,
                r.clear.id_switches);
  out += buf;
  if (r.nees) {
    std::snprintf(buf, sizeof buf, "NEES mean %.3f  CI [%.3f, %.3f]  1sig %.1f%%  2sig %.1f%%  %s\n", r.nees->mean,
                  r.nees->ci_low, r.nees->ci_high, 100.0 * r.nees->coverage_1sigma,
                  100.0 * r.nees->coverage_2sigma, to_string(r.nees->verdict));
    out += buf;
  }
  return out;
}

}  // namespace bevtrack
