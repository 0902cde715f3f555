#include <gtest/gtest.h>

#include "bevtrack/metrics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>

using namespace bevtrack;

namespace {

std::vector<ObjectRecord> two_walkers(int frames) {
  std::vector<ObjectRecord> out;
  for (int f = 0; f < frames; ++f) {
    out.push_back({f, 1, Vec2(0.1 * f, 0.0)});
    out.push_back({f, 2, Vec2(0.1 * f, 5.0)});
  }
  return out;
}

// Brute-force GOSPA: every partial matching of truth to estimates.
double gospa_oracle(const std::vector<Vec2>& x, const std::vector<Vec2>& y, double p, double c, double alpha) {
  const double miss = std::pow(c, p) / alpha;
  double best = kInf;
  std::vector<bool> used(y.size(), false);
  std::function<void(std::size_t, double, std::size_t)> rec = [&](std::size_t i, double acc, std::size_t pairs) {
    if (i == x.size()) {
      const double unassigned = static_cast<double>(x.size() + y.size() - 2 * pairs);
      best = std::min(best, acc + miss * unassigned);
      return;
    }
    rec(i + 1, acc, pairs);
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double d = (x[i] - y[j]).norm();
      if (used[j] || d >= c) continue;
      used[j] = true;
      rec(i + 1, acc + std::pow(d, p), pairs + 1);
      used[j] = false;
    }
  };
  rec(0, 0.0, 0);
  return std::pow(best, 1.0 / p);
}

}  // namespace

TEST(ClearMot, PerfectTracks) {
  const auto gt = two_walkers(10);
  const ClearMotResult r = clear_mot(gt, gt, EvalConfig{});
  EXPECT_DOUBLE_EQ(r.mota, 100.0);
  EXPECT_DOUBLE_EQ(r.motp, 100.0);
  EXPECT_EQ(r.id_switches, 0u);
}

TEST(ClearMot, OneMissedFrame) {
  std::vector<ObjectRecord> gt, tracks;
  for (int f = 0; f < 10; ++f) {
    gt.push_back({f, 1, Vec2(f, 0)});
    if (f != 4) tracks.push_back({f, 9, Vec2(f, 0)});
  }
  const ClearMotResult r = clear_mot(gt, tracks, EvalConfig{});
  EXPECT_DOUBLE_EQ(r.mota, 90.0);
  EXPECT_EQ(r.misses, 1u);
}

TEST(ClearMot, SwapCountsTwoSwitches) {
  const auto gt = two_walkers(10);
  auto tracks = gt;
  for (auto& t : tracks)
    if (t.frame >= 5) t.id = t.id == 1 ? 2 : 1;
  const ClearMotResult r = clear_mot(gt, tracks, EvalConfig{});
  EXPECT_EQ(r.id_switches, 2u);
}

TEST(ClearMot, NoGroundTruthThrows) {
  const std::vector<ObjectRecord> tracks = {{0, 1, Vec2::Zero()}};
  try {
    clear_mot({}, tracks, EvalConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Evaluation);
  }
}

TEST(ClearMot, DistanceGate) {
  const std::vector<ObjectRecord> gt = {{0, 1, Vec2::Zero()}};
  const std::vector<ObjectRecord> tracks = {{0, 1, Vec2(1.5, 0)}};
  const ClearMotResult r = clear_mot(gt, tracks, EvalConfig{});
  EXPECT_EQ(r.misses, 1u);
  EXPECT_EQ(r.false_positives, 1u);
}

TEST(Idf1, FixedPoints) {
  const auto gt = two_walkers(10);
  EXPECT_DOUBLE_EQ(idf1(gt, gt, EvalConfig{}).idf1, 100.0);
  EXPECT_DOUBLE_EQ(idf1(gt, {}, EvalConfig{}).idf1, 0.0);
}

TEST(Idf1, MidSequenceSwapIsFifty) {
  const auto gt = two_walkers(10);
  auto tracks = gt;
  for (auto& t : tracks)
    if (t.frame >= 5) t.id = t.id == 1 ? 2 : 1;
  const Idf1Result r = idf1(gt, tracks, EvalConfig{});
  EXPECT_DOUBLE_EQ(r.idf1, 50.0);
  EXPECT_EQ(r.idtp, 10u);
  EXPECT_EQ(r.idfp, 10u);
  EXPECT_EQ(r.idfn, 10u);
}

TEST(Idf1, MatchesPermutationOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> pick(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    // Three GT objects; each track frame copies a random GT position.
    std::vector<ObjectRecord> gt, tracks;
    for (int f = 0; f < 12; ++f) {
      std::vector<int> perm = {1, 2, 3};
      std::shuffle(perm.begin(), perm.end(), rng);
      for (int g = 1; g <= 3; ++g) {
        gt.push_back({f, g, Vec2(10.0 * g, 0)});
        if (pick(rng) != 3) tracks.push_back({f, 100 + perm[g - 1], Vec2(10.0 * g, 0)});
      }
    }
    std::map<std::pair<int, int>, std::size_t> overlap;
    for (const auto& t : tracks)
      for (const auto& g : gt)
        if (g.frame == t.frame && (g.position - t.position).norm() <= 1.0) ++overlap[{static_cast<int>(g.id), static_cast<int>(t.id)}];
    std::vector<int> ids = {101, 102, 103};
    std::size_t best = 0;
    do {
      std::size_t tp = 0;
      for (int g = 1; g <= 3; ++g) tp += overlap[{g, ids[g - 1]}];
      best = std::max(best, tp);
    } while (std::next_permutation(ids.begin(), ids.end()));
    const double expected = 200.0 * best / static_cast<double>(gt.size() + tracks.size());
    EXPECT_NEAR(idf1(gt, tracks, EvalConfig{}).idf1, expected, 1e-9);
  }
}

TEST(Gospa, Cases) {
  const std::vector<Vec2> one = {Vec2(0, 0)};
  const std::vector<Vec2> none;
  const std::vector<Vec2> shifted = {Vec2(0.5, 0)};
  EXPECT_DOUBLE_EQ(gospa(one, one, 2, 1, 2), 0.0);
  EXPECT_NEAR(gospa(one, none, 2, 1, 2), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(gospa(one, none, 2, 1, 2), 0.7071, 1e-4);
  EXPECT_NEAR(gospa(one, shifted, 2, 1, 2), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(gospa(none, none, 2, 1, 2), 0.0);
}

TEST(Gospa, MatchesBruteForce) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 3);
  std::uniform_int_distribution<int> n(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Vec2> x(n(rng)), y(n(rng));
    for (auto& v : x) v = Vec2(u(rng), u(rng));
    for (auto& v : y) v = Vec2(u(rng), u(rng));
    EXPECT_NEAR(gospa(x, y, 2, 1, 2), gospa_oracle(x, y, 2, 1, 2), 1e-9);
  }
}

TEST(Nees, ValueAndErrors) {
  EXPECT_DOUBLE_EQ(nees_value(Vec2(1, 1), Mat2::Identity()), 2.0);
  EXPECT_THROW(nees_calibration({}, 0.95), Error);
}

TEST(Nees, VerdictsFromSyntheticErrors) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n(0, 1);
  Mat2 P;
  P << 0.4, 0.1, 0.1, 0.2;
  const Mat2 L = P.llt().matrixL();
  std::vector<NeesSample> matched, inflated, deflated;
  for (int i = 0; i < 20000; ++i) {
    const Vec2 e = L * Vec2(n(rng), n(rng));
    matched.push_back({e, P});
    inflated.push_back({e, 4.0 * P});
    deflated.push_back({e, 0.25 * P});
  }
  const NeesReport ok = nees_calibration(matched, 0.95);
  EXPECT_NEAR(ok.mean, 2.0, 0.05);
  EXPECT_EQ(ok.verdict, NeesVerdict::Calibrated);
  EXPECT_NEAR(ok.coverage_1sigma, 1.0 - std::exp(-0.5), 0.01);
  EXPECT_NEAR(ok.coverage_2sigma, 1.0 - std::exp(-2.0), 0.01);
  const NeesReport wide = nees_calibration(inflated, 0.95);
  EXPECT_NEAR(wide.mean, 0.5, 0.02);
  EXPECT_EQ(wide.verdict, NeesVerdict::Conservative);
  EXPECT_EQ(nees_calibration(deflated, 0.95).verdict, NeesVerdict::Overconfident);
}

TEST(TubeMerge, Gates) {
  std::vector<ObjectRecord> t;
  for (int f = 0; f <= 10; ++f) t.push_back({f, 1, Vec2(0, 0)});
  for (int f = 13; f <= 20; ++f) t.push_back({f, 2, Vec2(2, 0)});
  for (const auto& r : merge_track_tubes(t, 6.0, 5)) EXPECT_EQ(r.id, 1);

  std::vector<ObjectRecord> far_gap;
  for (int f = 0; f <= 10; ++f) far_gap.push_back({f, 1, Vec2(0, 0)});
  for (int f = 16; f <= 20; ++f) far_gap.push_back({f, 2, Vec2(0, 0)});
  const auto out = merge_track_tubes(far_gap, 6.0, 5);
  EXPECT_EQ(out.back().id, 2);
}

TEST(TubeMerge, ChainCollapsesToOneId) {
  std::vector<ObjectRecord> t;
  for (int f = 0; f <= 5; ++f) t.push_back({f, 1, Vec2(f, 0)});
  for (int f = 8; f <= 12; ++f) t.push_back({f, 2, Vec2(f, 0)});
  for (int f = 15; f <= 20; ++f) t.push_back({f, 3, Vec2(f, 0)});
  for (const auto& r : merge_track_tubes(t, 6.0, 5)) EXPECT_EQ(r.id, 1);
}

TEST(Evaluate, WarmupDropsEarlyFrames) {
  const auto gt = two_walkers(10);
  std::vector<ObjectRecord> tracks;
  for (const auto& r : gt)
    if (r.frame >= 1) tracks.push_back(r);
  EvalConfig cfg;
  EXPECT_LT(evaluate(gt, tracks, cfg).clear.mota, 100.0);
  cfg.warmup_frames = 1;
  const EvalReport r = evaluate(gt, tracks, cfg);
  EXPECT_DOUBLE_EQ(r.clear.mota, 100.0);
  EXPECT_DOUBLE_EQ(r.id.idf1, 100.0);
  EXPECT_DOUBLE_EQ(r.gospa.mean, 0.0);
}
