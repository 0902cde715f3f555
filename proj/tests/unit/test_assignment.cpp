#include <gtest/gtest.h>

#include "bevtrack/assignment.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace bevtrack;

namespace {

struct Best {
  std::size_t count = 0;
  double cost = kInf;
};

// Enumerates every partial one-to-one assignment over finite entries and
// keeps the lexicographic optimum (most pairs, then lowest row-order sum).
Best brute_force(const CostMatrix& c) {
  Best best;
  std::vector<bool> used(c.cols(), false);
  std::vector<double> picked;
  std::function<void(std::size_t)> rec = [&](std::size_t r) {
    if (r == c.rows()) {
      double sum = 0;
      for (double v : picked) sum += v;
      if (picked.size() > best.count || (picked.size() == best.count && sum < best.cost)) best = {picked.size(), sum};
      return;
    }
    rec(r + 1);
    for (std::size_t j = 0; j < c.cols(); ++j) {
      if (used[j] || !std::isfinite(c(r, j))) continue;
      used[j] = true;
      picked.push_back(c(r, j));
      rec(r + 1);
      picked.pop_back();
      used[j] = false;
    }
  };
  rec(0);
  if (best.count == 0) best.cost = 0;
  return best;
}

CostMatrix from(std::initializer_list<std::initializer_list<double>> rows) {
  CostMatrix c(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (double v : row) c(r, j++) = v;
    ++r;
  }
  return c;
}

}  // namespace

TEST(SolveAssignment, DiagonalOptimum) {
  const auto p = solve_assignment(from({{0, 1}, {1, 0}}));
  EXPECT_EQ(p, (std::vector<AssignedPair>{{0, 0}, {1, 1}}));
}

TEST(SolveAssignment, AntiDiagonal) {
  const CostMatrix c = from({{4, 1}, {2, 3}});
  const auto p = solve_assignment(c);
  EXPECT_EQ(p, (std::vector<AssignedPair>{{0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(assignment_cost(c, p), 3.0);
}

TEST(SolveAssignment, InfeasibleRowUnassigned) {
  const auto p = solve_assignment(from({{kInf, kInf}, {1, 2}}));
  EXPECT_EQ(p, (std::vector<AssignedPair>{{1, 0}}));
}

TEST(SolveAssignment, Empty) {
  EXPECT_TRUE(solve_assignment(CostMatrix(0, 3)).empty());
  EXPECT_TRUE(solve_assignment(CostMatrix(3, 0)).empty());
}

TEST(MissCost, Arithmetic) {
  EXPECT_NEAR(miss_cost(0.9), 2.302585, 1e-6);
  EXPECT_NEAR(miss_cost(1.0), -std::log(1.0 - 0.999), 1e-12);
}

TEST(MissColumns, SingleTrackNoGate) {
  CostMatrix c(1, 1, kInf);
  const std::vector<double> miss = {miss_cost(0.9)};
  const CostMatrix aug = augment_with_miss_columns(c, miss);
  ASSERT_EQ(aug.cols(), 2u);
  EXPECT_EQ(solve_assignment(aug), (std::vector<AssignedPair>{{0, 1}}));
}

TEST(MissColumns, TwoTracksOneMeasurement) {
  CostMatrix c = from({{0.5}, {0.5}});
  const std::vector<double> miss = {miss_cost(0.9), miss_cost(0.9)};
  const CostMatrix aug = augment_with_miss_columns(c, miss);
  const auto p = solve_assignment(aug);
  ASSERT_EQ(p.size(), 2u);
  int matched = 0;
  for (const auto& pr : p) matched += pr.col == 0;
  EXPECT_EQ(matched, 1);
  EXPECT_NEAR(assignment_cost(aug, p), 0.5 + miss_cost(0.9), 1e-12);
  EXPECT_DOUBLE_EQ(assignment_cost(aug, p), brute_force(aug).cost);
}

class AssignmentOracle : public ::testing::TestWithParam<int> {};

TEST_P(AssignmentOracle, MatchesBruteForce) {
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> val(-5, 20), coin(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = dim(rng), c = dim(rng);
    const double p_inf = coin(rng) < 0.5 ? 0.0 : 0.3;
    CostMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = coin(rng) < p_inf ? kInf : val(rng);
    const auto pairs = solve_assignment(m);
    const Best oracle = brute_force(m);
    ASSERT_EQ(pairs.size(), oracle.count);
    EXPECT_EQ(assignment_cost(m, pairs), oracle.cost);
    std::vector<bool> col_used(c, false);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      EXPECT_TRUE(std::isfinite(m(pairs[k].row, pairs[k].col)));
      EXPECT_FALSE(col_used[pairs[k].col]);
      col_used[pairs[k].col] = true;
      if (k) {
        EXPECT_LT(pairs[k - 1].row, pairs[k].row);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AssignmentOracle, ::testing::Range(1, 21));
