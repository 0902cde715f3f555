#include "bevtrack/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace bevtrack {

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

namespace {

// Hungarian method with row/column potentials for rows <= cols and finite
// costs. Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const std::size_t m = n == 0 ? 0 : a.front().size();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<AssignedPair> solve_assignment(const CostMatrix& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return {};

  if (cost.rows() > cost.cols()) {
    std::vector<AssignedPair> pairs = solve_assignment(cost.transposed());
    for (auto& pr : pairs) std::swap(pr.row, pr.col);
    std::sort(pairs.begin(), pairs.end(), [](const AssignedPair& a, const AssignedPair& b) { return a.row < b.row; });
    return pairs;
  }

  std::vector<std::size_t> live_rows;
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    bool any = false;
    for (std::size_t c = 0; c < cost.cols(); ++c) {
      const double x = cost(r, c);
      if (std::isnan(x)) throw Error(ErrorKind::Numerical, "cost matrix contains NaN");
      if (std::isfinite(x)) {
        any = true;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      } else if (x < 0) {
        throw Error(ErrorKind::Numerical, "cost matrix contains -inf");
      }
    }
    if (any) live_rows.push_back(r);
  }
  if (live_rows.empty()) return {};

  // Large enough that trading one infeasible pair for any number of finite
  // ones is always cheaper.
  const double big = hi + (hi - lo + 1.0) * static_cast<double>(live_rows.size() + 1);
  std::vector<std::vector<double>> a(live_rows.size(), std::vector<double>(cost.cols()));
  for (std::size_t i = 0; i < live_rows.size(); ++i)
    for (std::size_t c = 0; c < cost.cols(); ++c) {
      const double x = cost(live_rows[i], c);
      a[i][c] = std::isfinite(x) ? x : big;
    }

  const std::vector<std::size_t> cols = hungarian(a);
  std::vector<AssignedPair> out;
  for (std::size_t i = 0; i < live_rows.size(); ++i)
    if (std::isfinite(cost(live_rows[i], cols[i]))) out.push_back({live_rows[i], cols[i]});
  return out;
}

double assignment_cost(const CostMatrix& cost, std::span<const AssignedPair> pairs) {
  double total = 0.0;
  for (const auto& p : pairs) total += cost(p.row, p.col);
  return total;
}

double miss_cost(double p_D) { return -std::log(1.0 - std::min(p_D, 0.999)); }

CostMatrix augment_with_miss_columns(const CostMatrix& cost, std::span<const double> miss_costs) {
  if (miss_costs.size() != cost.rows())
    throw Error(ErrorKind::Numerical, "one miss cost per row is required");
  CostMatrix full(cost.rows(), cost.cols() + cost.rows(), kInf);
  for (std::size_t r = 0; r < cost.rows(); ++r) {
    for (std::size_t c = 0; c < cost.cols(); ++c) full(r, c) = cost(r, c);
    full(r, cost.cols() + r) = miss_costs[r];
  }
  return full;
}

}  // namespace bevtrack
