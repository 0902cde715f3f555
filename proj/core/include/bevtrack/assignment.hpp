#pragma once

#include "bevtrack/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bevtrack {

/// Dense row-major cost matrix. +inf marks an infeasible pair.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kInf)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  CostMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct AssignedPair {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const AssignedPair&, const AssignedPair&) = default;
};

/// Exact minimum-cost one-to-one assignment (shortest augmenting path
/// Hungarian method). Rows with no finite entry stay unassigned; among the
/// rest the solver first maximises the number of feasible pairs, then
/// minimises total cost. Pairs are returned sorted by row.
std::vector<AssignedPair> solve_assignment(const CostMatrix& cost);

/// Sum of the assigned entries.
double assignment_cost(const CostMatrix& cost, std::span<const AssignedPair> pairs);

/// -log(1 - p_D) with p_D clamped to at most 0.999.
double miss_cost(double p_D);

/// [C | D] where D is a square block whose diagonal holds each row's miss
/// cost and whose off-diagonal entries are infeasible. Column
/// `cost.cols() + r` is row r's miss column.
CostMatrix augment_with_miss_columns(const CostMatrix& cost, std::span<const double> miss_costs);

}  // namespace bevtrack
