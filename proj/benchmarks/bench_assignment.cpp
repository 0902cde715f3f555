#include <benchmark/benchmark.h>

#include "bevtrack/assignment.hpp"

#include <random>

namespace {

bevtrack::CostMatrix random_matrix(std::size_t rows, std::size_t cols, double infeasible) {
  std::mt19937_64 rng(rows * 131 + cols);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::bernoulli_distribution drop(infeasible);
  bevtrack::CostMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = drop(rng) ? bevtrack::kInf : u(rng);
  return m;
}

void BM_SolveDense(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_matrix(n, n, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(bevtrack::solve_assignment(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveDense)->RangeMultiplier(2)->Range(4, 256)->Complexity();

// Gated matrices look like this: most pairs infeasible.
void BM_SolveSparse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_matrix(n, n + n / 2, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(bevtrack::solve_assignment(m));
}
BENCHMARK(BM_SolveSparse)->Arg(16)->Arg(64)->Arg(128);

}  // namespace
