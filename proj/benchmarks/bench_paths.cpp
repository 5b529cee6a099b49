#include <random>

#include <benchmark/benchmark.h>

#include "margin_paths/ensemble.hpp"
#include "margin_paths/harness.hpp"
#include "margin_paths/loss_margin.hpp"
#include "margin_paths/solvers.hpp"

using namespace mpaths;

namespace {

Dataset gaussian(std::size_t d, std::size_t n) { return harness::generate_dataset("separable_gaussian", d, n, 1); }

void BM_ExpLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = gaussian(8, n);
  const auto spec = PredictorSpec::single(Family::product(2), 8);
  std::mt19937_64 rng(0);
  const Eigen::VectorXd theta = sample_sphere(spec.total_dim(), NormTag::L2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(exp_loss(spec, theta, 100.0, data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ExpLoss)->Arg(16)->Arg(256)->Arg(4096);

void BM_SolveConstrained(benchmark::State& state) {
  const Dataset data = gaussian(3, 8);
  const auto spec = PredictorSpec::single(Family::linear(), 3);
  SolverOptions o;
  o.norm = static_cast<NormTag>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_constrained(spec, data, 64.0, o));
}
BENCHMARK(BM_SolveConstrained)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SolveMargin(benchmark::State& state) {
  const Dataset data = gaussian(3, 8);
  const auto spec = PredictorSpec::single(Family::product(2), 3);
  SolverOptions o;
  for (auto _ : state) benchmark::DoNotOptimize(solve_margin(spec, data, 1.0, o));
}
BENCHMARK(BM_SolveMargin)->Unit(benchmark::kMillisecond);

void BM_GridOracle(benchmark::State& state) {
  const Dataset data = gaussian(static_cast<std::size_t>(state.range(0)), 8);
  const auto spec = PredictorSpec::single(Family::linear(), data.dim());
  const double res = state.range(0) == 2 ? 1e-4 : 2e-2;
  for (auto _ : state) benchmark::DoNotOptimize(grid_oracle(spec, data, NormTag::L2, res));
}
BENCHMARK(BM_GridOracle)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_LimitProblem(benchmark::State& state) {
  const Dataset data = harness::generate_dataset("svm_asym", 2, 4, 0);
  const PredictorSpec spec({Family::linear(), Family::squared_bias()}, 2);
  EnsembleOptions eo;
  for (auto _ : state) benchmark::DoNotOptimize(limit_problem_solve(spec, data, eo));
}
BENCHMARK(BM_LimitProblem)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
