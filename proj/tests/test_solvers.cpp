#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "margin_paths/errors.hpp"
#include "margin_paths/solvers.hpp"
#include "support/oracles.hpp"

using namespace mpaths;

namespace {

Dataset make(std::initializer_list<std::array<double, 2>> rows, std::vector<int> y) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::Index i = 0;
  for (const auto& r : rows) x.row(i++) << r[0], r[1];
  return Dataset(x, std::move(y));
}

const Dataset kPair = make({{1, 0}, {0, 1}}, {1, 1});
const PredictorSpec kLin = PredictorSpec::single(Family::linear(), 2);
const Eigen::Vector2d kDiag = Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0);

SolverOptions opts(NormTag norm = NormTag::L2, std::uint64_t seed = 1) {
  SolverOptions o;
  o.norm = norm;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(SolveConstrained, SingleSample) {
  const Dataset one = make({{1, 0}}, {1});
  for (double rho : {1.0, 7.0, 300.0}) {
    const PathRecord r = solve_constrained(kLin, one, rho, opts());
    ASSERT_TRUE(r.ok()) << r.status;
    EXPECT_NEAR(r.theta.values()[0], 1.0, 1e-6);
    EXPECT_NEAR(r.log_loss, -rho, 1e-6 * rho);
  }
}

TEST(SolveConstrained, SymmetricPairMatchesGridOracle) {
  const auto [arg, best] = oracles::circle_max_min(kPair.signed_features(), 62832);
  const PathRecord r = solve_constrained(kLin, kPair, 10.0, opts());
  ASSERT_TRUE(r.ok());
  EXPECT_LE((r.theta.values() - arg).norm(), 1e-3);
  const PathRecord m = solve_margin(kLin, kPair, 10.0, opts());
  EXPECT_LE(m.min_margin() - r.min_margin(), std::log(2.0));
  EXPECT_NEAR(m.min_margin(), 10.0 * best, 1e-3);
}

TEST(SolveMargin, Examples) {
  const Dataset one = make({{0.6, -0.8}}, {1});
  const PathRecord a = solve_constrained(kLin, one, 5.0, opts());
  const PathRecord b = solve_margin(kLin, one, 5.0, opts());
  EXPECT_LE((a.theta.values() - b.theta.values()).norm(), 1e-6);

  EXPECT_NEAR(solve_margin(kLin, kPair, 1.0, opts()).min_margin(), 1.0 / std::sqrt(2.0), 1e-4);

  const Dataset lex = make({{1, 0}, {1, 1}}, {1, 1});
  const PathRecord li = solve_margin(kLin, lex, 1.0, opts(NormTag::Linf));
  EXPECT_NEAR(li.min_margin(), 1.0, 1e-6);
  EXPECT_NEAR(li.theta.values()[0], 1.0, 1e-6);
  EXPECT_GE(li.theta.values()[1], -1e-6);
  EXPECT_LE(li.theta.values()[1], 1.0 + 1e-6);
}

TEST(SolveMargin, LogFamilyIsScaleShift) {
  const Dataset pos = make({{0.5, 0.9}, {0.8, 0.2}, {0.4, 0.4}}, {1, 1, 1});
  const auto lw = PredictorSpec::single(Family::log_wrap(), 2);
  const double g1 = solve_margin(lw, pos, 1.0, opts()).min_margin();
  const double g10 = solve_margin(lw, pos, 10.0, opts()).min_margin();
  EXPECT_NEAR(g10 - g1, std::log(10.0), 1e-12);
}

TEST(Sweep, HomogeneousRateOnPair) {
  const auto grid = geometric_grid(1.0, 2.0, 9);
  EXPECT_DOUBLE_EQ(grid.back(), 256.0);
  const SweepResult s = sweep(PathKind::Constrained, kLin, kPair, grid, opts());
  const double g1 = 1.0 / std::sqrt(2.0);
  for (const auto& r : s.records) {
    ASSERT_TRUE(r.ok()) << r.status;
    EXPECT_LE(g1 - margin(kLin, r.theta.values(), 1.0, kPair), std::log(2.0) / r.scale + 1e-9);
  }
  EXPECT_EQ(sweep(PathKind::Margin, kLin, kPair, {3.0}, opts()).records.size(), 1u);
  EXPECT_THROW(sweep(PathKind::Regularization, kLin, kPair, grid, opts()), SpecError);
}

TEST(SweepProperty, RecordsAreUnitNormAndGapBounded) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  for (int inst = 0; inst < 4; ++inst) {
    const int n = 2 + inst;
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) x.row(i) << std::abs(g(rng)) + 0.1, g(rng);
    const Dataset d(x, std::vector<int>(static_cast<std::size_t>(n), 1));
    for (NormTag tag : {NormTag::L2, NormTag::L1, NormTag::Linf}) {
      const auto grid = geometric_grid(1.0, 4.0, 5);
      const SweepResult c = sweep(PathKind::Constrained, kLin, d, grid, opts(tag, inst));
      const SweepResult m = sweep(PathKind::Margin, kLin, d, grid, opts(tag, inst));
      for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_TRUE(c.records[i].ok() && m.records[i].ok());
        EXPECT_NEAR(c.records[i].theta.norm(), 1.0, 1e-9);
        EXPECT_NEAR(m.records[i].theta.norm(), 1.0, 1e-9);
        EXPECT_EQ(c.records[i].profile.scale, grid[i]);
        EXPECT_LE(m.records[i].min_margin() - c.records[i].min_margin(), std::log(n) + 1e-6);
      }
    }
  }
}

TEST(Sweep, DeterministicForSeed) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.2, 0.3, 1, -0.5, -1;
  const Dataset d(x, {1, 1, -1});
  const auto spec = PredictorSpec::single(Family::product(2), 2);
  const auto grid = geometric_grid(1.0, 2.0, 5);
  std::ostringstream a, b;
  write_sweep_csv(a, sweep(PathKind::Constrained, spec, d, grid, opts(NormTag::L2, 9)), {"h"});
  write_sweep_csv(b, sweep(PathKind::Constrained, spec, d, grid, opts(NormTag::L2, 9)), {"h"});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("# h\nkind,scale", 0), 0u);
  EXPECT_NE(derive_seed(9, 0), derive_seed(9, 1));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(AssumptionFlags, FromRecords) {
  const SweepResult s = sweep(PathKind::Constrained, kLin, kPair, geometric_grid(1.0, 2.0, 4), opts());
  EXPECT_TRUE(s.flags.loss_strictly_decreasing);
  EXPECT_TRUE(s.flags.margin_strictly_increasing);
  std::vector<PathRecord> recs = s.records;
  recs[2].log_loss = recs[1].log_loss;
  EXPECT_FALSE(assumption_flags(recs).loss_strictly_decreasing);
}

TEST(OptimizationPath, ConvergesInDirection) {
  OptimizationOptions oo;
  oo.steps = 100000;
  const SweepResult run = optimization_path(kLin, kPair, Eigen::Vector2d(0.3, -0.2), oo);
  ASSERT_FALSE(run.records.empty());
  EXPECT_FALSE(run.diverged);
  const auto& last = run.records.back();
  EXPECT_EQ(last.scale, 100000.0);
  EXPECT_LE((last.direction() - kDiag).norm(), 1e-2);
  // loss decreases monotonically after the first checkpoints
  for (std::size_t i = 5; i < run.records.size(); ++i) EXPECT_LT(run.records[i].log_loss, run.records[i - 1].log_loss);
}

TEST(OptimizationPath, StationaryStartStaysPut) {
  OptimizationOptions oo;
  oo.steps = 1;
  oo.eta = 1e-9;
  const SweepResult run = optimization_path(kLin, kPair, 10.0 * kDiag, oo);
  EXPECT_LE((run.records.back().direction() - kDiag).norm(), 1e-12);
}

TEST(RegularizationPath, NormGrowsAndMatchesConstrained) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.2, 0.3, 1, -0.5, -1;
  const Dataset d(x, {1, 1, -1});
  const SweepResult rp = regularization_path(kLin, d, {10.0, 100.0, 1000.0, 10000.0}, opts());
  for (std::size_t i = 0; i < rp.records.size(); ++i) {
    const auto& r = rp.records[i];
    ASSERT_TRUE(r.ok());
    if (i) {
      EXPECT_GT(r.norm, rp.records[i - 1].norm);
    }
    const PathRecord c = solve_constrained(kLin, d, r.norm, opts());
    EXPECT_NEAR(smoothed_log_loss(kLin, r.direction(), r.norm, 1.0, d, nullptr), c.log_loss, 1e-6);
    EXPECT_LE((r.direction() - c.direction()).norm(), 1e-4);
  }
  EXPECT_THROW(regularization_path(kLin, d, {10.0, 5.0}, opts()), SpecError);
  EXPECT_THROW(regularization_path(kLin, d, {10.0}, opts(NormTag::L1)), SpecError);
}

TEST(GridOracle, Examples) {
  const GridOracleResult g = grid_oracle(kLin, kPair, NormTag::L2, 1e-4);
  EXPECT_LE((g.points[g.best_index] - kDiag).norm(), 1e-4);
  EXPECT_NEAR(g.best_margin, 1.0 / std::sqrt(2.0), 1e-4);

  const Dataset one = make({{1, 0}}, {1});
  const GridOracleResult e = grid_oracle(kLin, one, NormTag::Linf, 1e-2);
  // every edge point (1, t) is in the argmax
  for (double t = -1.0; t <= 1.0; t += 0.05) {
    bool covered = false;
    for (std::size_t i : e.argmax)
      covered = covered || (e.points[i] - Eigen::Vector2d(1.0, t)).lpNorm<Eigen::Infinity>() <= 1e-2;
    EXPECT_TRUE(covered) << t;
  }
  EXPECT_THROW(grid_oracle(PredictorSpec::single(Family::linear(), 4), Dataset(Eigen::MatrixXd::Ones(1, 4), {1}),
                           NormTag::L2, 1e-2),
               DimensionTooLarge);
}

TEST(GridOracleProperty, DominatedBySolveMargin) {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g;
  for (int inst = 0; inst < 5; ++inst) {
    Eigen::MatrixXd x(3, 2);
    for (int i = 0; i < 3; ++i) x.row(i) << g(rng), g(rng);
    const Dataset d(x, {1, -1, 1});
    for (NormTag tag : {NormTag::L2, NormTag::Linf, NormTag::L1}) {
      const GridOracleResult o = grid_oracle(kLin, d, tag, 1e-3);
      const PathRecord m = solve_margin(kLin, d, 1.0, opts(tag, inst));
      EXPECT_GE(m.min_margin(), o.best_margin - o.discretization_bound - 1e-9);
      EXPECT_GE(o.best_margin, m.min_margin() - o.discretization_bound - 1e-9);
    }
  }
}

TEST(Lexicographic, DemoChain) {
  const Dataset lex = make({{1, 0}, {1, 1}}, {1, 1});
  LexOptions lo;
  lo.norm = NormTag::Linf;
  const auto chain = lexicographic_solve(kLin, lex, lo);
  ASSERT_EQ(chain.size(), 2u);
  EXPECT_NEAR(chain[0].margin, 1.0, 1e-9);
  EXPECT_NEAR(chain[0].lower[1], 0.0, 2e-3);
  EXPECT_NEAR(chain[0].upper[1], 1.0, 2e-3);
  for (const auto& s : chain[1].survivors) EXPECT_LE((s - Eigen::Vector2d(1.0, 1.0)).norm(), 1e-2);
  // nesting
  for (const auto& s : chain[1].survivors) {
    bool found = false;
    for (const auto& p : chain[0].survivors) found = found || (p - s).norm() == 0.0;
    EXPECT_TRUE(found);
  }
  const PathRecord c = solve_constrained(kLin, lex, 2048.0, opts(NormTag::Linf));
  EXPECT_LE((c.direction() - Eigen::Vector2d(1.0, 1.0)).norm(), 1e-2);

  const auto single = lexicographic_solve(kLin, make({{0.3, 0.4}}, {1}), lo);
  EXPECT_EQ(single.size(), 1u);

  lo.level_tol = 1e-9;
  EXPECT_THROW(lexicographic_solve(kLin, lex, lo), ResolutionTooCoarse);
}

TEST(Pareto, Examples) {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0.2, 0.3, 1, -0.5, -1;
  const Dataset d(x, {1, 1, -1});
  const SweepResult s = sweep(PathKind::Constrained, kLin, d, geometric_grid(1.0, 2.0, 6), opts());
  std::vector<std::pair<double, double>> samples;
  for (const auto& r : s.records) samples.emplace_back(r.scale, r.log_loss);
  const ParetoReport rep = pareto_cross_check(kLin, d, samples, 1e-4, opts());
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.monotonicity_violated);
  for (const auto& p : rep.points) EXPECT_LE(p.error, 1e-4);

  auto dup = samples;
  dup[3].second = dup[2].second;
  const ParetoReport v = pareto_cross_check(kLin, d, dup, 1e-4, opts());
  EXPECT_TRUE(v.monotonicity_violated);
  EXPECT_FALSE(v.points[2].checked);

  const ParetoReport one = pareto_cross_check(kLin, d, {samples[0]}, 1e-4, opts());
  EXPECT_TRUE(one.pass);
}
