#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "margin_paths/errors.hpp"
#include "margin_paths/stationarity.hpp"
#include "support/oracles.hpp"

using namespace mpaths;

namespace {

const PredictorSpec kLin = PredictorSpec::single(Family::linear(), 2);

Dataset pair() {
  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 0, 1;
  return Dataset(x, {1, 1});
}

Dataset single() {
  Eigen::MatrixXd x(1, 2);
  x << 1, 0;
  return Dataset(x, {1});
}

const Eigen::Vector2d kDiag = Eigen::Vector2d(1.0, 1.0) / std::sqrt(2.0);

}  // namespace

TEST(Kkt, SingleSample) {
  const KktReport r = kkt_margin_check(kLin, Eigen::Vector2d(1.0, 0.0), single(), 1.0);
  ASSERT_EQ(r.lambdas.size(), 1);
  EXPECT_NEAR(r.lambdas[0], 1.0, 1e-12);
  EXPECT_NEAR(r.stationarity_residual, 0.0, 1e-12);
  EXPECT_NEAR(r.primal_residual, 0.0, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Kkt, SymmetricPair) {
  const KktReport r = kkt_margin_check(kLin, kDiag, pair(), 1.0 / std::sqrt(2.0));
  ASSERT_EQ(r.support.indices.size(), 2u);
  // 2x2 system [z1 z2] lambda = theta
  Eigen::Matrix2d a;
  a << 1, 0, 0, 1;
  const Eigen::Vector2d exact = a.colPivHouseholderQr().solve(kDiag);
  EXPECT_NEAR(r.lambdas[0], exact[0], 1e-8);
  EXPECT_NEAR(r.lambdas[1], exact[1], 1e-8);
  EXPECT_LE(r.stationarity_residual, 1e-8);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.scale_convention.empty());
  std::ostringstream os;
  write_kkt_json(os, r);
  EXPECT_NE(os.str().find("\"pass\": true"), std::string::npos);
}

TEST(Kkt, NonOptimalDirectionFails) {
  const KktReport r = kkt_margin_check(kLin, Eigen::Vector2d(1.0, 0.0), pair(), 1.0 / std::sqrt(2.0));
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.primal_residual, 0.5);
  EXPECT_EQ(r.lambdas.size(), 0);
}

TEST(Kkt, Errors) {
  Eigen::MatrixXd x(1, 2);
  x << 0.5, 0.5;
  const Dataset pos(x, {1});
  EXPECT_THROW(kkt_margin_check(PredictorSpec::single(Family::log_wrap(), 2), kDiag, pos, 0.0), NonSmoothSpec);
  EXPECT_THROW(kkt_margin_check(kLin, kDiag, pair(), 0.1), EmptySupport);
}

TEST(KktProperty, RandomDirectionsFail) {
  Eigen::MatrixXd x(3, 2);
  x << 1.0, 0.3, 0.2, 1.0, -0.6, -0.9;
  const Dataset d(x, {1, 1, -1});
  SolverOptions so;
  const PathRecord best = solve_margin(kLin, d, 1.0, so);
  ASSERT_TRUE(kkt_margin_check(kLin, best.theta.values(), d, best.min_margin()).pass);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd u = sample_sphere(2, NormTag::L2, rng);
    EXPECT_FALSE(kkt_margin_check(kLin, u, d, best.min_margin()).pass) << u.transpose();
  }
}

TEST(Licq, Examples) {
  EXPECT_NEAR(licq_check(kLin, Eigen::Vector2d(1.0, 0.0), single(), 1e-8).sigma_min, 1.0, 1e-12);

  Eigen::MatrixXd x(2, 2);
  x << 1, 0, 2, 0;
  // theta = (1,0) has margins 1 and 2; widen the support to include both rows
  const LicqResult dep = licq_check(kLin, Eigen::Vector2d(1.0, 0.0), Dataset(x, {1, 1}), 1e-8, 1.5);
  EXPECT_EQ(dep.support_size, 2u);
  EXPECT_NEAR(dep.sigma_min, 0.0, 1e-12);
  EXPECT_FALSE(dep.pass);

  const LicqResult sym = licq_check(kLin, kDiag, pair(), 1e-8);
  EXPECT_NEAR(sym.sigma_min, 1.0, 1e-12);
  EXPECT_TRUE(sym.pass);
}

TEST(LicqProperty, MatchesDenseSvd) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int d = 1; d <= 8; ++d) {
    for (int n = 1; n <= 8; ++n) {
      Eigen::MatrixXd x(n, d);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) x(i, k) = g(rng);
      const auto spec = PredictorSpec::single(Family::linear(), static_cast<std::size_t>(d));
      const Eigen::VectorXd theta = sample_sphere(static_cast<std::size_t>(d), NormTag::L2, rng);
      // huge support tolerance puts every sample in the support
      const LicqResult r = licq_check(spec, theta, Dataset(x, std::vector<int>(static_cast<std::size_t>(n), 1)),
                                      1e-8, 1e6);
      ASSERT_EQ(r.support_size, static_cast<std::size_t>(n));
      const double expect = n > d ? 0.0 : oracles::smallest_singular_value(x);
      EXPECT_NEAR(r.sigma_min, expect, 1e-10) << n << "x" << d;
    }
  }
}

TEST(Nnls, MatchesEnumeration) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const int rows = 3 + trial % 4, cols = 1 + trial % 5;
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) {
      b[i] = g(rng);
      for (int k = 0; k < cols; ++k) a(i, k) = g(rng);
    }
    const Eigen::VectorXd got = nnls(a, b);
    const Eigen::VectorXd want = oracles::nnls_enumerate(a, b);
    EXPECT_GE(got.minCoeff(), 0.0);
    EXPECT_NEAR((a * got - b).norm(), (a * want - b).norm(), 1e-8);
  }
}

TEST(ConstrainedStationarity, Examples) {
  for (double rho : {1.0, 10.0, 1e4}) {
    const auto r = constrained_stationarity(kLin, Eigen::Vector2d(1.0, 0.0), rho, single());
    EXPECT_NEAR(r.alignment_residual, 0.0, 1e-15);
    EXPECT_TRUE(r.pass);
  }
  EXPECT_LE(constrained_stationarity(kLin, kDiag, 10.0, pair()).alignment_residual, 1e-9);
  EXPECT_GT(constrained_stationarity(kLin, Eigen::Vector2d(1.0, 0.0), 10.0, pair()).alignment_residual, 0.1);

  // gradient far below double range still yields a direction
  const auto deep = constrained_stationarity(kLin, kDiag, 1e5, pair());
  EXPECT_LE(deep.alignment_residual, 1e-9);

  const auto off = constrained_stationarity(kLin, 2.0 * kDiag, 10.0, pair());
  EXPECT_NEAR(off.norm_residual, 1.0, 1e-12);
  EXPECT_FALSE(off.pass);
}

TEST(AlignmentSeries, OptimizationRun) {
  OptimizationOptions oo;
  oo.steps = 100000;
  const SweepResult run = optimization_path(kLin, pair(), Eigen::Vector2d(0.4, -0.1), oo);
  const AlignmentSeries s = alignment_series(kLin, pair(), run);
  ASSERT_EQ(s.points.size(), run.records.size());
  EXPECT_GE(s.points.back().cosine, 1.0 - 1e-4);
  ASSERT_TRUE(s.directionally_stationary.has_value());
  EXPECT_TRUE(*s.directionally_stationary);

  const Eigen::VectorXd dir = run.records.back().direction();
  KktTolerances t;
  t.support = 1e-3;
  t.primal = 1e-4;
  t.stationarity = 1e-4;
  EXPECT_TRUE(kkt_margin_check(kLin, dir, pair(), 1.0 / std::sqrt(2.0), t).pass);

  // thinning the checkpoints by 2 keeps the verdict
  SweepResult thin = run;
  thin.records.clear();
  for (std::size_t i = run.records.size() % 2 ? 0 : 1; i < run.records.size(); i += 2) thin.records.push_back(run.records[i]);
  EXPECT_EQ(alignment_series(kLin, pair(), thin).directionally_stationary, s.directionally_stationary);
}

TEST(AlignmentSeries, ShortRunHasNoVerdict) {
  OptimizationOptions oo;
  oo.steps = 1;
  const SweepResult run = optimization_path(kLin, pair(), Eigen::Vector2d(0.4, -0.1), oo);
  const AlignmentSeries s = alignment_series(kLin, pair(), run);
  EXPECT_EQ(s.points.size(), 1u);
  EXPECT_FALSE(s.directionally_stationary.has_value());
}
