#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "margin_paths/loss_margin.hpp"
#include "margin_paths/predictor.hpp"
#include "margin_paths/solvers.hpp"

namespace mpaths {

struct KktTolerances {
  double support = -1.0;  // negative: default_support_tol(gamma_star)
  double primal = 1e-6;
  double stationarity = 1e-5;
  double licq = 1e-8;
  int nnls_max_iter = 100000;
};

/// First-order check of a unit direction for the max-min problem.
///
/// The multipliers absorb the joint scale of (theta, lambda): the residual is
/// |theta - sum_S lambda_n grad f_n(theta)| for unit theta, which equals the
/// residual after rescaling theta by the best positive scalar.
struct KktReport {
  SupportSet support;
  Eigen::VectorXd lambdas;  // aligned with support.indices
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  double licq_sigma_min = 0.0;
  bool licq_pass = false;
  bool pass = false;
  KktTolerances tols;
  std::string gamma_source;
  std::string scale_convention = "lambda absorbs the scale of theta; residual measured at |theta| = 1";
};

/// A violated constraint with an empty support fails without multipliers; throws
/// EmptySupport when every margin clears gamma_star by more than the support tolerance.
KktReport kkt_margin_check(const PredictorSpec& spec, const Eigen::VectorXd& theta_bar, const Dataset& data,
                           double gamma_star, const KktTolerances& tols = {},
                           const std::string& gamma_source = "solve_margin");

struct LicqResult {
  double sigma_min = 0.0;
  bool pass = false;
  std::size_t support_size = 0;
};

/// Smallest singular value of the support-gradient matrix; zero when the
/// support is larger than the parameter dimension. Support taken at the
/// smallest margin of theta_bar with tolerance `support_tol` (negative: default).
LicqResult licq_check(const PredictorSpec& spec, const Eigen::VectorXd& theta_bar, const Dataset& data, double tol,
                      double support_tol = -1.0);

/// Nonnegative least squares min_{x >= 0} |A x - b| by projected gradient from 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 100000, double tol = 1e-15);

struct StationarityResult {
  double alignment_residual = 0.0;
  double norm_residual = 0.0;
  bool zero_gradient = false;
  bool pass = false;
};

/// Compares -grad L(rho theta) with theta / |theta|. The gradient direction is
/// computed from normalized softmin weights so it survives loss underflow.
StationarityResult constrained_stationarity(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho,
                                            const Dataset& data, double align_tol = 1e-6, double norm_tol = 1e-9);

struct AlignmentPoint {
  double t = 0.0;
  double cosine = 0.0;
  double residual = 0.0;
};

struct AlignmentSeries {
  std::vector<AlignmentPoint> points;
  /// Surrogate for t -> infinity: the last three residuals are nonincreasing and
  /// the last is below tol. Empty for runs with fewer than three checkpoints.
  std::optional<bool> directionally_stationary;
};

AlignmentSeries alignment_series(const PredictorSpec& spec, const Dataset& data, const SweepResult& opt_run,
                                 double tol = 1e-3);

void write_kkt_json(std::ostream& os, const KktReport& report);

}  // namespace mpaths
