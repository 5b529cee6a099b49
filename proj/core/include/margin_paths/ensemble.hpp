#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "margin_paths/predictor.hpp"
#include "margin_paths/solvers.hpp"

namespace mpaths {

/// w_k = rho * theta_k * gamma^(-1/alpha_k) for each block.
struct BlockRescaling {
  std::vector<Eigen::VectorXd> w_blocks;
  double gamma_used = 1.0;
  double rho_used = 1.0;
  std::vector<Rational> degrees;

  Eigen::VectorXd flat() const;
  std::vector<double> block_norms() const;
};

BlockRescaling rescale_blocks(const ParamPoint& theta, const PredictorSpec& spec, double rho, double gamma);

struct EnsembleOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  int max_iter = 4000;
  /// Quadratic-penalty weights, applied in order with warm starts.
  std::vector<double> penalties = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
  /// Scales tried by the preliminary max-min feasibility check.
  std::vector<double> feasibility_rhos = {1.0, 4.0, 16.0, 64.0, 256.0};
  /// Also minimize |w_2|^2 among |w_1|^2-optimal points (exploratory).
  bool explore_conjecture = false;
  SolverOptions margin_solver;
};

struct EnsembleSolution {
  Eigen::VectorXd w;
  std::vector<Eigen::VectorXd> blocks;
  /// Block weights used in the objective, block 0 normalized to 1.
  std::vector<double> weights;
  double objective = 0.0;
  double w1_norm_sq = 0.0;
  /// min_n f_n(w) after the feasibility polish; >= 1 when feasible.
  double min_constraint = 0.0;
  bool feasible = false;
  bool converged = false;
  std::optional<double> w2_norm_sq_secondary;
};

/// min |w_1|^2 s.t. f_n(w) >= 1, deeper blocks unpenalized. Throws Infeasible
/// when no tried scale gives a positive max-min margin.
EnsembleSolution limit_problem_solve(const PredictorSpec& spec, const Dataset& data, const EnsembleOptions& opts);

/// min sum_k gamma^(2/alpha_k) |w_k|^2 s.t. f_n(w) >= 1, solved with the
/// objective divided by gamma^(2/alpha_1). Requires gamma >= 1.
EnsembleSolution finite_gamma_solve(const PredictorSpec& spec, const Dataset& data, double gamma,
                                    const EnsembleOptions& opts);

struct DiscardRow {
  double rho = 0.0;
  double gamma_star = 0.0;
  std::vector<double> block_norms;
};

struct DiscardMetric {
  std::vector<DiscardRow> rows;
  /// Records skipped because gamma*(rho) <= 0 or the solve failed.
  std::vector<std::string> notes;
};

/// Rescales each constrained record with gamma*(rho) taken from the margin
/// sweep at the same scale.
DiscardMetric shallow_discard_metric(const PredictorSpec& spec, const SweepResult& constrained,
                                     const SweepResult& margin);

void write_discard_csv(std::ostream& os, const DiscardMetric& metric, const std::vector<std::string>& header_lines);

/// min |w|^2 s.t. a_n^T w >= c_n by enumerating active sets (small problems).
/// Returns nullopt when infeasible.
std::optional<Eigen::VectorXd> min_norm_qp(const Eigen::MatrixXd& rows, const Eigen::VectorXd& rhs);

struct SvmBiasOptions {
  std::vector<double> rho_grid = geometric_grid(1.0, 2.0, 12);
  SolverOptions solver;
};

struct SvmBiasReport {
  Eigen::VectorXd w;        // rescaled linear block
  double b = 0.0;           // rescaled bias root, canonicalized >= 0
  double beta = 0.0;        // b^2
  double margin = 0.0;      // min_n y_n (w^T x_n + beta)
  double rho_used = 0.0;
  double gamma_used = 0.0;
  Eigen::VectorXd oracle_w;
  double oracle_beta = 0.0;
  double oracle_gap = 0.0;
  Eigen::VectorXd augmented_w;
  double augmented_bias = 0.0;
  /// Direction distance between `w` and the regularized-bias SVM weights.
  double augmented_gap = 0.0;
};

/// Oracle for min |w|^2 s.t. y_n (w^T x_n + beta) >= 1 over beta >= 0: golden
/// section on the convex value function in beta, exact inner QP.
std::pair<Eigen::VectorXd, double> svm_bias_oracle(const Dataset& data);

/// Hard-margin SVM on features (x, 1): the bias is penalized like a weight.
std::pair<Eigen::VectorXd, double> augmented_svm(const Dataset& data);

SvmBiasReport svm_bias_solve(const Dataset& data, const SvmBiasOptions& opts);

}  // namespace mpaths
