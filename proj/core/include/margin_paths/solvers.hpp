#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "margin_paths/loss_margin.hpp"
#include "margin_paths/optimize.hpp"
#include "margin_paths/predictor.hpp"

namespace mpaths {

enum class PathKind { Constrained, Margin, Regularization, Optimization };

std::string_view to_string(PathKind kind);

struct SolverOptions {
  NormTag norm = NormTag::L2;
  int restarts = 16;
  int max_iter = 4000;
  double pgtol = 1e-12;
  StepRule step = StepRule::ArmijoBB;
  double eta0 = 0.5;
  std::uint64_t seed = 0;
  /// Extra start tried before the random restarts.
  std::optional<Eigen::VectorXd> warm_start;
  /// Smoothing target for solve_margin: stop raising beta once
  /// log N / beta <= margin_eps * max(1, |gamma|).
  double margin_eps = 1e-10;
  /// Runs within dedup_loss_tol * max(1, |best|) of the best objective are kept
  /// as alternative optima, merged when closer than cluster_tol.
  double dedup_loss_tol = 1e-4;
  double cluster_tol = 1e-3;
  int max_resample = 100;
};

struct SolverMeta {
  int restarts_used = 0;
  int iterations = 0;
  double final_step = 0.0;
  double pg_norm = 0.0;
  bool converged = false;
};

/// One solved point of a path.
///
/// constrained / margin: `theta` is the unit direction and `scale` is rho.
/// regularization: `theta` is the unit direction of the minimizer at penalty
/// 1/c, `norm` its achieved norm. optimization: `theta` is the raw iterate and
/// `scale` the step count; the profile is taken at rho = |theta(t)|, which for
/// the raw iterate means its plain margins.
struct PathRecord {
  PathKind kind = PathKind::Constrained;
  double scale = 0.0;
  ParamPoint theta;
  double norm = 1.0;
  double log_loss = 0.0;
  MarginProfile profile;
  SolverMeta meta;
  /// Distinct near-optimal directions (the best one first).
  std::vector<Eigen::VectorXd> cluster;
  /// Empty on success, else the error that stopped this point.
  std::string status;

  bool ok() const { return status.empty(); }
  double min_margin() const { return profile.min(); }
  /// theta / |theta| under the record's norm.
  Eigen::VectorXd direction() const;
};

struct AssumptionFlags {
  bool loss_strictly_decreasing = false;
  bool margin_strictly_increasing = false;
};

struct SweepResult {
  PathKind kind = PathKind::Constrained;
  std::vector<PathRecord> records;
  std::string dataset_ref;
  std::string spec_ref;
  NormTag norm = NormTag::L2;
  std::uint64_t seed = 0;
  AssumptionFlags flags;
  /// Optimization runs: set when the loss rose across 50 consecutive checkpoints.
  bool diverged = false;
};

/// Monotonicity of the best loss / margin over the successful records.
AssumptionFlags assumption_flags(const std::vector<PathRecord>& records);

/// Seed for grid point `index` derived from a run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

PathRecord solve_constrained(const PredictorSpec& spec, const Dataset& data, double rho, const SolverOptions& opts);

/// Max-min by continuation in the softmin temperature. Log families reduce to
/// the inner linear max-min at rho = 1, since the wrapper is increasing.
PathRecord solve_margin(const PredictorSpec& spec, const Dataset& data, double rho, const SolverOptions& opts);

std::vector<double> geometric_grid(double first, double ratio, std::size_t count);

/// kind must be Constrained or Margin. Each point is warm-started from the
/// previous solution; failures become per-record statuses.
SweepResult sweep(PathKind kind, const PredictorSpec& spec, const Dataset& data, const std::vector<double>& grid,
                  const SolverOptions& opts);

struct OptimizationOptions {
  double eta = 0.1;
  std::size_t steps = 100000;
  /// Checkpoints at round(growth^k), always including step 1 and the last step.
  double checkpoint_growth = 1.25;
  /// Consecutive checkpoint loss increases that count as divergence.
  int divergence_window = 50;
};

/// Constant-step gradient descent on the unscaled loss.
SweepResult optimization_path(const PredictorSpec& spec, const Dataset& data, const Eigen::VectorXd& theta0,
                              const OptimizationOptions& opts);

/// Minimizes L(theta) + |theta|^2 / c for each c (L2 only).
SweepResult regularization_path(const PredictorSpec& spec, const Dataset& data, const std::vector<double>& c_grid,
                                const SolverOptions& opts);

// ---------------------------------------------------------------------------
// Brute-force oracle and lexicographic refinement (total_dim <= 3).

struct GridOracleResult {
  NormTag norm = NormTag::L2;
  double resolution = 0.0;
  std::vector<Eigen::VectorXd> points;
  /// margins(i, n) = f_n(points[i]).
  Eigen::MatrixXd margins;
  Eigen::VectorXd min_margins;
  std::size_t best_index = 0;
  double best_margin = 0.0;
  /// Lipschitz bound on any margin over one grid cell.
  double discretization_bound = 0.0;
  /// Indices within `discretization_bound` of best_margin, ascending.
  std::vector<std::size_t> argmax;
};

/// Exhaustive unit-sphere scan: an angular grid for L2, face grids for L1/Linf.
/// Points outside a log family's domain get margin -inf.
GridOracleResult grid_oracle(const PredictorSpec& spec, const Dataset& data, NormTag norm, double resolution);

struct LexLevel {
  std::size_t level = 0;  // 1-based
  double margin = 0.0;    // best k-th smallest margin among the previous survivors
  Eigen::VectorXd representative;
  std::vector<Eigen::VectorXd> survivors;
  Eigen::VectorXd lower, upper;  // bounding box of the survivors
};

struct LexOptions {
  bool certified = true;
  NormTag norm = NormTag::L2;
  double grid_res = 1e-3;
  /// Slack per level; a negative value selects twice the discretization bound.
  double level_tol = -1.0;
  SolverOptions heuristic;
};

/// Chain of nested argmax sets of the sorted margin vector, levels 1..N.
std::vector<LexLevel> lexicographic_solve(const PredictorSpec& spec, const Dataset& data, const LexOptions& opts);

struct ParetoPoint {
  double rho = 0.0;
  double phi = 0.0;           // best constrained log-loss at rho
  double swapped_norm = 0.0;  // min |w| s.t. log L(w) <= phi
  double error = 0.0;
  bool checked = false;       // false where the strict-decrease premise fails
  bool pass = false;
};

struct ParetoReport {
  std::vector<ParetoPoint> points;
  bool monotonicity_violated = false;
  bool pass = false;
};

/// For each (rho, phi) re-solves min |w| s.t. log L(w) <= phi from fresh random
/// directions and compares the optimal norm with rho (L2 only).
ParetoReport pareto_cross_check(const PredictorSpec& spec, const Dataset& data,
                                const std::vector<std::pair<double, double>>& phi_samples, double tol,
                                const SolverOptions& opts);

// ---------------------------------------------------------------------------

/// Fixed-width CSV: kind, scale, log_loss, min_margin, m_0.., theta_0.., pg_norm,
/// restarts_used, after `header_lines` prefixed with '#'.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep, const std::vector<std::string>& header_lines);

}  // namespace mpaths
