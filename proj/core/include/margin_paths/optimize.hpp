#pragma once

#include <functional>

#include <Eigen/Core>

#include "margin_paths/norms.hpp"

namespace mpaths {

/// Returns f(x) and writes its gradient. Throwing DomainError marks x infeasible;
/// line searches then shrink the step.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

enum class StepRule {
  ArmijoBB,     // Barzilai-Borwein trial step, Armijo backtracking
  Diminishing,  // eta0 / sqrt(t), normalized gradient, no line search
};

struct MinimizeOptions {
  int max_iter = 5000;
  int memory = 8;
  /// Stop once |grad| <= gtol * max(1, |f|).
  double gtol = 1e-12;
  StepRule step = StepRule::ArmijoBB;
  double eta0 = 0.5;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;  // Riemannian / projected gradient norm for sphere problems
  int iterations = 0;
  double final_step = 0.0;
  bool converged = false;
};

/// Limited-memory BFGS with backtracking. Ends converged on the gradient test or
/// when no step decreases f any more (rounding floor) with a small gradient.
MinimizeResult lbfgs_minimize(const Objective& f, const Eigen::VectorXd& x0, const MinimizeOptions& opts);

/// Minimizes f over the unit sphere of `tag`. L2 runs L-BFGS on u -> f(u/|u|);
/// L1 and Linf run projected gradient with a ball projection followed by radial
/// scaling onto the sphere. `x0` is projected first.
MinimizeResult sphere_minimize(const Objective& f, const Eigen::VectorXd& x0, NormTag tag,
                               const MinimizeOptions& opts);

}  // namespace mpaths
