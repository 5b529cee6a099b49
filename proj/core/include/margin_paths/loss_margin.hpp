#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "margin_paths/predictor.hpp"

namespace mpaths {

/// A positive quantity carried with its logarithm. `value` may underflow to 0
/// while `log_value` stays finite.
struct LogValue {
  double log_value = 0.0;
  double value = 0.0;
};

/// Margins sorted ascending. `perm[l]` is the sample holding rank l; ties go to
/// the lower sample index.
struct MarginProfile {
  Eigen::VectorXd sorted_margins;
  std::vector<std::size_t> perm;
  double scale = 1.0;

  double min() const { return sorted_margins.size() ? sorted_margins[0] : 0.0; }
};

struct SupportSet {
  std::vector<std::size_t> indices;
  double gamma_star = 0.0;
  double tol = 0.0;
};

/// sum_n exp(-f_n(rho theta)), accumulated around the smallest margin.
LogValue exp_loss(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, const Dataset& data);

/// min_n f_n(rho theta).
double margin(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, const Dataset& data);

MarginProfile margin_profile(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho,
                             const Dataset& data);

/// Sorts precomputed margins with the same tie rule as margin_profile.
MarginProfile profile_from_margins(const Eigen::VectorXd& margins, double scale);

/// 1e-6 * max(1, |gamma|).
double default_support_tol(double gamma);

/// Samples whose margin at rho = 1 lies within `tol` of `gamma_star`. When
/// `gamma_star` is NaN the smallest margin of `theta` is used; a negative `tol`
/// selects default_support_tol.
SupportSet support_set(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data,
                       double tol = -1.0, double gamma_star = std::numeric_limits<double>::quiet_NaN());

/// -log exp_loss: lies in [margin - log N, margin].
double softmin_margin(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, const Dataset& data);

/// (1/beta) log sum_n exp(-beta f_n(rho theta)) and, when `grad` is non-null,
/// its gradient with respect to theta: -rho sum_n w_n grad f_n(rho theta) with
/// w = softmax(-beta f). beta = 1 gives log exp_loss.
double smoothed_log_loss(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, double beta,
                         const Dataset& data, Eigen::VectorXd* grad);

/// Normalized per-sample weights softmax(-beta f) at the given margins.
Eigen::VectorXd softmin_weights(const Eigen::VectorXd& margins, double beta);

}  // namespace mpaths
