#pragma once

// Independent reference computations for the test suite. None of these call
// the library's solvers; they only use Eigen and plain loops.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracles {

/// Indices that sort `v` ascending, ties by index (insertion sort).
std::vector<std::size_t> naive_argsort(const Eigen::VectorXd& v);

/// Central difference of a scalar function.
Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h);

/// Smallest singular value of A from the eigenvalues of A A^T (rows <= cols) or A^T A.
double smallest_singular_value(const Eigen::MatrixXd& a);

/// Max over unit directions u = (cos t, sin t) of min_n u^T z_n, scanning `steps` angles.
std::pair<Eigen::Vector2d, double> circle_max_min(const Eigen::MatrixXd& z, int steps);

/// Hard-margin problem min |w|^2 s.t. y_n (w^T x_n + beta) >= 1, beta >= 0, for
/// d = 1 or 2: golden section over beta, inner problem by an angular scan (d = 2)
/// or closed form (d = 1).
struct BiasSvm {
  Eigen::VectorXd w;
  double beta = 0.0;
  double norm_sq = 0.0;
};
BiasSvm bias_svm_scan(const Eigen::MatrixXd& x, const std::vector<int>& y);

/// Brute-force nonnegative least squares by enumerating supports (cols <= 10).
Eigen::VectorXd nnls_enumerate(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Naive sum_n exp(-m_n).
double naive_exp_sum(const Eigen::VectorXd& margins);

}  // namespace oracles
