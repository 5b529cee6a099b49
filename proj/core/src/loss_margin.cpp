#include "margin_paths/loss_margin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mpaths {

namespace {

double log_sum_exp_neg(const Eigen::VectorXd& f, double beta, double& shift) {
  shift = f.minCoeff();
  double s = 0.0;
  for (Eigen::Index n = 0; n < f.size(); ++n) s += std::exp(-beta * (f[n] - shift));
  return std::log(s);
}

}  // namespace

LogValue exp_loss(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, const Dataset& data) {
  const Eigen::VectorXd f = eval_all(spec, rho * theta, data);
  double m = 0.0;
  const double lse = log_sum_exp_neg(f, 1.0, m);
  LogValue out;
  out.log_value = -m + lse;
  out.value = std::exp(out.log_value);
  return out;
}

double margin(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, const Dataset& data) {
  return eval_all(spec, rho * theta, data).minCoeff();
}

MarginProfile profile_from_margins(const Eigen::VectorXd& margins, double scale) {
  MarginProfile p;
  p.scale = scale;
  p.perm.resize(static_cast<std::size_t>(margins.size()));
  std::iota(p.perm.begin(), p.perm.end(), std::size_t{0});
  std::stable_sort(p.perm.begin(), p.perm.end(), [&](std::size_t a, std::size_t b) {
    return margins[static_cast<Eigen::Index>(a)] < margins[static_cast<Eigen::Index>(b)];
  });
  p.sorted_margins.resize(margins.size());
  for (std::size_t l = 0; l < p.perm.size(); ++l)
    p.sorted_margins[static_cast<Eigen::Index>(l)] = margins[static_cast<Eigen::Index>(p.perm[l])];
  return p;
}

MarginProfile margin_profile(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho,
                             const Dataset& data) {
  return profile_from_margins(eval_all(spec, rho * theta, data), rho);
}

double default_support_tol(double gamma) { return 1e-6 * std::max(1.0, std::abs(gamma)); }

SupportSet support_set(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data, double tol,
                       double gamma_star) {
  const Eigen::VectorXd f = eval_all(spec, theta, data);
  SupportSet s;
  s.gamma_star = std::isnan(gamma_star) ? f.minCoeff() : gamma_star;
  s.tol = tol < 0.0 ? default_support_tol(s.gamma_star) : tol;
  for (Eigen::Index n = 0; n < f.size(); ++n)
    if (std::abs(f[n] - s.gamma_star) <= s.tol) s.indices.push_back(static_cast<std::size_t>(n));
  return s;
}

double softmin_margin(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, const Dataset& data) {
  return -exp_loss(spec, theta, rho, data).log_value;
}

Eigen::VectorXd softmin_weights(const Eigen::VectorXd& margins, double beta) {
  const double m = margins.minCoeff();
  Eigen::VectorXd w(margins.size());
  for (Eigen::Index n = 0; n < margins.size(); ++n) w[n] = std::exp(-beta * (margins[n] - m));
  return w / w.sum();
}

double smoothed_log_loss(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho, double beta,
                         const Dataset& data, Eigen::VectorXd* grad) {
  const Eigen::VectorXd scaled = rho * theta;
  const Eigen::VectorXd f = eval_all(spec, scaled, data);
  double m = 0.0;
  const double lse = log_sum_exp_neg(f, beta, m);
  if (grad) {
    const Eigen::VectorXd w = softmin_weights(f, beta);
    grad->setZero(static_cast<Eigen::Index>(spec.total_dim()));
    for (std::size_t n = 0; n < data.size(); ++n)
      accumulate_grad(spec, scaled, data, n, -rho * w[static_cast<Eigen::Index>(n)], *grad);
  }
  return -m + lse / beta;
}

}  // namespace mpaths
