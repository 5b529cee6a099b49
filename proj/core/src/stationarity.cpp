#include "margin_paths/stationarity.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "margin_paths/errors.hpp"

namespace mpaths {

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter, double tol) {
  const Eigen::MatrixXd G = A.transpose() * A;
  const Eigen::VectorXd c = A.transpose() * b;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.cols());
  if (A.cols() == 0) return x;
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  if (!(L > 0.0)) return x;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd next = (x - (G * x - c) / L).cwiseMax(0.0);
    const double moved = (next - x).norm();
    x = next;
    if (moved <= tol * std::max(1.0, x.norm())) break;
  }
  return x;
}

namespace {

void require_smooth(const PredictorSpec& spec) {
  if (!spec.smooth()) throw NonSmoothSpec(spec.describe() + " is not C^2 on parameter space");
}

Eigen::MatrixXd support_gradients(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data,
                                  const std::vector<std::size_t>& support) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(spec.total_dim()), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = grad(spec, theta, data, support[j]);
  return A;
}

double smallest_singular_value(const Eigen::MatrixXd& rows) {
  if (rows.rows() > rows.cols()) return 0.0;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(rows).singularValues();
  return sv[sv.size() - 1];
}

}  // namespace

LicqResult licq_check(const PredictorSpec& spec, const Eigen::VectorXd& theta_bar, const Dataset& data, double tol,
                      double support_tol) {
  require_smooth(spec);
  const SupportSet s = support_set(spec, theta_bar, data, support_tol);
  if (s.indices.empty()) throw EmptySupport("no sample attains the margin");
  LicqResult r;
  r.support_size = s.indices.size();
  r.sigma_min = smallest_singular_value(support_gradients(spec, theta_bar, data, s.indices).transpose());
  r.pass = r.sigma_min > tol;
  return r;
}

KktReport kkt_margin_check(const PredictorSpec& spec, const Eigen::VectorXd& theta_bar, const Dataset& data,
                           double gamma_star, const KktTolerances& tols, const std::string& gamma_source) {
  require_smooth(spec);
  KktReport rep;
  rep.tols = tols;
  rep.gamma_source = gamma_source;
  rep.support = support_set(spec, theta_bar, data, tols.support, gamma_star);
  const Eigen::VectorXd f = eval_all(spec, theta_bar, data);
  rep.primal_residual = std::max(0.0, gamma_star - f.minCoeff());
  if (rep.support.indices.empty()) {
    // every margin clears gamma*: the reference margin does not belong to theta_bar
    if (rep.primal_residual <= rep.support.tol)
      throw EmptySupport("no sample is within " + std::to_string(rep.support.tol) + " of gamma* = " +
                         std::to_string(gamma_star));
    // a violated constraint with nothing active: infeasible, with no multipliers
    rep.stationarity_residual = theta_bar.norm();
    return rep;
  }

  const Eigen::MatrixXd A = support_gradients(spec, theta_bar, data, rep.support.indices);
  rep.lambdas = nnls(A, theta_bar, tols.nnls_max_iter);
  rep.stationarity_residual = (theta_bar - A * rep.lambdas).norm();
  rep.licq_sigma_min = smallest_singular_value(A.transpose());
  rep.licq_pass = rep.licq_sigma_min > tols.licq;
  rep.pass = rep.primal_residual <= tols.primal && rep.stationarity_residual <= tols.stationarity;
  return rep;
}

StationarityResult constrained_stationarity(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho,
                                            const Dataset& data, double align_tol, double norm_tol) {
  StationarityResult r;
  const double n = theta.norm();
  r.norm_residual = std::abs(n - 1.0);
  const Eigen::VectorXd scaled = rho * theta;
  const Eigen::VectorXd w = softmin_weights(eval_all(spec, scaled, data), 1.0);
  // -grad L(rho theta) is a positive multiple of sum_n w_n grad f_n(rho theta)
  Eigen::VectorXd d = Eigen::VectorXd::Zero(theta.size());
  for (std::size_t i = 0; i < data.size(); ++i) accumulate_grad(spec, scaled, data, i, w[static_cast<Eigen::Index>(i)], d);
  const double dn = d.norm();
  if (!(dn > 1e-300) || !(n > 0.0)) {
    r.zero_gradient = true;
    r.alignment_residual = std::numeric_limits<double>::infinity();
    return r;
  }
  r.alignment_residual = (d / dn - theta / n).norm();
  r.pass = r.alignment_residual <= align_tol && r.norm_residual <= norm_tol;
  return r;
}

AlignmentSeries alignment_series(const PredictorSpec& spec, const Dataset& data, const SweepResult& opt_run,
                                 double tol) {
  if (opt_run.kind != PathKind::Optimization) throw SpecError("alignment series needs an optimization run");
  AlignmentSeries out;
  for (const auto& rec : opt_run.records) {
    if (!rec.ok()) continue;
    const Eigen::VectorXd& th = rec.theta.values();
    const double n = th.norm();
    if (!(n > 0.0)) continue;
    const StationarityResult s = constrained_stationarity(spec, th / n, n, data);
    AlignmentPoint p;
    p.t = rec.scale;
    p.residual = s.alignment_residual;
    // cos(theta, -grad L) = 1 - residual^2 / 2 for unit vectors
    p.cosine = 1.0 - 0.5 * s.alignment_residual * s.alignment_residual;
    out.points.push_back(p);
  }
  const std::size_t k = out.points.size();
  if (k >= 3) {
    const auto& a = out.points[k - 3];
    const auto& b = out.points[k - 2];
    const auto& c = out.points[k - 1];
    out.directionally_stationary = b.residual <= a.residual && c.residual <= b.residual && c.residual < tol;
  }
  return out;
}

void write_kkt_json(std::ostream& os, const KktReport& r) {
  nlohmann::json j;
  j["support"] = r.support.indices;
  j["gamma_star"] = r.support.gamma_star;
  j["gamma_source"] = r.gamma_source;
  j["support_tol"] = r.support.tol;
  j["lambdas"] = std::vector<double>(r.lambdas.data(), r.lambdas.data() + r.lambdas.size());
  j["primal_residual"] = r.primal_residual;
  j["stationarity_residual"] = r.stationarity_residual;
  j["licq_sigma_min"] = r.licq_sigma_min;
  j["licq_pass"] = r.licq_pass;
  j["tolerances"] = {{"primal", r.tols.primal}, {"stationarity", r.tols.stationarity}, {"licq", r.tols.licq}};
  j["scale_convention"] = r.scale_convention;
  j["pass"] = r.pass;
  os << j.dump(2) << '\n';
}

}  // namespace mpaths
