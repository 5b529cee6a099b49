#include "margin_paths/ensemble.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/LU>

#include "margin_paths/errors.hpp"
#include "margin_paths/format.hpp"
#include "margin_paths/parallel.hpp"

namespace mpaths {

Eigen::VectorXd BlockRescaling::flat() const {
  Eigen::Index total = 0;
  for (const auto& b : w_blocks) total += b.size();
  Eigen::VectorXd out(total);
  Eigen::Index off = 0;
  for (const auto& b : w_blocks) {
    out.segment(off, b.size()) = b;
    off += b.size();
  }
  return out;
}

std::vector<double> BlockRescaling::block_norms() const {
  std::vector<double> n;
  for (const auto& b : w_blocks) n.push_back(b.norm());
  return n;
}

BlockRescaling rescale_blocks(const ParamPoint& theta, const PredictorSpec& spec, double rho, double gamma) {
  if (!(gamma > 0.0)) throw NonPositiveGamma("block rescaling needs gamma > 0, got " + format_double(gamma));
  if (!spec.homogeneous_blocks()) throw UnsupportedFamily("block rescaling needs homogeneous blocks");
  BlockRescaling r;
  r.gamma_used = gamma;
  r.rho_used = rho;
  for (std::size_t k = 0; k < spec.num_blocks(); ++k) {
    const Rational a = *spec.blocks()[k].degree;
    r.degrees.push_back(a);
    r.w_blocks.push_back(rho * theta.block(k) * std::pow(gamma, -1.0 / a.value()));
  }
  return r;
}

namespace {

std::vector<Eigen::VectorXd> split_blocks(const PredictorSpec& spec, const Eigen::VectorXd& w) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& b : spec.blocks())
    out.push_back(w.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.dim)));
  return out;
}

double weighted_norm_sq(const PredictorSpec& spec, const std::vector<double>& weights, const Eigen::VectorXd& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < spec.num_blocks(); ++k) {
    const auto& b = spec.blocks()[k];
    s += weights[k] * w.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.dim)).squaredNorm();
  }
  return s;
}

double min_constraint(const PredictorSpec& spec, const Dataset& data, const Eigen::VectorXd& w) {
  return eval_all(spec, w, data).minCoeff();
}

// Smallest c = 1 + delta with min_n f_n(scale(c)) >= 1. delta grows
// geometrically from 1e-12, so narrow feasible windows just above c = 1 are
// found before large factors are tried; bisection refines the bracket.
std::optional<Eigen::VectorXd> grow_until_feasible(const std::function<Eigen::VectorXd(double)>& scale,
                                                   const PredictorSpec& spec, const Dataset& data) {
  const auto ok = [&](double c) { return min_constraint(spec, data, scale(c)) >= 1.0; };
  if (ok(1.0)) return scale(1.0);
  double lo = 0.0;
  double hi = 1e-12;
  while (!ok(1.0 + hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1099511627776.0) return std::nullopt;
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(1.0 + mid) ? hi : lo) = mid;
  }
  return scale(1.0 + hi);
}

// Scales the deepest block, then the whole vector, until every constraint holds.
Eigen::VectorXd polish(const PredictorSpec& spec, const Dataset& data, const Eigen::VectorXd& w) {
  if (min_constraint(spec, data, w) >= 1.0) return w;
  const Block& deep = spec.blocks().back();
  const auto off = static_cast<Eigen::Index>(deep.offset);
  const auto len = static_cast<Eigen::Index>(deep.dim);
  if (auto p = grow_until_feasible(
          [&](double c) {
            Eigen::VectorXd v = w;
            v.segment(off, len) *= c;
            return v;
          },
          spec, data))
    return *p;
  if (auto p = grow_until_feasible([&](double c) { return Eigen::VectorXd(c * w); }, spec, data)) return *p;
  return w;
}

Eigen::VectorXd feasible_start(const PredictorSpec& spec, const Dataset& data, const EnsembleOptions& opts) {
  for (std::size_t i = 0; i < opts.feasibility_rhos.size(); ++i) {
    SolverOptions so = opts.margin_solver;
    so.seed = derive_seed(opts.seed, 1000 + i);
    const double rho = opts.feasibility_rhos[i];
    const PathRecord rec = solve_margin(spec, data, rho, so);
    if (!(rec.min_margin() > 0.0)) continue;
    const Eigen::VectorXd th = rec.theta.values();
    if (auto p = grow_until_feasible([&](double c) { return Eigen::VectorXd(c * rho * th); }, spec, data)) return *p;
  }
  throw Infeasible("no tried scale gives a positive max-min margin; f_n(w) >= 1 looks infeasible");
}

double penalty_objective(const PredictorSpec& spec, const Dataset& data, const std::vector<double>& weights,
                         double mu, const Eigen::VectorXd& w, Eigen::VectorXd& g) {
  g.setZero(w.size());
  double value = 0.0;
  for (std::size_t k = 0; k < spec.num_blocks(); ++k) {
    if (weights[k] == 0.0) continue;
    const auto& b = spec.blocks()[k];
    const auto off = static_cast<Eigen::Index>(b.offset);
    const auto len = static_cast<Eigen::Index>(b.dim);
    value += weights[k] * w.segment(off, len).squaredNorm();
    g.segment(off, len) += 2.0 * weights[k] * w.segment(off, len);
  }
  const Eigen::VectorXd f = eval_all(spec, w, data);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const double viol = 1.0 - f[static_cast<Eigen::Index>(n)];
    if (viol <= 0.0) continue;
    value += mu * viol * viol;
    accumulate_grad(spec, w, data, n, -2.0 * mu * viol, g);
  }
  return value;
}

EnsembleSolution solve_weighted(const PredictorSpec& spec, const Dataset& data, const std::vector<double>& weights,
                                const EnsembleOptions& opts) {
  if (!spec.homogeneous_blocks()) throw UnsupportedFamily("ensemble problems need homogeneous blocks");
  const Eigen::VectorXd start = feasible_start(spec, data, opts);

  std::vector<Eigen::VectorXd> starts{start};
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd v(start.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    starts.push_back(v * (start.norm() / std::max(v.norm(), 1e-300)));
  }

  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  mo.gtol = 1e-12;
  std::vector<EnsembleSolution> sols(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Eigen::VectorXd w = starts[i];
    bool converged = true;
    for (double mu : opts.penalties) {
      const Objective obj = [&, mu](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        return penalty_objective(spec, data, weights, mu, x, g);
      };
      const MinimizeResult r = lbfgs_minimize(obj, w, mo);
      w = r.x;
      converged = r.converged;
    }
    w = polish(spec, data, w);
    EnsembleSolution& s = sols[i];
    s.w = w;
    s.converged = converged;
    s.min_constraint = min_constraint(spec, data, w);
    s.feasible = s.min_constraint >= 1.0 - 1e-12;
    s.objective = weighted_norm_sq(spec, weights, w);
  });

  std::size_t best = sols.size();
  for (std::size_t i = 0; i < sols.size(); ++i) {
    if (!sols[i].feasible) continue;
    if (best == sols.size() || sols[i].objective < sols[best].objective) best = i;
  }
  if (best == sols.size()) throw Infeasible("penalty runs ended infeasible after polishing");
  EnsembleSolution out = sols[best];
  out.weights = weights;
  out.blocks = split_blocks(spec, out.w);
  out.w1_norm_sq = out.blocks.front().squaredNorm();
  return out;
}

void explore_second_block(const PredictorSpec& spec, const Dataset& data, const EnsembleOptions& opts,
                          EnsembleSolution& sol) {
  if (spec.num_blocks() < 2) return;
  const double level = sol.w1_norm_sq;
  const auto& b1 = spec.blocks()[0];
  const auto& b2 = spec.blocks()[1];
  const auto off1 = static_cast<Eigen::Index>(b1.offset);
  const auto len1 = static_cast<Eigen::Index>(b1.dim);
  const auto off2 = static_cast<Eigen::Index>(b2.offset);
  const auto len2 = static_cast<Eigen::Index>(b2.dim);
  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  Eigen::VectorXd w = sol.w;
  for (double mu : opts.penalties) {
    const Objective obj = [&, mu](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
      std::vector<double> none(spec.num_blocks(), 0.0);
      double v = penalty_objective(spec, data, none, mu, x, g);
      v += x.segment(off2, len2).squaredNorm();
      g.segment(off2, len2) += 2.0 * x.segment(off2, len2);
      const double excess = x.segment(off1, len1).squaredNorm() - level;
      if (excess > 0.0) {
        v += mu * excess * excess;
        g.segment(off1, len1) += 4.0 * mu * excess * x.segment(off1, len1);
      }
      return v;
    };
    w = lbfgs_minimize(obj, w, mo).x;
  }
  sol.w2_norm_sq_secondary = w.segment(off2, len2).squaredNorm();
}

}  // namespace

EnsembleSolution limit_problem_solve(const PredictorSpec& spec, const Dataset& data, const EnsembleOptions& opts) {
  std::vector<double> weights(spec.num_blocks(), 0.0);
  weights[0] = 1.0;
  EnsembleSolution sol = solve_weighted(spec, data, weights, opts);
  if (opts.explore_conjecture) explore_second_block(spec, data, opts, sol);
  return sol;
}

EnsembleSolution finite_gamma_solve(const PredictorSpec& spec, const Dataset& data, double gamma,
                                    const EnsembleOptions& opts) {
  if (!(gamma >= 1.0)) throw SpecError("finite-gamma problem needs gamma >= 1");
  if (!spec.homogeneous_blocks()) throw UnsupportedFamily("ensemble problems need homogeneous blocks");
  const double a1 = spec.blocks()[0].degree->value();
  std::vector<double> weights;
  for (const auto& b : spec.blocks()) weights.push_back(std::pow(gamma, 2.0 / b.degree->value() - 2.0 / a1));
  return solve_weighted(spec, data, weights, opts);
}

DiscardMetric shallow_discard_metric(const PredictorSpec& spec, const SweepResult& constrained,
                                     const SweepResult& margin) {
  if (constrained.records.size() != margin.records.size())
    throw SpecError("constrained and margin sweeps must share one scale grid");
  DiscardMetric out;
  for (std::size_t i = 0; i < constrained.records.size(); ++i) {
    const PathRecord& c = constrained.records[i];
    const PathRecord& m = margin.records[i];
    if (c.scale != m.scale) throw SpecError("constrained and margin sweeps must share one scale grid");
    if (!c.ok() || !m.ok()) {
      out.notes.push_back("rho=" + format_double(c.scale) + ": solve failed (" + (c.ok() ? m.status : c.status) + ")");
      continue;
    }
    const double g = m.min_margin();
    try {
      const BlockRescaling r = rescale_blocks(c.theta, spec, c.scale, g);
      out.rows.push_back({c.scale, g, r.block_norms()});
    } catch (const NonPositiveGamma&) {
      out.notes.push_back("rho=" + format_double(c.scale) + ": gamma*=" + format_double(g) + " <= 0, excluded");
    }
  }
  return out;
}

void write_discard_csv(std::ostream& os, const DiscardMetric& metric, const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) os << "# " << line << '\n';
  for (const auto& note : metric.notes) os << "# note: " << note << '\n';
  std::size_t K = 0;
  for (const auto& r : metric.rows) K = std::max(K, r.block_norms.size());
  os << "rho,gamma_star";
  for (std::size_t k = 0; k < K; ++k) os << ",w" << k + 1 << "_norm";
  os << '\n';
  for (const auto& r : metric.rows) {
    os << format_double(r.rho) << ',' << format_double(r.gamma_star);
    for (double v : r.block_norms) os << ',' << format_double(v);
    os << '\n';
  }
}

std::optional<Eigen::VectorXd> min_norm_qp(const Eigen::MatrixXd& rows, const Eigen::VectorXd& rhs) {
  const Eigen::Index N = rows.rows();
  const Eigen::Index d = rows.cols();
  const Eigen::Index max_active = std::min(N, d);
  const auto feasible = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd slack = rows * w - rhs;
    for (Eigen::Index n = 0; n < N; ++n)
      if (slack[n] < -1e-10 * std::max(1.0, std::abs(rhs[n]))) return false;
    return true;
  };

  std::optional<Eigen::VectorXd> best;
  double best_norm = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  if (feasible(zero)) return zero;

  double combos = 0.0;
  for (Eigen::Index k = 1; k <= max_active; ++k) {
    double c = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) c = c * static_cast<double>(N - j) / static_cast<double>(j + 1);
    combos += c;
  }
  if (combos > 2e6) throw SpecError("active-set enumeration is limited to small problems");

  std::vector<Eigen::Index> idx;
  std::function<void(Eigen::Index)> visit = [&](Eigen::Index from) {
    if (!idx.empty()) {
      const auto k = static_cast<Eigen::Index>(idx.size());
      Eigen::MatrixXd A(k, d);
      Eigen::VectorXd c(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        A.row(j) = rows.row(idx[static_cast<std::size_t>(j)]);
        c[j] = rhs[idx[static_cast<std::size_t>(j)]];
      }
      const Eigen::MatrixXd G = A * A.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
      if (lu.rank() == k) {
        const Eigen::VectorXd lambda = lu.solve(c);
        if (lambda.minCoeff() >= -1e-12) {
          const Eigen::VectorXd w = A.transpose() * lambda;
          if (w.norm() < best_norm && feasible(w)) {
            best_norm = w.norm();
            best = w;
          }
        }
      }
    }
    if (static_cast<Eigen::Index>(idx.size()) == max_active) return;
    for (Eigen::Index n = from; n < N; ++n) {
      idx.push_back(n);
      visit(n + 1);
      idx.pop_back();
    }
  };
  visit(0);
  return best;
}

std::pair<Eigen::VectorXd, double> svm_bias_oracle(const Dataset& data) {
  const Eigen::MatrixXd& Z = data.signed_features();
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t n = 0; n < data.size(); ++n) y[static_cast<Eigen::Index>(n)] = data.y(n);
  const auto solve = [&](double beta) {
    return min_norm_qp(Z, Eigen::VectorXd::Ones(y.size()) - beta * y);
  };
  const auto value = [&](double beta) {
    const auto w = solve(beta);
    return w ? w->squaredNorm() : std::numeric_limits<double>::infinity();
  };

  // the feasible betas form an interval; locate one point of it
  double feasible = -1.0;
  for (double b = 0.0; b <= 1099511627776.0; b = b == 0.0 ? 1.0 : 2.0 * b) {
    if (std::isfinite(value(b))) {
      feasible = b;
      break;
    }
  }
  if (feasible < 0.0) throw Infeasible("no beta >= 0 makes y_n (w^T x_n + beta) >= 1 feasible");

  const auto boundary = [&](double out, double in) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (out + in);
      (std::isfinite(value(mid)) ? in : out) = mid;
    }
    return in;
  };
  const double lo = std::isfinite(value(0.0)) ? 0.0 : boundary(0.0, feasible);
  double hi = feasible;
  double step = std::max(1.0, feasible);
  for (int it = 0; it < 200; ++it) {
    const double cand = hi + step;
    if (!std::isfinite(value(cand))) {
      hi = boundary(cand, hi);
      break;
    }
    const bool rising = value(cand) > value(hi);
    hi = cand;
    if (rising) break;
    step *= 2.0;
  }

  // golden section on the convex value function
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = value(c);
  double fd = value(d);
  for (int it = 0; it < 300 && b - a > 1e-14 * std::max(1.0, b); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = value(d);
    }
  }
  double beta = 0.5 * (a + b);
  if (value(lo) <= value(beta)) beta = lo;
  return {*solve(beta), beta};
}

std::pair<Eigen::VectorXd, double> augmented_svm(const Dataset& data) {
  const auto N = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.dim());
  Eigen::MatrixXd rows(N, d + 1);
  rows.leftCols(d) = data.signed_features();
  for (Eigen::Index n = 0; n < N; ++n) rows(n, d) = data.y(static_cast<std::size_t>(n));
  const auto w = min_norm_qp(rows, Eigen::VectorXd::Ones(N));
  if (!w) throw Infeasible("augmented-feature SVM is infeasible");
  return {w->head(d), (*w)[d]};
}

namespace {

double direction_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (nb < 1e-12 || na < 1e-12) return (a - b).norm();
  return (a / na - b / nb).norm();
}

}  // namespace

SvmBiasReport svm_bias_solve(const Dataset& data, const SvmBiasOptions& opts) {
  SvmBiasReport rep;
  std::tie(rep.oracle_w, rep.oracle_beta) = svm_bias_oracle(data);

  const PredictorSpec spec({Family::linear(), Family::squared_bias()}, data.dim());
  const SweepResult path = sweep(PathKind::Constrained, spec, data, opts.rho_grid, opts.solver);
  const PathRecord* last = nullptr;
  for (const auto& r : path.records)
    if (r.ok()) last = &r;
  if (!last) throw Infeasible("every constrained solve failed");

  SolverOptions so = opts.solver;
  so.warm_start = last->theta.values();
  const PathRecord m = solve_margin(spec, data, last->scale, so);
  if (!(m.min_margin() > 0.0)) throw Infeasible("max-min margin is not positive at the largest scale");

  const BlockRescaling r = rescale_blocks(last->theta, spec, last->scale, m.min_margin());
  rep.rho_used = last->scale;
  rep.gamma_used = m.min_margin();
  rep.w = r.w_blocks[0];
  rep.b = std::abs(r.w_blocks[1][0]);
  rep.beta = rep.b * rep.b;
  Eigen::VectorXd flat(rep.w.size() + 1);
  flat << rep.w, rep.b;
  rep.margin = min_constraint(spec, data, flat);
  rep.oracle_gap = direction_distance(rep.w, rep.oracle_w);

  std::tie(rep.augmented_w, rep.augmented_bias) = augmented_svm(data);
  rep.augmented_gap = direction_distance(rep.w, rep.augmented_w);
  return rep;
}

}  // namespace mpaths
