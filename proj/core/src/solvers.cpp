#include "margin_paths/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "margin_paths/errors.hpp"
#include "margin_paths/format.hpp"
#include "margin_paths/parallel.hpp"

namespace mpaths {

std::string_view to_string(PathKind kind) {
  switch (kind) {
    case PathKind::Constrained: return "constrained";
    case PathKind::Margin: return "margin";
    case PathKind::Regularization: return "regularization";
    case PathKind::Optimization: return "optimization";
  }
  return "constrained";
}

Eigen::VectorXd PathRecord::direction() const {
  const double n = mpaths::norm(theta.values(), theta.norm_tag());
  return n > 0.0 ? Eigen::VectorXd(theta.values() / n) : theta.values();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<double> geometric_grid(double first, double ratio, std::size_t count) {
  if (!(first > 0.0) || !(ratio > 1.0)) throw SpecError("geometric grid needs first > 0 and ratio > 1");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = first * std::pow(ratio, static_cast<double>(i));
  return g;
}

AssumptionFlags assumption_flags(const std::vector<PathRecord>& records) {
  AssumptionFlags f{true, true};
  const PathRecord* prev = nullptr;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    if (prev) {
      if (!(r.log_loss < prev->log_loss)) f.loss_strictly_decreasing = false;
      if (!(r.min_margin() > prev->min_margin())) f.margin_strictly_increasing = false;
    }
    prev = &r;
  }
  return f;
}

namespace {

MinimizeOptions minimize_options(const SolverOptions& opts) {
  MinimizeOptions m;
  m.max_iter = opts.max_iter;
  m.gtol = opts.pgtol;
  m.step = opts.step;
  m.eta0 = opts.eta0;
  return m;
}

// Warm start first, then opts.restarts uniform draws; draws outside a log
// family's domain are redrawn up to opts.max_resample times.
std::vector<Eigen::VectorXd> make_starts(const PredictorSpec& spec, const Dataset& data, const SolverOptions& opts) {
  std::vector<Eigen::VectorXd> starts;
  const bool needs_domain = spec.is_log_family();
  if (opts.warm_start && static_cast<std::size_t>(opts.warm_start->size()) == spec.total_dim()) {
    const Eigen::VectorXd w = project_to_sphere(*opts.warm_start, opts.norm);
    if (w.norm() > 0.0 && (!needs_domain || in_domain(spec, w, data))) starts.push_back(w);
  }
  std::mt19937_64 rng(opts.seed);
  for (int r = 0; r < opts.restarts; ++r) {
    for (int attempt = 0; attempt <= opts.max_resample; ++attempt) {
      Eigen::VectorXd s = sample_sphere(spec.total_dim(), opts.norm, rng);
      if (!needs_domain || in_domain(spec, s, data)) {
        starts.push_back(std::move(s));
        break;
      }
    }
  }
  if (starts.empty())
    throw AllStartsInfeasible("no restart satisfied the domain constraint after " +
                              std::to_string(opts.max_resample) + " resamples");
  return starts;
}

struct Run {
  MinimizeResult result;
  double score = std::numeric_limits<double>::infinity();  // lower is better
  bool ok = false;
};

std::size_t best_run(const std::vector<Run>& runs) {
  std::size_t best = runs.size();
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].ok && (best == runs.size() || runs[i].score < runs[best].score)) best = i;
  if (best == runs.size()) throw AllStartsInfeasible("every restart left the domain");
  return best;
}

std::vector<Eigen::VectorXd> cluster_runs(const std::vector<Run>& runs, std::size_t best, const SolverOptions& opts) {
  std::vector<Eigen::VectorXd> reps{runs[best].result.x};
  const double cutoff = runs[best].score + opts.dedup_loss_tol * std::max(1.0, std::abs(runs[best].score));
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i == best || !runs[i].ok || runs[i].score > cutoff) continue;
    const auto& x = runs[i].result.x;
    const bool fresh = std::all_of(reps.begin(), reps.end(),
                                   [&](const Eigen::VectorXd& r) { return (r - x).norm() > opts.cluster_tol; });
    if (fresh) reps.push_back(x);
  }
  return reps;
}

PathRecord make_record(PathKind kind, const PredictorSpec& spec, const Dataset& data, double rho,
                       const Eigen::VectorXd& x, const SolverOptions& opts) {
  PathRecord rec;
  rec.kind = kind;
  rec.scale = rho;
  rec.theta = ParamPoint(spec, x, opts.norm);
  rec.norm = norm(x, opts.norm);
  rec.log_loss = exp_loss(spec, x, rho, data).log_value;
  rec.profile = margin_profile(spec, x, rho, data);
  return rec;
}

PathRecord finish(PathKind kind, const PredictorSpec& spec, const Dataset& data, double rho,
                  const std::vector<Run>& runs, const SolverOptions& opts) {
  const std::size_t b = best_run(runs);
  PathRecord rec = make_record(kind, spec, data, rho, runs[b].result.x, opts);
  rec.meta.restarts_used = static_cast<int>(runs.size());
  rec.meta.iterations = runs[b].result.iterations;
  rec.meta.final_step = runs[b].result.final_step;
  rec.meta.pg_norm = runs[b].result.grad_norm;
  rec.meta.converged = runs[b].result.converged;
  rec.cluster = cluster_runs(runs, b, opts);
  return rec;
}

PathRecord margin_by_continuation(const PredictorSpec& spec, const Dataset& data, double rho,
                                  const SolverOptions& opts) {
  const auto starts = make_starts(spec, data, opts);
  const double log_n = std::log(static_cast<double>(data.size()));
  const MinimizeOptions mopts = minimize_options(opts);
  std::vector<Run> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Run& run = runs[i];
    try {
      Eigen::VectorXd x = starts[i];
      double beta = 1.0;
      int total_iter = 0;
      for (int stage = 0; stage < 24; ++stage) {
        const Objective obj = [&, beta](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
          return smoothed_log_loss(spec, th, rho, beta, data, &g);
        };
        run.result = sphere_minimize(obj, x, opts.norm, mopts);
        total_iter += run.result.iterations;
        x = run.result.x;
        const double gamma = margin(spec, x, rho, data);
        if (log_n / beta <= opts.margin_eps * std::max(1.0, std::abs(gamma))) break;
        beta *= 10.0;
      }
      run.result.iterations = total_iter;
      run.score = -margin(spec, x, rho, data);
      run.ok = std::isfinite(run.score);
    } catch (const DomainError&) {
      run.ok = false;
    }
  });
  return finish(PathKind::Margin, spec, data, rho, runs, opts);
}

}  // namespace

PathRecord solve_constrained(const PredictorSpec& spec, const Dataset& data, double rho, const SolverOptions& opts) {
  if (!(rho > 0.0)) throw SpecError("rho must be positive");
  const auto starts = make_starts(spec, data, opts);
  const Objective obj = [&](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
    return smoothed_log_loss(spec, th, rho, 1.0, data, &g);
  };
  const MinimizeOptions mopts = minimize_options(opts);
  std::vector<Run> runs(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    try {
      runs[i].result = sphere_minimize(obj, starts[i], opts.norm, mopts);
      runs[i].score = runs[i].result.value;
      runs[i].ok = std::isfinite(runs[i].score);
    } catch (const DomainError&) {
      runs[i].ok = false;
    }
  });
  return finish(PathKind::Constrained, spec, data, rho, runs, opts);
}

PathRecord solve_margin(const PredictorSpec& spec, const Dataset& data, double rho, const SolverOptions& opts) {
  if (!(rho > 0.0)) throw SpecError("rho must be positive");
  if (!spec.is_log_family()) return margin_by_continuation(spec, data, rho, opts);

  // log(rho u) and its signed powers are increasing in u, so the maximizer is
  // the linear one at any scale
  const PredictorSpec inner = PredictorSpec::single(Family::linear(), spec.input_dim());
  PathRecord lin = margin_by_continuation(inner, data, 1.0, opts);
  if (!(lin.min_margin() > 0.0))
    throw AllStartsInfeasible("no direction has theta^T z_n > 0 for every sample");
  PathRecord rec = make_record(PathKind::Margin, spec, data, rho, lin.theta.values(), opts);
  rec.meta = lin.meta;
  rec.cluster = lin.cluster;
  return rec;
}

SweepResult sweep(PathKind kind, const PredictorSpec& spec, const Dataset& data, const std::vector<double>& grid,
                  const SolverOptions& opts) {
  if (kind != PathKind::Constrained && kind != PathKind::Margin)
    throw SpecError("sweep supports constrained and margin paths only");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw SpecError("scale grid must be strictly increasing");

  SweepResult out;
  out.kind = kind;
  out.spec_ref = spec.describe();
  out.norm = opts.norm;
  out.seed = opts.seed;
  std::optional<Eigen::VectorXd> warm = opts.warm_start;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SolverOptions o = opts;
    o.seed = derive_seed(opts.seed, i);
    o.warm_start = warm;
    try {
      PathRecord rec = kind == PathKind::Constrained ? solve_constrained(spec, data, grid[i], o)
                                                     : solve_margin(spec, data, grid[i], o);
      warm = rec.theta.values();
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      PathRecord rec;
      rec.kind = kind;
      rec.scale = grid[i];
      rec.theta = ParamPoint(spec, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(spec.total_dim()),
                                                              std::numeric_limits<double>::quiet_NaN()),
                             opts.norm);
      rec.norm = std::numeric_limits<double>::quiet_NaN();
      rec.log_loss = std::numeric_limits<double>::quiet_NaN();
      rec.status = e.what();
      out.records.push_back(std::move(rec));
    }
  }
  out.flags = assumption_flags(out.records);
  return out;
}

SweepResult optimization_path(const PredictorSpec& spec, const Dataset& data, const Eigen::VectorXd& theta0,
                              const OptimizationOptions& opts) {
  if (opts.steps < 1) throw SpecError("optimization path needs at least one step");
  if (!(opts.eta > 0.0)) throw SpecError("step size must be positive");
  if (static_cast<std::size_t>(theta0.size()) != spec.total_dim()) throw SpecError("theta0 has the wrong size");
  if (!in_domain(spec, theta0, data)) throw DomainError("theta0 is outside the domain");

  std::vector<std::size_t> checkpoints{1};
  for (double t = 1.0; t < static_cast<double>(opts.steps); t *= opts.checkpoint_growth) {
    const auto c = static_cast<std::size_t>(std::llround(t));
    if (c > checkpoints.back() && c < opts.steps) checkpoints.push_back(c);
  }
  if (checkpoints.back() != opts.steps) checkpoints.push_back(opts.steps);

  SweepResult out;
  out.kind = PathKind::Optimization;
  out.spec_ref = spec.describe();
  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd g;
  std::size_t next = 0;
  int rising = 0;
  double prev_loss = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= opts.steps; ++t) {
    double log_loss = 0.0;
    try {
      log_loss = smoothed_log_loss(spec, theta, 1.0, 1.0, data, &g);
    } catch (const DomainError& e) {
      PathRecord rec;
      rec.kind = PathKind::Optimization;
      rec.scale = static_cast<double>(t);
      rec.theta = ParamPoint(spec, theta);
      rec.status = e.what();
      out.records.push_back(std::move(rec));
      break;
    }
    theta -= opts.eta * std::exp(log_loss) * g;
    if (t != checkpoints[next]) continue;
    ++next;
    PathRecord rec;
    rec.kind = PathKind::Optimization;
    rec.scale = static_cast<double>(t);
    rec.theta = ParamPoint(spec, theta);
    rec.norm = theta.norm();
    try {
      const Eigen::VectorXd f = eval_all(spec, theta, data);
      rec.profile = profile_from_margins(f, rec.norm);
      rec.log_loss = exp_loss(spec, theta, 1.0, data).log_value;
    } catch (const DomainError& e) {
      rec.status = e.what();
    }
    rec.meta.iterations = static_cast<int>(t);
    rec.meta.final_step = opts.eta;
    rising = rec.log_loss > prev_loss ? rising + 1 : 0;
    if (rising >= opts.divergence_window) out.diverged = true;
    prev_loss = rec.log_loss;
    out.records.push_back(std::move(rec));
  }
  out.flags = assumption_flags(out.records);
  return out;
}

SweepResult regularization_path(const PredictorSpec& spec, const Dataset& data, const std::vector<double>& c_grid,
                                const SolverOptions& opts) {
  if (opts.norm != NormTag::L2) throw SpecError("regularization path is defined for the L2 norm only");
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    if (!(c_grid[i] > 0.0)) throw SpecError("c grid must be positive");
    if (i && !(c_grid[i] > c_grid[i - 1])) throw SpecError("c grid must be strictly increasing");
  }
  SweepResult out;
  out.kind = PathKind::Regularization;
  out.spec_ref = spec.describe();
  out.norm = opts.norm;
  out.seed = opts.seed;
  const MinimizeOptions mopts = minimize_options(opts);

  std::optional<Eigen::VectorXd> warm = opts.warm_start;
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    const double c = c_grid[i];
    const Objective obj = [&, c](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
      const double ll = smoothed_log_loss(spec, th, 1.0, 1.0, data, &g);
      const double loss = std::exp(ll);
      g = loss * g + (2.0 / c) * th;
      return loss + th.squaredNorm() / c;
    };
    SolverOptions o = opts;
    o.seed = derive_seed(opts.seed, i);
    o.warm_start.reset();
    std::vector<Eigen::VectorXd> starts = make_starts(spec, data, o);
    const double radius = warm ? std::max(1.0, warm->norm()) : 1.0;
    for (auto& s : starts) s *= radius;
    if (warm) starts.insert(starts.begin(), *warm);

    PathRecord rec;
    rec.kind = PathKind::Regularization;
    rec.scale = c;
    try {
      std::vector<Run> runs(starts.size());
      parallel_for(starts.size(), [&](std::size_t k) {
        try {
          runs[k].result = lbfgs_minimize(obj, starts[k], mopts);
          runs[k].score = runs[k].result.value;
          runs[k].ok = std::isfinite(runs[k].score);
        } catch (const DomainError&) {
          runs[k].ok = false;
        }
      });
      const std::size_t b = best_run(runs);
      const Eigen::VectorXd& th = runs[b].result.x;
      rec.norm = th.norm();
      rec.theta = ParamPoint(spec, th / rec.norm, NormTag::L2);
      rec.log_loss = exp_loss(spec, th, 1.0, data).log_value;
      rec.profile = profile_from_margins(eval_all(spec, th, data), rec.norm);
      rec.meta.restarts_used = static_cast<int>(runs.size());
      rec.meta.iterations = runs[b].result.iterations;
      rec.meta.final_step = runs[b].result.final_step;
      rec.meta.pg_norm = runs[b].result.grad_norm;
      rec.meta.converged = runs[b].result.converged;
      rec.cluster = {rec.theta.values()};
      warm = th;
    } catch (const Error& e) {
      rec.theta = ParamPoint(spec, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.total_dim())));
      rec.status = e.what();
    }
    out.records.push_back(std::move(rec));
  }
  out.flags = assumption_flags(out.records);
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep, const std::vector<std::string>& header_lines) {
  for (const auto& line : header_lines) os << "# " << line << '\n';
  std::size_t n_margins = 0;
  std::size_t n_theta = 0;
  for (const auto& r : sweep.records) {
    n_margins = std::max(n_margins, static_cast<std::size_t>(r.profile.sorted_margins.size()));
    n_theta = std::max(n_theta, static_cast<std::size_t>(r.theta.values().size()));
  }
  os << "kind,scale,log_loss,min_margin";
  for (std::size_t l = 0; l < n_margins; ++l) os << ",m_" << l;
  for (std::size_t j = 0; j < n_theta; ++j) os << ",theta_" << j;
  os << ",pg_norm,restarts_used\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : sweep.records) {
    const auto& m = r.profile.sorted_margins;
    const auto& th = r.theta.values();
    os << to_string(r.kind) << ',' << format_double(r.scale) << ',' << format_double(r.ok() ? r.log_loss : nan)
       << ',' << format_double(m.size() ? m[0] : nan);
    for (std::size_t l = 0; l < n_margins; ++l)
      os << ',' << format_double(l < static_cast<std::size_t>(m.size()) ? m[static_cast<Eigen::Index>(l)] : nan);
    for (std::size_t j = 0; j < n_theta; ++j)
      os << ',' << format_double(j < static_cast<std::size_t>(th.size()) ? th[static_cast<Eigen::Index>(j)] : nan);
    os << ',' << format_double(r.meta.pg_norm) << ',' << r.meta.restarts_used << '\n';
  }
}

}  // namespace mpaths
