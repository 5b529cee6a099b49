#include <cmath>
#include <limits>
#include <random>

#include "margin_paths/errors.hpp"
#include "margin_paths/parallel.hpp"
#include "margin_paths/solvers.hpp"

namespace mpaths {

namespace {

// Smallest s > 0 with log L(s u) <= phi for the unit direction u. Scans
// geometrically from `hint`, then bisects. Throws DomainError when no scale in
// range reaches phi.
double level_scale(const PredictorSpec& spec, const Dataset& data, const Eigen::VectorXd& u, double phi,
                   double hint) {
  const auto reaches = [&](double s) { return smoothed_log_loss(spec, u, s, 1.0, data, nullptr) <= phi; };
  double lo = hint;
  double hi = hint;
  if (reaches(hint)) {
    do {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) return 0.0;
    } while (reaches(lo));
  } else {
    do {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e15) throw DomainError("direction never reaches the loss level");
    } while (!reaches(hi));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (reaches(mid) ? hi : lo) = mid;
  }
  return hi;
}

double swapped_minimum(const PredictorSpec& spec, const Dataset& data, double phi, double hint,
                       const SolverOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::VectorXd> starts;
  for (int r = 0; r < opts.restarts; ++r) {
    for (int attempt = 0; attempt <= opts.max_resample; ++attempt) {
      Eigen::VectorXd u = sample_sphere(spec.total_dim(), NormTag::L2, rng);
      try {
        level_scale(spec, data, u, phi, hint);
        starts.push_back(std::move(u));
        break;
      } catch (const DomainError&) {
      }
    }
  }
  if (starts.empty()) throw AllStartsInfeasible("no random direction reaches the loss level");

  MinimizeOptions mo;
  mo.max_iter = opts.max_iter;
  mo.gtol = opts.pgtol;
  std::vector<double> best(starts.size(), std::numeric_limits<double>::infinity());
  parallel_for(starts.size(), [&](std::size_t i) {
    double last = hint;
    // s*(u) has gradient -s g / (g . u) with g = s grad L(s u), by the implicit function theorem
    const Objective obj = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
      const double s = level_scale(spec, data, u, phi, last);
      last = s;
      Eigen::VectorXd g;
      smoothed_log_loss(spec, u, s, 1.0, data, &g);
      const double radial = g.dot(u);
      if (!(radial < 0.0)) throw DomainError("loss does not decrease along the direction");
      grad = -s * g / radial;
      return s;
    };
    try {
      best[i] = sphere_minimize(obj, starts[i], NormTag::L2, mo).value;
    } catch (const DomainError&) {
    }
  });
  double out = std::numeric_limits<double>::infinity();
  for (double b : best) out = std::min(out, b);
  if (!std::isfinite(out)) throw AllStartsInfeasible("every swapped-problem run left the feasible set");
  return out;
}

}  // namespace

ParetoReport pareto_cross_check(const PredictorSpec& spec, const Dataset& data,
                                const std::vector<std::pair<double, double>>& phi_samples, double tol,
                                const SolverOptions& opts) {
  if (opts.norm != NormTag::L2) throw SpecError("pareto cross-check is implemented for the L2 norm only");
  ParetoReport rep;
  const std::size_t K = phi_samples.size();
  std::vector<bool> decreasing(K, true);
  for (std::size_t i = 1; i < K; ++i) {
    if (!(phi_samples[i].second < phi_samples[i - 1].second)) {
      rep.monotonicity_violated = true;
      decreasing[i] = false;
      decreasing[i - 1] = false;
    }
  }
  rep.pass = true;
  for (std::size_t i = 0; i < K; ++i) {
    ParetoPoint p;
    p.rho = phi_samples[i].first;
    p.phi = phi_samples[i].second;
    p.checked = decreasing[i];
    if (p.checked) {
      SolverOptions o = opts;
      o.seed = derive_seed(opts.seed, i);
      // the hint only seeds the bracketing scan
      p.swapped_norm = swapped_minimum(spec, data, p.phi, 1.0, o);
      p.error = std::abs(p.swapped_norm - p.rho);
      p.pass = p.error <= tol;
      rep.pass = rep.pass && p.pass;
    }
    rep.points.push_back(p);
  }
  return rep;
}

}  // namespace mpaths
