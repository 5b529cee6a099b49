#include "margin_paths/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "margin_paths/errors.hpp"

namespace mpaths {

namespace {

constexpr int kMaxBacktracks = 60;
constexpr double kArmijo = 1e-4;

// f at x, or +inf when x leaves the domain.
double try_eval(const Objective& f, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  try {
    const double v = f(x, g);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

bool small_gradient(double gnorm, double value, double tol) {
  return gnorm <= tol * std::max(1.0, std::abs(value));
}

Eigen::VectorXd two_loop(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& s,
                         const std::deque<Eigen::VectorXd>& y) {
  Eigen::VectorXd q = g;
  const std::size_t m = s.size();
  std::vector<double> alpha(m), rho(m);
  for (std::size_t i = m; i-- > 0;) {
    rho[i] = 1.0 / y[i].dot(s[i]);
    alpha[i] = rho[i] * s[i].dot(q);
    q -= alpha[i] * y[i];
  }
  if (m > 0) q *= s.back().dot(y.back()) / y.back().squaredNorm();
  for (std::size_t i = 0; i < m; ++i) {
    const double b = rho[i] * y[i].dot(q);
    q += (alpha[i] - b) * s[i];
  }
  return -q;
}

MinimizeResult diminishing_descent(const Objective& f, const Eigen::VectorXd& x0, const MinimizeOptions& opts,
                                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& retract) {
  MinimizeResult best;
  Eigen::VectorXd x = retract(x0);
  Eigen::VectorXd g;
  double fx = try_eval(f, x, g);
  if (!std::isfinite(fx)) throw DomainError("starting point is outside the domain");
  best.x = x;
  best.value = fx;
  best.grad_norm = g.norm();
  for (int t = 1; t <= opts.max_iter; ++t) {
    const double gn = g.norm();
    if (gn == 0.0) {
      best.converged = true;
      break;
    }
    double eta = opts.eta0 / std::sqrt(static_cast<double>(t));
    Eigen::VectorXd gx;
    double fn = std::numeric_limits<double>::infinity();
    Eigen::VectorXd xn;
    for (int k = 0; k < kMaxBacktracks && !std::isfinite(fn); ++k, eta *= 0.5) {
      xn = retract(x - eta * g / gn);
      fn = try_eval(f, xn, gx);
    }
    if (!std::isfinite(fn)) break;
    x = xn;
    fx = fn;
    g = gx;
    best.iterations = t;
    best.final_step = eta;
    if (fx < best.value) {
      best.x = x;
      best.value = fx;
      best.grad_norm = g.norm();
    }
  }
  return best;
}

}  // namespace

MinimizeResult lbfgs_minimize(const Objective& f, const Eigen::VectorXd& x0, const MinimizeOptions& opts) {
  if (opts.step == StepRule::Diminishing)
    return diminishing_descent(f, x0, opts, [](const Eigen::VectorXd& v) { return v; });

  MinimizeResult r;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd g;
  double fx = try_eval(f, x, g);
  if (!std::isfinite(fx)) throw DomainError("starting point is outside the domain");

  std::deque<Eigen::VectorXd> S, Y;
  Eigen::VectorXd gn_vec, xn;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double gnorm = g.norm();
    if (small_gradient(gnorm, fx, opts.gtol)) {
      r.converged = true;
      break;
    }
    Eigen::VectorXd d = two_loop(g, S, Y);
    if (!(g.dot(d) < 0.0)) {
      S.clear();
      Y.clear();
      d = -g;
    }
    double t = S.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    const double slope = g.dot(d);
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k, t *= 0.5) {
      xn = x + t * d;
      fn = try_eval(f, xn, gn_vec);
      if (fn <= fx + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        continue;
      }
      // no representable decrease left
      r.converged = small_gradient(gnorm, fx, 1e-6);
      break;
    }
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn_vec - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
      }
    }
    const bool stalled = fn == fx;
    x = xn;
    fx = fn;
    g = gn_vec;
    r.iterations = it + 1;
    r.final_step = t;
    if (stalled && s.norm() <= 1e-15 * std::max(1.0, x.norm())) {
      r.converged = small_gradient(g.norm(), fx, 1e-6);
      break;
    }
  }
  r.x = x;
  r.value = fx;
  r.grad_norm = g.norm();
  if (!r.converged) r.converged = small_gradient(r.grad_norm, fx, opts.gtol);
  return r;
}

MinimizeResult sphere_minimize(const Objective& f, const Eigen::VectorXd& x0, NormTag tag,
                               const MinimizeOptions& opts) {
  const auto retract = [tag](const Eigen::VectorXd& v) { return project_to_sphere(v, tag); };
  if (opts.step == StepRule::Diminishing) {
    MinimizeResult r = diminishing_descent(f, x0, opts, retract);
    Eigen::VectorXd g;
    f(r.x, g);
    if (tag == NormTag::L2) g -= g.dot(r.x) * r.x;
    r.grad_norm = g.norm();
    return r;
  }

  if (tag == NormTag::L2) {
    const Objective lifted = [&f](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
      const double n = u.norm();
      const Eigen::VectorXd th = u / n;
      Eigen::VectorXd g;
      const double v = f(th, g);
      grad = (g - g.dot(th) * th) / n;
      return v;
    };
    const Eigen::VectorXd start = retract(x0);
    if (start.norm() == 0.0) throw DomainError("zero starting direction");
    MinimizeResult r = lbfgs_minimize(lifted, start, opts);
    r.x = retract(r.x);
    Eigen::VectorXd g;
    r.value = f(r.x, g);
    r.grad_norm = (g - g.dot(r.x) * r.x).norm();
    if (!r.converged) r.converged = small_gradient(r.grad_norm, r.value, opts.gtol);
    return r;
  }

  // projected gradient on the L1 / Linf sphere
  MinimizeResult r;
  Eigen::VectorXd x = retract(x0);
  Eigen::VectorXd g;
  double fx = try_eval(f, x, g);
  if (!std::isfinite(fx)) throw DomainError("starting point is outside the domain");
  double t = 1.0 / std::max(g.norm(), 1e-300);
  double pg = 0.0;
  Eigen::VectorXd xn, gx;
  for (int it = 0; it < opts.max_iter; ++it) {
    pg = (x - retract(x - t * g)).norm() / t;
    if (small_gradient(pg, fx, opts.gtol)) {
      r.converged = true;
      break;
    }
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    double step = t;
    for (int k = 0; k < kMaxBacktracks; ++k, step *= 0.5) {
      xn = retract(x - step * g);
      fn = try_eval(f, xn, gx);
      if (fn <= fx - kArmijo * (xn - x).squaredNorm() / step) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.converged = small_gradient(pg, fx, 1e-6);
      break;
    }
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gx - g;
    x = xn;
    fx = fn;
    g = gx;
    r.iterations = it + 1;
    r.final_step = step;
    if (s.squaredNorm() == 0.0) {
      pg = 0.0;
      r.converged = true;
      break;
    }
    const double sy = s.dot(y);
    t = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
  }
  r.x = x;
  r.value = fx;
  r.grad_norm = pg;
  return r;
}

}  // namespace mpaths
