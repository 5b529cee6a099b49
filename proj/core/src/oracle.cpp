#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "margin_paths/errors.hpp"
#include "margin_paths/solvers.hpp"

namespace mpaths {

namespace {

constexpr std::size_t kMaxGridPoints = 50'000'000;

void guard_size(double count) {
  if (count > static_cast<double>(kMaxGridPoints))
    throw SpecError("grid would need " + std::to_string(static_cast<long long>(count)) +
                    " points; use a coarser resolution");
}

// Points on the L2 sphere and the largest geodesic distance from any sphere
// point to the grid.
std::vector<Eigen::VectorXd> l2_grid(std::size_t dim, double res, double& cover) {
  std::vector<Eigen::VectorXd> pts;
  if (dim == 1) {
    pts = {Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)};
    cover = 0.0;
    return pts;
  }
  if (dim == 2) {
    const auto k = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / res));
    guard_size(static_cast<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
      Eigen::VectorXd p(2);
      p << std::cos(a), std::sin(a);
      pts.push_back(p);
    }
    cover = std::numbers::pi / static_cast<double>(k);
    return pts;
  }
  const auto rings = static_cast<std::size_t>(std::ceil(std::numbers::pi / res)) + 1;
  guard_size(static_cast<double>(rings) * 2.0 * std::numbers::pi / res);
  for (std::size_t j = 0; j < rings; ++j) {
    const double polar = std::numbers::pi * static_cast<double>(j) / static_cast<double>(rings - 1);
    const auto az = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi *
                                                                                std::sin(polar) / res)));
    for (std::size_t k = 0; k < az; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(az);
      Eigen::VectorXd p(3);
      p << std::sin(polar) * std::cos(a), std::sin(polar) * std::sin(a), std::cos(polar);
      pts.push_back(p);
    }
  }
  cover = res;
  return pts;
}

// Faces x_i = +-1 of the cube, remaining coordinates on a uniform grid.
std::vector<Eigen::VectorXd> linf_grid(std::size_t dim, double res, double& cover) {
  const auto m = static_cast<std::size_t>(std::ceil(2.0 / res)) + 1;
  const double h = 2.0 / static_cast<double>(m - 1);
  guard_size(2.0 * static_cast<double>(dim) * std::pow(static_cast<double>(m), static_cast<double>(dim - 1)));
  std::vector<Eigen::VectorXd> pts;
  const std::size_t free_dims = dim - 1;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < free_dims; ++i) cells *= m;
  for (std::size_t face = 0; face < dim; ++face) {
    for (double sign : {1.0, -1.0}) {
      for (std::size_t c = 0; c < cells; ++c) {
        Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
        std::size_t rem = c;
        for (std::size_t j = 0; j < dim; ++j) {
          if (j == face) {
            p[static_cast<Eigen::Index>(j)] = sign;
            continue;
          }
          p[static_cast<Eigen::Index>(j)] = -1.0 + h * static_cast<double>(rem % m);
          rem /= m;
        }
        pts.push_back(p);
      }
    }
  }
  cover = 0.5 * h * std::sqrt(static_cast<double>(free_dims));
  return pts;
}

// Orthant simplices sum_i |x_i| = 1 with coordinates on multiples of 1/m.
std::vector<Eigen::VectorXd> l1_grid(std::size_t dim, double res, double& cover) {
  const auto m = static_cast<std::size_t>(std::ceil(1.0 / res));
  guard_size(std::pow(2.0, static_cast<double>(dim)) * std::pow(static_cast<double>(m + 1), static_cast<double>(dim - 1)));
  std::vector<Eigen::VectorXd> pts;
  std::vector<std::size_t> k(dim, 0);
  // enumerate compositions of m into dim nonnegative parts
  std::vector<std::vector<std::size_t>> comps;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t j, std::size_t left) {
    if (j + 1 == dim) {
      k[j] = left;
      comps.push_back(k);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      k[j] = v;
      rec(j + 1, left - v);
    }
  };
  rec(0, m);
  const std::size_t patterns = std::size_t{1} << dim;
  for (std::size_t s = 0; s < patterns; ++s) {
    for (const auto& comp : comps) {
      Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
      bool duplicate = false;
      for (std::size_t j = 0; j < dim; ++j) {
        const bool negative = (s >> j) & 1u;
        // a zero coordinate is reached from both signs; keep the positive copy
        if (negative && comp[j] == 0) duplicate = true;
        p[static_cast<Eigen::Index>(j)] = (negative ? -1.0 : 1.0) * static_cast<double>(comp[j]) / static_cast<double>(m);
      }
      if (!duplicate) pts.push_back(p);
    }
  }
  cover = std::sqrt(2.0) / static_cast<double>(m);
  return pts;
}

}  // namespace

GridOracleResult grid_oracle(const PredictorSpec& spec, const Dataset& data, NormTag norm_tag, double resolution) {
  if (spec.total_dim() > 3)
    throw DimensionTooLarge("grid oracle supports total_dim <= 3, got " + std::to_string(spec.total_dim()));
  if (!(resolution > 0.0)) throw SpecError("grid resolution must be positive");

  GridOracleResult out;
  out.norm = norm_tag;
  out.resolution = resolution;
  double cover = 0.0;
  switch (norm_tag) {
    case NormTag::L2: out.points = l2_grid(spec.total_dim(), resolution, cover); break;
    case NormTag::Linf: out.points = linf_grid(spec.total_dim(), resolution, cover); break;
    case NormTag::L1: out.points = l1_grid(spec.total_dim(), resolution, cover); break;
  }

  const auto P = static_cast<Eigen::Index>(out.points.size());
  const auto N = static_cast<Eigen::Index>(data.size());
  out.margins.resize(P, N);
  out.min_margins.resize(P);
  Eigen::VectorXd lip(P);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < P; ++i) {
    const auto& p = out.points[static_cast<std::size_t>(i)];
    if (!in_domain(spec, p, data)) {
      out.margins.row(i).setConstant(neg_inf);
      out.min_margins[i] = neg_inf;
      lip[i] = 0.0;
      continue;
    }
    double g = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
      out.margins(i, n) = eval(spec, p, data, static_cast<std::size_t>(n));
      g = std::max(g, grad(spec, p, data, static_cast<std::size_t>(n)).norm());
    }
    out.min_margins[i] = out.margins.row(i).minCoeff();
    lip[i] = g;
  }
  out.min_margins.maxCoeff(&out.best_index);
  out.best_margin = out.min_margins[static_cast<Eigen::Index>(out.best_index)];
  if (!std::isfinite(out.best_margin)) throw AllStartsInfeasible("no grid point lies in the domain");

  // a cell can beat the best grid value only if its own bound reaches it
  for (Eigen::Index i = 0; i < P; ++i) {
    if (out.min_margins[i] + cover * lip[i] >= out.best_margin) {
      out.argmax.push_back(static_cast<std::size_t>(i));
      out.discretization_bound = std::max(out.discretization_bound, cover * lip[i]);
    }
  }
  return out;
}

namespace {

LexLevel describe_level(std::size_t level, double value, const std::vector<Eigen::VectorXd>& survivors,
                        const Eigen::VectorXd& representative) {
  LexLevel L;
  L.level = level;
  L.margin = value;
  L.representative = representative;
  L.survivors = survivors;
  L.lower = survivors.front();
  L.upper = survivors.front();
  for (const auto& s : survivors) {
    L.lower = L.lower.cwiseMin(s);
    L.upper = L.upper.cwiseMax(s);
  }
  return L;
}

std::vector<LexLevel> lexicographic_certified(const PredictorSpec& spec, const Dataset& data,
                                              const LexOptions& opts) {
  const GridOracleResult grid = grid_oracle(spec, data, opts.norm, opts.grid_res);
  const double tol = opts.level_tol < 0.0 ? 2.0 * grid.discretization_bound : opts.level_tol;
  if (tol < grid.discretization_bound)
    throw ResolutionTooCoarse("level slack " + std::to_string(tol) + " is below the grid discretization bound " +
                              std::to_string(grid.discretization_bound));

  const auto N = static_cast<Eigen::Index>(data.size());
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < grid.points.size(); ++i)
    if (std::isfinite(grid.min_margins[static_cast<Eigen::Index>(i)])) alive.push_back(i);

  // sorted margin vector per grid point
  Eigen::MatrixXd sorted(static_cast<Eigen::Index>(grid.points.size()), N);
  for (std::size_t i : alive) {
    Eigen::VectorXd row = grid.margins.row(static_cast<Eigen::Index>(i)).transpose();
    std::sort(row.data(), row.data() + row.size());
    sorted.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }

  std::vector<LexLevel> chain;
  for (Eigen::Index k = 0; k < N; ++k) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t rep = alive.front();
    for (std::size_t i : alive) {
      const double v = sorted(static_cast<Eigen::Index>(i), k);
      if (v > best) {
        best = v;
        rep = i;
      }
    }
    std::vector<std::size_t> next;
    for (std::size_t i : alive)
      if (sorted(static_cast<Eigen::Index>(i), k) >= best - tol) next.push_back(i);
    if (next.empty())
      throw ResolutionTooCoarse("level " + std::to_string(k + 1) + " has no surviving grid point");
    alive = std::move(next);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(alive.size());
    for (std::size_t i : alive) pts.push_back(grid.points[i]);
    chain.push_back(describe_level(static_cast<std::size_t>(k + 1), best, pts, grid.points[rep]));
  }
  return chain;
}

std::vector<LexLevel> lexicographic_heuristic(const PredictorSpec& spec, const Dataset& data,
                                              const LexOptions& opts) {
  SolverOptions so = opts.heuristic;
  so.norm = opts.norm;
  const PathRecord first = solve_margin(spec, data, 1.0, so);
  std::vector<LexLevel> chain;
  chain.push_back(describe_level(1, first.min_margin(), {first.theta.values()}, first.theta.values()));

  Eigen::VectorXd theta = first.theta.values();
  MarginProfile prof = first.profile;
  const double tol = opts.level_tol < 0.0 ? 1e-6 : opts.level_tol;
  const std::size_t N = data.size();
  MinimizeOptions mo;
  mo.max_iter = so.max_iter;
  mo.gtol = so.pgtol;
  for (std::size_t k = 1; k < N; ++k) {
    // the k samples ranked lowest keep their level values up to tol (quadratic penalty)
    std::vector<std::size_t> locked(prof.perm.begin(), prof.perm.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<double> floor_value;
    for (std::size_t j = 0; j < k; ++j) floor_value.push_back(chain[std::min(j, chain.size() - 1)].margin - tol);
    std::vector<bool> is_locked(N, false);
    for (std::size_t n : locked) is_locked[n] = true;
    for (double beta = 1.0, mu = 1e2; beta <= 1e8; beta *= 10.0, mu *= 10.0) {
      const Objective obj = [&, beta, mu](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
        const Eigen::VectorXd f = eval_all(spec, th, data);
        g.setZero(th.size());
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < N; ++n)
          if (!is_locked[n]) m = std::min(m, f[static_cast<Eigen::Index>(n)]);
        double s = 0.0;
        for (std::size_t n = 0; n < N; ++n)
          if (!is_locked[n]) s += std::exp(-beta * (f[static_cast<Eigen::Index>(n)] - m));
        double value = -m + std::log(s) / beta;
        for (std::size_t n = 0; n < N; ++n) {
          const double fn = f[static_cast<Eigen::Index>(n)];
          if (!is_locked[n]) {
            accumulate_grad(spec, th, data, n, -std::exp(-beta * (fn - m)) / s, g);
          }
        }
        for (std::size_t j = 0; j < locked.size(); ++j) {
          const double viol = floor_value[j] - f[static_cast<Eigen::Index>(locked[j])];
          if (viol > 0.0) {
            value += mu * viol * viol;
            accumulate_grad(spec, th, data, locked[j], -2.0 * mu * viol, g);
          }
        }
        return value;
      };
      theta = sphere_minimize(obj, theta, opts.norm, mo).x;
    }
    prof = margin_profile(spec, theta, 1.0, data);
    chain.push_back(describe_level(k + 1, prof.sorted_margins[static_cast<Eigen::Index>(k)], {theta}, theta));
  }
  return chain;
}

}  // namespace

std::vector<LexLevel> lexicographic_solve(const PredictorSpec& spec, const Dataset& data, const LexOptions& opts) {
  if (spec.is_log_family()) throw UnsupportedFamily("lexicographic refinement needs a homogeneous predictor");
  return opts.certified ? lexicographic_certified(spec, data, opts) : lexicographic_heuristic(spec, data, opts);
}

}  // namespace mpaths
