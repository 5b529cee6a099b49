#include "margin_paths/norms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "margin_paths/errors.hpp"

namespace mpaths {

std::string_view to_string(NormTag tag) {
  switch (tag) {
    case NormTag::L2: return "L2";
    case NormTag::L1: return "L1";
    case NormTag::Linf: return "Linf";
  }
  return "L2";
}

NormTag norm_from_string(std::string_view name) {
  if (name == "L2" || name == "l2") return NormTag::L2;
  if (name == "L1" || name == "l1") return NormTag::L1;
  if (name == "Linf" || name == "linf" || name == "Linfty") return NormTag::Linf;
  throw ConfigError("norm", "unknown norm '" + std::string(name) + "'");
}

double norm(const Eigen::VectorXd& v, NormTag tag) {
  switch (tag) {
    case NormTag::L2: return v.norm();
    case NormTag::L1: return v.lpNorm<1>();
    case NormTag::Linf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return v.norm();
}

namespace {

// Duchi et al. sort-based projection onto the L1 ball of radius 1.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v) {
  if (v.lpNorm<1>() <= 1.0) return v;
  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v[i]) - theta, 0.0);
    out[i] = std::copysign(mag, v[i]);
  }
  return out;
}

}  // namespace

Eigen::VectorXd project_to_sphere(const Eigen::VectorXd& v, NormTag tag) {
  Eigen::VectorXd p;
  switch (tag) {
    case NormTag::L2: p = v; break;
    case NormTag::L1: p = project_l1_ball(v); break;
    case NormTag::Linf: p = v.cwiseMax(-1.0).cwiseMin(1.0); break;
  }
  const double n = norm(p, tag);
  if (n == 0.0 || !std::isfinite(n)) return p;
  return p / n;
}

Eigen::VectorXd sample_sphere(std::size_t dim, NormTag tag, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd v(d);
  switch (tag) {
    case NormTag::L2: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      do {
        for (Eigen::Index i = 0; i < d; ++i) v[i] = gauss(rng);
      } while (v.norm() < 1e-12);
      return v / v.norm();
    }
    case NormTag::L1: {
      // exponential spacings give the uniform distribution on the simplex
      std::exponential_distribution<double> expo(1.0);
      std::bernoulli_distribution coin(0.5);
      for (Eigen::Index i = 0; i < d; ++i) v[i] = expo(rng) * (coin(rng) ? 1.0 : -1.0);
      return v / v.lpNorm<1>();
    }
    case NormTag::Linf: {
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      std::uniform_int_distribution<Eigen::Index> face(0, d - 1);
      std::bernoulli_distribution coin(0.5);
      for (Eigen::Index i = 0; i < d; ++i) v[i] = unif(rng);
      v[face(rng)] = coin(rng) ? 1.0 : -1.0;
      return v;
    }
  }
  return v;
}

}  // namespace mpaths
