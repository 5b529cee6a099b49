#include <array>
#include <cmath>
#include <random>

#include "margin_paths/errors.hpp"
#include "margin_paths/harness.hpp"
#include "margin_paths/solvers.hpp"

namespace mpaths::harness {

namespace {

constexpr double kPlantedMargin = 0.1;
constexpr int kPlantRetries = 100;

/// Rows of a fixed two-dimensional fixture, zero-padded to d columns.
Dataset fixture(std::size_t d, std::initializer_list<std::array<double, 2>> rows, std::vector<int> labels,
                const std::string& kind) {
  if (d < 2) throw SpecError(kind + " needs d >= 2");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    x(i, 0) = r[0];
    x(i, 1) = r[1];
    ++i;
  }
  return Dataset(std::move(x), std::move(labels));
}

Dataset separable_gaussian(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd planted = sample_sphere(d, NormTag::L2, rng);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    int tries = 0;
    for (;;) {
      const Eigen::VectorXd u = sample_sphere(d, NormTag::L2, rng);
      const double s = planted.dot(u);
      if (std::abs(s) >= kPlantedMargin) {
        x.row(static_cast<Eigen::Index>(i)) = u.transpose();
        y[i] = s > 0.0 ? 1 : -1;
        break;
      }
      if (++tries >= kPlantRetries)
        throw PlantFailed("no sample with |planted^T x| >= 0.1 after 100 draws (d = " + std::to_string(d) + ")");
    }
  }
  Dataset data(std::move(x), std::move(y), seed);

  // planted-property check
  if (d <= 3) {
    const auto lin = PredictorSpec::single(Family::linear(), d);
    const auto oracle = grid_oracle(lin, data, NormTag::L2, d == 3 ? 2e-2 : 1e-3);
    if (!(oracle.best_margin + oracle.discretization_bound > 0.0))
      throw PlantFailed("grid oracle finds no separating direction");
  } else {
    const Eigen::VectorXd m = data.signed_features() * planted;
    if (m.minCoeff() < kPlantedMargin) throw PlantFailed("planted margin below 0.1");
  }
  return data;
}

Dataset all_positive(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.1, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = coord(rng);
  return Dataset(std::move(x), std::vector<int>(n, 1), seed);
}

}  // namespace

Dataset generate_dataset(const std::string& kind, std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 1) throw SpecError("dataset dimension must be >= 1");
  if (n < 1) throw SpecError("dataset size must be >= 1");
  if (kind == "separable_gaussian") return separable_gaussian(d, n, seed);
  if (kind == "all_positive") return all_positive(d, n, seed);
  // fixed fixtures ignore n and seed
  if (kind == "symmetric_pair") return fixture(d, {{1.0, 0.0}, {0.0, 1.0}}, {1, 1}, kind);
  if (kind == "lexicographic_demo") return fixture(d, {{1.0, 0.0}, {1.0, 1.0}}, {1, 1}, kind);
  if (kind == "deep_separable_ensemble")
    return fixture(d, {{1.0, 0.5}, {0.4, 1.0}, {-1.0, -0.2}, {-0.3, -1.0}}, {1, 1, -1, -1}, kind);
  if (kind == "powerlog_demo") return fixture(d, {{1.0, 0.3}, {0.2, 1.0}, {0.8, 0.9}}, {1, 1, 1}, kind);
  if (kind == "svm_asym")
    return fixture(d, {{0.5, 0.0}, {0.0, 0.3}, {-1.0, -3.0}, {-2.0, -0.5}}, {1, 1, -1, -1}, kind);
  if (kind == "svm_symmetric")
    return fixture(d, {{1.0, 0.5}, {0.5, 1.0}, {-1.0, -0.5}, {-0.5, -1.0}}, {1, 1, -1, -1}, kind);
  throw ConfigError("/dataset/generator", "unknown dataset generator '" + kind + "'");
}

Dataset make_dataset(const DatasetConfig& cfg) {
  if (cfg.x) return Dataset(*cfg.x, cfg.y);
  return generate_dataset(cfg.generator, cfg.d, cfg.n, cfg.seed);
}

}  // namespace mpaths::harness
