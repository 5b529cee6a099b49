#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "margin_paths/norms.hpp"
#include "margin_paths/rational.hpp"

namespace mpaths {

/// Labelled samples together with the signed copies z_n = y_n x_n.
class Dataset {
 public:
  Dataset() = default;
  /// `features` is N x d, one sample per row; every label must be +1 or -1.
  Dataset(Eigen::MatrixXd features, std::vector<int> labels,
          std::optional<std::uint64_t> seed = std::nullopt);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(x_.cols()); }

  auto x(std::size_t n) const { return x_.row(static_cast<Eigen::Index>(n)); }
  auto z(std::size_t n) const { return z_.row(static_cast<Eigen::Index>(n)); }
  int y(std::size_t n) const { return labels_[n]; }

  const Eigen::MatrixXd& features() const noexcept { return x_; }
  const Eigen::MatrixXd& signed_features() const noexcept { return z_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  /// Generator seed, or nullopt for an explicitly listed dataset.
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd z_;
  std::vector<int> labels_;
  std::optional<std::uint64_t> seed_;
};

enum class FamilyKind { Linear, PowerLiftedLinear, ProductLinear, SquaredBias, LogWrap, PowerLogWrap };

/// One prediction-function family. `order` is p for PowerLiftedLinear and the
/// depth D for ProductLinear; `eps` is the exponent offset of PowerLogWrap.
struct Family {
  FamilyKind kind = FamilyKind::Linear;
  int order = 1;
  double eps = 0.0;

  static Family linear() { return {FamilyKind::Linear, 1, 0.0}; }
  static Family power_lifted(int p) { return {FamilyKind::PowerLiftedLinear, p, 0.0}; }
  static Family product(int depth) { return {FamilyKind::ProductLinear, depth, 0.0}; }
  static Family squared_bias() { return {FamilyKind::SquaredBias, 2, 0.0}; }
  static Family log_wrap() { return {FamilyKind::LogWrap, 1, 0.0}; }
  static Family power_log(double eps) { return {FamilyKind::PowerLogWrap, 1, eps}; }

  bool homogeneous() const noexcept {
    return kind != FamilyKind::LogWrap && kind != FamilyKind::PowerLogWrap;
  }
  /// Analytic homogeneity degree. Throws UnsupportedFamily for log wrappers.
  Rational degree() const;
  /// Number of parameters the family consumes for inputs of dimension `input_dim`.
  std::size_t block_dim(std::size_t input_dim) const;
  std::string name() const;
};

struct Block {
  Family family;
  std::size_t offset = 0;
  std::size_t dim = 0;
  std::optional<Rational> degree;  // empty for log wrappers
};

/// A sum of blocks f_n(theta) = sum_k f_n^(k)(theta_k).
class PredictorSpec {
 public:
  PredictorSpec() = default;
  /// Builds the block layout. When `declared_degrees` is non-empty it must have
  /// one entry per family; present entries are checked against the analytic degree.
  PredictorSpec(std::vector<Family> families, std::size_t input_dim,
                std::vector<std::optional<Rational>> declared_degrees = {});

  static PredictorSpec single(Family family, std::size_t input_dim) {
    return PredictorSpec({family}, input_dim);
  }

  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  std::size_t total_dim() const noexcept { return total_dim_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  /// True iff every family is C^2 on all of parameter space.
  bool smooth() const noexcept { return smooth_; }
  bool homogeneous_blocks() const noexcept { return homogeneous_; }
  /// Common degree when the whole predictor is homogeneous (a single homogeneous block).
  std::optional<Rational> degree() const;
  /// True when the single block is a monotone wrapper of the linear predictor.
  bool is_log_family() const noexcept { return !homogeneous_; }

  std::string describe() const;

 private:
  std::vector<Block> blocks_;
  std::size_t total_dim_ = 0;
  std::size_t input_dim_ = 0;
  bool smooth_ = true;
  bool homogeneous_ = true;
};

/// Parameter vector with its block partition and the norm it lives under.
class ParamPoint {
 public:
  ParamPoint() = default;
  ParamPoint(const PredictorSpec& spec, Eigen::VectorXd theta, NormTag tag = NormTag::L2);

  const Eigen::VectorXd& values() const noexcept { return theta_; }
  Eigen::VectorXd& values() noexcept { return theta_; }
  std::size_t num_blocks() const noexcept { return offsets_.size() - 1; }
  Eigen::VectorXd block(std::size_t k) const;
  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  NormTag norm_tag() const noexcept { return tag_; }
  double norm() const { return mpaths::norm(theta_, tag_); }

 private:
  Eigen::VectorXd theta_;
  std::vector<std::size_t> offsets_{0};
  NormTag tag_ = NormTag::L2;
};

// ---------------------------------------------------------------------------
// Evaluation. `theta` is the full (already scaled) parameter vector rho*theta.

double eval(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n);

/// Contribution of block k alone, f_n^(k)(theta_k).
double eval_block(const PredictorSpec& spec, std::size_t k, const Eigen::VectorXd& theta,
                  const Dataset& data, std::size_t n);

/// All f_n(theta), n = 0..N-1.
Eigen::VectorXd eval_all(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data);

Eigen::VectorXd grad(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data,
                     std::size_t n);

/// out += weight * grad f_n(theta), without allocating.
void accumulate_grad(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data,
                     std::size_t n, double weight, Eigen::VectorXd& out);

/// True iff every log-family inner product theta^T z_n is positive (always true otherwise).
bool in_domain(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data);

struct HomogeneityReport {
  double residual = 0.0;        // max_k |f^(k)(rho theta_k) - rho^a_k f^(k)(theta_k)|
  std::size_t worst_block = 0;
  bool pass = true;             // residual <= tol * (1 + |f^(k)(theta_k)|) for every block
};

HomogeneityReport check_homogeneity(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho,
                                    const Dataset& data, std::size_t n, double tol);

struct FdReport {
  double residual = 0.0;   // worst |analytic - central difference|
  double relative = 0.0;   // worst residual / max(1, |analytic|)
  std::size_t worst_coordinate = 0;
  bool pass = true;        // relative <= tol
};

FdReport grad_fd_check(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data,
                       std::size_t n, double h, double tol);

}  // namespace mpaths
