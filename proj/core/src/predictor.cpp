#include "margin_paths/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "margin_paths/errors.hpp"

namespace mpaths {

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels, std::optional<std::uint64_t> seed)
    : x_(std::move(features)), labels_(std::move(labels)), seed_(seed) {
  if (static_cast<std::size_t>(x_.rows()) != labels_.size())
    throw SpecError("dataset: " + std::to_string(x_.rows()) + " feature rows but " +
                    std::to_string(labels_.size()) + " labels");
  if (labels_.empty()) throw SpecError("dataset: no samples");
  if (x_.cols() == 0) throw SpecError("dataset: zero feature dimension");
  z_ = x_;
  for (std::size_t n = 0; n < labels_.size(); ++n) {
    if (labels_[n] != 1 && labels_[n] != -1)
      throw SpecError("dataset: label of sample " + std::to_string(n) + " is not +1/-1");
    if (labels_[n] < 0) z_.row(static_cast<Eigen::Index>(n)) = -x_.row(static_cast<Eigen::Index>(n));
  }
}

Rational Family::degree() const {
  switch (kind) {
    case FamilyKind::Linear: return 1;
    case FamilyKind::PowerLiftedLinear:
    case FamilyKind::ProductLinear: return order;
    case FamilyKind::SquaredBias: return 2;
    case FamilyKind::LogWrap:
    case FamilyKind::PowerLogWrap: break;
  }
  throw UnsupportedFamily(name() + " is not positively homogeneous");
}

std::size_t Family::block_dim(std::size_t input_dim) const {
  switch (kind) {
    case FamilyKind::ProductLinear: return static_cast<std::size_t>(order - 1) + input_dim;
    case FamilyKind::SquaredBias: return 1;
    default: return input_dim;
  }
}

std::string Family::name() const {
  std::ostringstream os;
  switch (kind) {
    case FamilyKind::Linear: os << "Linear"; break;
    case FamilyKind::PowerLiftedLinear: os << "PowerLiftedLinear(" << order << ")"; break;
    case FamilyKind::ProductLinear: os << "ProductLinear(" << order << ")"; break;
    case FamilyKind::SquaredBias: os << "SquaredBias"; break;
    case FamilyKind::LogWrap: os << "LogWrap"; break;
    case FamilyKind::PowerLogWrap: os << "PowerLogWrap(" << eps << ")"; break;
  }
  return os.str();
}

PredictorSpec::PredictorSpec(std::vector<Family> families, std::size_t input_dim,
                             std::vector<std::optional<Rational>> declared_degrees)
    : input_dim_(input_dim) {
  if (families.empty()) throw SpecError("predictor needs at least one block");
  if (input_dim == 0) throw SpecError("predictor input dimension must be positive");
  if (!declared_degrees.empty() && declared_degrees.size() != families.size())
    throw SpecError("declared degrees must list one entry per block");

  for (std::size_t k = 0; k < families.size(); ++k) {
    const Family& fam = families[k];
    if ((fam.kind == FamilyKind::PowerLiftedLinear || fam.kind == FamilyKind::ProductLinear) && fam.order < 1)
      throw SpecError(fam.name() + ": order must be >= 1");
    if (fam.kind == FamilyKind::PowerLogWrap && !(fam.eps > 0.0))
      throw SpecError(fam.name() + ": eps must be positive");
    Block b;
    b.family = fam;
    b.offset = total_dim_;
    b.dim = fam.block_dim(input_dim);
    if (fam.homogeneous()) {
      b.degree = fam.degree();
      if (!declared_degrees.empty() && declared_degrees[k] && *declared_degrees[k] != *b.degree)
        throw SpecError("block " + std::to_string(k) + " (" + fam.name() + ") declared degree " +
                        declared_degrees[k]->str() + " but its analytic degree is " + b.degree->str());
    } else {
      homogeneous_ = false;
      smooth_ = false;
      if (!declared_degrees.empty() && declared_degrees[k])
        throw SpecError("block " + std::to_string(k) + " (" + fam.name() + ") has no homogeneity degree");
    }
    total_dim_ += b.dim;
    blocks_.push_back(b);
  }

  if (!homogeneous_ && blocks_.size() != 1)
    throw SpecError("log-wrapped predictors must be the only block");
  for (std::size_t k = 1; k < blocks_.size(); ++k) {
    if (!(*blocks_[k - 1].degree < *blocks_[k].degree))
      throw SpecError("block degrees must be strictly increasing: block " + std::to_string(k - 1) + " has " +
                      blocks_[k - 1].degree->str() + ", block " + std::to_string(k) + " has " +
                      blocks_[k].degree->str());
  }
}

std::optional<Rational> PredictorSpec::degree() const {
  if (homogeneous_ && blocks_.size() == 1) return blocks_.front().degree;
  return std::nullopt;
}

std::string PredictorSpec::describe() const {
  std::string out;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (k) out += " + ";
    out += blocks_[k].family.name();
  }
  return out;
}

ParamPoint::ParamPoint(const PredictorSpec& spec, Eigen::VectorXd theta, NormTag tag)
    : theta_(std::move(theta)), tag_(tag) {
  if (static_cast<std::size_t>(theta_.size()) != spec.total_dim())
    throw SpecError("parameter vector has size " + std::to_string(theta_.size()) + ", predictor needs " +
                    std::to_string(spec.total_dim()));
  offsets_.clear();
  for (const auto& b : spec.blocks()) offsets_.push_back(b.offset);
  offsets_.push_back(spec.total_dim());
}

Eigen::VectorXd ParamPoint::block(std::size_t k) const {
  const auto begin = static_cast<Eigen::Index>(offsets_.at(k));
  const auto len = static_cast<Eigen::Index>(offsets_.at(k + 1)) - begin;
  return theta_.segment(begin, len);
}

namespace {

double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void check_index(const Dataset& data, std::size_t n) {
  if (n >= data.size())
    throw IndexError("sample index " + std::to_string(n) + " out of range (N=" + std::to_string(data.size()) + ")");
}

double inner(const Eigen::VectorXd& theta, const Block& b, const Dataset& data, std::size_t n) {
  return theta.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.dim)).dot(
      data.z(n).transpose());
}

double log_argument(const Eigen::VectorXd& theta, const Block& b, const Dataset& data, std::size_t n) {
  const double u = inner(theta, b, data, n);
  if (!(u > 0.0))
    throw DomainError("log predictor argument theta^T z_" + std::to_string(n) + " = " + std::to_string(u) +
                      " is not positive");
  return u;
}

double block_value(const Block& b, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n) {
  const auto off = static_cast<Eigen::Index>(b.offset);
  switch (b.family.kind) {
    case FamilyKind::Linear: return inner(theta, b, data, n);
    case FamilyKind::PowerLiftedLinear: {
      const auto z = data.z(n);
      double s = 0.0;
      for (Eigen::Index j = 0; j < z.size(); ++j) s += z[j] * ipow(theta[off + j], b.family.order);
      return s;
    }
    case FamilyKind::ProductLinear: {
      const int scalars = b.family.order - 1;
      double prod = 1.0;
      for (int i = 0; i < scalars; ++i) prod *= theta[off + i];
      const auto z = data.z(n);
      return prod * theta.segment(off + scalars, z.size()).dot(z.transpose());
    }
    case FamilyKind::SquaredBias: return data.y(n) * theta[off] * theta[off];
    case FamilyKind::LogWrap: return std::log(log_argument(theta, b, data, n));
    case FamilyKind::PowerLogWrap: {
      // signed power keeps the wrapper strictly increasing below u = 1
      const double l = std::log(log_argument(theta, b, data, n));
      return std::copysign(std::pow(std::abs(l), 1.0 + b.family.eps), l);
    }
  }
  return 0.0;
}

void block_grad(const Block& b, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n, double w,
                Eigen::VectorXd& out) {
  const auto off = static_cast<Eigen::Index>(b.offset);
  const auto z = data.z(n);
  switch (b.family.kind) {
    case FamilyKind::Linear: out.segment(off, z.size()) += w * z.transpose(); return;
    case FamilyKind::PowerLiftedLinear: {
      const int p = b.family.order;
      for (Eigen::Index j = 0; j < z.size(); ++j) out[off + j] += w * p * z[j] * ipow(theta[off + j], p - 1);
      return;
    }
    case FamilyKind::ProductLinear: {
      const int scalars = b.family.order - 1;
      const double vz = theta.segment(off + scalars, z.size()).dot(z.transpose());
      // prefix/suffix products avoid dividing by a zero scalar
      std::vector<double> prefix(static_cast<std::size_t>(scalars) + 1, 1.0);
      std::vector<double> suffix(static_cast<std::size_t>(scalars) + 1, 1.0);
      for (int i = 0; i < scalars; ++i) prefix[i + 1] = prefix[i] * theta[off + i];
      for (int i = scalars - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * theta[off + i];
      for (int i = 0; i < scalars; ++i) out[off + i] += w * prefix[i] * suffix[i + 1] * vz;
      out.segment(off + scalars, z.size()) += w * prefix[scalars] * z.transpose();
      return;
    }
    case FamilyKind::SquaredBias: out[off] += w * 2.0 * data.y(n) * theta[off]; return;
    case FamilyKind::LogWrap: {
      const double u = log_argument(theta, b, data, n);
      out.segment(off, z.size()) += (w / u) * z.transpose();
      return;
    }
    case FamilyKind::PowerLogWrap: {
      const double u = log_argument(theta, b, data, n);
      const double l = std::log(u);
      const double dl = (1.0 + b.family.eps) * std::pow(std::abs(l), b.family.eps);
      out.segment(off, z.size()) += (w * dl / u) * z.transpose();
      return;
    }
  }
}

void check_size(const PredictorSpec& spec, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.total_dim())
    throw SpecError("parameter vector has size " + std::to_string(theta.size()) + ", predictor needs " +
                    std::to_string(spec.total_dim()));
}

}  // namespace

double eval(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n) {
  check_index(data, n);
  check_size(spec, theta);
  double s = 0.0;
  for (const auto& b : spec.blocks()) s += block_value(b, theta, data, n);
  return s;
}

double eval_block(const PredictorSpec& spec, std::size_t k, const Eigen::VectorXd& theta, const Dataset& data,
                  std::size_t n) {
  check_index(data, n);
  check_size(spec, theta);
  if (k >= spec.num_blocks()) throw IndexError("block index " + std::to_string(k) + " out of range");
  return block_value(spec.blocks()[k], theta, data, n);
}

Eigen::VectorXd eval_all(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data) {
  check_size(spec, theta);
  Eigen::VectorXd out(static_cast<Eigen::Index>(data.size()));
  for (std::size_t n = 0; n < data.size(); ++n) {
    double s = 0.0;
    for (const auto& b : spec.blocks()) s += block_value(b, theta, data, n);
    out[static_cast<Eigen::Index>(n)] = s;
  }
  return out;
}

void accumulate_grad(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n,
                     double weight, Eigen::VectorXd& out) {
  check_index(data, n);
  check_size(spec, theta);
  for (const auto& b : spec.blocks()) block_grad(b, theta, data, n, weight, out);
}

Eigen::VectorXd grad(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.total_dim()));
  accumulate_grad(spec, theta, data, n, 1.0, g);
  return g;
}

bool in_domain(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data) {
  for (const auto& b : spec.blocks()) {
    if (b.family.homogeneous()) continue;
    for (std::size_t n = 0; n < data.size(); ++n)
      if (!(inner(theta, b, data, n) > 0.0)) return false;
  }
  return true;
}

HomogeneityReport check_homogeneity(const PredictorSpec& spec, const Eigen::VectorXd& theta, double rho,
                                    const Dataset& data, std::size_t n, double tol) {
  if (!(rho > 0.0)) throw SpecError("homogeneity check needs rho > 0");
  check_index(data, n);
  check_size(spec, theta);
  HomogeneityReport rep;
  const Eigen::VectorXd scaled = rho * theta;
  for (std::size_t k = 0; k < spec.num_blocks(); ++k) {
    const Block& b = spec.blocks()[k];
    if (!b.family.homogeneous()) throw UnsupportedFamily(b.family.name() + " has no homogeneity degree");
    const double base = block_value(b, theta, data, n);
    const double expected = std::pow(rho, b.degree->value()) * base;
    const double r = std::abs(block_value(b, scaled, data, n) - expected);
    if (r > rep.residual) {
      rep.residual = r;
      rep.worst_block = k;
    }
    if (r > tol * (1.0 + std::abs(expected))) rep.pass = false;
  }
  return rep;
}

FdReport grad_fd_check(const PredictorSpec& spec, const Eigen::VectorXd& theta, const Dataset& data, std::size_t n,
                       double h, double tol) {
  if (!(h > 0.0)) throw SpecError("finite-difference step must be positive");
  const Eigen::VectorXd g = grad(spec, theta, data, n);
  FdReport rep;
  Eigen::VectorXd probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = eval(spec, probe, data, n);
    probe[i] = theta[i] - h;
    const double down = eval(spec, probe, data, n);
    probe[i] = theta[i];
    const double fd = (up - down) / (2.0 * h);
    const double r = std::abs(g[i] - fd);
    const double rel = r / std::max(1.0, std::abs(g[i]));
    if (rel > rep.relative) {
      rep.relative = rel;
      rep.worst_coordinate = static_cast<std::size_t>(i);
    }
    rep.residual = std::max(rep.residual, r);
  }
  rep.pass = rep.relative <= tol;
  return rep;
}

}  // namespace mpaths
