#pragma once

#include <stdexcept>
#include <string>

namespace mpaths {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A log-family argument left the open cone theta^T z_n > 0.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Operation is undefined for the predictor family (e.g. homogeneity of a log wrapper).
class UnsupportedFamily : public Error {
 public:
  using Error::Error;
};

/// Malformed predictor declaration: degree mismatch, unordered degrees, bad block layout.
class SpecError : public Error {
 public:
  using Error::Error;
};

class AllStartsInfeasible : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class ResolutionTooCoarse : public Error {
 public:
  using Error::Error;
};

class NonSmoothSpec : public Error {
 public:
  using Error::Error;
};

class EmptySupport : public Error {
 public:
  using Error::Error;
};

class NonPositiveGamma : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class PlantFailed : public Error {
 public:
  using Error::Error;
};

/// Configuration problems; `where` names the line or JSON field at fault.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)), detail_(what) {}
  const std::string& where() const noexcept { return where_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string where_;
  std::string detail_;
};

}  // namespace mpaths
