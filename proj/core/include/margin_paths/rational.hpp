#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

#include "margin_paths/errors.hpp"

namespace mpaths {

/// Exact positive-or-negative rational, used for homogeneity degrees so that
/// ordering checks never compare floats.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num) : num_(num), den_(1) {}  // NOLINT: implicit from integer
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw SpecError("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const auto g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }
  constexpr double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend constexpr bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    // denominators are positive, so cross-multiplication preserves order
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace mpaths
