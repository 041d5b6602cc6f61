#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fracheat {

template <class S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecT<double>;
using Mat = MatT<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when 1/p + 1/q <= 1 (Young integrals) or alpha + 2H <= 1 (2D Young integrals).
class ExponentConditionError : public Error {
 public:
  using Error::Error;
};

/// The solution left the box on which the vector fields are declared bounded.
class FieldDomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Exact rational number; used for Hurst parameters and index-set arithmetic.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {  // NOLINT
    if (den_ == 0) throw Error("Rational: zero denominator");
    normalize();
  }

  /// Parses "2/5", "1/2", "3" or a terminating decimal such as "0.4".
  static Rational parse(const std::string& text);

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  constexpr double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  Rational inverse() const { return Rational(den_, num_); }
  std::string str() const;

  friend constexpr Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend constexpr Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend constexpr Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend constexpr bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr auto operator<=>(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

 private:
  constexpr void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Hurst parameter H in (1/3, 1/2], held exactly.
class Hurst {
 public:
  explicit Hurst(Rational h);
  static Hurst parse(const std::string& text) { return Hurst(Rational::parse(text)); }

  const Rational& exact() const { return h_; }
  double value() const { return h_.value(); }
  /// 1/H, the exponent attached to the drift under the t = eps^(1/H) scaling.
  double inverse() const { return 1.0 / h_.value(); }

  friend bool operator==(const Hurst& a, const Hurst& b) { return a.h_ == b.h_; }

 private:
  Rational h_;
};

}  // namespace fracheat
