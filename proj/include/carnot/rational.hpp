#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace carnot {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Used for structure constants and symbolic frame coefficients, where the
/// algebraic checks (Jacobi, antisymmetry, weighted degree) must be exact.
/// Arithmetic throws std::overflow_error instead of silently wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  /// Parses "p", "p/q" or "-p/q".
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }
  std::string str() const;

  Rational operator-() const { return Rational(neg(num_), den_); }
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o) { return *this += -o; }
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (a - b).num_ < 0;
  }

 private:
  static std::int64_t neg(std::int64_t v);
  static std::int64_t mul(std::int64_t a, std::int64_t b);
  static std::int64_t add(std::int64_t a, std::int64_t b);
  void normalize();

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace carnot
