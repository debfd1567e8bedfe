#include "carnot/rational.hpp"

#include <charconv>
#include <limits>

namespace carnot {

std::int64_t Rational::neg(std::int64_t v) {
  if (v == std::numeric_limits<std::int64_t>::min()) throw std::overflow_error("rational overflow");
  return -v;
}

std::int64_t Rational::mul(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("rational overflow");
  return r;
}

std::int64_t Rational::add(std::int64_t a, std::int64_t b) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("rational overflow");
  return r;
}

void Rational::normalize() {
  if (den_ == 0) throw std::domain_error("rational with zero denominator");
  if (den_ < 0) {
    num_ = neg(num_);
    den_ = neg(den_);
  }
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
  if (num_ == 0) den_ = 1;
}

Rational& Rational::operator+=(const Rational& o) {
  const std::int64_t g = std::gcd(den_, o.den_);
  const std::int64_t lhs = mul(num_, o.den_ / g);
  const std::int64_t rhs = mul(o.num_, den_ / g);
  num_ = add(lhs, rhs);
  den_ = mul(den_ / g, o.den_);
  normalize();
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  // Cross-reduce first to keep intermediates small.
  const std::int64_t g1 = std::gcd(num_, o.den_);
  const std::int64_t g2 = std::gcd(o.num_, den_);
  const std::int64_t a = g1 ? num_ / g1 : num_;
  const std::int64_t d = g1 ? o.den_ / g1 : o.den_;
  const std::int64_t c = g2 ? o.num_ / g2 : o.num_;
  const std::int64_t b = g2 ? den_ / g2 : den_;
  num_ = mul(a, c);
  den_ = mul(b, d);
  normalize();
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw std::domain_error("rational division by zero");
  return *this *= Rational(o.den_, o.num_);
}

Rational Rational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  auto parse_int = [](std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw std::invalid_argument("malformed rational: '" + std::string(s) + "'");
    }
    return v;
  };
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  return Rational(parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1))));
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace carnot
