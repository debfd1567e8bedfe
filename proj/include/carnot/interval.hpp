#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace carnot {

/// Closed interval [lo, hi] with outward-widened arithmetic.
///
/// Only what the group law needs: +, -, * and scaling by a constant. Every
/// result is widened by a couple of ulps so that enclosures survive round-off.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT(implicit)
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  double width() const { return hi - lo; }

  static Interval widened(double l, double h) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {std::nextafter(std::nextafter(l, -inf), -inf), std::nextafter(std::nextafter(h, inf), inf)};
  }

  Interval& operator+=(const Interval& o) { return *this = widened(lo + o.lo, hi + o.hi); }
  Interval& operator-=(const Interval& o) { return *this = widened(lo - o.hi, hi - o.lo); }
  Interval& operator*=(const Interval& o) {
    const double a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
    return *this = widened(std::min({a, b, c, d}), std::max({a, b, c, d}));
  }
  Interval operator-() const { return {-hi, -lo}; }

  friend Interval operator+(Interval a, const Interval& b) { return a += b; }
  friend Interval operator-(Interval a, const Interval& b) { return a -= b; }
  friend Interval operator*(Interval a, const Interval& b) { return a *= b; }
};

/// Interval hull.
inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace carnot
