#include "carnot/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace carnot {

namespace {

Rule1D compute_gauss_legendre(int n) {
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

Rule1D gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
  // Golub-Welsch would need an eigensolver; Newton on the orthonormal recurrence is enough here.
  Rule1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = std::pow(std::numbers::pi, -0.25);
  double z = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[n - 1];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[n - 2];
    } else {
      z = 2.0 * z - rule.nodes[n - i + 1];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[n - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Rule1D composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw std::invalid_argument("composite rule needs at least one panel");
  const Rule1D& base = gauss_legendre(order);
  Rule1D rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
  rule.weights.reserve(static_cast<std::size_t>(panels) * order);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int k = 0; k < order; ++k) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[k]);
      rule.weights.push_back(0.5 * h * base.weights[k]);
    }
  }
  return rule;
}

Rule1D composite_gauss_legendre_width(double a, double b, double max_width, int order) {
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
  return composite_gauss_legendre(a, b, panels, order);
}

}  // namespace carnot
