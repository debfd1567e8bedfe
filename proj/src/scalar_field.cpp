#include "carnot/scalar_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace carnot {

bool ScalarField::in_support(std::span<const double> x) const {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < support_lo[k] || x[k] > support_hi[k]) return false;
  }
  return true;
}

std::vector<double> finite_difference_gradient(const ScalarField& f, std::span<const double> x, double h) {
  std::vector<double> y(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    y[k] = x[k] + h;
    const double up = f(y);
    y[k] = x[k] - h;
    const double down = f(y);
    y[k] = x[k];
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

FieldAudit audit_field(const ScalarField& f, int samples, unsigned seed, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FieldAudit audit;
  const int n = f.dim;
  std::vector<double> x(n), grad(n);
  for (int s = 0; s < samples; ++s) {
    for (int k = 0; k < n; ++k) x[k] = f.support_lo[k] + (0.05 + 0.9 * unit(rng)) * (f.support_hi[k] - f.support_lo[k]);
    if (f.has_gradient()) {
      f.gradient(x, grad);
      const auto fd = finite_difference_gradient(f, x, 1e-5);
      for (int k = 0; k < n; ++k) {
        audit.max_gradient_error =
            std::max(audit.max_gradient_error, std::abs(fd[k] - grad[k]) / std::max(1.0, std::abs(grad[k])));
      }
    }
    // A point just outside the box through one randomly chosen face.
    const int face = static_cast<int>(unit(rng) * n) % n;
    const double width = f.support_hi[face] - f.support_lo[face];
    x[face] = unit(rng) < 0.5 ? f.support_lo[face] - 1e-3 * width : f.support_hi[face] + 1e-3 * width;
    audit.max_shell_value = std::max(audit.max_shell_value, std::abs(f.value(x)));
  }
  audit.ok = audit.max_gradient_error <= tolerance && audit.max_shell_value <= tolerance;
  return audit;
}

ScalarField zero_field(int dim) {
  ScalarField f;
  f.name = "zero";
  f.dim = dim;
  f.value = [](std::span<const double>) { return 0.0; };
  f.gradient = [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
  f.support_lo.assign(dim, -1.0);
  f.support_hi.assign(dim, 1.0);
  f.smoothness = 100;
  return f;
}

}  // namespace carnot
