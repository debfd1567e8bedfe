#pragma once

#include <vector>

namespace carnot {

/// Nodes and weights of a one-dimensional quadrature rule.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (cached, thread-safe).
const Rule1D& gauss_legendre(int n);

/// n-point Gauss-Hermite rule for the weight exp(-x^2) on the real line.
Rule1D gauss_hermite(int n);

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
Rule1D composite_gauss_legendre(double a, double b, int panels, int order);

/// Composite rule on [a, b] whose panel width does not exceed `max_width`.
Rule1D composite_gauss_legendre_width(double a, double b, double max_width, int order);

}  // namespace carnot
