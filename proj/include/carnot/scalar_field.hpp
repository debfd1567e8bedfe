#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace carnot {

/// A compactly supported function on a group in exponential coordinates.
///
/// `gradient` returns Euclidean partials d/dxi_k. It may be empty, in which
/// case consumers fall back to central finite differences and say so.
struct ScalarField {
  std::string name;
  int dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::vector<double> support_lo;  // f vanishes outside [support_lo, support_hi]
  std::vector<double> support_hi;
  int smoothness = 1;  // continuous derivatives available

  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool in_support(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return in_support(x) ? value(x) : 0.0; }
};

/// Central finite-difference gradient with step h per coordinate.
std::vector<double> finite_difference_gradient(const ScalarField& f, std::span<const double> x, double h = 1e-5);

struct FieldAudit {
  double max_gradient_error = 0.0;  // relative to max(1, |analytic partial|)
  double max_shell_value = 0.0;     // largest |f| just outside the support box
  bool ok = false;
};

/// Checks declared partials against central differences on random interior
/// points and that f vanishes on a shell around the support box.
FieldAudit audit_field(const ScalarField& f, int samples = 200, unsigned seed = 1, double tolerance = 1e-6);

/// The zero function on a dim-dimensional group (support: the unit box).
ScalarField zero_field(int dim);

}  // namespace carnot
