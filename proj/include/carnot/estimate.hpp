#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace carnot {

/// A numerical value with a nonnegative uncertainty and the method that produced it.
///
/// `error` is a quadrature error bound, a Monte Carlo standard error, or the
/// combined error of an extrapolation, depending on `method`.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  std::string method;
  std::vector<std::pair<std::string, double>> breakdown;  // named error contributions
  std::vector<double> sequence;                            // pre-extrapolation values

  double relative_error() const { return value != 0.0 ? error / std::abs(value) : error; }
  double breakdown_value(const std::string& key) const {
    for (const auto& [k, v] : breakdown) {
      if (k == key) return v;
    }
    return 0.0;
  }
};

}  // namespace carnot
