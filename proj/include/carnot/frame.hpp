#pragma once

#include <span>
#include <string>
#include <vector>

#include "carnot/group.hpp"
#include "carnot/polynomial.hpp"
#include "carnot/scalar_field.hpp"

namespace carnot {

/// Left-invariant horizontal fields X_i = sum_k b_{i,k}(xi) d/dxi_k.
///
/// b_{i,k} is exact (rational polynomial in the N coordinates). For k in the
/// first layer b_{i,k} = delta_{ik}; for k in layer j >= 2 it is homogeneous
/// of weighted degree j-1 and only involves layers below j.
class HorizontalFrame {
 public:
  HorizontalFrame(Stratification strat, std::vector<std::vector<Polynomial>> coeffs);

  const Stratification& stratification() const { return strat_; }
  int horizontal_dim() const { return strat_.horizontal_dim(); }
  int dim() const { return strat_.total_dim(); }

  const Polynomial& coefficient(int i, int k) const { return coeffs_.at(i).at(k); }

  /// b_i(x) as a full N-vector.
  void evaluate(int i, std::span<const double> x, std::span<double> out) const;

  /// X_i f at x given the Euclidean gradient of f at x.
  double apply(int i, std::span<const double> x, std::span<const double> euclidean_grad) const;

  /// Human-readable form, e.g. "X1 = d/dz1 - 1/2*z2 d/ds1".
  std::string describe() const;

 private:
  struct Entry {
    int i;
    int k;
    CompiledPolynomial poly;
  };
  Stratification strat_;
  std::vector<std::vector<Polynomial>> coeffs_;
  std::vector<Entry> entries_;  // nonzero coefficients outside the first layer
};

/// Symbolic derivation: b_{i,.} is the s-linear part of BCH(xi, s e_i).
HorizontalFrame horizontal_frame(const CarnotGroup& group);

/// Coordinate names: z1..zm for the first layer, then s<j>_<k> (or s<k> when r = 2).
std::vector<std::string> coordinate_names(const Stratification& strat);

struct HorizontalGradient {
  std::vector<double> value;
  bool finite_difference = false;  // true when f had no analytic partials
};

HorizontalGradient horizontal_gradient(const ScalarField& f, std::span<const double> g,
                                       const HorizontalFrame& frame);

}  // namespace carnot
