#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

/// Exponent vector of a monomial.
using Monomial = std::vector<int>;

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// All polynomials combined in one expression must share the same number of
/// variables. Zero coefficients are never stored, so `terms().empty()` is the
/// zero test.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}
  Polynomial(std::size_t nvars, const Rational& c);

  static Polynomial variable(std::size_t nvars, std::size_t index);

  std::size_t nvars() const { return nvars_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& mono, const Rational& c);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  Polynomial derivative(std::size_t var) const;

  /// Terms whose exponent in `var` equals `power`, with that variable removed
  /// (the variable is kept in the signature but its exponent is zeroed).
  Polynomial coefficient_of(std::size_t var, int power) const;

  /// Drops all monomials whose total degree exceeds `max_degree`.
  Polynomial truncated(int max_degree) const;

  /// Weighted degree of every monomial, with weight[k] attached to variable k.
  std::vector<int> weighted_degrees(std::span<const int> weight) const;

  /// Highest index of a variable that appears with nonzero exponent, or -1.
  int max_variable() const;

  /// Drops trailing variables (they must not appear).
  Polynomial restricted(std::size_t nvars) const;

  double evaluate(std::span<const double> x) const;
  std::string str(std::span<const std::string> names = {}) const;

 private:
  std::size_t nvars_ = 0;
  std::map<Monomial, Rational> terms_;
};

/// Flattened double-precision form of a polynomial for hot loops.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);

  bool is_zero() const { return coeffs_.empty(); }
  double operator()(std::span<const double> x) const;

 private:
  struct Factor {
    int var;
    int power;
  };
  std::vector<double> coeffs_;
  std::vector<std::size_t> offsets_;  // into factors_, size coeffs_+1
  std::vector<Factor> factors_;
};

}  // namespace carnot
