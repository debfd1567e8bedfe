#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "carnot/interval.hpp"
#include "carnot/polynomial.hpp"
#include "carnot/rational.hpp"

namespace carnot {

/// Layer structure g = g_1 + ... + g_r of a stratified Lie algebra.
///
/// Layers are numbered from 1. Basis vectors are indexed globally
/// 0..N-1, layer by layer, so layer j occupies [offset(j), offset(j)+dim(j)).
class Stratification {
 public:
  Stratification() = default;
  explicit Stratification(std::vector<int> layer_dims);

  int step() const { return static_cast<int>(dims_.size()); }
  int total_dim() const { return total_; }
  int homogeneous_dim() const { return homogeneous_; }
  int horizontal_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  int dim(int layer) const { return dims_.at(layer - 1); }
  int offset(int layer) const { return offsets_.at(layer - 1); }
  int layer_of(int index) const { return weights_.at(index); }
  const std::vector<int>& layer_dims() const { return dims_; }
  /// Weighted degree of each coordinate (its layer number).
  std::span<const int> weights() const { return weights_; }

  friend bool operator==(const Stratification& a, const Stratification& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  std::vector<int> weights_;
  int total_ = 0;
  int homogeneous_ = 0;
};

/// One bracket coefficient: [e_left, e_right] contains coeff * e_out.
struct BracketTerm {
  int left = 0;
  int right = 0;
  int out = 0;
  Rational coeff;
};

/// Sparse structure constants of a stratified algebra.
///
/// Terms are stored as given (duplicates merged). When `complete_antisymmetry`
/// is set, a pair (a,b) given without its mirror (b,a) receives the mirrored
/// terms with negated coefficients; pairs given in both orders are kept
/// verbatim so that inconsistent input is caught by validation.
class StructureConstants {
 public:
  StructureConstants() = default;
  StructureConstants(Stratification strat, std::vector<BracketTerm> terms,
                     bool complete_antisymmetry = true);

  const Stratification& stratification() const { return strat_; }
  const std::vector<BracketTerm>& terms() const { return terms_; }

  /// Exact bracket of two rational vectors.
  std::vector<Rational> bracket(std::span<const Rational> x, std::span<const Rational> y) const;

  /// Bracket over any scalar ring: double, Interval or Polynomial.
  template <class T>
  void bracket_into(std::span<const T> x, std::span<const T> y, std::span<T> out) const;

 private:
  Stratification strat_;
  std::vector<BracketTerm> terms_;
  std::vector<double> values_;  // terms_[k].coeff as double
};

inline double scale_by(const double& v, const Rational&, double c) { return v * c; }
inline Interval scale_by(const Interval& v, const Rational&, double c) { return v * Interval(c); }
inline Polynomial scale_by(const Polynomial& v, const Rational& c, double) { return v * c; }

template <class T>
void StructureConstants::bracket_into(std::span<const T> x, std::span<const T> y, std::span<T> out) const {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const BracketTerm& t = terms_[k];
    if constexpr (std::is_same_v<T, double>) {
      out[t.out] += values_[k] * x[t.left] * y[t.right];
    } else {
      out[t.out] += scale_by(x[t.left] * y[t.right], t.coeff, values_[k]);
    }
  }
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
};

/// Checks antisymmetry, grading, Jacobi and bracket generation exactly.
ValidationReport validate_algebra(const StructureConstants& sc);

/// Named group definition.
struct GroupDefinition {
  std::string name;
  StructureConstants constants;
};

// Catalog. Bracket convention: [e_1, e_2] = +e_3 in the Heisenberg group.
GroupDefinition euclidean_algebra(int n);
GroupDefinition heisenberg_algebra(int n);
GroupDefinition free_step2_algebra(int generators);
GroupDefinition engel_algebra();
/// Model filiform algebra of step r: [e_1, e_k] = e_{k+1}, layers (2,1,...,1).
GroupDefinition filiform_algebra(int step);

/// Resolves "euclidean<n>" / "r<n>", "h<n>", "free2_<m>", "engel", "filiform<r>".
GroupDefinition catalog_algebra(const std::string& name);
std::vector<std::string> catalog_names();

/// Group-definition JSON. Layers and indices in `left`, `right`, `basis` are 1-based.
GroupDefinition parse_group_json(const std::string& text);
GroupDefinition load_group_file(const std::filesystem::path& path);
std::string to_group_json(const GroupDefinition& def);

}  // namespace carnot
