#pragma once

#include <span>
#include <string>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

/// Exponential coordinates xi = (z, sigma_2, ..., sigma_r), laid out layer by layer.
using GroupPoint = std::vector<double>;

/// A validated Carnot group: structure constants plus the BCH group law.
///
/// Sign convention: brackets are taken as given by the structure constants
/// and the product is exp(X) exp(Y) = exp(X + Y + [X,Y]/2 + ...). For the
/// Heisenberg catalog entry ([e_1,e_2] = +e_3) this gives
/// (x,y,s)(x',y',s') = (x+x', y+y', s+s'+(xy'-yx')/2).
class CarnotGroup {
 public:
  /// Throws std::invalid_argument when validation fails.
  explicit CarnotGroup(GroupDefinition def);

  const std::string& name() const { return def_.name; }
  const StructureConstants& constants() const { return def_.constants; }
  const Stratification& stratification() const { return def_.constants.stratification(); }
  int dim() const { return stratification().total_dim(); }
  int step() const { return stratification().step(); }
  int horizontal_dim() const { return stratification().horizontal_dim(); }
  int homogeneous_dim() const { return stratification().homogeneous_dim(); }

  /// [x, y] over any scalar ring; `zero` fixes the ring element used for 0.
  template <class T>
  std::vector<T> bracket(std::span<const T> x, std::span<const T> y, const T& zero) const {
    std::vector<T> out(x.size(), zero);
    constants().bracket_into<T>(x, y, out);
    return out;
  }

  /// log(exp x exp y), truncated at bracket depth r (exact for nilpotent algebras).
  template <class T>
  std::vector<T> bch(std::span<const T> x, std::span<const T> y, const T& zero) const;

 private:
  struct DynkinWord {
    std::vector<int> letters;  // 0 = x, 1 = y; right-nested bracket
    Rational coeff;
  };
  template <class T>
  void dynkin_accumulate(std::span<const T> x, std::span<const T> y, const std::vector<T>& inner,
                         std::vector<int>& suffix, std::vector<T>& z, const T& zero) const;

  GroupDefinition def_;
  std::vector<DynkinWord> words_;  // merged Dynkin coefficients, used for r >= 4
  std::vector<std::vector<int>> word_index_;
};

/// Coefficients of the Dynkin series grouped by letter word (0 = X, 1 = Y),
/// truncated at word length `max_length`. Words whose right-nested bracket
/// vanishes identically (repeated final letter) are dropped.
std::vector<std::pair<std::vector<int>, Rational>> dynkin_coefficients(int max_length);

GroupPoint bch_product(const GroupPoint& g, const GroupPoint& h, const CarnotGroup& group);
/// Allocation-free product for hot loops; `scratch` is resized as needed.
void bch_product_into(const CarnotGroup& group, std::span<const double> x, std::span<const double> y,
                      std::span<double> out, std::vector<double>& scratch);

GroupPoint inverse(const GroupPoint& g);
GroupPoint dilate(double lambda, const GroupPoint& g, const Stratification& strat);
double gauge(const GroupPoint& g, const Stratification& strat);

/// Interval enclosure of the product of two boxes.
std::vector<Interval> bch_product(std::span<const Interval> g, std::span<const Interval> h,
                                  const CarnotGroup& group);

/// Row-major m x m matrix with entry (a,b) = <[e_a, e_b], sigma>, a, b horizontal.
///
/// With the pairing <J(sigma) z, zeta> = <[z, zeta], sigma> this is the
/// transpose of the operator J(sigma); both are antisymmetric and share J^2.
std::vector<double> kaplan_map(std::span<const double> sigma, const CarnotGroup& group);

// ---------------------------------------------------------------------------

template <class T>
void CarnotGroup::dynkin_accumulate(std::span<const T> x, std::span<const T> y, const std::vector<T>& inner,
                                    std::vector<int>& suffix, std::vector<T>& z, const T& zero) const {
  // `inner` is the right-nested bracket of `suffix` (stored front-to-back).
  const auto& idx = word_index_;
  int key = 0;
  for (int l : suffix) key = 2 * key + l;
  const int len = static_cast<int>(suffix.size());
  const int slot = idx[len][key];
  if (slot >= 0) {
    const Rational& c = words_[slot].coeff;
    const double cd = c.to_double();
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += scale_by(inner[k], c, cd);
  }
  if (len == step()) return;
  for (int letter = 0; letter < 2; ++letter) {
    if (len == 1 && letter == suffix.front()) continue;  // [a, a] = 0
    std::vector<T> next(z.size(), zero);
    constants().bracket_into<T>(letter == 0 ? x : y, inner, next);
    suffix.insert(suffix.begin(), letter);
    dynkin_accumulate(x, y, next, suffix, z, zero);
    suffix.erase(suffix.begin());
  }
}

template <class T>
std::vector<T> CarnotGroup::bch(std::span<const T> x, std::span<const T> y, const T& zero) const {
  const std::size_t n = x.size();
  std::vector<T> z(n, zero);
  for (std::size_t k = 0; k < n; ++k) z[k] = x[k] + y[k];
  const int r = step();
  if (r == 1) return z;
  const std::vector<T> xy = bracket<T>(x, y, zero);
  if (r <= 3) {
    const Rational half(1, 2);
    for (std::size_t k = 0; k < n; ++k) z[k] += scale_by(xy[k], half, 0.5);
    if (r == 3) {
      std::vector<T> diff(n, zero);
      for (std::size_t k = 0; k < n; ++k) diff[k] = x[k] - y[k];
      const std::vector<T> third = bracket<T>(diff, xy, zero);
      const Rational twelfth(1, 12);
      for (std::size_t k = 0; k < n; ++k) z[k] += scale_by(third[k], twelfth, 1.0 / 12.0);
    }
    return z;
  }
  // Dynkin series: walk all words up to length r, extending on the left.
  std::vector<T> dz(n, zero);
  for (int letter = 0; letter < 2; ++letter) {
    std::vector<int> suffix{letter};
    std::vector<T> inner(letter == 0 ? x.begin() : y.begin(), letter == 0 ? x.end() : y.end());
    dynkin_accumulate<T>(x, y, inner, suffix, dz, zero);
  }
  return dz;
}

}  // namespace carnot
