#include "carnot/group.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace carnot {

namespace {

Rational factorial(int k) {
  Rational f(1);
  for (int i = 2; i <= k; ++i) f *= Rational(i);
  return f;
}

void enumerate_dynkin(int max_length, std::vector<int>& word, int blocks, Rational denom,
                      std::map<std::vector<int>, Rational>& out) {
  const int len = static_cast<int>(word.size());
  if (blocks > 0) {
    const Rational sign = (blocks % 2 == 1) ? Rational(1) : Rational(-1);
    Rational c = sign / (Rational(blocks) * Rational(len) * denom);
    out[word] += c;
  }
  for (int r = 0; len + r <= max_length; ++r) {
    for (int s = (r == 0 ? 1 : 0); len + r + s <= max_length; ++s) {
      word.insert(word.end(), r, 0);
      word.insert(word.end(), s, 1);
      enumerate_dynkin(max_length, word, blocks + 1, denom * factorial(r) * factorial(s), out);
      word.resize(len);
    }
  }
}

}  // namespace

std::vector<std::pair<std::vector<int>, Rational>> dynkin_coefficients(int max_length) {
  std::map<std::vector<int>, Rational> merged;
  std::vector<int> word;
  enumerate_dynkin(max_length, word, 0, Rational(1), merged);
  std::vector<std::pair<std::vector<int>, Rational>> out;
  for (auto& [w, c] : merged) {
    if (c.is_zero()) continue;
    if (w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2]) continue;
    out.emplace_back(w, c);
  }
  return out;
}

CarnotGroup::CarnotGroup(GroupDefinition def) : def_(std::move(def)) {
  const ValidationReport report = validate_algebra(def_.constants);
  for (const auto& c : report.checks) {
    if (!c.passed) {
      throw std::invalid_argument(fmt::format("group '{}' fails {} check: {}", def_.name, c.name, c.detail));
    }
  }
  const int r = step();
  if (r >= 4) {
    word_index_.resize(r + 1);
    for (int len = 0; len <= r; ++len) word_index_[len].assign(std::size_t{1} << len, -1);
    for (auto& [w, c] : dynkin_coefficients(r)) {
      int key = 0;
      for (int l : w) key = 2 * key + l;
      word_index_[w.size()][key] = static_cast<int>(words_.size());
      words_.push_back({w, c});
    }
  }
}

GroupPoint bch_product(const GroupPoint& g, const GroupPoint& h, const CarnotGroup& group) {
  const auto n = static_cast<std::size_t>(group.dim());
  if (g.size() != n || h.size() != n) {
    throw std::invalid_argument(
        fmt::format("point dimension {}/{} does not match group dimension {}", g.size(), h.size(), n));
  }
  return group.bch<double>(g, h, 0.0);
}

std::vector<Interval> bch_product(std::span<const Interval> g, std::span<const Interval> h,
                                  const CarnotGroup& group) {
  const auto n = static_cast<std::size_t>(group.dim());
  if (g.size() != n || h.size() != n) throw std::invalid_argument("interval point dimension mismatch");
  return group.bch<Interval>(g, h, Interval(0.0));
}

void bch_product_into(const CarnotGroup& group, std::span<const double> x, std::span<const double> y,
                      std::span<double> out, std::vector<double>& scratch) {
  const std::size_t n = x.size();
  const int r = group.step();
  if (r >= 4) {
    const auto z = group.bch<double>(x, y, 0.0);
    std::copy(z.begin(), z.end(), out.begin());
    return;
  }
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] + y[k];
  if (r == 1) return;
  scratch.assign(3 * n, 0.0);
  const std::span<double> xy(scratch.data(), n);
  group.constants().bracket_into<double>(x, y, xy);
  for (std::size_t k = 0; k < n; ++k) out[k] += 0.5 * xy[k];
  if (r == 3) {
    const std::span<double> diff(scratch.data() + n, n), third(scratch.data() + 2 * n, n);
    for (std::size_t k = 0; k < n; ++k) diff[k] = x[k] - y[k];
    group.constants().bracket_into<double>(std::span<const double>(diff), std::span<const double>(xy), third);
    for (std::size_t k = 0; k < n; ++k) out[k] += third[k] / 12.0;
  }
}

GroupPoint inverse(const GroupPoint& g) {
  GroupPoint out(g.size());
  std::transform(g.begin(), g.end(), out.begin(), [](double v) { return -v; });
  return out;
}

GroupPoint dilate(double lambda, const GroupPoint& g, const Stratification& strat) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  if (g.size() != static_cast<std::size_t>(strat.total_dim())) throw std::invalid_argument("dilate: dimension mismatch");
  GroupPoint out(g);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= std::pow(lambda, strat.layer_of(static_cast<int>(k)));
  return out;
}

double gauge(const GroupPoint& g, const Stratification& strat) {
  if (g.size() != static_cast<std::size_t>(strat.total_dim())) throw std::invalid_argument("gauge: dimension mismatch");
  const int r = strat.step();
  std::vector<double> norms(r);
  double scale = 0.0;
  for (int j = 1; j <= r; ++j) {
    double s2 = 0.0;
    for (int k = strat.offset(j); k < strat.offset(j) + strat.dim(j); ++k) s2 += g[k] * g[k];
    norms[j - 1] = std::sqrt(s2);
    scale = std::max(scale, std::pow(norms[j - 1], 1.0 / j));
  }
  if (scale == 0.0) return 0.0;
  // Homogeneity lets us normalize by `scale` so the large exponent 2r! cannot overflow.
  double e = 2.0;
  for (int k = 2; k <= r; ++k) e *= k;
  double sum = 0.0;
  for (int j = 1; j <= r; ++j) sum += std::pow(norms[j - 1] / std::pow(scale, j), e / j);
  return scale * std::pow(sum, 1.0 / e);
}

std::vector<double> kaplan_map(std::span<const double> sigma, const CarnotGroup& group) {
  const Stratification& s = group.stratification();
  if (s.step() < 2) throw std::invalid_argument("kaplan map needs a second layer");
  if (sigma.size() != static_cast<std::size_t>(s.dim(2))) throw std::invalid_argument("kaplan map: sigma dimension");
  const int m = s.horizontal_dim();
  const int off = s.offset(2);
  std::vector<double> J(static_cast<std::size_t>(m * m), 0.0);
  for (const BracketTerm& t : group.constants().terms()) {
    if (t.left >= m || t.right >= m) continue;
    J[t.left * m + t.right] += t.coeff.to_double() * sigma[t.out - off];
  }
  return J;
}

}  // namespace carnot
