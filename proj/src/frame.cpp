#include "carnot/frame.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace carnot {

HorizontalFrame::HorizontalFrame(Stratification strat, std::vector<std::vector<Polynomial>> coeffs)
    : strat_(std::move(strat)), coeffs_(std::move(coeffs)) {
  const int m = strat_.horizontal_dim();
  const int n = strat_.total_dim();
  if (static_cast<int>(coeffs_.size()) != m) throw std::invalid_argument("frame: one field per horizontal direction");
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(coeffs_[i].size()) != n) throw std::invalid_argument("frame: coefficient count");
    for (int k = m; k < n; ++k) {
      if (!coeffs_[i][k].is_zero()) entries_.push_back({i, k, CompiledPolynomial(coeffs_[i][k])});
    }
  }
}

void HorizontalFrame::evaluate(int i, std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[i] = 1.0;
  for (const Entry& e : entries_) {
    if (e.i == i) out[e.k] = e.poly(x);
  }
}

double HorizontalFrame::apply(int i, std::span<const double> x, std::span<const double> euclidean_grad) const {
  double v = euclidean_grad[i];
  for (const Entry& e : entries_) {
    if (e.i == i && euclidean_grad[e.k] != 0.0) v += e.poly(x) * euclidean_grad[e.k];
  }
  return v;
}

std::string HorizontalFrame::describe() const {
  const auto names = coordinate_names(strat_);
  std::string out;
  for (int i = 0; i < horizontal_dim(); ++i) {
    out += fmt::format("X{} = d/d{}", i + 1, names[i]);
    for (int k = horizontal_dim(); k < dim(); ++k) {
      if (coeffs_[i][k].is_zero()) continue;
      out += fmt::format(" + [{}] d/d{}", coeffs_[i][k].str(names), names[k]);
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> coordinate_names(const Stratification& strat) {
  std::vector<std::string> names;
  for (int j = 1; j <= strat.step(); ++j) {
    for (int k = 1; k <= strat.dim(j); ++k) {
      if (j == 1) {
        names.push_back(fmt::format("z{}", k));
      } else if (strat.step() == 2) {
        names.push_back(fmt::format("s{}", k));
      } else {
        names.push_back(fmt::format("s{}_{}", j, k));
      }
    }
  }
  return names;
}

HorizontalFrame horizontal_frame(const CarnotGroup& group) {
  const int n = group.dim();
  const int m = group.horizontal_dim();
  const auto nv = static_cast<std::size_t>(n + 1);  // coordinates plus the curve parameter s
  const Polynomial zero(nv);
  std::vector<Polynomial> xi;
  for (int k = 0; k < n; ++k) xi.push_back(Polynomial::variable(nv, k));
  const Polynomial s = Polynomial::variable(nv, n);

  std::vector<std::vector<Polynomial>> coeffs(m);
  for (int i = 0; i < m; ++i) {
    std::vector<Polynomial> direction(n, zero);
    direction[i] = s;
    const auto prod = group.bch<Polynomial>(xi, direction, zero);
    for (int k = 0; k < n; ++k) coeffs[i].push_back(prod[k].coefficient_of(n, 1).restricted(n));
  }
  return HorizontalFrame(group.stratification(), std::move(coeffs));
}

HorizontalGradient horizontal_gradient(const ScalarField& f, std::span<const double> g, const HorizontalFrame& frame) {
  if (g.size() != static_cast<std::size_t>(frame.dim())) throw std::invalid_argument("horizontal_gradient: dimension");
  HorizontalGradient out;
  std::vector<double> grad(g.size());
  if (f.has_gradient()) {
    if (f.in_support(g)) f.gradient(g, grad);
  } else {
    grad = finite_difference_gradient(f, g);
    out.finite_difference = true;
  }
  out.value.resize(frame.horizontal_dim());
  for (int i = 0; i < frame.horizontal_dim(); ++i) out.value[i] = frame.apply(i, g, grad);
  return out;
}

}  // namespace carnot
