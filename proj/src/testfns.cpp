#include "carnot/testfns.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <memory>
#include <stdexcept>

#include <fmt/format.h>

namespace carnot {

double bump_moment(double radius, double a, double b) {
  return std::pow(radius, a + 1.0) * boost::math::beta((a + 1.0) / 2.0, b + 1.0);
}

ScalarField make_bump(const CarnotGroup& group, const GroupPoint& center, const std::vector<double>& radii, int power) {
  const int n = group.dim();
  if (static_cast<int>(center.size()) != n || static_cast<int>(radii.size()) != n) {
    throw std::invalid_argument("make_bump: center and radii must match the group dimension");
  }
  for (double r : radii) {
    if (!(r > 0.0)) throw std::invalid_argument("make_bump: radii must be positive");
  }
  if (power < 2) throw std::invalid_argument("make_bump: power must be at least 2");
  if (n > 16) throw std::invalid_argument("make_bump: at most 16 coordinates");
  struct Shape {
    std::vector<double> c, r;
    int k;
  };
  auto shape = std::make_shared<const Shape>(Shape{center, radii, power});
  ScalarField f;
  f.name = fmt::format("bump{}", power);
  f.dim = n;
  f.smoothness = power - 1;
  f.value = [shape, n](std::span<const double> x) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      const double u = (x[i] - shape->c[i]) / shape->r[i];
      const double w = 1.0 - u * u;
      if (w <= 0.0) return 0.0;
      v *= std::pow(w, shape->k);
    }
    return v;
  };
  f.gradient = [shape, n](std::span<const double> x, std::span<double> g) {
    double w[16], wk[16], u[16];
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      u[i] = (x[i] - shape->c[i]) / shape->r[i];
      w[i] = 1.0 - u[i] * u[i];
      if (w[i] <= 0.0) inside = false;
      wk[i] = inside ? std::pow(w[i], shape->k) : 0.0;
    }
    for (int i = 0; i < n; ++i) {
      if (!inside) {
        g[i] = 0.0;
        continue;
      }
      double rest = 1.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) rest *= wk[j];
      }
      g[i] = -2.0 * shape->k * u[i] / shape->r[i] * std::pow(w[i], shape->k - 1) * rest;
    }
  };
  f.support_lo.resize(n);
  f.support_hi.resize(n);
  for (int i = 0; i < n; ++i) {
    f.support_lo[i] = center[i] - radii[i];
    f.support_hi[i] = center[i] + radii[i];
  }
  return f;
}

ScalarField make_coordinate_modulated(const ScalarField& base, const std::vector<int>& exponents) {
  const int n = base.dim;
  if (static_cast<int>(exponents.size()) != n) throw std::invalid_argument("make_coordinate_modulated: wrong arity");
  for (int e : exponents) {
    if (e < 0) throw std::invalid_argument("make_coordinate_modulated: exponents must be nonnegative");
  }
  auto b = std::make_shared<const ScalarField>(base);
  auto monomial = [exponents, n](std::span<const double> x) {
    double m = 1.0;
    for (int i = 0; i < n; ++i) m *= std::pow(x[i], exponents[i]);
    return m;
  };
  ScalarField f = base;
  std::string tag;
  for (int i = 0; i < n; ++i) {
    if (exponents[i] > 0) tag += fmt::format("x{}^{}", i + 1, exponents[i]);
  }
  f.name = tag.empty() ? base.name : base.name + "*" + tag;
  f.value = [b, monomial](std::span<const double> x) { return b->value(x) * monomial(x); };
  if (base.has_gradient()) {
    f.gradient = [b, monomial, exponents, n](std::span<const double> x, std::span<double> g) {
      b->gradient(x, g);
      const double m = monomial(x);
      const double v = b->value(x);
      for (int i = 0; i < n; ++i) {
        double dm = 0.0;
        if (exponents[i] > 0) {
          dm = exponents[i] * std::pow(x[i], exponents[i] - 1);
          for (int j = 0; j < n; ++j) {
            if (j != i) dm *= std::pow(x[j], exponents[j]);
          }
        }
        g[i] = g[i] * m + v * dm;
      }
    };
  } else {
    f.gradient = nullptr;
  }
  return f;
}

namespace {

constexpr int kPower = 4;

CatalogEntry bump_entry(const std::string& name, const std::string& group_name, const std::vector<int>& exponents,
                        const std::string& description) {
  const CarnotGroup group(catalog_algebra(group_name));
  const int n = group.dim();
  const std::vector<double> radii(n, 1.0);
  ScalarField f = make_bump(group, GroupPoint(n, 0.0), radii, kPower);
  bool modulated = false;
  for (int e : exponents) modulated = modulated || e > 0;
  if (modulated) f = make_coordinate_modulated(f, exponents);
  f.name = name;
  CatalogEntry e;
  e.name = name;
  e.group = group_name;
  e.field = f;
  e.description = description;
  e.lp_norm_power = [exponents, n](double p) -> std::optional<double> {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= bump_moment(1.0, exponents[i] * p, kPower * p);
    return v;
  };
  e.gradient_norm_power = [](double) -> std::optional<double> { return std::nullopt; };
  return e;
}

// ||phi'||_p^p for phi(x) = (1 - x^2)^k on [-1, 1].
double line_gradient_power(int k, double p) { return std::pow(2.0 * k, p) * bump_moment(1.0, p, (k - 1) * p); }

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> out;
  out.push_back(bump_entry("r1_bump", "euclidean1", {0}, "(1-x^2)^4 on R^1"));
  out.back().gradient_norm_power = [](double p) -> std::optional<double> { return line_gradient_power(kPower, p); };
  {
    const CarnotGroup line(euclidean_algebra(1));
    CatalogEntry e;
    e.name = "r1_bump2";
    e.group = "euclidean1";
    e.field = make_bump(line, {0.0}, {1.0}, 2);
    e.field.name = e.name;
    e.description = "(1-x^2)^2 on R^1";
    e.lp_norm_power = [](double p) -> std::optional<double> { return bump_moment(1.0, 0.0, 2 * p); };
    e.gradient_norm_power = [](double p) -> std::optional<double> { return line_gradient_power(2, p); };
    out.push_back(e);
  }
  out.push_back(bump_entry("r2_bump", "euclidean2", {0, 0}, "product bump of power 4 on R^2"));
  out.back().gradient_norm_power = [](double p) -> std::optional<double> {
    if (p != 2.0) return std::nullopt;
    return 2.0 * line_gradient_power(kPower, 2.0) * bump_moment(1.0, 0.0, 2.0 * kPower);
  };
  out.push_back(bump_entry("h1_bump", "h1", {0, 0, 0}, "product bump of power 4 on H^1"));
  out.push_back(bump_entry("h1_sigma", "h1", {0, 0, 1}, "H^1 bump times the vertical coordinate"));
  out.push_back(bump_entry("free2_3_bump", "free2_3", {0, 0, 0, 0, 0, 0}, "product bump on the free step-2 group"));
  out.push_back(bump_entry("free2_3_sigma", "free2_3", {0, 0, 0, 1, 0, 0}, "free step-2 bump times s1"));
  out.push_back(bump_entry("engel_bump", "engel", {0, 0, 0, 0}, "product bump on the Engel group"));
  out.push_back(bump_entry("engel_sigma", "engel", {0, 0, 1, 0}, "Engel bump times the second-layer coordinate"));
  return out;
}

}  // namespace

const std::vector<CatalogEntry>& function_catalog() {
  static const std::vector<CatalogEntry> catalog = build_catalog();
  return catalog;
}

const CatalogEntry& catalog_function(const std::string& name) {
  for (const auto& e : function_catalog()) {
    if (e.name == name) return e;
  }
  throw std::invalid_argument("unknown catalog function '" + name + "'");
}

std::vector<std::string> catalog_function_names() {
  std::vector<std::string> names;
  for (const auto& e : function_catalog()) names.push_back(e.name);
  return names;
}

}  // namespace carnot
