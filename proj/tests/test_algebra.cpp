#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "carnot/algebra.hpp"
#include "carnot/frame.hpp"
#include "carnot/group.hpp"

using namespace carnot;

namespace {

GroupPoint random_point(std::mt19937_64& rng, int n, double a = 2.0) {
  std::uniform_real_distribution<double> u(-a, a);
  GroupPoint g(n);
  for (double& v : g) v = u(rng);
  return g;
}

double max_diff(const GroupPoint& a, const GroupPoint& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

// Independent BCH oracle: Z(s) = log(exp X exp sY) solves Z' = psi(ad_Z) Y with
// psi(u) = u / (1 - exp(-u)). Z is a polynomial in s of degree <= r, so Picard
// iteration on its coefficient vectors converges in r + 1 sweeps.
GroupPoint picard_bch(const CarnotGroup& G, const GroupPoint& x, const GroupPoint& y) {
  const int r = G.step();
  const int n = G.dim();
  // psi(u) = sum_k c_k u^k, Bernoulli numbers with B_1 = +1/2.
  const std::vector<double> psi{1.0, 0.5, 1.0 / 12, 0.0, -1.0 / 720, 0.0, 1.0 / 30240, 0.0, -1.0 / 1209600};
  using SPoly = std::vector<GroupPoint>;  // coefficient of s^d
  auto bracket_poly = [&](const SPoly& a, const SPoly& b) {
    SPoly out(r + 1, GroupPoint(n, 0.0));
    for (int i = 0; i <= r; ++i) {
      for (int j = 0; i + j <= r; ++j) {
        const auto br = G.bracket<double>(a[i], b[j], 0.0);
        for (int k = 0; k < n; ++k) out[i + j][k] += br[k];
      }
    }
    return out;
  };
  SPoly z(r + 1, GroupPoint(n, 0.0));
  z[0] = x;
  for (int sweep = 0; sweep <= r + 1; ++sweep) {
    SPoly term(r + 1, GroupPoint(n, 0.0));
    term[0] = y;
    SPoly rhs(r + 1, GroupPoint(n, 0.0));
    for (int k = 0; k <= r; ++k) {
      for (int d = 0; d <= r; ++d) {
        for (int c = 0; c < n; ++c) rhs[d][c] += psi[k] * term[d][c];
      }
      term = bracket_poly(z, term);
    }
    SPoly next(r + 1, GroupPoint(n, 0.0));
    next[0] = x;
    for (int d = 0; d < r; ++d) {
      for (int c = 0; c < n; ++c) next[d + 1][c] = rhs[d][c] / (d + 1);
    }
    z = next;
  }
  GroupPoint out(n, 0.0);
  for (const auto& coeff : z) {
    for (int c = 0; c < n; ++c) out[c] += coeff[c];
  }
  return out;
}

std::vector<CarnotGroup> catalog() {
  std::vector<CarnotGroup> gs;
  for (const auto& name : catalog_names()) gs.emplace_back(catalog_algebra(name));
  return gs;
}

}  // namespace

TEST(Stratification, DimensionsAndWeights) {
  Stratification s({2, 1, 1});
  EXPECT_EQ(s.step(), 3);
  EXPECT_EQ(s.total_dim(), 4);
  EXPECT_EQ(s.homogeneous_dim(), 7);
  EXPECT_EQ(s.offset(3), 3);
  EXPECT_EQ(s.layer_of(2), 2);
  Stratification flat({3});
  EXPECT_EQ(flat.homogeneous_dim(), flat.total_dim());
  EXPECT_THROW(Stratification({2, 0}), std::invalid_argument);
  EXPECT_THROW(Stratification(std::vector<int>{}), std::invalid_argument);
}

TEST(Validation, CatalogPasses) {
  for (const auto& name : {"euclidean1", "euclidean3", "h1", "h2", "free2_3", "free2_4", "engel", "filiform4",
                           "filiform5"}) {
    const auto report = validate_algebra(catalog_algebra(name).constants);
    EXPECT_TRUE(report.ok()) << name;
    EXPECT_EQ(report.checks.size(), 4u);
  }
}

TEST(Validation, DetectsAntisymmetryFailure) {
  StructureConstants sc(Stratification({2, 1}), {{0, 1, 2, Rational(1)}, {1, 0, 2, Rational(1)}});
  const auto report = validate_algebra(sc);
  EXPECT_FALSE(report.ok());
  EXPECT_FALSE(report.find("antisymmetry")->passed);
}

TEST(Validation, DetectsGenerationFailure) {
  // Two-dimensional second layer, only one bracket.
  StructureConstants sc(Stratification({2, 2}), {{0, 1, 2, Rational(1)}});
  const auto report = validate_algebra(sc);
  EXPECT_TRUE(report.find("antisymmetry")->passed);
  EXPECT_TRUE(report.find("jacobi")->passed);
  EXPECT_FALSE(report.find("generation")->passed);
}

TEST(Validation, DetectsGradingAndJacobiFailures) {
  // [e1,e2] lands in the first layer.
  StructureConstants bad_grade(Stratification({2, 1}), {{0, 1, 1, Rational(1)}});
  EXPECT_FALSE(validate_algebra(bad_grade).find("grading")->passed);
  // Consistent brackets that fail to generate the third layer.
  StructureConstants thin(Stratification({2, 1, 2}),
                                {{0, 1, 2, Rational(1)}, {0, 2, 3, Rational(1)}, {1, 2, 3, Rational(1)}});
  EXPECT_TRUE(validate_algebra(thin).find("jacobi")->passed);
  EXPECT_FALSE(validate_algebra(thin).find("generation")->passed);
  // Cyclic sum over (e1,e2,e3) leaves e7.
  StructureConstants broken(Stratification({3, 3, 1}),
                            {{0, 1, 3, Rational(1)}, {0, 2, 4, Rational(1)}, {1, 2, 5, Rational(1)},
                             {0, 5, 6, Rational(1)}});
  EXPECT_FALSE(validate_algebra(broken).find("jacobi")->passed);
}

TEST(Validation, GroupConstructorRejectsInvalidAlgebra) {
  GroupDefinition def{"bad", StructureConstants(Stratification({2, 2}), {{0, 1, 2, Rational(1)}})};
  EXPECT_THROW(CarnotGroup{def}, std::invalid_argument);
}

TEST(GroupJson, RoundTripAndRejection) {
  const auto engel = catalog_algebra("engel");
  const auto text = to_group_json(engel);
  const auto back = parse_group_json(text);
  EXPECT_EQ(back.name, "engel");
  EXPECT_EQ(back.constants.terms().size(), engel.constants.terms().size());
  EXPECT_TRUE(validate_algebra(back.constants).ok());

  const std::string bad = R"({"name":"x","layers":[2,1],
    "brackets":[{"left":[1,1],"right":[1,2],"out":[{"basis":[1,1],"coeff":"1"}]}]})";
  EXPECT_THROW(parse_group_json(bad), std::invalid_argument);
  const std::string frac = R"({"name":"h","layers":[2,1],
    "brackets":[{"left":[1,1],"right":[1,2],"out":[{"basis":[2,1],"coeff":"-3/2"}]}]})";
  const auto h = parse_group_json(frac);
  EXPECT_EQ(h.constants.terms().front().coeff, Rational(-3, 2));
  EXPECT_THROW(parse_group_json("{not json"), std::invalid_argument);
  EXPECT_THROW(parse_group_json(R"({"name":"x","layers":[2,1],"brackets":[{"left":[1,3],"right":[1,2],"out":[]}]})"),
               std::invalid_argument);
}

TEST(Bch, HeisenbergExample) {
  const CarnotGroup h1(heisenberg_algebra(1));
  const auto g = bch_product({1, 0, 0}, {0, 1, 0}, h1);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  EXPECT_EQ(inverse(g), (GroupPoint{-1, -1, -0.5}));
  const auto e = bch_product(g, inverse(g), h1);
  EXPECT_LT(max_diff(e, {0, 0, 0}), 1e-15);
}

TEST(Bch, EngelExample) {
  const CarnotGroup engel(engel_algebra());
  const auto g = bch_product({1, 0, 0, 0}, {0, 1, 0, 0}, engel);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  EXPECT_DOUBLE_EQ(g[3], 1.0 / 12.0);
  EXPECT_LT(max_diff(g, picard_bch(engel, {1, 0, 0, 0}, {0, 1, 0, 0})), 1e-15);
}

TEST(Bch, MatchesPicardOracle) {
  std::mt19937_64 rng(7);
  for (const auto& name : {"h1", "h2", "free2_3", "engel", "filiform4", "filiform5", "filiform6"}) {
    const CarnotGroup G(catalog_algebra(name));
    for (int trial = 0; trial < 50; ++trial) {
      const auto x = random_point(rng, G.dim());
      const auto y = random_point(rng, G.dim());
      EXPECT_LT(max_diff(bch_product(x, y, G), picard_bch(G, x, y)), 1e-11) << name;
    }
  }
}

TEST(Bch, DynkinCoefficientsLowOrder) {
  const auto words = dynkin_coefficients(3);
  auto coeff = [&](std::vector<int> w) {
    for (const auto& [word, c] : words) {
      if (word == w) return c;
    }
    return Rational(0);
  };
  EXPECT_EQ(coeff({0}), Rational(1));
  EXPECT_EQ(coeff({1}), Rational(1));
  // Net coefficient of [X,Y] is 1/2, of [X,[X,Y]] and [Y,[Y,X]] is 1/12.
  EXPECT_EQ(coeff({0, 1}) - coeff({1, 0}), Rational(1, 2));
  EXPECT_EQ(coeff({0, 0, 1}) - coeff({0, 1, 0}), Rational(1, 12));
  EXPECT_EQ(coeff({1, 1, 0}) - coeff({1, 0, 1}), Rational(1, 12));
}

TEST(Bch, IdentityAndEuclidean) {
  const CarnotGroup r3(euclidean_algebra(3));
  EXPECT_EQ(bch_product({1, 2, 3}, {0.5, -1, 2}, r3), (GroupPoint{1.5, 1, 5}));
  for (auto& G : catalog()) {
    std::mt19937_64 rng(3);
    const auto g = random_point(rng, G.dim());
    EXPECT_EQ(bch_product(g, GroupPoint(G.dim(), 0.0), G), g);
  }
  const CarnotGroup h1(heisenberg_algebra(1));
  EXPECT_THROW(bch_product({1, 0}, {0, 1, 0}, h1), std::invalid_argument);
}

TEST(GroupProperties, AxiomsOnRandomTriples) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  for (auto& G : catalog()) {
    const auto& s = G.stratification();
    double worst_assoc = 0.0, worst_dil = 0.0, worst_gauge = 0.0, worst_inv = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto g = random_point(rng, G.dim()), h = random_point(rng, G.dim()), k = random_point(rng, G.dim());
      worst_assoc = std::max(worst_assoc, max_diff(bch_product(bch_product(g, h, G), k, G),
                                                   bch_product(g, bch_product(h, k, G), G)));
      const double l = lam(rng), mu = lam(rng);
      worst_dil = std::max(worst_dil, max_diff(dilate(l, bch_product(g, h, G), s),
                                               bch_product(dilate(l, g, s), dilate(l, h, s), G)));
      worst_dil = std::max(worst_dil, max_diff(dilate(l, dilate(mu, g, s), s), dilate(l * mu, g, s)));
      worst_gauge = std::max(worst_gauge, std::abs(gauge(dilate(l, g, s), s) - l * gauge(g, s)));
      worst_inv = std::max(worst_inv, max_diff(bch_product(g, inverse(g), G), GroupPoint(G.dim(), 0.0)));
    }
    EXPECT_LE(worst_assoc, 1e-12) << G.name();
    EXPECT_LE(worst_dil, 1e-12) << G.name();
    EXPECT_LE(worst_gauge, 1e-12) << G.name();
    EXPECT_LE(worst_inv, 1e-12) << G.name();
  }
}

TEST(GroupProperties, DilationAndGaugeExamples) {
  const CarnotGroup h1(heisenberg_algebra(1));
  const auto& s = h1.stratification();
  EXPECT_EQ(dilate(2.0, {1, 1, 1}, s), (GroupPoint{2, 2, 4}));
  EXPECT_EQ(dilate(1.0, {0.3, -1, 2}, s), (GroupPoint{0.3, -1, 2}));
  EXPECT_THROW(dilate(0.0, {1, 1, 1}, s), std::invalid_argument);
  EXPECT_DOUBLE_EQ(gauge({1, 0, 0}, s), 1.0);
  EXPECT_DOUBLE_EQ(gauge({0, 0, 0}, s), 0.0);
  EXPECT_NEAR(gauge({1, 1, 3}, s), std::pow(4.0 + 9.0, 0.25), 1e-15);
  const Stratification r2({2});
  EXPECT_DOUBLE_EQ(gauge({3, 4}, r2), 5.0);
  // Engel: exponent 2r! = 12.
  const Stratification e({2, 1, 1});
  EXPECT_NEAR(gauge({1, 0, 2, 3}, e), std::pow(1.0 + std::pow(2.0, 6) + std::pow(3.0, 4), 1.0 / 12), 1e-14);
  EXPECT_GT(gauge({1e30, 0, 0, 0}, e), 0.0);
  EXPECT_TRUE(std::isfinite(gauge({1e30, 0, 0, 0}, e)));
}

TEST(Kaplan, HeisenbergAndAntisymmetry) {
  const CarnotGroup h1(heisenberg_algebra(1));
  const std::vector<double> sigma{1.0};
  EXPECT_EQ(kaplan_map(sigma, h1), (std::vector<double>{0, 1, -1, 0}));
  const std::vector<double> zero{0.0};
  EXPECT_EQ(kaplan_map(zero, h1), (std::vector<double>{0, 0, 0, 0}));
  const CarnotGroup f3(free_step2_algebra(3));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_point(rng, 3);
    const auto J = kaplan_map(s, f3);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) EXPECT_EQ(J[a * 3 + b], -J[b * 3 + a]);
    }
  }
  const CarnotGroup r2(euclidean_algebra(2));
  EXPECT_THROW(kaplan_map(sigma, r2), std::invalid_argument);
}

TEST(Frame, HeisenbergFields) {
  const CarnotGroup h1(heisenberg_algebra(1));
  const auto frame = horizontal_frame(h1);
  Polynomial expect1(3), expect2(3);
  expect1.add_term({0, 1, 0}, Rational(-1, 2));
  expect2.add_term({1, 0, 0}, Rational(1, 2));
  EXPECT_EQ(frame.coefficient(0, 2), expect1);
  EXPECT_EQ(frame.coefficient(1, 2), expect2);
  EXPECT_EQ(frame.coefficient(0, 0), Polynomial(3, Rational(1)));
  EXPECT_TRUE(frame.coefficient(0, 1).is_zero());
}

TEST(Frame, EngelFields) {
  const CarnotGroup engel(engel_algebra());
  const auto frame = horizontal_frame(engel);
  Polynomial b13(4), b14(4), b23(4), b24(4);
  b13.add_term({0, 1, 0, 0}, Rational(-1, 2));
  b14.add_term({0, 0, 1, 0}, Rational(-1, 2));
  b14.add_term({1, 1, 0, 0}, Rational(-1, 12));
  b23.add_term({1, 0, 0, 0}, Rational(1, 2));
  b24.add_term({2, 0, 0, 0}, Rational(1, 12));
  EXPECT_EQ(frame.coefficient(0, 2), b13);
  EXPECT_EQ(frame.coefficient(0, 3), b14) << frame.describe();
  EXPECT_EQ(frame.coefficient(1, 2), b23);
  EXPECT_EQ(frame.coefficient(1, 3), b24);
}

TEST(Frame, EuclideanIsTrivial) {
  const CarnotGroup r3(euclidean_algebra(3));
  const auto frame = horizontal_frame(r3);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_EQ(frame.coefficient(i, k), Polynomial(3, Rational(i == k ? 1 : 0)));
  }
}

TEST(Frame, WeightedDegreeAudit) {
  for (const auto& name : {"h1", "h2", "free2_3", "engel", "filiform4", "filiform5"}) {
    const CarnotGroup G(catalog_algebra(name));
    const auto frame = horizontal_frame(G);
    const auto& s = G.stratification();
    for (int i = 0; i < G.horizontal_dim(); ++i) {
      for (int k = G.horizontal_dim(); k < G.dim(); ++k) {
        const int j = s.layer_of(k);
        for (int deg : frame.coefficient(i, k).weighted_degrees(s.weights())) EXPECT_EQ(deg, j - 1) << name;
        EXPECT_LT(frame.coefficient(i, k).max_variable(), s.offset(j)) << name;
      }
    }
  }
}

TEST(Frame, MatchesLieFormulaFiniteDifference) {
  // X_i f(g) = d/ds f(g o exp(s e_i)) at s = 0, for a smooth non-polynomial f.
  std::mt19937_64 rng(13);
  for (const auto& name : {"h1", "free2_3", "engel", "filiform4"}) {
    const CarnotGroup G(catalog_algebra(name));
    const auto frame = horizontal_frame(G);
    const int n = G.dim();
    ScalarField f;
    f.dim = n;
    f.value = [n](std::span<const double> x) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += (k + 1) * 0.3 * x[k] + 0.1 * x[k] * x[k];
      return std::sin(s);
    };
    f.gradient = [n](std::span<const double> x, std::span<double> g) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += (k + 1) * 0.3 * x[k] + 0.1 * x[k] * x[k];
      for (int k = 0; k < n; ++k) g[k] = std::cos(s) * ((k + 1) * 0.3 + 0.2 * x[k]);
    };
    f.support_lo.assign(n, -1e9);
    f.support_hi.assign(n, 1e9);
    for (int trial = 0; trial < 10; ++trial) {
      const auto g = random_point(rng, n, 1.5);
      const auto grad = horizontal_gradient(f, g, frame);
      EXPECT_FALSE(grad.finite_difference);
      for (int i = 0; i < G.horizontal_dim(); ++i) {
        const double h = 1e-4;
        GroupPoint ei(n, 0.0);
        ei[i] = h;
        const double up = f(bch_product(g, ei, G));
        ei[i] = -h;
        const double down = f(bch_product(g, ei, G));
        EXPECT_NEAR(grad.value[i], (up - down) / (2 * h), 1e-7) << name;
      }
    }
  }
}

TEST(Frame, GradientExamples) {
  const CarnotGroup h1(heisenberg_algebra(1));
  const auto frame = horizontal_frame(h1);
  ScalarField sigma;
  sigma.dim = 3;
  sigma.value = [](std::span<const double> x) { return x[2]; };
  sigma.support_lo.assign(3, -10);
  sigma.support_hi.assign(3, 10);
  const GroupPoint g{0.4, -1.2, 0.7};
  const auto fd = horizontal_gradient(sigma, g, frame);
  EXPECT_TRUE(fd.finite_difference);
  EXPECT_NEAR(fd.value[0], 0.6, 1e-9);
  EXPECT_NEAR(fd.value[1], 0.2, 1e-9);
  sigma.gradient = [](std::span<const double>, std::span<double> d) { d[0] = 0, d[1] = 0, d[2] = 1; };
  const auto exact = horizontal_gradient(sigma, g, frame);
  EXPECT_DOUBLE_EQ(exact.value[0], 0.6);
  EXPECT_DOUBLE_EQ(exact.value[1], 0.2);
  const auto zero = horizontal_gradient(zero_field(3), g, frame);
  EXPECT_EQ(zero.value, (std::vector<double>{0, 0}));
}
