#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "carnot/heat_kernel.hpp"

using namespace carnot;

namespace {

constexpr double kPi = std::numbers::pi;

const KernelEngine& h1_engine() {
  static const KernelEngine engine{CarnotGroup(heisenberg_algebra(1))};
  return engine;
}

// Direct 1-D form of the H^1 kernel, integrated with double-exponential quadrature.
double h1_oracle(double z1, double z2, double s, double t) {
  const double r2 = z1 * z1 + z2 * z2;
  auto f = [&](double l) {
    const double ts = l < 1e-8 ? 1.0 : l / std::sinh(l);
    const double tc = l < 1e-8 ? 1.0 : l / std::tanh(l);
    return std::cos(s * l / t) * ts * std::exp(-r2 * tc / (4 * t));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double half = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
  return 2.0 * std::pow(4 * kPi * t, -2.0) * 2.0 * half;
}

}  // namespace

TEST(EuclideanKernel, Examples) {
  const std::vector<double> z1{0.0};
  EXPECT_NEAR(euclidean_kernel(z1, 1.0 / (4 * kPi)), 1.0, 1e-15);
  const std::vector<double> z2{0.0, 0.0};
  EXPECT_NEAR(euclidean_kernel(z2, 1.0), 1.0 / (4 * kPi), 1e-16);
  EXPECT_THROW(euclidean_kernel(z2, 0.0), std::invalid_argument);
  const KernelEngine r3{CarnotGroup(euclidean_algebra(3))};
  EXPECT_EQ(r3.mode(), KernelMode::Euclidean);
  const auto n = kernel_normalization(r3, 1.0, 1e-11);
  EXPECT_NEAR(n.value, 1.0, 1e-10);
  EXPECT_LT(n.error, 1e-10);
  const std::vector<double> z{0.3, -0.2, 1.0};
  EXPECT_EQ(decoupling_marginal(r3, z, 0.7).value, euclidean_kernel(z, 0.7));
}

TEST(SpectralFunctions, SeriesMatchesDirectNearZero) {
  for (double tau : {1e-4, 5e-4, 9.99e-4, 1.001e-3, 2e-3}) {
    EXPECT_NEAR(tau_over_sinh(tau), tau / std::sinh(tau), 1e-15);
    EXPECT_NEAR(tau_coth(tau), tau / std::tanh(tau), 1e-15);
  }
  EXPECT_EQ(tau_over_sinh(0.0), 1.0);
  EXPECT_EQ(tau_coth(0.0), 1.0);
  EXPECT_NEAR(tau_over_sinh(40.0), 40.0 / std::sinh(40.0), 1e-28);
}

TEST(Step2Kernel, RejectsOtherSteps) {
  EXPECT_THROW(KernelEngine{CarnotGroup(engel_algebra())}, std::invalid_argument);
  const KernelEngine r2{CarnotGroup(euclidean_algebra(2))};
  EXPECT_THROW(step2_kernel({0, 0}, 1.0, r2), std::invalid_argument);
  EXPECT_THROW(step2_kernel({0, 0, 0}, 0.0, h1_engine()), std::invalid_argument);
}

TEST(Step2Kernel, HeisenbergAtIdentity) {
  // Oracle: integral of lambda / sinh(lambda) over R is pi^2 / 2.
  boost::math::quadrature::exp_sinh<double> integrator;
  const double I = 2.0 * integrator.integrate([](double l) { return l < 1e-8 ? 1.0 : l / std::sinh(l); }, 0.0,
                                              std::numeric_limits<double>::infinity());
  EXPECT_NEAR(I, kPi * kPi / 2, 1e-13);
  for (double t : {0.5, 1.0, 3.0}) {
    const auto p = step2_kernel({0, 0, 0}, t, h1_engine());
    const double expect = 2.0 * std::pow(4 * kPi * t, -2.0) * I;
    EXPECT_NEAR(p.value, 1.0 / (16 * t * t), 1e-6 / (16 * t * t));
    EXPECT_NEAR(p.value, expect, 1e-12 * expect);
    EXPECT_LT(p.error, 1e-12);
  }
}

TEST(Step2Kernel, H2AtIdentity) {
  // integral of (lambda / sinh lambda)^2 over R is pi^2 / 3, so p = 2 (4 pi)^{-3} pi^2 / 3.
  const KernelEngine h2{CarnotGroup(heisenberg_algebra(2))};
  const auto p = step2_kernel(GroupPoint(5, 0.0), 1.0, h2);
  EXPECT_NEAR(p.value, 1.0 / (96 * kPi), 1e-14);
}

TEST(Step2Kernel, MatchesDirectOracle) {
  for (const auto& g : std::vector<GroupPoint>{{1, 0, 0}, {0.5, -0.5, -1}, {1, 1, 0.3}, {2, 1, 3}, {0, 0, 4}}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const auto p = step2_kernel(g, t, h1_engine());
      EXPECT_NEAR(p.value, h1_oracle(g[0], g[1], g[2], t), 1e-12) << g[0] << "," << g[1] << "," << g[2];
    }
  }
}

TEST(Step2Kernel, ScalingInversionSymmetryPositivity) {
  const auto& E = h1_engine();
  const auto& s = E.group().stratification();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0), ut(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const GroupPoint g{u(rng), u(rng), u(rng)};
    const double t = ut(rng);
    const auto p = step2_kernel(g, t, E);
    const auto q = step2_kernel(dilate(1.0 / std::sqrt(t), g, s), 1.0, E);
    const double scaled = std::pow(t, -2.0) * q.value;
    EXPECT_LE(std::abs(p.value - scaled), p.error + std::pow(t, -2.0) * q.error + 1e-15);
    const auto inv = step2_kernel(inverse(g), t, E);
    EXPECT_LE(std::abs(p.value - inv.value), p.error + inv.error + 1e-15);
    const auto flip = step2_kernel({g[0], g[1], -g[2]}, t, E);
    EXPECT_LE(std::abs(p.value - flip.value), p.error + flip.error + 1e-15);
    EXPECT_GE(p.value, -p.error);
  }
}

TEST(Step2Kernel, FreeStep2Positivity) {
  KernelQuadrature q;
  q.lambda_max = 20.0;
  q.max_panel_width = 5.0;
  const KernelEngine f3(CarnotGroup(free_step2_algebra(3)), q);
  const auto p = step2_kernel({0, 0, 0, 0, 0, 0}, 1.0, f3);
  // Rotation invariance of the free step-2 algebra on 3 generators: A(lambda) has
  // eigenvalues |lambda|^2 (twice) and 0, so p(e) = 8 (4 pi)^{-9/2} * 4 pi * int rho^2 rho/sinh(rho).
  // int_0^inf rho^3 / sinh(rho) = pi^4 / 8.
  const double expect = 8.0 * std::pow(4 * kPi, -4.5) * 4 * kPi * std::pow(kPi, 4) / 8.0;
  EXPECT_NEAR(p.value, expect, p.error);
  EXPECT_LT(p.error, 1e-4 * expect);
}

TEST(Normalization, HeisenbergAllScales) {
  for (double t : {0.25, 1.0, 4.0}) {
    const auto n = kernel_normalization(h1_engine(), t);
    EXPECT_NEAR(n.value, 1.0, 1e-4) << t;
    EXPECT_LT(n.error, 1e-6);
    EXPECT_NEAR(n.value, 1.0, 10 * n.error + 1e-12) << t;
  }
}

TEST(Decoupling, HeisenbergExamplesAndGrid) {
  const auto& E = h1_engine();
  const std::vector<double> z0{0, 0}, z2{2, 0};
  EXPECT_NEAR(decoupling_marginal(E, z0, 1.0).value, 1.0 / (4 * kPi), 1e-9);
  EXPECT_NEAR(decoupling_marginal(E, z2, 1.0).value, std::exp(-1.0) / (4 * kPi), 1e-9);
  double worst = 0.0;
  for (int k = 0; k <= 20; k += 5) {
    const std::vector<double> z{-3 + 0.3 * k, -3 + 0.3 * ((7 * k) % 21)};
    const auto m = decoupling_marginal(E, z, 1.0);
    worst = std::max(worst, std::abs(m.value - euclidean_kernel(z, 1.0)));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(GaussianAudit, EnvelopesBracket) {
  const auto& b = h1_engine().envelope();
  EXPECT_GT(b.beta, 0.0);
  EXPECT_GE(b.alpha, b.beta);
  EXPECT_TRUE(b.brackets);
  const KernelEngine r2{CarnotGroup(euclidean_algebra(2))};
  const auto e = gaussian_bound_audit(r2, default_audit_grid(r2.group()));
  EXPECT_NEAR(e.beta, 0.25, 1e-6);
  EXPECT_NEAR(e.alpha, 0.25, 1e-9);
  EXPECT_NEAR(e.c_upper, 1.0 / (4 * kPi), 1e-6);
}

TEST(KernelRecord, JsonFields) {
  const auto p = step2_kernel({0, 0, 0}, 1.0, h1_engine());
  const auto j = kernel_record_json("h1", {0, 0, 0}, 1.0, p);
  EXPECT_NE(j.find("\"error_bound\""), std::string::npos);
  EXPECT_NE(j.find("\"method\":\"quadrature\""), std::string::npos);
}
