#include "carnot/heat_kernel.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <mutex>
#include <json.hpp>
#include <numbers>
#include <random>
#include <stdexcept>

#include "carnot/linalg.hpp"
#include "carnot/parallel.hpp"
#include "carnot/quadrature.hpp"

namespace carnot {

namespace {

constexpr double kPi = std::numbers::pi;

// Surface area of the unit sphere in R^d.
double sphere_area(int d) { return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d); }

double prefactor(const CarnotGroup& G, double t) {
  const int m2 = G.stratification().dim(2);
  return std::pow(2.0, m2) * std::pow(4.0 * kPi * t, -0.5 * G.homogeneous_dim());
}

// Multi-index odometer over axes [first, end) of a tensor grid.
bool advance(std::vector<std::size_t>& idx, const std::vector<Rule1D>& rules, std::size_t first = 0) {
  for (std::size_t k = idx.size(); k-- > first;) {
    if (++idx[k] < rules[k].size()) return true;
    idx[k] = 0;
  }
  return false;
}

// Lambda rules per axis: axis 0 on [0, L] (the integrand is even in lambda), the rest on [-L, L].
std::vector<Rule1D> lambda_rules(int m2, double L, const std::vector<double>& freq, const KernelQuadrature& q,
                                 bool refined) {
  std::vector<Rule1D> rules;
  for (int k = 0; k < m2; ++k) {
    double width = q.max_panel_width;
    if (freq[k] > 0) width = std::min(width, q.phase_per_panel / freq[k]);
    if (refined) width *= 0.5;
    Rule1D r = composite_gauss_legendre_width(k == 0 ? 0.0 : -L, L, width, q.order);
    if (k == 0) {
      for (double& w : r.weights) w *= 2.0;
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

double quad_form(const std::vector<double>& M, std::span<const double> z) {
  const std::size_t m = z.size();
  double s = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < m; ++b) row += M[a * m + b] * z[b];
    s += z[a] * row;
  }
  return s;
}

}  // namespace

double euclidean_kernel(std::span<const double> z, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("heat kernel needs t > 0");
  double r2 = 0.0;
  for (double v : z) r2 += v * v;
  return std::pow(4.0 * kPi * t, -0.5 * static_cast<double>(z.size())) * std::exp(-r2 / (4.0 * t));
}

double tau_over_sinh(double tau) {
  const double a = std::abs(tau);
  if (a < 1e-3) {
    const double t2 = a * a;
    return 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
  }
  if (a > 30.0) return 2.0 * a * std::exp(-a) / (1.0 - std::exp(-2.0 * a));
  return a / std::sinh(a);
}

double tau_coth(double tau) {
  const double a = std::abs(tau);
  if (a < 1e-3) {
    const double t2 = a * a;
    return 1.0 + t2 / 3.0 - t2 * t2 / 45.0;
  }
  return a / std::tanh(a);
}

struct KernelEngine::Cache {
  std::once_flag once;
  GaussianBound bound;
};

KernelEngine::KernelEngine(CarnotGroup group, KernelQuadrature quad)
    : group_(std::move(group)), quad_(quad), cache_(std::make_shared<Cache>()) {
  if (group_.step() == 1) {
    mode_ = KernelMode::Euclidean;
    return;
  }
  if (group_.step() != 2) {
    throw std::invalid_argument("no explicit heat kernel for step >= 3; use the diffusion sampler");
  }
  mode_ = KernelMode::Step2Explicit;
  if (group_.horizontal_dim() > kMaxHorizontal) throw std::invalid_argument("horizontal dimension too large");
  {
    const int m2 = group_.stratification().dim(2);
    for (int k = 0; k < m2; ++k) {
      std::vector<double> ek(m2, 0.0);
      ek[k] = 1.0;
      const auto J = kaplan_map(ek, group_);
      kaplan_basis_.insert(kaplan_basis_.end(), J.begin(), J.end());
    }
  }
  if (quad_.order < 2 || quad_.max_panel_width <= 0 || quad_.phase_per_panel <= 0 || quad_.tolerance <= 0) {
    throw std::invalid_argument("invalid kernel quadrature parameters");
  }
  // c = min over unit lambda of the largest tau. Exact for one central direction,
  // sampled otherwise (with a safety margin).
  const int m2 = group_.stratification().dim(2);
  if (m2 == 1) {
    const std::vector<double> u{1.0};
    const auto J = kaplan_map(u, group_);
    const int m = group_.horizontal_dim();
    std::vector<double> JT(J.size());
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) JT[a * m + b] = J[b * m + a];
    }
    const auto A = jacobi_eigen(matmul(JT, J, m), m);
    decay_ = std::sqrt(*std::max_element(A.values.begin(), A.values.end()));
  } else {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    const int m = group_.horizontal_dim();
    double best = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 4096; ++trial) {
      std::vector<double> u(m2);
      double n2 = 0.0;
      for (double& v : u) {
        v = gauss(rng);
        n2 += v * v;
      }
      for (double& v : u) v /= std::sqrt(n2);
      const auto J = kaplan_map(u, group_);
      std::vector<double> JT(J.size());
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) JT[a * m + b] = J[b * m + a];
      }
      const auto A = jacobi_eigen(matmul(JT, J, m), m);
      best = std::min(best, std::sqrt(std::max(0.0, *std::max_element(A.values.begin(), A.values.end()))));
    }
    decay_ = 0.9 * best;
  }
  if (!(decay_ > 0)) throw std::invalid_argument("degenerate step-2 algebra: Kaplan map vanishes on a direction");
  lambda_max_ = quad_.lambda_max > 0 ? quad_.lambda_max : lambda_cutoff_for(quad_.tolerance);
}

double KernelEngine::lambda_tail(double cutoff) const {
  // For |lambda| = rho >= L with c L >= 1: integrand <= tau/sinh(tau) at tau >= c rho,
  // and tau / sinh(tau) <= kappa tau e^{-tau} with kappa = 2 / (1 - e^{-2}).
  const int m2 = group_.stratification().dim(2);
  const double c = decay_;
  const double kappa = 2.0 / (1.0 - std::exp(-2.0));
  const double L = std::max(cutoff, 1.0 / c);
  return kappa * c * sphere_area(m2) * boost::math::tgamma(m2 + 1.0, c * L) / std::pow(c, m2 + 1);
}

double KernelEngine::lambda_cutoff_for(double tail_target) const {
  double lo = 1.0 / decay_, hi = lo;
  while (lambda_tail(hi) > tail_target) {
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("lambda cutoff search diverged");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lambda_tail(mid) > tail_target ? lo : hi) = mid;
  }
  return hi;
}

void KernelEngine::spectral_raw(const double* lambda, double* tau, double* vecs) const {
  const int m = group_.horizontal_dim();
  const int m2 = group_.stratification().dim(2);
  const int mm = m * m;
  double J[kMaxHorizontal * kMaxHorizontal] = {};
  for (int k = 0; k < m2; ++k) {
    if (lambda[k] == 0.0) continue;
    const double* Jk = kaplan_basis_.data() + k * mm;
    for (int i = 0; i < mm; ++i) J[i] += lambda[k] * Jk[i];
  }
  // A = -J^2 = J^T J for antisymmetric J.
  double A[kMaxHorizontal * kMaxHorizontal];
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) s += J[c * m + a] * J[c * m + b];
      A[a * m + b] = A[b * m + a] = s;
    }
  }
  jacobi_eigen_inplace(A, vecs, m);
  for (int k = 0; k < m; ++k) tau[k] = std::sqrt(std::max(0.0, A[k * m + k]));
}

KernelEngine::Spectral KernelEngine::spectral(std::span<const double> lambda) const {
  const int m = group_.horizontal_dim();
  double tau[kMaxHorizontal];
  double vecs[kMaxHorizontal * kMaxHorizontal];
  spectral_raw(lambda.data(), tau, vecs);
  Spectral s;
  s.quad_form.assign(static_cast<std::size_t>(m * m), 0.0);
  for (int k = 0; k < m; ++k) {
    s.det_factor *= std::sqrt(tau_over_sinh(tau[k]));
    const double f = tau_coth(tau[k]);
    for (int a = 0; a < m; ++a) {
      const double va = vecs[a * m + k];
      for (int b = 0; b < m; ++b) s.quad_form[a * m + b] += f * va * vecs[b * m + k];
    }
  }
  return s;
}

namespace {

// det-factor and exp(-<M z, z> / 4t) at lambda, without forming M.
double pointwise_integrand(const KernelEngine& engine, const double* lambda, std::span<const double> z, double t) {
  const int m = static_cast<int>(z.size());
  double tau[KernelEngine::kMaxHorizontal];
  double vecs[KernelEngine::kMaxHorizontal * KernelEngine::kMaxHorizontal];
  engine.spectral_raw(lambda, tau, vecs);
  double det = 1.0, q = 0.0;
  for (int k = 0; k < m; ++k) {
    det *= tau_over_sinh(tau[k]);
    double proj = 0.0;
    for (int a = 0; a < m; ++a) proj += vecs[a * m + k] * z[a];
    q += tau_coth(tau[k]) * proj * proj;
  }
  return std::sqrt(det) * std::exp(-q / (4.0 * t));
}

}  // namespace

const GaussianBound& KernelEngine::envelope() const {
  std::call_once(cache_->once, [this] { cache_->bound = gaussian_bound_audit(*this, default_audit_grid(group_)); });
  return cache_->bound;
}

Estimate KernelEngine::evaluate(const GroupPoint& g, double t) const {
  if (mode_ == KernelMode::Euclidean) {
    Estimate e;
    e.value = euclidean_kernel(g, t);
    e.method = "closed-form";
    return e;
  }
  return step2_kernel(g, t, *this);
}

Estimate step2_kernel(const GroupPoint& g, double t, const KernelEngine& engine) {
  const CarnotGroup& G = engine.group();
  if (engine.mode() != KernelMode::Step2Explicit) throw std::invalid_argument("step2_kernel needs a step-2 group");
  if (!(t > 0.0)) throw std::invalid_argument("heat kernel needs t > 0");
  if (g.size() != static_cast<std::size_t>(G.dim())) throw std::invalid_argument("step2_kernel: dimension mismatch");
  const int m = G.horizontal_dim();
  const int m2 = G.stratification().dim(2);
  const std::span<const double> z(g.data(), m);
  const std::span<const double> sigma(g.data() + m, m2);
  std::vector<double> freq(m2);
  for (int k = 0; k < m2; ++k) freq[k] = std::abs(sigma[k]) / t;
  const double L = engine.lambda_max();

  auto integrate = [&](bool refined) {
    const auto rules = lambda_rules(m2, L, freq, engine.quadrature(), refined);
    // Chunk over axis-0 nodes; partial sums are reduced in index order.
    const std::size_t n0 = rules[0].size();
    std::vector<double> partial(n0, 0.0);
    parallel_chunks(n0, m2 > 1 ? 0 : 1, [&](std::size_t i0) {
      std::vector<std::size_t> idx(m2, 0);
      std::vector<double> lambda(m2);
      double acc = 0.0;
      do {
        double w = rules[0].weights[i0];
        lambda[0] = rules[0].nodes[i0];
        for (int k = 1; k < m2; ++k) {
          lambda[k] = rules[k].nodes[idx[k]];
          w *= rules[k].weights[idx[k]];
        }
        double phase = 0.0;
        for (int k = 0; k < m2; ++k) phase += sigma[k] * lambda[k];
        acc += w * std::cos(phase / t) * pointwise_integrand(engine, lambda.data(), z, t);
      } while (advance(idx, rules, 1));
      partial[i0] = acc;
    });
    double sum = 0.0;
    for (double v : partial) sum += v;
    return sum;
  };

  const double pref = prefactor(G, t);
  const double coarse = integrate(false);
  const double fine = integrate(true);
  double z2 = 0.0;
  for (double v : z) z2 += v * v;
  Estimate e;
  e.value = pref * fine;
  const double refinement = pref * std::abs(fine - coarse);
  const double tail = pref * engine.lambda_tail(L) * std::exp(-z2 / (4.0 * t));
  e.error = refinement + tail;
  e.method = "quadrature";
  e.breakdown = {{"refinement", refinement}, {"lambda_tail", tail}};
  return e;
}

namespace {

// Tail of the envelope integral outside the gauge ball of radius R sqrt(t).
double gauge_tail(const GaussianBound& b, int N, int Q, double R) {
  return b.c_upper * std::pow(2.0, N) * 0.5 * Q * std::pow(b.beta, -0.5 * Q) *
         boost::math::tgamma(0.5 * Q, b.beta * R * R);
}

// Bound on the envelope integrated over |sigma| > S at fixed z.
double sigma_tail(const GaussianBound& b, int m2, int Q, double t, double S) {
  return b.c_upper * std::pow(t, -0.5 * Q) * sphere_area(m2) * std::pow(t / b.beta, m2) *
         boost::math::tgamma(static_cast<double>(m2), b.beta * S / t);
}

// The envelope used for tail control: the grid fit with a safety margin for off-grid points.
GaussianBound tail_envelope(const KernelEngine& engine) {
  GaussianBound b = engine.envelope();
  b.c_upper *= 2.0;
  b.beta *= 0.8;
  return b;
}

template <class F>
double solve_radius(F tail, double target, double start) {
  double hi = start;
  while (tail(hi) > target) {
    hi *= 1.5;
    if (hi > 1e4) throw std::runtime_error("tail bound cannot meet the requested tolerance");
  }
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tail(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

// Symmetric 1-D cosine sums C_k(lambda) = sum_i w_i cos(sigma_i lambda / t) over a sigma rule;
// the sine parts vanish because the rule is symmetric.
double cosine_sum(const Rule1D& r, double lambda, double t) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::cos(r.nodes[i] * lambda / t);
  return s;
}

struct FiberResult {
  double coarse = 0.0;
  double fine = 0.0;
};

// Integral of p over the tensor box (z-rule x sigma-rule), arranged as a lambda-sum of
// separable z- and sigma-sums. With `z_point` set, z is fixed instead of integrated.
FiberResult fiber_integral(const KernelEngine& engine, double t, double L, double sigma_half_width,
                           double z_half_width, const std::vector<double>* z_point) {
  const CarnotGroup& G = engine.group();
  const int m = G.horizontal_dim();
  const int m2 = G.stratification().dim(2);
  const auto& q = engine.quadrature();
  FiberResult out;
  for (int level = 0; level < 2; ++level) {
    const bool refined = level == 1;
    const double scale = refined ? 0.5 : 1.0;
    const Rule1D srule =
        composite_gauss_legendre_width(-sigma_half_width, sigma_half_width, scale * t, q.order);
    Rule1D zrule;
    if (!z_point) zrule = composite_gauss_legendre_width(-z_half_width, z_half_width, scale * 0.25 * std::sqrt(t), q.order);
    const std::vector<double> freq(m2, sigma_half_width / t);
    const auto rules = lambda_rules(m2, L, freq, q, refined);
    if (!z_point && m > 2) {
      const double work = std::pow(static_cast<double>(zrule.size()), m);
      if (work > 1e7) throw std::runtime_error("normalization grid too large for this group");
    }
    const std::size_t n0 = rules[0].size();
    std::vector<double> partial(n0, 0.0);
    parallel_chunks(n0, 0, [&](std::size_t i0) {
      std::vector<std::size_t> idx(m2, 0);
      std::vector<double> lambda(m2), zz(m);
      double acc = 0.0;
      do {
        double w = rules[0].weights[i0];
        lambda[0] = rules[0].nodes[i0];
        for (int k = 1; k < m2; ++k) {
          lambda[k] = rules[k].nodes[idx[k]];
          w *= rules[k].weights[idx[k]];
        }
        double sig = 1.0;
        for (int k = 0; k < m2; ++k) sig *= cosine_sum(srule, lambda[k], t);
        if (z_point) {
          acc += w * sig * pointwise_integrand(engine, lambda.data(), *z_point, t);
          continue;
        }
        const auto s = engine.spectral(lambda);
        double gz = 0.0;
        {
          bool diagonal = true;
          double dmax = 0.0;
          for (int a = 0; a < m; ++a) dmax = std::max(dmax, std::abs(s.quad_form[a * m + a]));
          for (int a = 0; a < m && diagonal; ++a) {
            for (int b = 0; b < m; ++b) {
              if (a != b && std::abs(s.quad_form[a * m + b]) > 1e-14 * dmax) {
                diagonal = false;
                break;
              }
            }
          }
          if (diagonal) {
            gz = 1.0;
            for (int a = 0; a < m; ++a) {
              double sa = 0.0;
              for (std::size_t i = 0; i < zrule.size(); ++i) {
                sa += zrule.weights[i] * std::exp(-s.quad_form[a * m + a] * zrule.nodes[i] * zrule.nodes[i] / (4.0 * t));
              }
              gz *= sa;
            }
          } else {
            std::vector<std::size_t> zi(m, 0);
            std::vector<Rule1D> zr(m, zrule);
            do {
              double wz = 1.0;
              for (int a = 0; a < m; ++a) {
                zz[a] = zrule.nodes[zi[a]];
                wz *= zrule.weights[zi[a]];
              }
              gz += wz * std::exp(-quad_form(s.quad_form, zz) / (4.0 * t));
            } while (advance(zi, zr));
          }
        }
        acc += w * sig * s.det_factor * gz;
      } while (advance(idx, rules, 1));
      partial[i0] = acc;
    });
    double sum = 0.0;
    for (double v : partial) sum += v;
    (refined ? out.fine : out.coarse) = sum * prefactor(G, t);
  }
  return out;
}

}  // namespace

Estimate kernel_normalization(const KernelEngine& engine, double t, double tolerance) {
  if (!(t > 0.0)) throw std::invalid_argument("normalization needs t > 0");
  const CarnotGroup& G = engine.group();
  const int N = G.dim();
  Estimate e;
  e.method = "quadrature";
  if (engine.mode() == KernelMode::Euclidean) {
    // Tail of N(0, 2t I) outside the box [-R sqrt t, R sqrt t]^N.
    auto tail = [N](double R) { return 1.0 - std::pow(std::erf(R / 2.0), N); };
    const double R = solve_radius(tail, 0.1 * tolerance, 4.0);
    double level[2];
    for (int l = 0; l < 2; ++l) {
      const Rule1D r = composite_gauss_legendre_width(-R * std::sqrt(t), R * std::sqrt(t), (l ? 0.25 : 0.5) * std::sqrt(t), 16);
      double s = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double x = r.nodes[i];
        s += r.weights[i] * euclidean_kernel(std::span<const double>(&x, 1), t);
      }
      level[l] = std::pow(s, N);
    }
    e.value = level[1];
    const double refinement = std::abs(level[1] - level[0]);
    e.error = refinement + tail(R);
    e.breakdown = {{"refinement", refinement}, {"box_tail", tail(R)}};
    return e;
  }
  const int Q = G.homogeneous_dim();
  const int m2 = G.stratification().dim(2);
  const GaussianBound env = tail_envelope(engine);
  const double R = solve_radius([&](double r) { return gauge_tail(env, N, Q, r); }, 0.1 * tolerance, 4.0);
  const double S = R * R * t;
  // lambda tail integrated over the sigma box and the z-Gaussian.
  const double box = std::pow(2.0 * S, m2) * std::pow(4.0 * kPi * t, 0.5 * G.horizontal_dim());
  const double L = engine.lambda_cutoff_for(0.1 * tolerance / (prefactor(G, t) * box));
  const FiberResult f = fiber_integral(engine, t, L, S, R * std::sqrt(t), nullptr);
  e.value = f.fine;
  const double refinement = std::abs(f.fine - f.coarse);
  const double gtail = gauge_tail(env, N, Q, R);
  const double ltail = prefactor(G, t) * box * engine.lambda_tail(L);
  e.error = refinement + gtail + ltail;
  e.breakdown = {{"refinement", refinement}, {"gauge_tail", gtail}, {"lambda_tail", ltail}};
  return e;
}

Estimate decoupling_marginal(const KernelEngine& engine, std::span<const double> z, double t, double tolerance) {
  if (!(t > 0.0)) throw std::invalid_argument("decoupling needs t > 0");
  const CarnotGroup& G = engine.group();
  if (z.size() != static_cast<std::size_t>(G.horizontal_dim())) throw std::invalid_argument("decoupling: z dimension");
  Estimate e;
  if (engine.mode() == KernelMode::Euclidean) {
    e.value = euclidean_kernel(z, t);
    e.method = "closed-form";
    return e;
  }
  const int Q = G.homogeneous_dim();
  const int m2 = G.stratification().dim(2);
  const GaussianBound env = tail_envelope(engine);
  const double S = solve_radius([&](double s) { return sigma_tail(env, m2, Q, t, s); }, 0.1 * tolerance, 4.0 * t);
  double z2 = 0.0;
  for (double v : z) z2 += v * v;
  const double box = std::pow(2.0 * S, m2) * std::exp(-z2 / (4.0 * t));
  const double L = engine.lambda_cutoff_for(std::max(1e-300, 0.1 * tolerance / (prefactor(G, t) * box)));
  const std::vector<double> zp(z.begin(), z.end());
  const FiberResult f = fiber_integral(engine, t, L, S, 0.0, &zp);
  e.value = f.fine;
  e.method = "quadrature";
  const double refinement = std::abs(f.fine - f.coarse);
  const double stail = sigma_tail(env, m2, Q, t, S);
  const double ltail = prefactor(G, t) * box * engine.lambda_tail(L);
  e.error = refinement + stail + ltail;
  e.breakdown = {{"refinement", refinement}, {"sigma_tail", stail}, {"lambda_tail", ltail}};
  return e;
}

std::vector<std::pair<GroupPoint, double>> default_audit_grid(const CarnotGroup& group, int radii, int directions,
                                                              double max_radius, unsigned seed) {
  const Stratification& s = group.stratification();
  const int r = s.step();
  double e = 2.0;
  for (int k = 2; k <= r; ++k) e *= k;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<GroupPoint> dirs;
  for (int d = 0; d < directions; ++d) {
    // Layer weights u_j >= 0 with sum 1, then |xi_j| = u_j^{j/e} puts the point on the unit gauge sphere.
    std::vector<double> u(r);
    double su = 0.0;
    for (double& v : u) {
      v = -std::log(std::max(1e-300, unif(rng)));
      su += v;
    }
    // Include the pure first-layer and pure top-layer directions.
    if (d == 0) std::fill(u.begin(), u.end(), 0.0), u[0] = su;
    if (d == 1 && r > 1) std::fill(u.begin(), u.end(), 0.0), u[r - 1] = su;
    GroupPoint g(s.total_dim(), 0.0);
    for (int j = 1; j <= r; ++j) {
      double n2 = 0.0;
      for (int k = s.offset(j); k < s.offset(j) + s.dim(j); ++k) {
        g[k] = gauss(rng);
        n2 += g[k] * g[k];
      }
      const double target = std::pow(u[j - 1] / su, j / e);
      for (int k = s.offset(j); k < s.offset(j) + s.dim(j); ++k) g[k] *= target / std::sqrt(n2);
    }
    dirs.push_back(g);
  }
  std::vector<std::pair<GroupPoint, double>> grid;
  grid.emplace_back(GroupPoint(s.total_dim(), 0.0), 1.0);
  for (int k = 1; k <= radii; ++k) {
    const double rho = max_radius * k / radii;
    for (const auto& d : dirs) grid.emplace_back(dilate(rho, d, s), 1.0);
  }
  return grid;
}

GaussianBound gaussian_bound_audit(const KernelEngine& engine,
                                   const std::vector<std::pair<GroupPoint, double>>& samples) {
  const CarnotGroup& G = engine.group();
  const Stratification& s = G.stratification();
  const double halfQ = 0.5 * G.homogeneous_dim();
  std::vector<double> x, y;
  double y_e = -std::numeric_limits<double>::infinity();
  double x_min = std::numeric_limits<double>::infinity();
  GaussianBound b;
  for (const auto& [g, t] : samples) {
    const Estimate p = engine.evaluate(g, t);
    if (!(p.value > p.error) || p.value <= 0) continue;  // unresolved far tail
    const double gg = gauge(g, s);
    const double xi = gg * gg / t;
    const double yi = std::log(std::pow(t, halfQ) * p.value);
    x.push_back(xi);
    y.push_back(yi);
    b.max_scaled_gauge = std::max(b.max_scaled_gauge, gg / std::sqrt(t));
    if (xi < x_min) {
      x_min = xi;
      y_e = yi;
    }
  }
  b.samples = x.size();
  if (x.empty()) return b;
  // Upper envelope: minimize log C_beta - (Q/2) log beta, which is convex in beta.
  auto log_c = [&](double beta) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, y[i] + beta * x[i]);
    return m;
  };
  auto objective = [&](double beta) { return log_c(beta) - halfQ * std::log(beta); };
  double lo = 1e-4, hi = 10.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), c = lo + phi * (hi - lo);
  double fa = objective(a), fc = objective(c);
  for (int it = 0; it < 200; ++it) {
    if (fa < fc) {
      hi = c;
      c = a;
      fc = fa;
      a = hi - phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = c;
      fa = fc;
      c = lo + phi * (hi - lo);
      fc = objective(c);
    }
  }
  b.beta = 0.5 * (lo + hi);
  b.c_upper = std::exp(log_c(b.beta));
  // Lower envelope anchored at the peak sample: smallest alpha with p_i >= p_e e^{-alpha x_i}.
  b.alpha = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > x_min) b.alpha = std::max(b.alpha, (y_e - y[i]) / (x[i] - x_min));
  }
  b.c_lower = std::exp(y_e + b.alpha * x_min);
  b.brackets = b.alpha >= b.beta;
  for (std::size_t i = 0; i < x.size() && b.brackets; ++i) {
    const double upper = std::log(b.c_upper) - b.beta * x[i];
    const double lower = std::log(b.c_lower) - b.alpha * x[i];
    if (y[i] > upper + 1e-9 || y[i] < lower - 1e-9) b.brackets = false;
  }
  return b;
}

std::string kernel_record_json(const std::string& group, const GroupPoint& g, double t, const Estimate& e) {
  nlohmann::json j{{"group", group}, {"point", g}, {"t", t}, {"value", e.value}, {"error_bound", e.error},
                   {"method", e.method}};
  return j.dump();
}

}  // namespace carnot
