#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "carnot/estimate.hpp"
#include "carnot/group.hpp"

namespace carnot {

enum class KernelMode { Euclidean, Step2Explicit };

/// Quadrature parameters for the oscillatory lambda-integral.
struct KernelQuadrature {
  int order = 16;                  // Gauss-Legendre points per panel
  double max_panel_width = 2.0;    // lambda panel width cap
  double phase_per_panel = 8.0;    // cap on |sigma_k| / t * panel width
  double tolerance = 1e-12;        // lambda-tail target relative to 2^{m2} (4 pi t)^{-Q/2}
  double lambda_max = 0.0;         // 0: choose from the tail bound
};

/// Constants of a two-sided Gaussian envelope
///   C_lower e^{-alpha |g|^2 / t} <= t^{Q/2} p(g, e, t) <= C_upper e^{-beta |g|^2 / t}
/// fitted on a sample grid.
struct GaussianBound {
  double c_upper = 0.0;
  double beta = 0.0;
  double c_lower = 0.0;
  double alpha = 0.0;
  std::size_t samples = 0;
  double max_scaled_gauge = 0.0;  // largest |g| / sqrt(t) on the grid
  bool brackets = false;          // envelope holds on every sample and alpha >= beta
};

/// Heat kernel p(g, e, t) of L = sum X_i^2 (so d/dt p = L p).
///
/// Euclidean mode for step-1 groups, explicit oscillatory integral for step 2.
/// Step >= 3 has no explicit formula and is rejected; use the diffusion sampler.
class KernelEngine {
 public:
  explicit KernelEngine(CarnotGroup group, KernelQuadrature quad = {});

  KernelMode mode() const { return mode_; }
  const CarnotGroup& group() const { return group_; }
  const KernelQuadrature& quadrature() const { return quad_; }

  /// Lambda cutoff used for pointwise evaluations.
  double lambda_max() const { return lambda_max_; }

  /// Exponential decay rate c of the lambda-integrand: F(lambda) <= c|lambda| / sinh(c|lambda|).
  double decay_rate() const { return decay_; }

  /// Bound on the integrand mass outside [-L, L]^{m2}, in units of the prefactor.
  double lambda_tail(double cutoff) const;
  double lambda_cutoff_for(double tail_target) const;

  /// Spectral data at lambda: det-factor prod (tau/sinh tau)^{1/2} and the
  /// row-major matrix M = j(sqrt A) cosh(sqrt A) = sqrt(A) coth(sqrt(A)).
  struct Spectral {
    double det_factor = 1.0;
    std::vector<double> quad_form;
  };
  Spectral spectral(std::span<const double> lambda) const;

  /// Allocation-free core of `spectral`: tau[k] = sqrt of the k-th eigenvalue of
  /// A(lambda), eigenvectors as columns of the row-major m x m `vecs`.
  void spectral_raw(const double* lambda, double* tau, double* vecs) const;
  static constexpr int kMaxHorizontal = 16;

  /// Envelope constants used for tail control (lazy, cached, thread-safe).
  const GaussianBound& envelope() const;

  Estimate evaluate(const GroupPoint& g, double t) const;

 private:
  CarnotGroup group_;
  KernelQuadrature quad_;
  KernelMode mode_;
  double decay_ = 1.0;
  double lambda_max_ = 0.0;
  std::vector<double> kaplan_basis_;  // J(e_k) for each second-layer direction, m x m each
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// (4 pi t)^{-n/2} exp(-|z|^2 / 4t).
double euclidean_kernel(std::span<const double> z, double t);

/// tau / sinh(tau) and tau * coth(tau), with series near 0.
double tau_over_sinh(double tau);
double tau_coth(double tau);

Estimate step2_kernel(const GroupPoint& g, double t, const KernelEngine& engine);

/// Integral of p(., e, t) over the group (target 1).
Estimate kernel_normalization(const KernelEngine& engine, double t, double tolerance = 1e-8);

/// Integral of p((z, sigma), e, t) over all upper-layer coordinates.
Estimate decoupling_marginal(const KernelEngine& engine, std::span<const double> z, double t,
                             double tolerance = 1e-8);

/// Sample grid on dilated unit-gauge spheres, deterministic in `seed`.
std::vector<std::pair<GroupPoint, double>> default_audit_grid(const CarnotGroup& group, int radii = 24,
                                                              int directions = 16, double max_radius = 6.0,
                                                              unsigned seed = 1);

GaussianBound gaussian_bound_audit(const KernelEngine& engine,
                                   const std::vector<std::pair<GroupPoint, double>>& samples);

/// JSON record {group, point, t, value, error_bound, method}.
std::string kernel_record_json(const std::string& group, const GroupPoint& g, double t, const Estimate& e);

}  // namespace carnot
