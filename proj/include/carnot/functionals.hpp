#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carnot/diffusion.hpp"
#include "carnot/estimate.hpp"
#include "carnot/frame.hpp"
#include "carnot/group.hpp"
#include "carnot/scalar_field.hpp"

namespace carnot {

/// ||f||_p^p by tensor Gauss-Legendre quadrature over the support box.
Estimate lp_norm_power(const ScalarField& f, double p, int points_per_axis = 0);

struct SobolevOptions {
  int order = 8;   // Gauss-Legendre points per panel
  int panels = 0;  // per axis; 0 picks a dimension-dependent default
};

/// int |grad_H f|^p dg by tensor quadrature over the support box.
///
/// The error is the difference to a refined rule (more panels up to
/// dimension 4, higher order above). Missing partials fall back to central
/// differences, which is recorded in the method tag.
Estimate sobolev_energy(const ScalarField& f, double p, const HorizontalFrame& frame, SobolevOptions opts = {});

/// C_p = int p(g, e, 1) |z|^p dg = E |N(0, 2 I_m)|^p = 2^p Gamma((m + p)/2) / Gamma(m/2).
double diffquot_constant(double p, int m);

/// 4 Gamma(p) / (p Gamma(p/2)), the s -> 1 Besov constant.
double besov_constant(double p);

struct InnerOptions {
  int points_per_path = 4;    // uniform inner points per diffusion endpoint
  std::uint64_t seed = 1;     // stream for the inner points
  int threads = 1;
  double max_box_growth = 4;  // use the split identity when the union box grows beyond this factor
};

/// Phi(t) = int P_t(|f - f(g)|^p)(g) dg and the BBM energy t^{-p/2} Phi(t).
///
/// By right-translation invariance Phi(t) = E_h int |f(g h) - f(g)|^p dg with
/// h distributed as the heat kernel at time t. Monte Carlo mode reuses one
/// endpoint set, dilated to every t (common random numbers), and integrates
/// the inner integral with uniform points over the bounding box of
/// supp f and (supp f) h^{-1}. On R^1 both integrals are done by quadrature.
class HeatDifference {
 public:
  HeatDifference(const CarnotGroup& group, ScalarField f, double p, SampleSet unit_samples, InnerOptions opts = {},
                 std::optional<double> lp_norm = std::nullopt);

  /// Deterministic quadrature on the real line.
  static HeatDifference euclidean_line(ScalarField f, double p, std::optional<double> lp_norm = std::nullopt);

  double p() const { return p_; }
  const ScalarField& field() const { return f_; }
  double lp_norm_power() const { return lp_; }
  bool deterministic() const { return !samples_; }
  std::size_t paths() const { return samples_ ? samples_->size() : 0; }
  const std::string& group_name() const { return group_name_; }
  int horizontal_dim() const { return m_; }
  int homogeneous_dim() const { return q_; }

  Estimate phi(double t) const;
  Estimate energy(double t) const;

 private:
  HeatDifference(ScalarField f, double p, double lp);
  Estimate phi_line(double t) const;
  Estimate phi_monte_carlo(double t) const;

  std::shared_ptr<const CarnotGroup> group_;
  std::string group_name_;
  ScalarField f_;
  double p_;
  double lp_ = 0.0;
  int m_ = 1;
  int q_ = 1;
  std::shared_ptr<const SampleSet> samples_;
  InnerOptions opts_;
};

/// Convenience: BBM energy at t from a fresh endpoint set sampled at t.
Estimate bbm_energy(const ScalarField& f, double p, double t, const CarnotGroup& group, const DiffusionConfig& sampler,
                    InnerOptions opts = {});

/// Least-squares fit value = a + b x over (x_k, values_k), returned at x = 0.
///
/// The error adds the propagated input errors (summed in absolute value, as
/// the inputs share random numbers) and the fit residual scale.
Estimate extrapolate_linear(const std::vector<double>& x, const std::vector<Estimate>& values);

struct LimitReport {
  std::string name;
  std::string param_name;
  std::vector<double> params;
  std::vector<Estimate> values;
  Estimate limit;
  double target = 0.0;
  double ratio = 0.0;
  double ratio_error = 0.0;
  double residual_rms = 0.0;
  std::vector<std::string> flags;

  /// Columns param,value,error,target,ratio; the last row has param "limit".
  std::string to_csv() const;
  std::string to_json() const;
};

/// BBM energies on a decreasing grid, extrapolated in sqrt(t), against
/// (2 Gamma(p) / Gamma(p/2)) * gradient_norm.
LimitReport bbm_limit(const HeatDifference& hd, const std::vector<double>& t_grid, const Estimate& gradient_norm);

struct DiffquotReport {
  double p = 0.0;
  double constant = 0.0;  // C_p
  double bound = 0.0;     // C_p * ||grad_H f||_p^p
  std::vector<double> t;
  std::vector<Estimate> energy;
  int violations = 0;
  bool ok() const { return violations == 0; }
};

/// Checks t^{-p/2} Phi(t) <= C_p ||grad_H f||_p^p on every grid t, allowing 3 errors.
DiffquotReport diffquot_bound_check(const HeatDifference& hd, const std::vector<double>& t_grid,
                                    const Estimate& gradient_norm);

struct PhiProfile {
  double p = 0.0;
  std::vector<double> t;
  std::vector<Estimate> phi;
  double lp_norm_power = 0.0;  // ||f||_p^p, so Phi(inf) = 2 ||f||_p^p
  Estimate small_t_constant;   // c_f with Phi(t) ~ c_f t^{p/2}
  double plateau_ratio = 0.0;  // Phi(t_max) / (2 ||f||_p^p)
  double small_t_ratio = 0.0;  // Phi(t_min) t_min^{-p/2} / c_f
  double decay_exponent = 0.5; // assumed rate t^{-Q/2} of the approach to the plateau
  std::vector<std::string> flags;
};

/// Log-spaced grid with `per_decade` points per decade, both ends included.
std::vector<double> log_grid(double t_min, double t_max, int per_decade);

/// The BBM window {2.5e-3, 1.25e-3, 6.25e-4}, decreasing.
std::vector<double> default_bbm_grid();

/// The BBM window followed by 4 points per decade on [1e-2, t_max], with
/// t_max = 1e2, or 1e4 when Q <= 2 (the plateau is approached like t^{-Q/2}).
std::vector<double> default_profile_grid(int homogeneous_dim);

/// Phi on an increasing grid. c_f is the sqrt(t) extrapolation over the three
/// smallest grid points unless given.
PhiProfile phi_profile(const HeatDifference& hd, const std::vector<double>& t_grid,
                       std::optional<Estimate> small_t_constant = std::nullopt);

/// N_{s,p}^p = int_0^inf t^{-sp/2 - 1} Phi(t) dt assembled from the profile.
///
/// Breakdown: the three pieces (small_t, middle, tail) and the error
/// sources (mc, interpolation, tail_model, small_t_constant).
Estimate besov_seminorm(const PhiProfile& profile, double s);

/// (1 - s) N_{s,p}^p on an s-grid increasing to 1, extrapolated linearly in 1 - s,
/// against (4 Gamma(p) / (p Gamma(p/2))) * gradient_norm.
LimitReport bbm_seminorm_limit(const PhiProfile& profile, const std::vector<double>& s_grid,
                               const Estimate& gradient_norm);

/// s N_{s,p}^p on an s-grid decreasing to 0, extrapolated linearly in s, against (4/p) ||f||_p^p.
LimitReport ms_limit(const PhiProfile& profile, const std::vector<double>& s_grid);

struct SandwichReport {
  double p = 0.0;
  double epsilon = 0.0;       // largest t of the BBM grid
  std::vector<double> s;
  std::vector<Estimate> besov;         // (1 - s) N^p per s
  std::vector<double> lower_bound;     // (2/p) min_t E(t) eps^{p(1-s)/2} per s
  std::vector<double> upper_bound;     // (2/p) max_t E(t) eps^{p(1-s)/2} + tail bound per s
  double lower_bbm = 0.0;     // (2/p) min_t E(t)
  double lower_besov = 0.0;   // min_s (1 - s) N^p
  double upper_besov = 0.0;   // max_s (1 - s) N^p
  double upper_bbm = 0.0;     // (2/p) max_t E(t)
  double lower_error = 0.0;   // combined error of the grid-chain left inequality
  double upper_error = 0.0;
  bool lower_ok = false;      // lower_bound(s) <= (1 - s) N^p on every s, within error
  bool upper_ok = false;      // (1 - s) N^p <= upper_bound(s) on every s, within error
  bool grid_lower_ok = false; // lower_bbm <= lower_besov within error
  bool grid_upper_ok = false; // upper_besov <= upper_bbm within error
  bool ok() const { return lower_ok && upper_ok; }
};

/// Finite-grid forms of the liminf/limsup chain between BBM energies and (1 - s) N^p.
///
/// With eps = max t_grid and E(t) = t^{-p/2} Phi(t), splitting the t-integral
/// at eps gives, for every s,
///   (2/p) inf_{t<eps} E eps^{p(1-s)/2} <= (1-s) N^p
///                                      <= (2/p) sup_{t<eps} E eps^{p(1-s)/2} + (1-s) 2^{p+1} ||f||_p^p eps^{-sp/2} / (sp),
/// using Phi <= 2^p ||f||_p^p. These gate ok(); inf and sup are taken over the
/// grid. The plain grid chain (2/p) min E <= min (1-s) N^p, max (1-s) N^p <=
/// (2/p) max E holds only as s -> 1 and t -> 0 and is reported alongside.
SandwichReport sandwich_check(const HeatDifference& hd, const PhiProfile& profile, const std::vector<double>& t_grid,
                              const std::vector<double>& s_grid);

}  // namespace carnot
