#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "carnot/estimate.hpp"
#include "carnot/frame.hpp"
#include "carnot/group.hpp"
#include "carnot/polynomial.hpp"

namespace carnot {

enum class Scheme { Auto, LayerExact, StratonovichHeun };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

/// Stratonovich-to-Ito drift sum_i X_i(b_i) of the horizontal frame.
struct ItoAudit {
  std::vector<Polynomial> drift;  // one polynomial per coordinate
  bool vanishes = true;
  std::string describe(const Stratification& strat) const;
};

ItoAudit ito_correction_audit(const HorizontalFrame& frame);

struct DiffusionConfig {
  double t = 1.0;
  double h = 0.02;
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  Scheme scheme = Scheme::Auto;
  int threads = 1;
};

/// Immutable set of diffusion endpoints, row-major (paths x N).
class SampleSet {
 public:
  SampleSet(Stratification strat, std::string group, DiffusionConfig config, Scheme used,
            std::vector<double> data);

  std::size_t size() const { return n_; }
  int dim() const { return strat_.total_dim(); }
  const Stratification& stratification() const { return strat_; }
  const std::string& group() const { return group_; }
  const DiffusionConfig& config() const { return config_; }
  Scheme scheme() const { return scheme_; }
  double t() const { return config_.t; }

  std::span<const double> point(std::size_t k) const {
    return {data_.data() + k * dim(), static_cast<std::size_t>(dim())};
  }
  const std::vector<double>& data() const { return data_; }

  /// Endpoints at time t' obtained by the exact scaling law p(g, t') = dilation of p(g, t).
  SampleSet rescaled(double new_t) const;

 private:
  Stratification strat_;
  std::string group_;
  DiffusionConfig config_;
  Scheme scheme_;
  std::size_t n_;
  std::vector<double> data_;
};

/// Simulates d xi = sqrt(2) sum_i X_i(xi) o dW_i from the identity over [0, t].
///
/// Auto picks the layer-exact scheme when the Ito audit vanishes and
/// Stratonovich-Heun otherwise; an explicit LayerExact request on a group
/// whose audit does not vanish is rejected. Results depend only on the
/// configuration, never on the thread count.
SampleSet sample_endpoints(const CarnotGroup& group, const DiffusionConfig& config);

/// Gaussian random stream for one path, keyed by (seed, path).
std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path);

void write_endpoints_csv(const SampleSet& samples, std::ostream& out);
std::string endpoints_metadata_json(const SampleSet& samples);

struct MarginalReport {
  std::size_t n = 0;
  double t = 0.0;
  std::vector<double> mean;
  std::vector<double> mean_se;
  std::vector<double> cov;     // m x m
  std::vector<double> cov_se;  // m x m
  std::vector<double> ks;      // per coordinate direction
  double ks_threshold = 0.0;   // 1.63 / sqrt(n)
  std::vector<double> fourth_moment_ratio;  // E z_i^4 / (3 (2t)^2)
  std::vector<double> fourth_moment_se;
  bool mean_ok = false;
  bool cov_ok = false;
  bool ks_ok = false;
  bool ok() const { return mean_ok && cov_ok && ks_ok; }
};

/// Tests the horizontal block against N(0, 2t I_m) at 3 standard errors and KS level 0.01.
MarginalReport marginal_gaussian_test(const SampleSet& samples, double t);

/// Kolmogorov-Smirnov distance of a sample against N(0, variance).
double ks_distance_normal(std::vector<double> values, double variance);

/// 2 Gamma(p) / Gamma(p/2).
double ledoux_constant(double p);

/// Mean of |<nu, z>|^p / t^{p/2} with its standard error.
Estimate ledoux_statistic(const SampleSet& samples, std::span<const double> nu, double p, double t);

/// sqrt(4 pi t) times a kernel density estimate of <nu, z> at 0.
///
/// Gaussian kernel with Richardson bandwidth extrapolation; the error is
/// SE + bias bound, listed separately in the breakdown. bandwidth <= 0 picks
/// the rule-of-thumb value.
Estimate huisken_statistic(const SampleSet& samples, std::span<const double> nu, double t,
                           double bandwidth = 0.0);

/// Product-Gaussian density estimate of the endpoint law at g.
///
/// `bandwidth` holds one value per layer; empty selects per-layer Scott
/// bandwidths for the bias-reduced estimator.
Estimate kde_kernel_estimate(const SampleSet& samples, const GroupPoint& g,
                             std::span<const double> bandwidth = {});

/// Per-layer default bandwidths used by kde_kernel_estimate.
std::vector<double> default_kde_bandwidth(const SampleSet& samples);

}  // namespace carnot
