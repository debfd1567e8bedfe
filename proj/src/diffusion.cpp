#include "carnot/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "carnot/parallel.hpp"

namespace carnot {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Auto: return "auto";
    case Scheme::LayerExact: return "layer-exact";
    case Scheme::StratonovichHeun: return "stratonovich-heun";
  }
  return "auto";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "auto") return Scheme::Auto;
  if (name == "layer-exact") return Scheme::LayerExact;
  if (name == "stratonovich-heun" || name == "heun") return Scheme::StratonovichHeun;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string ItoAudit::describe(const Stratification& strat) const {
  const auto names = coordinate_names(strat);
  std::string out;
  for (std::size_t k = 0; k < drift.size(); ++k) {
    if (drift[k].is_zero()) continue;
    out += fmt::format("{}{}: {}", out.empty() ? "" : "; ", names[k], drift[k].str(names));
  }
  return out.empty() ? "0" : out;
}

ItoAudit ito_correction_audit(const HorizontalFrame& frame) {
  const int n = frame.dim();
  const int m = frame.horizontal_dim();
  ItoAudit audit;
  audit.drift.assign(n, Polynomial(n));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < m; ++i) {
      const Polynomial& bik = frame.coefficient(i, k);
      if (bik.is_zero()) continue;
      for (int l = 0; l < n; ++l) {
        const Polynomial& bil = frame.coefficient(i, l);
        if (bil.is_zero()) continue;
        audit.drift[k] += bil * bik.derivative(l);
      }
    }
    if (!audit.drift[k].is_zero()) audit.vanishes = false;
  }
  return audit;
}

SampleSet::SampleSet(Stratification strat, std::string group, DiffusionConfig config, Scheme used,
                     std::vector<double> data)
    : strat_(std::move(strat)),
      group_(std::move(group)),
      config_(config),
      scheme_(used),
      n_(data.size() / strat_.total_dim()),
      data_(std::move(data)) {}

SampleSet SampleSet::rescaled(double new_t) const {
  if (!(new_t > 0.0)) throw std::invalid_argument("rescaled: t must be positive");
  const double lambda = std::sqrt(new_t / config_.t);
  const auto w = strat_.weights();
  std::vector<double> factor(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) factor[k] = std::pow(lambda, w[k]);
  std::vector<double> out(data_.size());
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i] * factor[i % n];
  DiffusionConfig cfg = config_;
  cfg.h = config_.h * new_t / config_.t;
  cfg.t = new_t;
  return SampleSet(strat_, group_, cfg, scheme_, std::move(out));
}

std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(seed) ^ (path * 0xd1b54a32d192ed03ULL + 1));
}

namespace {

struct FrameTerm {
  int i;
  int k;
  CompiledPolynomial poly;
};

class Stepper {
 public:
  Stepper(const HorizontalFrame& frame, Scheme scheme) : scheme_(scheme), n_(frame.dim()), m_(frame.horizontal_dim()) {
    for (int k = m_; k < n_; ++k) {
      for (int i = 0; i < m_; ++i) {
        const Polynomial& p = frame.coefficient(i, k);
        if (!p.is_zero()) terms_.push_back({i, k, CompiledPolynomial(p)});
      }
    }
    // Terms are ordered by output coordinate, hence by layer.
  }

  void run(double t, double h, std::uint64_t stream, double* xi) const {
    std::mt19937_64 rng(stream);
    std::normal_distribution<double> normal;
    std::fill(xi, xi + n_, 0.0);
    const long steps = std::max(1L, std::lround(t / h));
    const double dt = t / static_cast<double>(steps);
    const double scale = std::sqrt(2.0 * dt);
    std::vector<double> dz(m_), mid(n_), pred(n_), inc(n_), inc2(n_);
    for (long s = 0; s < steps; ++s) {
      for (int i = 0; i < m_; ++i) dz[i] = scale * normal(rng);
      if (scheme_ == Scheme::LayerExact) {
        std::copy(xi, xi + n_, mid.begin());
        for (int i = 0; i < m_; ++i) mid[i] += 0.5 * dz[i];
        std::fill(inc.begin(), inc.end(), 0.0);
        int current = -1;
        for (const auto& term : terms_) {
          if (term.k != current) {
            // Coordinates below `term.k` are final; move them to their midpoint.
            if (current >= 0) mid[current] = xi[current] + 0.5 * inc[current];
            current = term.k;
          }
          inc[term.k] += term.poly(mid) * dz[term.i];
        }
        for (int i = 0; i < m_; ++i) xi[i] += dz[i];
        for (int k = m_; k < n_; ++k) xi[k] += inc[k];
      } else {
        std::fill(inc.begin(), inc.end(), 0.0);
        const std::span<const double> x0(xi, n_);
        for (const auto& term : terms_) inc[term.k] += term.poly(x0) * dz[term.i];
        for (int i = 0; i < m_; ++i) inc[i] = dz[i];
        for (int k = 0; k < n_; ++k) pred[k] = xi[k] + inc[k];
        std::fill(inc2.begin(), inc2.end(), 0.0);
        for (const auto& term : terms_) inc2[term.k] += term.poly(pred) * dz[term.i];
        for (int i = 0; i < m_; ++i) xi[i] += dz[i];
        for (int k = m_; k < n_; ++k) xi[k] += 0.5 * (inc[k] + inc2[k]);
      }
    }
  }

 private:
  Scheme scheme_;
  int n_;
  int m_;
  std::vector<FrameTerm> terms_;
};

constexpr std::size_t kChunk = 4096;

}  // namespace

SampleSet sample_endpoints(const CarnotGroup& group, const DiffusionConfig& config) {
  if (!(config.t > 0.0) || !(config.h > 0.0) || config.h > config.t * (1.0 + 1e-12) || config.paths < 1) {
    throw std::invalid_argument(fmt::format("invalid sampler: need h > 0, t >= h, n >= 1 (t={}, h={}, n={})",
                                            config.t, config.h, config.paths));
  }
  const HorizontalFrame frame = horizontal_frame(group);
  const bool exact_ok = ito_correction_audit(frame).vanishes;
  Scheme scheme = config.scheme;
  if (scheme == Scheme::Auto) scheme = exact_ok ? Scheme::LayerExact : Scheme::StratonovichHeun;
  if (scheme == Scheme::LayerExact && !exact_ok) {
    throw std::invalid_argument("layer-exact scheme refused: Ito correction of " + group.name() +
                                " does not vanish; use stratonovich-heun");
  }
  const Stepper stepper(frame, scheme);
  const int n = group.dim();
  std::vector<double> data(config.paths * n);
  const std::size_t chunks = (config.paths + kChunk - 1) / kChunk;
  parallel_chunks(chunks, config.threads, [&](std::size_t c) {
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(config.paths, lo + kChunk);
    for (std::size_t p = lo; p < hi; ++p) {
      stepper.run(config.t, config.h, path_stream_seed(config.seed, p), data.data() + p * n);
    }
  });
  return SampleSet(group.stratification(), group.name(), config, scheme, std::move(data));
}

void write_endpoints_csv(const SampleSet& samples, std::ostream& out) {
  const auto& strat = samples.stratification();
  out << "path_id,layer,index,value\n";
  for (std::size_t p = 0; p < samples.size(); ++p) {
    const auto x = samples.point(p);
    for (int k = 0; k < samples.dim(); ++k) {
      const int layer = strat.layer_of(k);
      out << fmt::format("{},{},{},{:.17g}\n", p, layer, k - strat.offset(layer) + 1, x[k]);
    }
  }
}

std::string endpoints_metadata_json(const SampleSet& samples) {
  const auto& c = samples.config();
  nlohmann::json j{{"group", samples.group()}, {"t", c.t},   {"h", c.h},
                   {"n", samples.size()},      {"seed", c.seed}, {"scheme", scheme_name(samples.scheme())}};
  return j.dump(2);
}

double ks_distance_normal(std::vector<double> values, double variance) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = 0.5 * std::erfc(-values[i] / (sd * std::numbers::sqrt2));
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

MarginalReport marginal_gaussian_test(const SampleSet& samples, double t) {
  const std::size_t n = samples.size();
  if (n < 1000) throw std::invalid_argument("marginal_gaussian_test needs at least 1000 samples");
  const int m = samples.stratification().horizontal_dim();
  const double var = 2.0 * t;
  const double nd = static_cast<double>(n);
  MarginalReport r;
  r.n = n;
  r.t = t;
  r.mean.assign(m, 0.0);
  r.mean_se.assign(m, 0.0);
  r.cov.assign(m * m, 0.0);
  r.cov_se.assign(m * m, 0.0);
  for (int a = 0; a < m; ++a) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double z = samples.point(p)[a];
      s += z;
      s2 += z * z;
    }
    r.mean[a] = s / nd;
    r.mean_se[a] = std::sqrt(std::max(0.0, s2 / nd - r.mean[a] * r.mean[a]) / nd);
  }
  // Second moments about the known mean 0, so E[z_a z_b] = 2t delta_ab is tested directly.
  r.mean_ok = true;
  for (int a = 0; a < m; ++a) r.mean_ok = r.mean_ok && std::abs(r.mean[a]) <= 3.0 * r.mean_se[a];
  r.cov_ok = true;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        const auto x = samples.point(p);
        const double v = x[a] * x[b];
        s += v;
        s2 += v * v;
      }
      const double mu = s / nd;
      r.cov[a * m + b] = mu;
      r.cov_se[a * m + b] = std::sqrt(std::max(0.0, s2 / nd - mu * mu) / nd);
      const double target = a == b ? var : 0.0;
      r.cov_ok = r.cov_ok && std::abs(mu - target) <= 3.0 * r.cov_se[a * m + b];
    }
  }
  r.ks_threshold = 1.63 / std::sqrt(nd);
  r.ks_ok = true;
  std::vector<double> column(n);
  for (int a = 0; a < m; ++a) {
    double s4 = 0.0, s8 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      column[p] = samples.point(p)[a];
      const double z4 = std::pow(column[p], 4);
      s4 += z4;
      s8 += z4 * z4;
    }
    const double denom = 3.0 * var * var;
    const double mu4 = s4 / nd;
    r.fourth_moment_ratio.push_back(mu4 / denom);
    r.fourth_moment_se.push_back(std::sqrt(std::max(0.0, s8 / nd - mu4 * mu4) / nd) / denom);
    r.ks.push_back(ks_distance_normal(column, var));
    r.ks_ok = r.ks_ok && r.ks.back() < r.ks_threshold;
  }
  return r;
}

double ledoux_constant(double p) { return 2.0 * std::tgamma(p) / std::tgamma(0.5 * p); }

namespace {

std::vector<double> projections(const SampleSet& samples, std::span<const double> nu) {
  const int m = samples.stratification().horizontal_dim();
  if (static_cast<int>(nu.size()) != m) throw std::invalid_argument("direction has wrong dimension");
  double norm2 = 0.0;
  for (double v : nu) norm2 += v * v;
  if (std::abs(norm2 - 1.0) > 1e-9) throw std::invalid_argument("direction must be a unit vector");
  std::vector<double> y(samples.size());
  for (std::size_t p = 0; p < samples.size(); ++p) {
    const auto x = samples.point(p);
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += nu[i] * x[i];
    y[p] = s;
  }
  return y;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double mu = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return {mu, std::sqrt(ss / std::max(1.0, n - 1.0) / n)};
}

double gaussian_density(double x, double h) {
  return std::exp(-0.5 * x * x / (h * h)) / (h * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

Estimate ledoux_statistic(const SampleSet& samples, std::span<const double> nu, double p, double t) {
  if (!(p >= 1.0)) throw std::invalid_argument("ledoux_statistic: p must be >= 1");
  if (!(t > 0.0)) throw std::invalid_argument("ledoux_statistic: t must be positive");
  auto y = projections(samples, nu);
  const double scale = std::pow(t, -0.5 * p);
  for (double& v : y) v = std::pow(std::abs(v), p) * scale;
  const auto [mu, se] = mean_se(y);
  Estimate e{mu, se, "MC", {{"standard_error", se}}, {}};
  return e;
}

Estimate huisken_statistic(const SampleSet& samples, std::span<const double> nu, double t, double bandwidth) {
  if (!(t > 0.0)) throw std::invalid_argument("huisken_statistic: t must be positive");
  const auto y = projections(samples, nu);
  const double n = static_cast<double>(y.size());
  const auto spread = mean_se(y);
  const double sd = spread.se * std::sqrt(n);
  double h = bandwidth > 0.0 ? bandwidth : sd * std::pow(n, -1.0 / 9.0);
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("huisken_statistic: degenerate bandwidth");
  // Gaussian kernels at h, h/sqrt2, h/2: E K_a = f + A a^2 + B a^4, and
  // R(a) = 2 K_{a/sqrt2} - K_a has bias -B a^4 / 2.
  std::vector<double> r1(y.size()), r2(y.size());
  const double h2 = h / std::numbers::sqrt2, h3 = 0.5 * h;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double k1 = gaussian_density(y[k], h), k2 = gaussian_density(y[k], h2), k3 = gaussian_density(y[k], h3);
    r1[k] = 2.0 * k2 - k1;
    r2[k] = 2.0 * k3 - k2;
  }
  const auto a = mean_se(r1);
  const auto b = mean_se(r2);
  const double norm = std::sqrt(4.0 * std::numbers::pi * t);
  const double bias = std::abs(a.mean - b.mean) / 3.0;
  Estimate e;
  e.value = norm * a.mean;
  e.error = norm * (a.se + bias);
  e.method = "MC";
  e.breakdown = {{"standard_error", norm * a.se}, {"bias", norm * bias}, {"bandwidth", h}};
  return e;
}

std::vector<double> default_kde_bandwidth(const SampleSet& samples) {
  const auto& strat = samples.stratification();
  const double n = static_cast<double>(samples.size());
  const int dim = strat.total_dim();
  std::vector<double> out;
  for (int layer = 1; layer <= strat.step(); ++layer) {
    double ss = 0.0;
    const int lo = strat.offset(layer), cnt = strat.dim(layer);
    for (std::size_t p = 0; p < samples.size(); ++p) {
      const auto x = samples.point(p);
      for (int k = lo; k < lo + cnt; ++k) ss += x[k] * x[k];
    }
    const double scale = std::sqrt(ss / (n * cnt));
    out.push_back(scale * std::pow(n, -1.0 / (dim + 4.0)));
  }
  return out;
}

Estimate kde_kernel_estimate(const SampleSet& samples, const GroupPoint& g, std::span<const double> bandwidth) {
  const auto& strat = samples.stratification();
  const int dim = strat.total_dim();
  if (static_cast<int>(g.size()) != dim) throw std::invalid_argument("kde_kernel_estimate: point dimension mismatch");
  std::vector<double> layer_h(bandwidth.begin(), bandwidth.end());
  if (layer_h.empty()) layer_h = default_kde_bandwidth(samples);
  if (static_cast<int>(layer_h.size()) != strat.step()) {
    throw std::invalid_argument("kde_kernel_estimate: need one bandwidth per layer");
  }
  for (double h : layer_h) {
    if (!(h > 0.0)) throw std::invalid_argument("kde_kernel_estimate: bandwidth must be positive");
  }
  std::vector<double> h(dim);
  for (int k = 0; k < dim; ++k) h[k] = layer_h[strat.layer_of(k) - 1];
  double log_norm = 0.0;
  for (int k = 0; k < dim; ++k) log_norm += std::log(h[k] * std::sqrt(2.0 * std::numbers::pi));
  // Product kernels at H, H/sqrt2, H/2 combined as in huisken_statistic.
  std::vector<double> r1(samples.size()), r2(samples.size());
  for (std::size_t p = 0; p < samples.size(); ++p) {
    const auto x = samples.point(p);
    double q = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double u = (x[k] - g[k]) / h[k];
      q += u * u;
    }
    const double k1 = std::exp(-0.5 * q - log_norm);
    const double k2 = std::exp(-q - log_norm + 0.5 * dim * std::log(2.0));
    const double k3 = std::exp(-2.0 * q - log_norm + dim * std::log(2.0));
    r1[p] = 2.0 * k2 - k1;
    r2[p] = 2.0 * k3 - k2;
  }
  const auto a = mean_se(r1);
  const auto b = mean_se(r2);
  const double bias = std::abs(a.mean - b.mean) / 3.0;
  Estimate e;
  e.value = a.mean;
  e.error = a.se + bias;
  e.method = "MC";
  e.breakdown = {{"standard_error", a.se}, {"bias", bias}};
  return e;
}

}  // namespace carnot
