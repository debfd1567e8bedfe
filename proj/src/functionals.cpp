#include "carnot/functionals.hpp"

#include <algorithm>
#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <json.hpp>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "carnot/interval.hpp"
#include "carnot/parallel.hpp"
#include "carnot/quadrature.hpp"

namespace carnot {

namespace {

double abs_pow(double v, double p) {
  const double a = std::abs(v);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

// Tensor composite Gauss-Legendre over [lo, hi] with per-axis rules.
template <class F>
double tensor_integrate(const std::vector<Rule1D>& rules, F&& integrand) {
  const std::size_t n = rules.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> x(n);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = rules[k].nodes[idx[k]];
      w *= rules[k].weights[idx[k]];
    }
    total += w * integrand(std::span<const double>(x));
    std::size_t k = 0;
    while (k < n && ++idx[k] == rules[k].size()) idx[k++] = 0;
    if (k == n) break;
  }
  return total;
}

std::vector<Rule1D> box_rules(const ScalarField& f, int panels, int order) {
  std::vector<Rule1D> rules;
  for (int k = 0; k < f.dim; ++k) {
    rules.push_back(composite_gauss_legendre(f.support_lo[k], f.support_hi[k], panels, order));
  }
  return rules;
}

}  // namespace

Estimate lp_norm_power(const ScalarField& f, double p, int points_per_axis) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_power: p must be >= 1");
  static constexpr int kDefault[] = {0, 256, 64, 32, 16, 10, 8};
  const int pts = points_per_axis > 0 ? points_per_axis : (f.dim < 7 ? kDefault[f.dim] : 6);
  auto integrand = [&](std::span<const double> x) { return abs_pow(f(x), p); };
  const int order = std::min(pts, 16);
  const int panels = std::max(1, pts / order);
  const double coarse = tensor_integrate(box_rules(f, panels, order), integrand);
  const double fine = tensor_integrate(box_rules(f, panels, std::min(order + 4, 20)), integrand);
  return Estimate{fine, std::abs(fine - coarse), "quadrature", {{"refinement", std::abs(fine - coarse)}}, {}};
}

Estimate sobolev_energy(const ScalarField& f, double p, const HorizontalFrame& frame, SobolevOptions opts) {
  if (!(p >= 1.0)) throw std::invalid_argument("sobolev_energy: p must be >= 1");
  const int n = f.dim;
  if (n != frame.dim()) throw std::invalid_argument("sobolev_energy: field and frame dimensions differ");
  static constexpr int kPanels[] = {1, 64, 24, 12, 3, 1, 1};
  int panels = opts.panels > 0 ? opts.panels : (n < 7 ? kPanels[n] : 1);
  int order = opts.order;
  if (opts.panels <= 0 && n >= 5) order = std::max(order, 10);
  const int m = frame.horizontal_dim();
  const bool analytic = f.has_gradient();
  auto integrand = [&](std::span<const double> x) {
    std::vector<double> grad = analytic ? std::vector<double>(n) : finite_difference_gradient(f, x);
    if (analytic) f.gradient(x, grad);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double xi = frame.apply(i, x, grad);
      s += xi * xi;
    }
    return p == 2.0 ? s : std::pow(s, 0.5 * p);
  };
  const double coarse = tensor_integrate(box_rules(f, panels, order), integrand);
  const double fine = n <= 4 ? tensor_integrate(box_rules(f, 2 * panels, order), integrand)
                             : tensor_integrate(box_rules(f, panels, order + 4), integrand);
  const double err = std::abs(fine - coarse);
  return Estimate{fine, err, analytic ? "quadrature" : "quadrature+finite-difference", {{"refinement", err}}, {}};
}

double diffquot_constant(double p, int m) { return std::pow(2.0, p) * std::tgamma(0.5 * (m + p)) / std::tgamma(0.5 * m); }

double besov_constant(double p) { return 4.0 * std::tgamma(p) / (p * std::tgamma(0.5 * p)); }

// ---------------------------------------------------------------------------

HeatDifference::HeatDifference(ScalarField f, double p, double lp) : f_(std::move(f)), p_(p), lp_(lp) {}

HeatDifference::HeatDifference(const CarnotGroup& group, ScalarField f, double p, SampleSet unit_samples,
                               InnerOptions opts, std::optional<double> lp_norm)
    : group_(std::make_shared<const CarnotGroup>(group)),
      group_name_(group.name()),
      f_(std::move(f)),
      p_(p),
      m_(group.horizontal_dim()),
      q_(group.homogeneous_dim()),
      samples_(std::make_shared<const SampleSet>(std::move(unit_samples))),
      opts_(opts) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("HeatDifference: p must be finite and >= 1");
  if (f_.dim != group.dim()) throw std::invalid_argument("HeatDifference: field dimension does not match the group");
  if (samples_->dim() != group.dim()) throw std::invalid_argument("HeatDifference: samples belong to another group");
  if (static_cast<int>(f_.support_lo.size()) != f_.dim) throw std::invalid_argument("HeatDifference: unbounded support");
  if (opts_.points_per_path < 1) throw std::invalid_argument("HeatDifference: need at least one inner point");
  lp_ = lp_norm ? *lp_norm : carnot::lp_norm_power(f_, p).value;
}

HeatDifference HeatDifference::euclidean_line(ScalarField f, double p, std::optional<double> lp_norm) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("HeatDifference: p must be finite and >= 1");
  if (f.dim != 1) throw std::invalid_argument("euclidean_line: field must live on R^1");
  const double lp = lp_norm ? *lp_norm : carnot::lp_norm_power(f, p).value;
  HeatDifference hd(std::move(f), p, lp);
  hd.group_name_ = "euclidean1";
  hd.m_ = 1;
  return hd;
}

Estimate HeatDifference::phi(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("phi: t must be positive");
  return samples_ ? phi_monte_carlo(t) : phi_line(t);
}

Estimate HeatDifference::energy(double t) const {
  Estimate e = phi(t);
  const double scale = std::pow(t, -0.5 * p_);
  e.value *= scale;
  e.error *= scale;
  for (auto& [k, v] : e.breakdown) v *= scale;
  return e;
}

Estimate HeatDifference::phi_line(double t) const {
  const double lo = f_.support_lo[0], hi = f_.support_hi[0];
  const double len = hi - lo, mid = 0.5 * (lo + hi);
  const double sd = std::sqrt(2.0 * t);
  auto run = [&](int refine) {
    const int order = 10;
    auto inner = [&](double h) {
      if (h >= len) return 2.0 * lp_;
      std::vector<double> cuts{lo - h, lo, hi - h, hi, mid - 0.5 * h};
      std::sort(cuts.begin(), cuts.end());
      double s = 0.0;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] <= 0.0) continue;
        const Rule1D rule = composite_gauss_legendre(cuts[k], cuts[k + 1], 4 * refine, order);
        for (std::size_t j = 0; j < rule.size(); ++j) {
          const double x = rule.nodes[j];
          const double a[1] = {x + h}, b[1] = {x};
          s += rule.weights[j] * abs_pow(f_(a) - f_(b), p_);
        }
      }
      return s;
    };
    // E over h ~ N(0, 2t), folded onto h >= 0.
    const double reach = std::min(12.0 * sd, len);
    const double width = std::min(0.5 * sd, len / 16.0) / refine;
    const Rule1D hr = composite_gauss_legendre(0.0, reach, std::max(1, static_cast<int>(std::ceil(reach / width))), order);
    double e = 0.0;
    for (std::size_t j = 0; j < hr.size(); ++j) {
      const double h = hr.nodes[j];
      const double dens = 2.0 * std::exp(-h * h / (2.0 * sd * sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
      e += hr.weights[j] * dens * inner(h);
    }
    const double beyond = std::erfc(reach / (sd * std::numbers::sqrt2));
    double tail_err = 0.0;
    if (reach >= len) {
      e += 2.0 * lp_ * beyond;
    } else {
      tail_err = 2.0 * lp_ * beyond;
    }
    return std::pair{e, tail_err};
  };
  const auto [coarse, tail1] = run(1);
  const auto [fine, tail2] = run(2);
  (void)tail1;
  const double err = std::abs(fine - coarse) + tail2 + 1e-15 * std::abs(fine);
  return Estimate{fine, err, "quadrature", {{"refinement", std::abs(fine - coarse)}, {"gaussian_tail", tail2}}, {}};
}

Estimate HeatDifference::phi_monte_carlo(double t) const {
  const SampleSet& s = *samples_;
  const int n = s.dim();
  const auto weights = s.stratification().weights();
  const double lambda = std::sqrt(t / s.t());
  std::vector<double> factor(n);
  for (int k = 0; k < n; ++k) factor[k] = std::pow(lambda, weights[k]);
  std::vector<Interval> box(n);
  double vol_s = 1.0;
  for (int k = 0; k < n; ++k) {
    box[k] = Interval(f_.support_lo[k], f_.support_hi[k]);
    vol_s *= f_.support_hi[k] - f_.support_lo[k];
  }
  const std::size_t paths = s.size();
  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  struct Partial {
    double sum = 0.0, sum2 = 0.0;
    std::size_t disjoint = 0, split = 0;
  };
  std::vector<Partial> partial(chunks);
  const int inner_points = opts_.points_per_path;
  parallel_chunks(chunks, opts_.threads, [&](std::size_t c) {
    Partial acc;
    std::vector<double> h(n), g(n), gh(n), scratch;
    std::vector<Interval> hinv(n), lo_hi(n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t end = std::min(paths, (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const auto x = s.point(k);
      for (int i = 0; i < n; ++i) {
        h[i] = x[i] * factor[i];
        hinv[i] = Interval(-h[i]);
      }
      // Enclosure of (supp f) h^{-1} = { g : g h in supp f }.
      const auto moved = group_->bch<Interval>(box, hinv, Interval(0.0));
      bool disjoint = false;
      double vol_u = 1.0;
      for (int i = 0; i < n; ++i) {
        if (moved[i].hi < box[i].lo || moved[i].lo > box[i].hi) disjoint = true;
        lo_hi[i] = hull(moved[i], box[i]);
        vol_u *= lo_hi[i].hi - lo_hi[i].lo;
      }
      double v;
      if (disjoint) {
        v = 2.0 * lp_;
        ++acc.disjoint;
      } else {
        const bool use_split = vol_u > opts_.max_box_growth * vol_s;
        const std::vector<Interval>& region = use_split ? box : lo_hi;
        std::mt19937_64 rng(path_stream_seed(opts_.seed, k));
        double sum = 0.0;
        for (int j = 0; j < inner_points; ++j) {
          for (int i = 0; i < n; ++i) g[i] = region[i].lo + unit(rng) * (region[i].hi - region[i].lo);
          bch_product_into(*group_, g, h, gh, scratch);
          const double a = f_(gh), b = f_(g);
          sum += use_split ? abs_pow(a - b, p_) - abs_pow(a, p_) : abs_pow(a - b, p_);
        }
        v = use_split ? lp_ + vol_s * sum / inner_points : vol_u * sum / inner_points;
        acc.split += use_split;
      }
      acc.sum += v;
      acc.sum2 += v * v;
    }
    partial[c] = acc;
  });
  Partial total;
  for (const auto& q : partial) {
    total.sum += q.sum;
    total.sum2 += q.sum2;
    total.disjoint += q.disjoint;
    total.split += q.split;
  }
  const double nd = static_cast<double>(paths);
  const double mean = total.sum / nd;
  const double var = std::max(0.0, total.sum2 / nd - mean * mean) * nd / std::max(1.0, nd - 1.0);
  const double se = std::sqrt(var / nd);
  return Estimate{mean,
                  se,
                  "MC",
                  {{"standard_error", se},
                   {"disjoint_fraction", static_cast<double>(total.disjoint) / nd},
                   {"split_fraction", static_cast<double>(total.split) / nd}},
                  {}};
}

Estimate bbm_energy(const ScalarField& f, double p, double t, const CarnotGroup& group, const DiffusionConfig& sampler,
                    InnerOptions opts) {
  if (group.step() == 1 && group.dim() == 1) return HeatDifference::euclidean_line(f, p).energy(t);
  DiffusionConfig cfg = sampler;
  cfg.t = t;
  cfg.h = std::min(cfg.h, t);
  const HeatDifference hd(group, f, p, sample_endpoints(group, cfg), opts);
  return hd.energy(t);
}

// ---------------------------------------------------------------------------

Estimate extrapolate_linear(const std::vector<double>& x, const std::vector<Estimate>& values) {
  const std::size_t n = x.size();
  if (n < 2 || values.size() != n) throw std::invalid_argument("extrapolate_linear: need at least two matching points");
  double sx = 0.0, sxx = 0.0;
  for (double v : x) {
    sx += v;
    sxx += v * v;
  }
  const double det = static_cast<double>(n) * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw std::invalid_argument("extrapolate_linear: abscissae must differ");
  double a = 0.0, b = 0.0, propagated = 0.0, c2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ca = (sxx - x[k] * sx) / det;
    const double cb = (static_cast<double>(n) * x[k] - sx) / det;
    a += ca * values[k].value;
    b += cb * values[k].value;
    propagated += std::abs(ca) * values[k].error;
    c2 += ca * ca;
  }
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = values[k].value - (a + b * x[k]);
    rss += r * r;
  }
  const double residual = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2)) : 0.0;
  const double residual_term = residual * std::sqrt(c2);
  Estimate e;
  e.value = a;
  e.error = propagated + residual_term;
  e.method = "extrapolation";
  e.breakdown = {{"propagated", propagated}, {"residual", residual_term}, {"slope", b}, {"residual_rms", residual}};
  for (const auto& v : values) e.sequence.push_back(v.value);
  return e;
}

namespace {

double safe_ratio(double value, double target) {
  if (target == 0.0) return value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return value / target;
}

void finish_report(LimitReport& r, const Estimate& target_error_source, double target_scale) {
  r.ratio = safe_ratio(r.limit.value, r.target);
  const double rel_target = target_error_source.value != 0.0 ? target_error_source.error / std::abs(target_error_source.value) : 0.0;
  r.ratio_error = r.target != 0.0 ? std::abs(r.ratio) * (r.limit.error / std::max(std::abs(r.limit.value), 1e-300) + rel_target)
                                  : 0.0;
  if (r.limit.value == 0.0) r.ratio_error = r.target != 0.0 ? r.limit.error / std::abs(r.target) : 0.0;
  r.residual_rms = r.limit.breakdown_value("residual_rms");
  (void)target_scale;
}

void check_grid(const std::vector<double>& g, bool increasing, const char* what) {
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    if (increasing ? !(g[k + 1] > g[k]) : !(g[k + 1] < g[k])) {
      throw std::invalid_argument(fmt::format("{} grid must be strictly {}", what, increasing ? "increasing" : "decreasing"));
    }
  }
}

}  // namespace

std::string LimitReport::to_csv() const {
  std::string out = "param,value,error,target,ratio\n";
  for (std::size_t k = 0; k < params.size(); ++k) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", params[k], values[k].value, values[k].error, target,
                       safe_ratio(values[k].value, target));
  }
  out += fmt::format("limit,{:.17g},{:.17g},{:.17g},{:.17g}\n", limit.value, limit.error, target, ratio);
  return out;
}

std::string LimitReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = name;
  j["param_name"] = param_name;
  j["params"] = params;
  nlohmann::json vals = nlohmann::json::array();
  for (const auto& v : values) {
    nlohmann::json e{{"value", v.value}, {"error", v.error}, {"method", v.method}};
    for (const auto& [k, b] : v.breakdown) e["breakdown"][k] = b;
    vals.push_back(e);
  }
  j["values"] = vals;
  j["limit"] = {{"value", limit.value}, {"error", limit.error}, {"sequence", limit.sequence}};
  for (const auto& [k, b] : limit.breakdown) j["limit"]["breakdown"][k] = b;
  j["target"] = target;
  j["ratio"] = ratio;
  j["ratio_error"] = ratio_error;
  j["residual_rms"] = residual_rms;
  j["flags"] = flags;
  return j.dump(2);
}

LimitReport bbm_limit(const HeatDifference& hd, const std::vector<double>& t_grid, const Estimate& gradient_norm) {
  if (t_grid.size() < 3) throw std::invalid_argument("bbm_limit: need at least three grid points");
  check_grid(t_grid, false, "t");
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    if (t_grid[k] / t_grid[k + 1] < 2.0 - 1e-12) throw std::invalid_argument("bbm_limit: grid ratio must be >= 2");
  }
  LimitReport r;
  r.name = "bbm";
  r.param_name = "t";
  r.params = t_grid;
  std::vector<double> x;
  for (double t : t_grid) {
    r.values.push_back(hd.energy(t));
    x.push_back(std::sqrt(t));
  }
  r.limit = extrapolate_linear(x, r.values);
  r.target = ledoux_constant(hd.p()) * gradient_norm.value;
  finish_report(r, gradient_norm, 1.0);
  double signal = 0.0, noise = 0.0;
  for (const auto& v : r.values) {
    signal = std::max(signal, std::abs(v.value - r.values.back().value));
    noise = std::max(noise, v.error);
  }
  if (signal < noise) r.flags.push_back("mc_error_exceeds_extrapolation_signal");
  return r;
}

DiffquotReport diffquot_bound_check(const HeatDifference& hd, const std::vector<double>& t_grid,
                                    const Estimate& gradient_norm) {
  DiffquotReport r;
  r.p = hd.p();
  r.constant = diffquot_constant(hd.p(), hd.horizontal_dim());
  r.bound = r.constant * gradient_norm.value;
  const double bound_err = r.constant * gradient_norm.error;
  for (double t : t_grid) {
    r.t.push_back(t);
    r.energy.push_back(hd.energy(t));
    if (r.energy.back().value - 3.0 * r.energy.back().error > r.bound + 3.0 * bound_err) ++r.violations;
  }
  return r;
}

std::vector<double> log_grid(double t_min, double t_max, int per_decade) {
  if (!(t_min > 0.0) || !(t_max > t_min) || per_decade < 1) throw std::invalid_argument("log_grid: invalid range");
  const double decades = std::log10(t_max / t_min);
  const int steps = std::max(1, static_cast<int>(std::lround(decades * per_decade)));
  std::vector<double> out;
  for (int k = 0; k <= steps; ++k) out.push_back(t_min * std::pow(10.0, decades * k / steps));
  out.back() = t_max;
  return out;
}

std::vector<double> default_bbm_grid() { return {2.5e-3, 1.25e-3, 6.25e-4}; }

std::vector<double> default_profile_grid(int homogeneous_dim) {
  std::vector<double> grid = default_bbm_grid();
  std::reverse(grid.begin(), grid.end());
  for (double t : log_grid(1e-2, homogeneous_dim <= 2 ? 1e4 : 1e2, 4)) grid.push_back(t);
  return grid;
}

PhiProfile phi_profile(const HeatDifference& hd, const std::vector<double>& t_grid,
                       std::optional<Estimate> small_t_constant) {
  if (t_grid.size() < 3) throw std::invalid_argument("phi_profile: need at least three grid points");
  check_grid(t_grid, true, "t");
  PhiProfile r;
  r.p = hd.p();
  r.t = t_grid;
  r.lp_norm_power = hd.lp_norm_power();
  r.decay_exponent = 0.5 * hd.homogeneous_dim();
  for (double t : t_grid) r.phi.push_back(hd.phi(t));
  if (small_t_constant) {
    r.small_t_constant = *small_t_constant;
  } else {
    std::vector<double> x;
    std::vector<Estimate> e;
    for (int k = 2; k >= 0; --k) {
      const double scale = std::pow(t_grid[k], -0.5 * r.p);
      x.push_back(std::sqrt(t_grid[k]));
      Estimate v = r.phi[k];
      v.value *= scale;
      v.error *= scale;
      e.push_back(v);
    }
    r.small_t_constant = extrapolate_linear(x, e);
  }
  const double inf = 2.0 * r.lp_norm_power;
  r.plateau_ratio = safe_ratio(r.phi.back().value, inf);
  r.small_t_ratio = safe_ratio(r.phi.front().value * std::pow(t_grid.front(), -0.5 * r.p), r.small_t_constant.value);
  if (std::abs(r.plateau_ratio - 1.0) > 0.02) r.flags.push_back("plateau_not_reached");
  if (std::abs(r.small_t_ratio - 1.0) > 0.05) r.flags.push_back("small_t_regime_not_reached");
  return r;
}

Estimate besov_seminorm(const PhiProfile& profile, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("besov_seminorm: s must lie in (0, 1)");
  const double p = profile.p;
  const double a = 0.5 * s * p;
  const std::size_t n = profile.t.size();
  const double t0 = profile.t.front(), t1 = profile.t.back();
  // Below t_min: Phi ~ c_f t^{p/2}.
  const double small_factor = std::pow(t0, 0.5 * (1.0 - s) * p) / (0.5 * (1.0 - s) * p);
  const double small = profile.small_t_constant.value * small_factor;
  const double small_err = profile.small_t_constant.error * small_factor;
  // Between the grid ends: integrate in u = log t.
  std::vector<double> u(n), phi(n);
  bool positive = true;
  for (std::size_t k = 0; k < n; ++k) {
    u[k] = std::log(profile.t[k]);
    phi[k] = profile.phi[k].value;
    positive = positive && phi[k] > 0.0;
  }
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = positive ? std::log(phi[k]) : phi[k];
  auto to_phi = [positive](double v) { return positive ? std::exp(v) : v; };
  boost::math::interpolators::pchip<std::vector<double>> shape{std::vector<double>(u), std::vector<double>(y)};
  constexpr int kSub = 64;
  double middle = 0.0, linear = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double du = (u[k + 1] - u[k]) / kSub;
    for (int j = 0; j <= kSub; ++j) {
      const double w = (j == 0 || j == kSub) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      const double uu = u[k] + j * du;
      const double lam = static_cast<double>(j) / kSub;
      const double weight = w * du / 3.0 * std::exp(-a * uu);
      middle += weight * to_phi(shape(uu));
      linear += weight * to_phi((1.0 - lam) * y[k] + lam * y[k + 1]);
    }
  }
  double mc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double left = k > 0 ? u[k] - u[k - 1] : 0.0;
    const double right = k + 1 < n ? u[k + 1] - u[k] : 0.0;
    mc += 0.5 * (left + right) * std::exp(-a * u[k]) * profile.phi[k].error;
  }
  const double interp = std::abs(middle - linear);
  // Above t_max: Phi -> 2 ||f||_p^p; the deviation is assumed to decay like t^{-decay}.
  const double inf = 2.0 * profile.lp_norm_power;
  const double tail = inf * std::pow(t1, -a) / a;
  const double decay = profile.decay_exponent;
  const double tail_model = std::abs(profile.phi.back().value - inf) * std::pow(t1, -a) / (a + decay) +
                            profile.phi.back().error * std::pow(t1, -a) / (a + decay);
  Estimate e;
  e.value = small + middle + tail;
  e.error = small_err + mc + interp + tail_model;
  e.method = "quadrature+MC";
  e.breakdown = {{"small_t", small},         {"middle", middle},       {"tail", tail},
                 {"small_t_constant", small_err}, {"mc", mc}, {"interpolation", interp},
                 {"tail_model", tail_model}};
  return e;
}

LimitReport bbm_seminorm_limit(const PhiProfile& profile, const std::vector<double>& s_grid,
                               const Estimate& gradient_norm) {
  if (s_grid.size() < 2) throw std::invalid_argument("bbm_seminorm_limit: need at least two s values");
  check_grid(s_grid, true, "s");
  LimitReport r;
  r.name = "besov_s_to_1";
  r.param_name = "s";
  r.params = s_grid;
  std::vector<double> x;
  for (double s : s_grid) {
    Estimate b = besov_seminorm(profile, s);
    b.value *= 1.0 - s;
    b.error *= 1.0 - s;
    for (auto& [k, v] : b.breakdown) v *= 1.0 - s;
    r.values.push_back(b);
    x.push_back(1.0 - s);
  }
  r.limit = extrapolate_linear(x, r.values);
  r.target = besov_constant(profile.p) * gradient_norm.value;
  finish_report(r, gradient_norm, 1.0);
  if (!profile.flags.empty()) r.flags = profile.flags;
  return r;
}

LimitReport ms_limit(const PhiProfile& profile, const std::vector<double>& s_grid) {
  if (s_grid.size() < 2) throw std::invalid_argument("ms_limit: need at least two s values");
  check_grid(s_grid, false, "s");
  LimitReport r;
  r.name = "ms_s_to_0";
  r.param_name = "s";
  r.params = s_grid;
  std::vector<double> x;
  for (double s : s_grid) {
    Estimate b = besov_seminorm(profile, s);
    b.value *= s;
    b.error *= s;
    for (auto& [k, v] : b.breakdown) v *= s;
    r.values.push_back(b);
    x.push_back(s);
  }
  r.limit = extrapolate_linear(x, r.values);
  r.target = 4.0 / profile.p * profile.lp_norm_power;
  finish_report(r, Estimate{profile.lp_norm_power, 0.0, "closed form", {}, {}}, 1.0);
  for (const auto& flag : profile.flags) {
    if (flag == "plateau_not_reached") r.flags.push_back(flag);
  }
  return r;
}

SandwichReport sandwich_check(const HeatDifference& hd, const PhiProfile& profile, const std::vector<double>& t_grid,
                              const std::vector<double>& s_grid) {
  if (t_grid.empty() || s_grid.empty()) throw std::invalid_argument("sandwich_check: empty grid");
  SandwichReport r;
  r.p = hd.p();
  r.s = s_grid;
  r.epsilon = *std::max_element(t_grid.begin(), t_grid.end());
  const double c = 2.0 / r.p;
  std::vector<Estimate> energy;
  for (double t : t_grid) energy.push_back(hd.energy(t));
  for (double s : s_grid) {
    Estimate b = besov_seminorm(profile, s);
    b.value *= 1.0 - s;
    b.error *= 1.0 - s;
    for (auto& [k, v] : b.breakdown) v *= 1.0 - s;
    r.besov.push_back(b);
  }
  auto by_value = [](const Estimate& a, const Estimate& b) { return a.value < b.value; };
  const auto emin = *std::min_element(energy.begin(), energy.end(), by_value);
  const auto emax = *std::max_element(energy.begin(), energy.end(), by_value);
  const auto bmin = *std::min_element(r.besov.begin(), r.besov.end(), by_value);
  const auto bmax = *std::max_element(r.besov.begin(), r.besov.end(), by_value);
  r.lower_bbm = c * emin.value;
  r.lower_besov = bmin.value;
  r.upper_besov = bmax.value;
  r.upper_bbm = c * emax.value;
  r.lower_error = c * emin.error + bmin.error;
  r.upper_error = c * emax.error + bmax.error;
  r.grid_lower_ok = r.lower_bbm <= r.lower_besov + r.lower_error;
  r.grid_upper_ok = r.upper_besov <= r.upper_bbm + r.upper_error;
  r.lower_ok = r.upper_ok = true;
  const double phi_sup = std::pow(2.0, r.p) * hd.lp_norm_power();
  for (std::size_t k = 0; k < s_grid.size(); ++k) {
    const double s = s_grid[k];
    const double shrink = std::pow(r.epsilon, 0.5 * r.p * (1.0 - s));
    const double tail = (1.0 - s) * 2.0 * phi_sup * std::pow(r.epsilon, -0.5 * s * r.p) / (s * r.p);
    r.lower_bound.push_back(c * emin.value * shrink);
    r.upper_bound.push_back(c * emax.value * shrink + tail);
    const Estimate& b = r.besov[k];
    if (r.lower_bound[k] > b.value + b.error + c * emin.error * shrink) r.lower_ok = false;
    if (b.value > r.upper_bound[k] + b.error + c * emax.error * shrink) r.upper_ok = false;
  }
  return r;
}

}  // namespace carnot
