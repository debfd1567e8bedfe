#include "carnot/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <tuple>

#include <fmt/format.h>

#include "carnot/diffusion.hpp"
#include "carnot/heat_kernel.hpp"
#include "carnot/testfns.hpp"

namespace carnot {

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["group"] = group;
  j["function"] = function;
  j["p"] = p;
  j["t_grid"] = t_grid;
  j["s_grid"] = s_grid;
  j["point"] = point;
  j["paths"] = paths;
  j["step_size"] = step_size;
  j["seed"] = seed;
  j["threads"] = threads;
  j["tolerance"] = tolerance ? nlohmann::json(*tolerance) : nlohmann::json(nullptr);
  j["out"] = out;
  return j;
}

namespace {

std::vector<double> number_list(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(fmt::format("config key '{}' must be a number or an array of numbers", key));
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(fmt::format("config key '{}' must contain numbers only", key));
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    auto need = [&](bool ok, const char* what) {
      if (!ok) throw ConfigError(fmt::format("config key '{}' must be {}", key, what));
    };
    if (key == "group") {
      need(v.is_string(), "a string");
      c.group = v.get<std::string>();
    } else if (key == "function") {
      need(v.is_string(), "a string");
      c.function = v.get<std::string>();
    } else if (key == "p") {
      c.p = number_list(v, key);
    } else if (key == "t_grid") {
      c.t_grid = number_list(v, key);
    } else if (key == "s_grid") {
      c.s_grid = number_list(v, key);
    } else if (key == "point") {
      c.point = number_list(v, key);
    } else if (key == "paths") {
      need(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), "a nonnegative integer");
      c.paths = v.get<std::size_t>();
    } else if (key == "step_size") {
      need(v.is_number(), "a number");
      c.step_size = v.get<double>();
    } else if (key == "seed") {
      need(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), "a nonnegative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "threads") {
      need(v.is_number_integer(), "an integer");
      c.threads = v.get<int>();
    } else if (key == "tolerance") {
      need(v.is_number() || v.is_null(), "a number");
      if (v.is_number()) c.tolerance = v.get<double>();
    } else if (key == "out") {
      need(v.is_string(), "a string");
      c.out = v.get<std::string>();
    } else {
      throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
  }
  return c;
}

GroupDefinition resolve_group(const std::string& spec) {
  if (spec.empty()) throw ConfigError("no group given");
  try {
    if (std::filesystem::is_regular_file(spec)) return load_group_file(spec);
    return catalog_algebra(spec);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("cannot resolve group '{}': {}", spec, e.what()));
  }
}

std::vector<std::vector<double>> decoupling_grid(int m) {
  std::vector<std::vector<double>> grid;
  for (int k = 0; k <= 20; ++k) {
    std::vector<double> z(m, 0.0);
    z[0] = -3.0 + 0.3 * k;
    if (m > 1) z[1] = -3.0 + 0.3 * ((8 * k) % 21);
    grid.push_back(z);
  }
  return grid;
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Defaults {
  std::size_t paths;
  double h;
};

void validate_common(const ExperimentConfig& c) {
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.step_size < 0.0) throw ConfigError("step size must be positive");
  if (c.tolerance && !(*c.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  for (double p : c.p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError(fmt::format("p = {} must be finite and >= 1", p));
  }
  for (double t : c.t_grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("t-grid values must be positive");
  }
  for (double s : c.s_grid) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("s-grid values must lie in (0, 1)");
  }
}

std::string group_spec(const ExperimentConfig& c, const std::string& fallback) {
  return c.group.empty() ? fallback : c.group;
}

DiffusionConfig sampler(const ExperimentConfig& c, Defaults d, double t) {
  DiffusionConfig cfg;
  cfg.t = t;
  cfg.h = c.step_size > 0.0 ? c.step_size : d.h;
  cfg.h = std::min(cfg.h, t);
  cfg.paths = c.paths > 0 ? c.paths : d.paths;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  return cfg;
}

SampleSet sample(const CarnotGroup& g, const DiffusionConfig& cfg) {
  try {
    return sample_endpoints(g, cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// Endpoint sets and profiles are memoized so acceptance criteria can share them.
using SampleKey = std::tuple<std::string, double, double, std::size_t, std::uint64_t>;
std::map<SampleKey, std::shared_ptr<const SampleSet>>& sample_cache() {
  static std::map<SampleKey, std::shared_ptr<const SampleSet>> cache;
  return cache;
}

std::shared_ptr<const SampleSet> cached_samples(const CarnotGroup& g, const DiffusionConfig& cfg) {
  const SampleKey key{g.name(), cfg.t, cfg.h, cfg.paths, cfg.seed};
  auto& cache = sample_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto s = std::make_shared<const SampleSet>(sample(g, cfg));
  cache.emplace(key, s);
  return s;
}

const CatalogEntry& resolve_function(const ExperimentConfig& c, const std::string& fallback_group) {
  std::string name = c.function;
  if (name.empty()) name = group_spec(c, fallback_group) + "_bump";
  const CatalogEntry* entry = nullptr;
  try {
    entry = &catalog_function(name);
  } catch (const std::invalid_argument&) {
    throw ConfigError(fmt::format("unknown function '{}' (known: {})", name, fmt::join(catalog_function_names(), ", ")));
  }
  if (!c.group.empty() && resolve_group(c.group).name != catalog_algebra(entry->group).name) {
    throw ConfigError(fmt::format("function '{}' lives on group '{}', not '{}'", name, entry->group, c.group));
  }
  return *entry;
}

Estimate gradient_norm(const CatalogEntry& e, const CarnotGroup& g, double p) {
  if (auto closed = e.gradient_norm_power(p)) return Estimate{*closed, 0.0, "closed form", {}, {}};
  return sobolev_energy(e.field, p, horizontal_frame(g));
}

HeatDifference make_difference(const CatalogEntry& e, const CarnotGroup& g, double p, const ExperimentConfig& c,
                               Defaults d) {
  if (g.dim() == 1) return HeatDifference::euclidean_line(e.field, p, e.lp_norm_power(p));
  const auto samples = cached_samples(g, sampler(c, d, 1.0));
  InnerOptions inner;
  inner.seed = c.seed + 1;
  inner.threads = c.threads;
  return HeatDifference(g, e.field, p, *samples, inner, e.lp_norm_power(p));
}

using ProfileKey = std::tuple<std::string, double, std::vector<double>, std::size_t, double, std::uint64_t>;
std::map<ProfileKey, PhiProfile>& profile_cache() {
  static std::map<ProfileKey, PhiProfile> cache;
  return cache;
}

std::vector<double> profile_grid(const ExperimentConfig& c, const CarnotGroup& g) {
  return c.t_grid.empty() ? default_profile_grid(g.stratification().homogeneous_dim()) : c.t_grid;
}

const PhiProfile& cached_profile(const CatalogEntry& e, const CarnotGroup& g, double p, const ExperimentConfig& c,
                                 Defaults d, const HeatDifference& hd) {
  const auto grid = profile_grid(c, g);
  const auto cfg = sampler(c, d, 1.0);
  const ProfileKey key{e.name, p, grid, g.dim() == 1 ? 0 : cfg.paths, g.dim() == 1 ? 0.0 : cfg.h, cfg.seed};
  auto& cache = profile_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  try {
    return cache.emplace(key, phi_profile(hd, grid)).first->second;
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
}

std::string fmt_point(std::span<const double> x) { return fmt::format("({})", fmt::join(x, ";")); }

void add_limit(CommandResult& r, const LimitReport& rep) {
  r.limits.push_back(rep);
  r.extra["limits"].push_back(nlohmann::json::parse(rep.to_json()));
}

std::vector<double> with_default(const std::vector<double>& v, std::vector<double> d) { return v.empty() ? d : v; }

constexpr Defaults kStatDefaults{100000, 0.02};
constexpr Defaults kLedouxDefaults{1000000, 0.02};
constexpr Defaults kFunctionalDefaults{400000, 0.01};
constexpr Defaults kSandwichDefaults{100000, 0.01};

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate-group", "kernel-eval", "normalization", "decoupling",
                                              "marginal-test",  "ledoux",      "huisken",       "bbm-limit",
                                              "besov",          "ms-limit",    "sandwich",      "diffquot"};
  return names;
}

CommandResult run_command(const std::string& name, const ExperimentConfig& config) {
  validate_common(config);
  if (name == "validate-group") return run_validate_group(config);
  if (name == "kernel-eval") return run_kernel_eval(config);
  if (name == "normalization") return run_normalization(config);
  if (name == "decoupling") return run_decoupling(config);
  if (name == "marginal-test") return run_marginal_test(config);
  if (name == "ledoux") return run_ledoux(config);
  if (name == "huisken") return run_huisken(config);
  if (name == "bbm-limit") return run_bbm_limit(config);
  if (name == "besov") return run_besov(config);
  if (name == "ms-limit") return run_ms_limit(config);
  if (name == "sandwich") return run_sandwich(config);
  if (name == "diffquot") return run_diffquot(config);
  throw ConfigError(fmt::format("unknown command '{}'", name));
}

CommandResult run_validate_group(const ExperimentConfig& config) {
  if (config.group.empty()) throw ConfigError("validate-group needs a group file or catalog name");
  const auto def = resolve_group(config.group);
  CommandResult r;
  const auto report = validate_algebra(def.constants);
  for (const auto& c : report.checks) r.table.add_verdict(c.name, c.passed);
  const auto& strat = def.constants.stratification();
  r.table.add_info("dimension", strat.total_dim());
  r.table.add_info("step", strat.step());
  r.table.add_info("homogeneous_dimension", strat.homogeneous_dim());
  r.extra["group"] = def.name;
  r.summary = fmt::format("group {}: layers ({}), Q = {}, {}", def.name, fmt::join(strat.layer_dims(), ", "),
                          strat.homogeneous_dim(), report.ok() ? "valid" : "invalid");
  return r;
}

namespace {

KernelEngine make_engine(const CarnotGroup& g, KernelQuadrature q = {}) {
  try {
    return KernelEngine(g, q);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

CommandResult run_kernel_eval(const ExperimentConfig& config) {
  const CarnotGroup g(resolve_group(group_spec(config, "h1")));
  const GroupPoint x = config.point.empty() ? GroupPoint(g.dim(), 0.0) : GroupPoint(config.point);
  if (static_cast<int>(x.size()) != g.dim()) {
    throw ConfigError(fmt::format("point has {} coordinates, group {} has {}", x.size(), g.name(), g.dim()));
  }
  const auto engine = make_engine(g);
  CommandResult r;
  std::vector<std::string> parts;
  for (double t : with_default(config.t_grid, {1.0})) {
    const auto p = engine.evaluate(x, t);
    const std::string name = fmt::format("p{} t={}", fmt_point(x), t);
    r.table.add_info(name, p.value, p.error);
    r.table.add_verdict(name + " finite and nonnegative", std::isfinite(p.value) && p.value >= -p.error, p.value,
                        p.error);
    r.extra["records"].push_back(nlohmann::json::parse(kernel_record_json(g.name(), x, t, p)));
    parts.push_back(fmt::format("t={} value {:.12g} error {:.3g}", t, p.value, p.error));
  }
  r.summary = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CommandResult run_normalization(const ExperimentConfig& config) {
  const CarnotGroup g(resolve_group(group_spec(config, "h1")));
  const auto engine = make_engine(g);
  const double tol = config.tolerance.value_or(1e-4);
  CommandResult r;
  double worst = 0.0;
  for (double t : with_default(config.t_grid, {0.25, 1.0, 4.0})) {
    const auto n = kernel_normalization(engine, t);
    r.table.add(fmt::format("integral of p(.,e,{})", t), n.value, n.error, 1.0, 1.0 - tol, 1.0 + tol);
    worst = std::max(worst, std::abs(n.value - 1.0));
  }
  r.summary = fmt::format("max |integral - 1| = {:.3g} (tolerance {:.0e})", worst, tol);
  return r;
}

CommandResult run_decoupling(const ExperimentConfig& config) {
  const CarnotGroup g(resolve_group(group_spec(config, "h1")));
  const auto engine = make_engine(g);
  const double t = config.t_grid.empty() ? 1.0 : config.t_grid.front();
  const double tol = config.tolerance.value_or(1e-5);
  CommandResult r;
  double worst = 0.0;
  for (auto z : decoupling_grid(g.stratification().horizontal_dim())) {
    for (double& v : z) v *= std::sqrt(t);
    const auto m = decoupling_marginal(engine, z, t);
    const double gauss = euclidean_kernel(z, t);
    const double dev = std::abs(m.value - gauss);
    worst = std::max(worst, dev);
    r.table.add(fmt::format("|marginal - gaussian| at z={}", fmt_point(z)), dev, m.error, 0.0, 0.0, tol);
  }
  r.table.add_info("max deviation", worst);
  r.summary = fmt::format("max deviation over 21 points = {:.3g} (tolerance {:.0e})", worst, tol);
  return r;
}

CommandResult run_marginal_test(const ExperimentConfig& config) {
  const CarnotGroup g(resolve_group(group_spec(config, "engel")));
  const double t = config.t_grid.empty() ? 1.0 : config.t_grid.front();
  const auto samples = cached_samples(g, sampler(config, kStatDefaults, t));
  const auto rep = marginal_gaussian_test(*samples, t);
  const int m = g.stratification().horizontal_dim();
  CommandResult r;
  for (int i = 0; i < m; ++i) {
    const double se = rep.mean_se[i];
    r.table.add(fmt::format("mean z{}", i + 1), rep.mean[i], se, 0.0, -3 * se, 3 * se);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double target = i == j ? 2.0 * t : 0.0;
      const double se = rep.cov_se[i * m + j];
      r.table.add(fmt::format("cov z{} z{}", i + 1, j + 1), rep.cov[i * m + j], se, target, target - 3 * se,
                  target + 3 * se);
    }
  }
  for (int i = 0; i < m; ++i) {
    r.table.add(fmt::format("KS z{}", i + 1), rep.ks[i], 0.0, 0.0, 0.0, rep.ks_threshold);
    r.table.add_info(fmt::format("fourth moment ratio z{}", i + 1), rep.fourth_moment_ratio[i],
                     rep.fourth_moment_se[i], 1.0);
  }
  r.extra["endpoints"] = nlohmann::json::parse(endpoints_metadata_json(*samples));
  r.summary = fmt::format("{} n={} t={}: mean {}, covariance {}, KS {} (max {:.4f} vs {:.4f})", g.name(), rep.n, t,
                          rep.mean_ok ? "ok" : "FAIL", rep.cov_ok ? "ok" : "FAIL", rep.ks_ok ? "ok" : "FAIL",
                          *std::max_element(rep.ks.begin(), rep.ks.end()), rep.ks_threshold);
  return r;
}

CommandResult run_ledoux(const ExperimentConfig& config) {
  const CarnotGroup g(resolve_group(group_spec(config, "h1")));
  const double t = config.t_grid.empty() ? 1.0 : config.t_grid.front();
  const auto samples = cached_samples(g, sampler(config, kLedouxDefaults, t));
  const int m = g.stratification().horizontal_dim();
  const bool full = samples->size() >= 1000000;
  CommandResult r;
  double worst = 0.0, worst_rel_se = 0.0;
  for (double p : with_default(config.p, {1.0, 2.0, 3.0})) {
    const double c = ledoux_constant(p);
    double rel_se = 0.0;
    for (int k = 0; k < 8; ++k) {
      std::vector<double> nu(m, 0.0);
      nu[0] = std::cos(kPi * k / 8.0);
      if (m > 1) nu[1] = std::sin(kPi * k / 8.0);
      const auto e = ledoux_statistic(*samples, nu, p, t);
      r.table.add(fmt::format("p={} direction {}", p, k), e.value, e.error, c, c - 3 * e.error, c + 3 * e.error);
      worst = std::max(worst, std::abs(e.value - c) / e.error);
      rel_se = std::max(rel_se, e.error / c);
    }
    if (full) {
      r.table.add(fmt::format("p={} relative SE", p), rel_se, 0.0, 0.0, 0.0, 0.005);
    } else {
      r.table.add_info(fmt::format("p={} relative SE", p), rel_se);
    }
    worst_rel_se = std::max(worst_rel_se, rel_se);
  }
  r.summary = fmt::format("{} n={}: worst |stat - constant| = {:.2f} SE, max relative SE {:.4f}", g.name(),
                          samples->size(), worst, worst_rel_se);
  return r;
}

CommandResult run_huisken(const ExperimentConfig& config) {
  const CarnotGroup g(resolve_group(group_spec(config, "h1")));
  const int m = g.stratification().horizontal_dim();
  std::vector<double> nu(m, 0.0);
  nu[0] = 1.0;
  CommandResult r;
  double worst = 0.0;
  for (double t : with_default(config.t_grid, {0.5, 1.0})) {
    const auto samples = cached_samples(g, sampler(config, kLedouxDefaults, t));
    const auto e = huisken_statistic(*samples, nu, t);
    r.table.add(fmt::format("sqrt(4 pi t) density at 0, t={}", t), e.value, e.error, 1.0, 1.0 - 3 * e.error,
                1.0 + 3 * e.error);
    r.table.add_info(fmt::format("standard error t={}", t), e.breakdown_value("standard_error"));
    r.table.add_info(fmt::format("bias bound t={}", t), e.breakdown_value("bias"));
    worst = std::max(worst, std::abs(e.value - 1.0) / e.error);
  }
  r.summary = fmt::format("{}: worst |value - 1| = {:.2f} (SE + bias)", g.name(), worst);
  return r;
}

CommandResult run_bbm_limit(const ExperimentConfig& config) {
  const auto& e = resolve_function(config, "h1");
  const CarnotGroup g(catalog_algebra(e.group));
  const auto grid = with_default(config.t_grid, default_bbm_grid());
  CommandResult r;
  std::vector<std::string> parts;
  for (double p : with_default(config.p, {2.0})) {
    const double tol = config.tolerance.value_or(p == 2.0 ? 0.02 : 0.03);
    const auto hd = make_difference(e, g, p, config, kFunctionalDefaults);
    LimitReport rep;
    try {
      rep = bbm_limit(hd, grid, gradient_norm(e, g, p));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
    r.table.add(fmt::format("{} p={} limit ratio", e.name, p), rep.ratio, rep.ratio_error, 1.0, 1.0 - tol, 1.0 + tol);
    r.table.add_info(fmt::format("{} p={} residual rms", e.name, p), rep.residual_rms);
    for (const auto& f : rep.flags) r.table.add_info(fmt::format("{} p={} flag {}", e.name, p, f), 1.0);
    parts.push_back(fmt::format("{} p={}: ratio {:.5f} +- {:.5f}", e.name, p, rep.ratio, rep.ratio_error));
    add_limit(r, rep);
  }
  r.summary = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CommandResult run_besov(const ExperimentConfig& config) {
  const auto& e = resolve_function(config, "h1");
  const CarnotGroup g(catalog_algebra(e.group));
  const auto s_grid = with_default(config.s_grid, {0.9, 0.95, 0.975, 0.99});
  const int m = g.stratification().horizontal_dim();
  CommandResult r;
  std::vector<std::string> parts;
  for (double p : with_default(config.p, {2.0})) {
    const double tol = config.tolerance.value_or(0.05);
    const auto hd = make_difference(e, g, p, config, kFunctionalDefaults);
    const auto& prof = cached_profile(e, g, p, config, kFunctionalDefaults, hd);
    const auto grad = gradient_norm(e, g, p);
    LimitReport rep;
    try {
      rep = bbm_seminorm_limit(prof, s_grid, grad);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
    const std::string tag = fmt::format("{} p={}", e.name, p);
    r.table.add(tag + " (1-s) N^p limit ratio", rep.ratio, rep.ratio_error, 1.0, 1.0 - tol, 1.0 + tol);
    const auto& last = rep.values.back();
    for (const char* src : {"small_t_constant", "mc", "interpolation", "tail_model"}) {
      r.table.add_info(fmt::format("{} error source {} at s={}", tag, src, s_grid.back()), last.breakdown_value(src));
    }
    r.table.add_info(tag + " extrapolation residual rms", rep.residual_rms);
    const double cp = diffquot_constant(p, m);
    for (double s : s_grid) {
      const auto n = besov_seminorm(prof, s);
      const double bound = 2.0 * cp / (p * (1.0 - s)) * grad.value + std::pow(2.0, p + 1) / (s * p) * prof.lp_norm_power;
      r.table.add(fmt::format("{} embedding bound s={}", tag, s), n.value - n.error, n.error, bound, 0.0, bound);
    }
    for (const auto& f : rep.flags) r.table.add_info(fmt::format("{} flag {}", tag, f), 1.0);
    parts.push_back(fmt::format("{}: ratio {:.5f} +- {:.5f}", tag, rep.ratio, rep.ratio_error));
    add_limit(r, rep);
  }
  r.summary = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CommandResult run_ms_limit(const ExperimentConfig& config) {
  const auto& e = resolve_function(config, "h1");
  const CarnotGroup g(catalog_algebra(e.group));
  const auto s_grid = with_default(config.s_grid, {0.1, 0.05, 0.02, 0.01});
  CommandResult r;
  std::vector<std::string> parts;
  for (double p : with_default(config.p, {1.0, 2.0})) {
    const double tol = config.tolerance.value_or(0.02);
    const auto hd = make_difference(e, g, p, config, kFunctionalDefaults);
    const auto& prof = cached_profile(e, g, p, config, kFunctionalDefaults, hd);
    LimitReport rep;
    try {
      rep = ms_limit(prof, s_grid);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
    const std::string tag = fmt::format("{} p={}", e.name, p);
    const auto& v = rep.values.back();
    const double ratio = v.value / rep.target;
    r.table.add(fmt::format("{} s N^p ratio at s={}", tag, s_grid.back()), ratio, v.error / rep.target, 1.0,
                1.0 - tol, 1.0 + tol);
    r.table.add_info(tag + " extrapolated s -> 0 ratio", rep.ratio, rep.ratio_error, 1.0);
    for (const auto& f : rep.flags) r.table.add_info(fmt::format("{} flag {}", tag, f), 1.0);
    parts.push_back(fmt::format("{}: ratio at s={} {:.5f}, extrapolated {:.5f}", tag, s_grid.back(), ratio, rep.ratio));
    add_limit(r, rep);
  }
  r.summary = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

CommandResult run_sandwich(const ExperimentConfig& config) {
  std::vector<const CatalogEntry*> entries;
  if (config.function == "all") {
    for (const auto& e : function_catalog()) {
      if (config.group.empty() || resolve_group(config.group).name == catalog_algebra(e.group).name) entries.push_back(&e);
    }
  } else {
    entries.push_back(&resolve_function(config, "h1"));
  }
  const auto s_grid = with_default(config.s_grid, {0.9, 0.95, 0.975, 0.99});
  CommandResult r;
  int failures = 0, total = 0;
  for (const auto* e : entries) {
    const CarnotGroup g(catalog_algebra(e->group));
    for (double p : with_default(config.p, {1.0, 2.0})) {
      const auto hd = make_difference(*e, g, p, config, kSandwichDefaults);
      const auto& prof = cached_profile(*e, g, p, config, kSandwichDefaults, hd);
      const auto rep = sandwich_check(hd, prof, default_bbm_grid(), s_grid);
      const std::string tag = fmt::format("{} p={}", e->name, p);
      double lower = 0.0, upper = 0.0;
      for (std::size_t k = 0; k < s_grid.size(); ++k) {
        const double b = rep.besov[k].value;
        lower = std::max(lower, b > 0.0 ? rep.lower_bound[k] / b : 0.0);
        upper = std::max(upper, rep.upper_bound[k] > 0.0 ? b / rep.upper_bound[k] : 0.0);
      }
      r.table.add_verdict(tag + " lower chain (max lower bound / (1-s) N^p)", rep.lower_ok, lower, 0.0, 1.0);
      r.table.add_verdict(tag + " upper chain (max (1-s) N^p / upper bound)", rep.upper_ok, upper, 0.0, 1.0);
      r.table.add_info(tag + " grid chain lower (2/p) min E", rep.lower_bbm, rep.lower_error, rep.lower_besov);
      r.table.add_info(tag + " grid chain upper (2/p) max E", rep.upper_bbm, rep.upper_error, rep.upper_besov);
      r.table.add_info(tag + " grid chain holds", rep.grid_lower_ok && rep.grid_upper_ok ? 1.0 : 0.0);
      ++total;
      if (!rep.ok()) ++failures;
    }
  }
  r.summary = fmt::format("sandwich chain holds on {}/{} (function, p) pairs", total - failures, total);
  return r;
}

CommandResult run_diffquot(const ExperimentConfig& config) {
  const auto& e = resolve_function(config, "h1");
  const CarnotGroup g(catalog_algebra(e.group));
  const auto grid = with_default(config.t_grid, log_grid(1e-3, 1e2, 2));
  CommandResult r;
  std::vector<std::string> parts;
  for (double p : with_default(config.p, {1.0, 2.0})) {
    const auto hd = make_difference(e, g, p, config, kFunctionalDefaults);
    const auto rep = diffquot_bound_check(hd, grid, gradient_norm(e, g, p));
    const std::string tag = fmt::format("{} p={}", e.name, p);
    double worst = 0.0;
    for (const auto& v : rep.energy) worst = std::max(worst, rep.bound > 0.0 ? v.value / rep.bound : 0.0);
    r.table.add(tag + " violations", rep.violations, 0.0, 0.0, 0.0, 0.0);
    r.table.add_info(tag + " max E(t) / (C_p ||grad f||^p)", worst);
    r.table.add_info(tag + " C_p", rep.constant);
    parts.push_back(fmt::format("{}: C_p={:.5f}, max E/bound {:.4f}, {} violations", tag, rep.constant, worst,
                                rep.violations));
  }
  r.summary = fmt::format("{}", fmt::join(parts, "; "));
  return r;
}

}  // namespace carnot
