#include "carnot/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "carnot/diffusion.hpp"
#include "carnot/group.hpp"
#include "carnot/heat_kernel.hpp"

namespace carnot {

std::string CriterionResult::line() const {
  return fmt::format("{} {:>2} {}: {}", passed() ? "PASS" : "FAIL", id, title, summary);
}

namespace {

ExperimentConfig derived(const ExperimentConfig& base, const std::string& group, const std::string& function = "") {
  ExperimentConfig c;
  c.group = group;
  c.function = function;
  c.seed = base.seed;
  c.threads = base.threads;
  return c;
}

double max_diff(const GroupPoint& a, const GroupPoint& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

GroupPoint random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  GroupPoint g(n);
  for (double& v : g) v = u(rng);
  return g;
}

void merge(CriterionResult& out, CommandResult r, const std::string& prefix, std::vector<std::string>& parts,
           bool prefix_summary = true) {
  out.table.append(r.table, prefix);
  parts.push_back(prefix_summary ? prefix + r.summary : r.summary);
}

void algebra_axioms(CriterionResult& out, const ExperimentConfig& base) {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(base.seed);
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  double overall = 0.0;
  for (const char* name : {"euclidean2", "h1", "free2_3", "engel"}) {
    const CarnotGroup G(catalog_algebra(name));
    const auto& s = G.stratification();
    double assoc = 0.0, dil = 0.0, gauge_err = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto g = random_point(rng, G.dim()), h = random_point(rng, G.dim()), k = random_point(rng, G.dim());
      assoc = std::max(assoc, max_diff(bch_product(bch_product(g, h, G), k, G), bch_product(g, bch_product(h, k, G), G)));
      const double l = lam(rng);
      dil = std::max(dil, max_diff(dilate(l, bch_product(g, h, G), s), bch_product(dilate(l, g, s), dilate(l, h, s), G)));
      gauge_err = std::max(gauge_err, std::abs(gauge(dilate(l, g, s), s) - l * gauge(g, s)));
    }
    out.table.add(fmt::format("{} associativity", name), assoc, 0.0, 0.0, 0.0, kTol);
    out.table.add(fmt::format("{} dilation automorphism", name), dil, 0.0, 0.0, 0.0, kTol);
    out.table.add(fmt::format("{} gauge homogeneity", name), gauge_err, 0.0, 0.0, 0.0, kTol);
    overall = std::max({overall, assoc, dil, gauge_err});
  }
  out.summary = fmt::format("4 groups x 1000 triples, max defect {:.2e} (tolerance 1e-12)", overall);
}

const KernelEngine& h1_engine() {
  static const KernelEngine engine{CarnotGroup(catalog_algebra("h1"))};
  return engine;
}

void explicit_kernel(CriterionResult& out) {
  const auto p = step2_kernel({0.0, 0.0, 0.0}, 1.0, h1_engine());
  const double rel = std::abs(p.value - 0.0625) / 0.0625;
  out.table.add("relative error of p(e,e,1) vs 1/16", rel, p.error / 0.0625, 0.0, 0.0, 1e-6);
  out.summary = fmt::format("p(e,e,1) = {:.12f}, relative error {:.2e}", p.value, rel);
}

void normalization_and_scaling(CriterionResult& out, const ExperimentConfig& base) {
  std::vector<std::string> parts;
  merge(out, run_normalization(derived(base, "h1")), "", parts);
  const auto& E = h1_engine();
  const auto& s = E.group().stratification();
  const double half_q = 0.5 * s.homogeneous_dim();
  std::mt19937_64 rng(base.seed + 3);
  std::uniform_real_distribution<double> ut(0.2, 3.0);
  int held = 0;
  for (int k = 0; k < 20; ++k) {
    const auto g = random_point(rng, 3);
    const double t = ut(rng);
    const auto p = E.evaluate(g, t);
    const auto q = E.evaluate(dilate(1.0 / std::sqrt(t), g, s), 1.0);
    const double scale = std::pow(t, -half_q);
    const double budget = p.error + scale * q.error + 1e-15;
    const double diff = std::abs(p.value - scale * q.value);
    out.table.add(fmt::format("scaling point {} t={:.4f}", k, t), diff, budget, 0.0, 0.0, budget);
    if (diff <= budget) ++held;
  }
  parts.push_back(fmt::format("scaling holds at {}/20 points", held));
  out.summary = fmt::format("{}", fmt::join(parts, "; "));
}

void kde_agreement(CriterionResult& out, const ExperimentConfig& base) {
  const auto& E = h1_engine();
  DiffusionConfig cfg;
  cfg.t = 1.0;
  cfg.h = 0.005;
  cfg.paths = 1000000;
  cfg.seed = base.seed;
  cfg.threads = base.threads;
  const auto samples = sample_endpoints(E.group(), cfg);
  double worst = 0.0;
  for (const GroupPoint& g : {GroupPoint{0, 0, 0}, GroupPoint{1, 0, 0}, GroupPoint{0, 0, 0.5}, GroupPoint{1, 1, 0.3},
                              GroupPoint{0.5, -0.5, -1}}) {
    const auto exact = step2_kernel(g, 1.0, E);
    const auto kde = kde_kernel_estimate(samples, g);
    const double combined = kde.error + exact.error;
    const double diff = std::abs(kde.value - exact.value);
    out.table.add(fmt::format("|kde - quadrature| at ({};{};{})", g[0], g[1], g[2]), diff, combined, 0.0, 0.0,
                  3.0 * combined);
    out.table.add_info(fmt::format("kde at ({};{};{})", g[0], g[1], g[2]), kde.value, kde.error, exact.value);
    worst = std::max(worst, diff / combined);
  }
  out.summary = fmt::format("5 points, n=1e6, h=0.005: worst |kde - quadrature| = {:.2f} combined errors", worst);
}

const char* kTitles[kCriterionCount] = {
    "algebra axioms",
    "explicit kernel value",
    "normalization and scaling",
    "decoupling (quadrature)",
    "decoupling (Monte Carlo, Engel)",
    "Ledoux constants",
    "Huisken identity",
    "BBM limit p=2",
    "BBM limit p=1",
    "uniform difference-quotient bound",
    "Besov limit s -> 1",
    "Maz'ya-Shaposhnikova limit s -> 0",
    "sandwich chain",
    "cross-engine agreement",
};

}  // namespace

CriterionResult run_criterion(int id, const ExperimentConfig& base) {
  if (id < 1 || id > kCriterionCount) throw ConfigError(fmt::format("no acceptance criterion {}", id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult out;
  out.id = id;
  out.title = kTitles[id - 1];
  std::vector<std::string> parts;
  auto join_parts = [&] { out.summary = fmt::format("{}", fmt::join(parts, "; ")); };
  switch (id) {
    case 1:
      algebra_axioms(out, base);
      break;
    case 2:
      explicit_kernel(out);
      break;
    case 3:
      normalization_and_scaling(out, base);
      break;
    case 4:
      merge(out, run_decoupling(derived(base, "h1")), "", parts);
      join_parts();
      break;
    case 5: {
      auto c = derived(base, "engel");
      c.paths = 100000;
      merge(out, run_marginal_test(c), "", parts);
      join_parts();
      break;
    }
    case 6:
      for (const char* g : {"h1", "engel"}) merge(out, run_ledoux(derived(base, g)), fmt::format("{} ", g), parts, false);
      join_parts();
      break;
    case 7:
      for (const char* g : {"h1", "engel"}) merge(out, run_huisken(derived(base, g)), fmt::format("{} ", g), parts, false);
      join_parts();
      break;
    case 8: {
      auto c = derived(base, "h1", "h1_bump");
      c.p = {2.0};
      merge(out, run_bbm_limit(c), "", parts);
      auto line = derived(base, "euclidean1", "r1_bump");
      line.p = {2.0};
      line.t_grid = {4e-6, 2e-6, 1e-6};
      line.tolerance = 1e-4;
      merge(out, run_bbm_limit(line), "", parts);
      join_parts();
      break;
    }
    case 9: {
      auto c = derived(base, "h1", "h1_bump");
      c.p = {1.0};
      merge(out, run_bbm_limit(c), "", parts);
      join_parts();
      break;
    }
    case 10:
      for (const char* f : {"h1_bump", "h1_sigma"}) merge(out, run_diffquot(derived(base, "h1", f)), "", parts);
      join_parts();
      break;
    case 11: {
      auto c = derived(base, "h1", "h1_bump");
      c.p = {2.0};
      merge(out, run_besov(c), "", parts);
      join_parts();
      break;
    }
    case 12:
      for (const char* f : {"h1_bump", "r1_bump"}) {
        auto c = derived(base, "", f);
        c.p = {1.0, 2.0};
        merge(out, run_ms_limit(c), "", parts);
      }
      join_parts();
      break;
    case 13: {
      auto c = derived(base, "", "all");
      c.p = {1.0, 2.0};
      merge(out, run_sandwich(c), "", parts);
      join_parts();
      break;
    }
    case 14:
      kde_agreement(out, base);
      break;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<CriterionResult> run_acceptance(const ExperimentConfig& base,
                                            const std::function<void(const CriterionResult&)>& progress) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kCriterionCount; ++id) {
    results.push_back(run_criterion(id, base));
    if (progress) progress(results.back());
  }
  return results;
}

CheckTable acceptance_table(const std::vector<CriterionResult>& results) {
  CheckTable t;
  for (const auto& r : results) t.append(r.table, fmt::format("C{} ", r.id));
  return t;
}

nlohmann::json acceptance_json(const std::vector<CriterionResult>& results) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : results) {
    out.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed()}, {"summary", r.summary},
                   {"seconds", r.seconds}});
  }
  return out;
}

}  // namespace carnot
