#include "carnot/algebra.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace carnot {

Stratification::Stratification(std::vector<int> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.empty()) throw std::invalid_argument("stratification needs at least one layer");
  int layer = 1;
  for (int m : dims_) {
    if (m < 1) throw std::invalid_argument("layer dimensions must be positive");
    offsets_.push_back(total_);
    total_ += m;
    homogeneous_ += layer * m;
    weights_.insert(weights_.end(), m, layer);
    ++layer;
  }
}

StructureConstants::StructureConstants(Stratification strat, std::vector<BracketTerm> terms,
                                       bool complete_antisymmetry)
    : strat_(std::move(strat)) {
  const int n = strat_.total_dim();
  std::map<std::tuple<int, int, int>, Rational> merged;
  std::set<std::pair<int, int>> given;
  for (const BracketTerm& t : terms) {
    if (t.left < 0 || t.left >= n || t.right < 0 || t.right >= n || t.out < 0 || t.out >= n) {
      throw std::out_of_range("bracket term index outside the algebra");
    }
    merged[{t.left, t.right, t.out}] += t.coeff;
    given.emplace(t.left, t.right);
  }
  if (complete_antisymmetry) {
    std::vector<std::pair<std::tuple<int, int, int>, Rational>> mirrored;
    for (const auto& [key, c] : merged) {
      const auto [a, b, o] = key;
      if (a != b && !given.contains({b, a})) mirrored.push_back({{b, a, o}, -c});
    }
    for (const auto& [key, c] : mirrored) merged[key] += c;
  }
  for (const auto& [key, c] : merged) {
    if (c.is_zero()) continue;
    const auto [a, b, o] = key;
    terms_.push_back({a, b, o, c});
    values_.push_back(c.to_double());
  }
}

std::vector<Rational> StructureConstants::bracket(std::span<const Rational> x,
                                                  std::span<const Rational> y) const {
  const auto n = static_cast<std::size_t>(strat_.total_dim());
  if (x.size() != n || y.size() != n) throw std::invalid_argument("bracket: dimension mismatch");
  std::vector<Rational> out(n);
  for (const BracketTerm& t : terms_) {
    if (x[t.left].is_zero() || y[t.right].is_zero()) continue;
    out[t.out] += t.coeff * x[t.left] * y[t.right];
  }
  return out;
}

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

std::string basis_label(const Stratification& s, int k) {
  const int layer = s.layer_of(k);
  return fmt::format("e({},{})", layer, k - s.offset(layer) + 1);
}

std::vector<Rational> unit(int n, int k) {
  std::vector<Rational> v(n);
  v[k] = Rational(1);
  return v;
}

// Rank of a set of rational row vectors by fraction-exact elimination.
int rational_rank(std::vector<std::vector<Rational>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  int rank = 0;
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    int pivot = -1;
    for (int r = rank; r < static_cast<int>(rows.size()); ++r) {
      if (!rows[r][c].is_zero()) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (r == rank || rows[r][c].is_zero()) continue;
      const Rational f = rows[r][c] / rows[rank][c];
      for (std::size_t k = c; k < cols; ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

ValidationReport validate_algebra(const StructureConstants& sc) {
  const Stratification& s = sc.stratification();
  const int n = s.total_dim();
  const int r = s.step();
  ValidationReport report;

  // Dense basis bracket table.
  std::vector<std::vector<std::vector<Rational>>> table(n, std::vector<std::vector<Rational>>(n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) table[a][b] = sc.bracket(unit(n, a), unit(n, b));
  }

  {
    ValidationCheck c{"antisymmetry", true, ""};
    for (int a = 0; a < n && c.passed; ++a) {
      for (int b = a; b < n && c.passed; ++b) {
        for (int k = 0; k < n; ++k) {
          if (table[a][b][k] + table[b][a][k] != Rational(0)) {
            c.passed = false;
            c.detail = fmt::format("[{},{}] + [{},{}] has component {} on {}", basis_label(s, a),
                                   basis_label(s, b), basis_label(s, b), basis_label(s, a),
                                   (table[a][b][k] + table[b][a][k]).str(), basis_label(s, k));
            break;
          }
        }
      }
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"grading", true, ""};
    for (const BracketTerm& t : sc.terms()) {
      const int u = s.layer_of(t.left), v = s.layer_of(t.right), w = s.layer_of(t.out);
      if (u + v > r || w != u + v) {
        c.passed = false;
        c.detail = fmt::format("[{},{}] has a component on {} (layer {}, expected {})", basis_label(s, t.left),
                               basis_label(s, t.right), basis_label(s, t.out), w,
                               u + v > r ? std::string("none") : std::to_string(u + v));
        break;
      }
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"jacobi", true, ""};
    auto bracket_dense = [&](int a, const std::vector<Rational>& v) {
      std::vector<Rational> out(n);
      for (int k = 0; k < n; ++k) {
        if (v[k].is_zero()) continue;
        for (int o = 0; o < n; ++o) out[o] += v[k] * table[a][k][o];
      }
      return out;
    };
    for (int a = 0; a < n && c.passed; ++a) {
      for (int b = 0; b < n && c.passed; ++b) {
        for (int d = 0; d < n && c.passed; ++d) {
          const auto x = bracket_dense(a, table[b][d]);
          const auto y = bracket_dense(b, table[d][a]);
          const auto z = bracket_dense(d, table[a][b]);
          for (int o = 0; o < n; ++o) {
            if (x[o] + y[o] + z[o] != Rational(0)) {
              c.passed = false;
              c.detail = fmt::format("cyclic sum over ({},{},{}) has component {} on {}", basis_label(s, a),
                                     basis_label(s, b), basis_label(s, d), (x[o] + y[o] + z[o]).str(),
                                     basis_label(s, o));
              break;
            }
          }
        }
      }
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c{"generation", true, ""};
    for (int j = 1; j < r && c.passed; ++j) {
      const int off = s.offset(j + 1), m = s.dim(j + 1);
      std::vector<std::vector<Rational>> rows;
      for (int i = 0; i < s.dim(1); ++i) {
        for (int k = s.offset(j); k < s.offset(j) + s.dim(j); ++k) {
          const auto& v = table[i][k];
          rows.emplace_back(v.begin() + off, v.begin() + off + m);
        }
      }
      const int rank = rational_rank(std::move(rows));
      if (rank != m) {
        c.passed = false;
        c.detail = fmt::format("[g1,g{}] spans rank {} of g{} (dimension {})", j, rank, j + 1, m);
      }
    }
    report.checks.push_back(c);
  }
  return report;
}

GroupDefinition euclidean_algebra(int n) {
  if (n < 1) throw std::invalid_argument("euclidean dimension must be positive");
  return {fmt::format("euclidean{}", n), StructureConstants(Stratification({n}), {})};
}

GroupDefinition heisenberg_algebra(int n) {
  if (n < 1) throw std::invalid_argument("heisenberg dimension must be positive");
  std::vector<BracketTerm> terms;
  for (int i = 0; i < n; ++i) terms.push_back({i, n + i, 2 * n, Rational(1)});
  return {fmt::format("h{}", n), StructureConstants(Stratification({2 * n, 1}), std::move(terms))};
}

GroupDefinition free_step2_algebra(int generators) {
  const int m = generators;
  if (m < 2) throw std::invalid_argument("free step-2 algebra needs at least two generators");
  std::vector<BracketTerm> terms;
  int out = m;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) terms.push_back({i, j, out++, Rational(1)});
  }
  return {fmt::format("free2_{}", m), StructureConstants(Stratification({m, m * (m - 1) / 2}), std::move(terms))};
}

GroupDefinition engel_algebra() {
  std::vector<BracketTerm> terms{{0, 1, 2, Rational(1)}, {0, 2, 3, Rational(1)}};
  return {"engel", StructureConstants(Stratification({2, 1, 1}), std::move(terms))};
}

GroupDefinition filiform_algebra(int step) {
  if (step < 2) throw std::invalid_argument("filiform algebra needs step >= 2");
  std::vector<int> dims(step, 1);
  dims[0] = 2;
  std::vector<BracketTerm> terms;
  for (int k = 1; k < step; ++k) terms.push_back({0, k, k + 1, Rational(1)});
  return {fmt::format("filiform{}", step), StructureConstants(Stratification(dims), std::move(terms))};
}

namespace {

int parse_suffix(const std::string& name, std::size_t prefix_len) {
  const std::string rest = name.substr(prefix_len);
  if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("unknown group: " + name);
  }
  return std::stoi(rest);
}

}  // namespace

GroupDefinition catalog_algebra(const std::string& name) {
  if (name == "engel") return engel_algebra();
  if (name.starts_with("euclidean")) return euclidean_algebra(parse_suffix(name, 9));
  if (name.starts_with("free2_")) return free_step2_algebra(parse_suffix(name, 6));
  if (name.starts_with("filiform")) return filiform_algebra(parse_suffix(name, 8));
  if (name.starts_with("h")) return heisenberg_algebra(parse_suffix(name, 1));
  if (name.starts_with("r")) return euclidean_algebra(parse_suffix(name, 1));
  throw std::invalid_argument("unknown group: " + name);
}

std::vector<std::string> catalog_names() {
  return {"euclidean1", "euclidean2", "h1", "free2_3", "engel"};
}

GroupDefinition parse_group_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("group file is not valid JSON: ") + e.what());
  }
  try {
    GroupDefinition def;
    def.name = doc.at("name").get<std::string>();
    Stratification strat(doc.at("layers").get<std::vector<int>>());
    auto global = [&](const json& pair, const char* what) {
      const auto li = pair.get<std::vector<int>>();
      if (li.size() != 2) throw std::invalid_argument(fmt::format("{}: expected [layer, index]", what));
      const int layer = li[0], index = li[1];
      if (layer < 1 || layer > strat.step() || index < 1 || index > strat.dim(layer)) {
        throw std::invalid_argument(fmt::format("{}: basis [{},{}] does not exist", what, layer, index));
      }
      return std::pair{layer, strat.offset(layer) + index - 1};
    };
    std::vector<BracketTerm> terms;
    for (const json& entry : doc.value("brackets", json::array())) {
      const auto [u, a] = global(entry.at("left"), "left");
      const auto [v, b] = global(entry.at("right"), "right");
      for (const json& o : entry.at("out")) {
        const auto [w, c] = global(o.at("basis"), "basis");
        if (w != u + v) {
          throw std::invalid_argument(
              fmt::format("bracket of layers {} and {} cannot land in layer {}", u, v, w));
        }
        const json& cj = o.at("coeff");
        const Rational coeff = cj.is_string() ? Rational::parse(cj.get<std::string>())
                                              : Rational(cj.get<std::int64_t>());
        terms.push_back({a, b, c, coeff});
      }
    }
    def.constants = StructureConstants(std::move(strat), std::move(terms));
    return def;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed group file: ") + e.what());
  }
}

GroupDefinition load_group_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open group file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_group_json(ss.str());
}

std::string to_group_json(const GroupDefinition& def) {
  using nlohmann::json;
  const Stratification& s = def.constants.stratification();
  auto label = [&](int k) {
    const int layer = s.layer_of(k);
    return json::array({layer, k - s.offset(layer) + 1});
  };
  std::map<std::pair<int, int>, json> grouped;
  for (const BracketTerm& t : def.constants.terms()) {
    if (t.left >= t.right) continue;
    grouped[{t.left, t.right}].push_back({{"basis", label(t.out)}, {"coeff", t.coeff.str()}});
  }
  json brackets = json::array();
  for (const auto& [key, out] : grouped) {
    brackets.push_back({{"left", label(key.first)}, {"right", label(key.second)}, {"out", out}});
  }
  json doc{{"name", def.name}, {"layers", s.layer_dims()}, {"brackets", brackets}};
  return doc.dump(2);
}

}  // namespace carnot
