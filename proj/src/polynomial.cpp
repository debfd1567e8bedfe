#include "carnot/polynomial.hpp"

#include <sstream>
#include <stdexcept>

namespace carnot {

namespace {

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("polynomials over different variable counts");
}

}  // namespace

Polynomial::Polynomial(std::size_t nvars, const Rational& c) : nvars_(nvars) {
  if (!c.is_zero()) terms_.emplace(Monomial(nvars, 0), c);
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
  if (index >= nvars) throw std::out_of_range("polynomial variable index");
  Polynomial p(nvars);
  Monomial m(nvars, 0);
  m[index] = 1;
  p.terms_.emplace(std::move(m), Rational(1));
  return p;
}

void Polynomial::add_term(const Monomial& mono, const Rational& c) {
  if (mono.size() != nvars_) throw std::invalid_argument("monomial arity mismatch");
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(mono, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_same(nvars_, o.nvars_);
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  check_same(nvars_, o.nvars_);
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  check_same(a.nvars_, b.nvars_);
  Polynomial out(a.nvars_);
  Monomial m(a.nvars_);
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      for (std::size_t k = 0; k < m.size(); ++k) m[k] = ma[k] + mb[k];
      out.add_term(m, ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial d = m;
    d[var] -= 1;
    out.add_term(d, c * Rational(m[var]));
  }
  return out;
}

Polynomial Polynomial::coefficient_of(std::size_t var, int power) const {
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] != power) continue;
    Monomial d = m;
    d[var] = 0;
    out.add_term(d, c);
  }
  return out;
}

Polynomial Polynomial::truncated(int max_degree) const {
  Polynomial out(nvars_);
  for (const auto& [m, c] : terms_) {
    int deg = 0;
    for (int e : m) deg += e;
    if (deg <= max_degree) out.terms_.emplace(m, c);
  }
  return out;
}

std::vector<int> Polynomial::weighted_degrees(std::span<const int> weight) const {
  if (weight.size() != nvars_) throw std::invalid_argument("weight arity mismatch");
  std::vector<int> out;
  out.reserve(terms_.size());
  for (const auto& [m, c] : terms_) {
    int deg = 0;
    for (std::size_t k = 0; k < nvars_; ++k) deg += weight[k] * m[k];
    out.push_back(deg);
  }
  return out;
}

int Polynomial::max_variable() const {
  int best = -1;
  for (const auto& [m, c] : terms_) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] != 0 && static_cast<int>(k) > best) best = static_cast<int>(k);
    }
  }
  return best;
}

Polynomial Polynomial::restricted(std::size_t nvars) const {
  if (max_variable() >= static_cast<int>(nvars)) {
    throw std::invalid_argument("cannot restrict polynomial: dropped variable in use");
  }
  Polynomial out(nvars);
  for (const auto& [m, c] : terms_) out.terms_.emplace(Monomial(m.begin(), m.begin() + nvars), c);
  return out;
}

double Polynomial::evaluate(std::span<const double> x) const {
  return CompiledPolynomial(*this)(x);
}

std::string Polynomial::str(std::span<const std::string> names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.str() << ")";
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] == 0) continue;
      os << "*" << (k < names.size() ? names[k] : "x" + std::to_string(k));
      if (m[k] > 1) os << "^" << m[k];
    }
  }
  return os.str();
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) {
  offsets_.push_back(0);
  for (const auto& [m, c] : p.terms()) {
    coeffs_.push_back(c.to_double());
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] != 0) factors_.push_back({static_cast<int>(k), m[k]});
    }
    offsets_.push_back(factors_.size());
  }
}

double CompiledPolynomial::operator()(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < coeffs_.size(); ++t) {
    double term = coeffs_[t];
    for (std::size_t f = offsets_[t]; f < offsets_[t + 1]; ++f) {
      const double v = x[factors_[f].var];
      for (int e = 0; e < factors_[f].power; ++e) term *= v;
    }
    sum += term;
  }
  return sum;
}

}  // namespace carnot
