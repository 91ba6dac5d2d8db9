#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/format.hpp"
#include "cmt/matrix.hpp"

namespace cmt {

/// Stored coefficients with magnitude below this are dropped.
inline constexpr double prune_tolerance = 1e-14;

/// Dense exponent vector, one entry per variable.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t nvars) : exponents_(nvars, 0) {}
  Monomial(std::initializer_list<int> e) : exponents_(e) { check(); }
  explicit Monomial(std::vector<int> e) : exponents_(std::move(e)) { check(); }

  static Monomial unit(std::size_t nvars, std::size_t var) {
    Monomial m(nvars);
    m.exponents_[var] = 1;
    return m;
  }

  std::size_t nvars() const noexcept { return exponents_.size(); }
  int operator[](std::size_t i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const noexcept { return exponents_; }

  int degree() const {
    return std::accumulate(exponents_.begin(), exponents_.end(), 0);
  }

  Monomial operator*(const Monomial& o) const {
    Monomial r = *this;
    for (std::size_t i = 0; i < exponents_.size(); ++i)
      r.exponents_[i] += o.exponents_[i];
    return r;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  void check() const {
    for (int e : exponents_)
      if (e < 0)
        throw Error("poly", ErrorKind::invalid_argument, "negative exponent");
  }

  std::vector<int> exponents_;
};

/// Graded ordering: lower total degree first; within a degree the larger
/// leading exponent comes first (x^2, x*y, y^2).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.degree();
    const int db = b.degree();
    if (da != db) return da < db;
    return std::lexicographical_compare(
        b.exponents().begin(), b.exponents().end(), a.exponents().begin(),
        a.exponents().end());
  }
};

enum class Parity { even, odd, neither };

inline const char* to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    case Parity::neither: return "neither";
  }
  return "neither";
}

class Polynomial {
 public:
  using Terms = std::map<Monomial, double, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Monomial(nvars), c);
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t var,
                             double coefficient = 1.0) {
    if (var >= nvars)
      throw Error("poly", ErrorKind::invalid_argument,
                  "variable index " + std::to_string(var) + " out of range");
    Polynomial p(nvars);
    p.add_term(Monomial::unit(nvars, var), coefficient);
    return p;
  }

  std::size_t nvars() const noexcept { return nvars_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }

  double coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  /// Adds `c` to the coefficient of `m`, pruning the entry if it cancels.
  void add_term(const Monomial& m, double c) {
    if (m.nvars() != nvars_)
      throw Error("poly", ErrorKind::dimension_mismatch,
                  "monomial has " + std::to_string(m.nvars()) +
                      " exponents, polynomial has " + std::to_string(nvars_) +
                      " variables");
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) < prune_tolerance) terms_.erase(it);
  }

  void set_term(const Monomial& m, double c) {
    terms_.erase(m);
    add_term(m, c);
  }

  /// Highest total degree; -1 for the zero polynomial.
  int degree() const {
    return terms_.empty() ? -1 : terms_.rbegin()->first.degree();
  }

  /// Lowest total degree present; -1 for the zero polynomial.
  int min_degree() const {
    return terms_.empty() ? -1 : terms_.begin()->first.degree();
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  Polynomial homogeneous_part(int d) const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_)
      if (m.degree() == d) r.terms_.emplace(m, c);
    return r;
  }

  double evaluate(std::span<const double> x) const {
    if (x.size() != nvars_)
      throw Error("poly", ErrorKind::dimension_mismatch,
                  "evaluation point has wrong length");
    double sum = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = c;
      for (std::size_t i = 0; i < nvars_; ++i)
        for (int k = 0; k < m[i]; ++k) t *= x[i];
      sum += t;
    }
    return sum;
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  Polynomial& operator+=(const Polynomial& q) {
    require_same_space(q);
    for (const auto& [m, c] : q.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& q) {
    require_same_space(q);
    for (const auto& [m, c] : q.terms_) add_term(m, -c);
    return *this;
  }

  Polynomial& operator*=(double s) {
    Terms out;
    for (const auto& [m, c] : terms_)
      if (std::abs(c * s) >= prune_tolerance) out.emplace(m, c * s);
    terms_ = std::move(out);
    return *this;
  }

  friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }
  friend Polynomial operator*(Polynomial p, double s) { return p *= s; }
  friend Polynomial operator*(double s, Polynomial p) { return p *= s; }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  void require_same_space(const Polynomial& q) const {
    if (q.nvars_ != nvars_)
      throw Error("poly", ErrorKind::dimension_mismatch,
                  "polynomials over " + std::to_string(nvars_) + " and " +
                      std::to_string(q.nvars_) + " variables");
  }

 private:
  friend Polynomial multiply(const Polynomial&, const Polynomial&, int);

  std::size_t nvars_ = 0;
  Terms terms_;
};

/// Product, dropping every term above `max_degree` when it is non-negative.
inline Polynomial multiply(const Polynomial& p, const Polynomial& q,
                           int max_degree = -1) {
  p.require_same_space(q);
  std::map<Monomial, double, GradedLexLess> acc;
  for (const auto& [mp, cp] : p.terms_) {
    const int dp = mp.degree();
    for (const auto& [mq, cq] : q.terms_) {
      if (max_degree >= 0 && dp + mq.degree() > max_degree) continue;
      acc[mp * mq] += cp * cq;
    }
  }
  Polynomial r(p.nvars());
  for (auto& [m, c] : acc)
    if (std::abs(c) >= prune_tolerance) r.terms_.emplace(m, c);
  return r;
}

inline Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  return multiply(p, q);
}

inline Polynomial poly_add(const Polynomial& p, const Polynomial& q) {
  return p + q;
}

inline Polynomial poly_mul(const Polynomial& p, const Polynomial& q) {
  return p * q;
}

inline Polynomial power(const Polynomial& p, int e, int max_degree = -1) {
  if (e < 0)
    throw Error("poly", ErrorKind::invalid_argument, "negative power");
  Polynomial result = Polynomial::constant(p.nvars(), 1.0);
  Polynomial base = p;
  while (e > 0) {
    if (e & 1) result = multiply(result, base, max_degree);
    e >>= 1;
    if (e > 0) base = multiply(base, base, max_degree);
  }
  return result;
}

inline Polynomial poly_truncate(const Polynomial& p, int max_degree) {
  if (max_degree < 0)
    throw Error("poly", ErrorKind::invalid_argument, "negative truncation degree");
  Polynomial r(p.nvars());
  for (const auto& [m, c] : p.terms())
    if (m.degree() <= max_degree) r.add_term(m, c);
  return r;
}

/// Drops every term of total degree below `min_degree`.
inline Polynomial drop_below(const Polynomial& p, int min_degree) {
  Polynomial r(p.nvars());
  for (const auto& [m, c] : p.terms())
    if (m.degree() >= min_degree) r.add_term(m, c);
  return r;
}

inline Polynomial poly_partial(const Polynomial& p, std::size_t var) {
  if (var >= p.nvars())
    throw Error("poly", ErrorKind::invalid_argument,
                "derivative variable " + std::to_string(var) + " out of range");
  Polynomial r(p.nvars());
  for (const auto& [m, c] : p.terms()) {
    if (m[var] == 0) continue;
    auto e = m.exponents();
    const int k = e[var]--;
    r.add_term(Monomial(std::move(e)), c * k);
  }
  return r;
}

/// Full composition: variable i of `p` is replaced by `images[i]`. All images
/// live in one common target space. A non-negative `max_degree` truncates
/// intermediate products, which is exact because degrees only add.
inline Polynomial compose(const Polynomial& p,
                          std::span<const Polynomial> images,
                          int max_degree = -1) {
  if (images.size() != p.nvars())
    throw Error("poly", ErrorKind::dimension_mismatch,
                "composition needs one image per variable");
  const std::size_t target = images.empty() ? 0 : images.front().nvars();
  for (const auto& img : images)
    if (img.nvars() != target)
      throw Error("poly", ErrorKind::dimension_mismatch,
                  "substituted polynomials live in different spaces");
  if (images.empty()) {
    return p.is_zero() ? Polynomial(0)
                       : Polynomial::constant(0, p.coefficient(Monomial(0)));
  }

  // powers[i][k] = images[i]^k, filled lazily
  std::vector<std::vector<Polynomial>> powers(p.nvars());
  auto pow_of = [&](std::size_t i, int k) -> const Polynomial& {
    auto& cache = powers[i];
    if (cache.empty()) cache.push_back(Polynomial::constant(target, 1.0));
    while (static_cast<int>(cache.size()) <= k)
      cache.push_back(multiply(cache.back(), images[i], max_degree));
    return cache[k];
  };

  Polynomial result(target);
  for (const auto& [m, c] : p.terms()) {
    Polynomial term = Polynomial::constant(target, c);
    for (std::size_t i = 0; i < p.nvars(); ++i)
      if (m[i] > 0) term = multiply(term, pow_of(i, m[i]), max_degree);
    result += term;
  }
  return result;
}

/// Replaces the listed variables by polynomials over a common target space;
/// unlisted variables map to the same-index variable of the target space.
inline Polynomial poly_substitute(const Polynomial& p,
                                  const std::map<std::size_t, Polynomial>& subs,
                                  int max_degree = -1) {
  if (subs.empty()) return p;
  const std::size_t target = subs.begin()->second.nvars();
  std::vector<Polynomial> images;
  images.reserve(p.nvars());
  for (std::size_t i = 0; i < p.nvars(); ++i) {
    auto it = subs.find(i);
    if (it != subs.end()) {
      if (it->second.nvars() != target)
        throw Error("poly", ErrorKind::dimension_mismatch,
                    "substituted polynomials live in different spaces");
      images.push_back(it->second);
    } else {
      if (i >= target)
        throw Error("poly", ErrorKind::dimension_mismatch,
                    "variable " + std::to_string(i) +
                        " is not substituted and has no counterpart in the "
                        "target space");
      images.push_back(Polynomial::variable(target, i));
    }
  }
  for (const auto& [var, q] : subs)
    if (var >= p.nvars())
      throw Error("poly", ErrorKind::invalid_argument,
                  "substitution for unknown variable " + std::to_string(var));
  return compose(p, images, max_degree);
}

/// Evaluates `p` at x = M·u; the result lives in M's column space.
inline Polynomial poly_compose_linear(const Polynomial& p, const Matrix& m) {
  if (m.rows() != p.nvars())
    throw Error("poly", ErrorKind::dimension_mismatch,
                "linear map has " + std::to_string(m.rows()) +
                    " rows for a polynomial in " + std::to_string(p.nvars()) +
                    " variables");
  std::vector<Polynomial> images;
  images.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Polynomial row(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
      row.add_term(Monomial::unit(m.cols(), j), m(i, j));
    images.push_back(std::move(row));
  }
  return compose(p, images);
}

inline Parity parity(const Polynomial& p) {
  bool any_even = false;
  bool any_odd = false;
  for (const auto& [m, c] : p.terms()) (m.degree() % 2 == 0 ? any_even : any_odd) = true;
  if (any_even && any_odd) return Parity::neither;
  return any_odd ? Parity::odd : Parity::even;
}

/// Canonical text: graded order, `*` between factors, `^` for powers.
inline std::string render(const Polynomial& p,
                          std::span<const std::string> names) {
  if (names.size() != p.nvars())
    throw Error("poly", ErrorKind::dimension_mismatch,
                "wrong number of variable names for rendering");
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    const bool negative = c < 0;
    const double mag = negative ? -c : c;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;

    std::string factors;
    for (std::size_t i = 0; i < m.nvars(); ++i) {
      if (m[i] == 0) continue;
      if (!factors.empty()) factors += "*";
      factors += names[i];
      if (m[i] > 1) factors += "^" + std::to_string(m[i]);
    }
    if (factors.empty()) {
      out += format_shortest(mag);
    } else if (mag == 1.0) {
      out += factors;
    } else {
      out += format_shortest(mag) + "*" + factors;
    }
  }
  return out;
}

inline std::vector<std::string> default_names(std::size_t n,
                                              const std::string& stem = "x") {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(stem + std::to_string(i + 1));
  return names;
}

/// A vector of polynomials over one shared variable space.
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(std::size_t components, std::size_t nvars)
      : nvars_(nvars), components_(components, Polynomial(nvars)) {}
  explicit PolyMap(std::vector<Polynomial> components)
      : components_(std::move(components)) {
    if (!components_.empty()) nvars_ = components_.front().nvars();
    for (const auto& c : components_)
      if (c.nvars() != nvars_)
        throw Error("poly", ErrorKind::dimension_mismatch,
                    "map components over different variable spaces");
  }

  std::size_t nvars() const noexcept { return nvars_; }
  std::size_t size() const noexcept { return components_.size(); }
  Polynomial& operator[](std::size_t i) { return components_[i]; }
  const Polynomial& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<Polynomial>& components() const noexcept { return components_; }
  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  bool is_zero() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const Polynomial& p) { return p.is_zero(); });
  }

  int degree() const {
    int d = -1;
    for (const auto& c : components_) d = std::max(d, c.degree());
    return d;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs_coefficient());
    return m;
  }

  std::vector<double> evaluate(std::span<const double> x) const {
    std::vector<double> y;
    y.reserve(components_.size());
    for (const auto& c : components_) y.push_back(c.evaluate(x));
    return y;
  }

  friend bool operator==(const PolyMap&, const PolyMap&) = default;

 private:
  std::size_t nvars_ = 0;
  std::vector<Polynomial> components_;
};

inline PolyMap poly_truncate(const PolyMap& f, int max_degree) {
  std::vector<Polynomial> out;
  for (const auto& c : f) out.push_back(poly_truncate(c, max_degree));
  PolyMap r(std::move(out));
  return f.size() == 0 ? PolyMap(0, f.nvars()) : r;
}

inline PolyMap compose(const PolyMap& f, std::span<const Polynomial> images,
                       int max_degree = -1) {
  std::vector<Polynomial> out;
  for (const auto& c : f) out.push_back(compose(c, images, max_degree));
  if (out.empty())
    return PolyMap(0, images.empty() ? 0 : images.front().nvars());
  return PolyMap(std::move(out));
}

inline Parity parity(const PolyMap& f) {
  bool any_even = false;
  bool any_odd = false;
  for (const auto& c : f) {
    switch (parity(c)) {
      case Parity::even:
        if (!c.is_zero()) any_even = true;
        break;
      case Parity::odd: any_odd = true; break;
      case Parity::neither: return Parity::neither;
    }
  }
  if (any_even && any_odd) return Parity::neither;
  return any_odd ? Parity::odd : Parity::even;
}

}  // namespace cmt
