#pragma once
/// @file simplex_poly.hpp
/// @brief Exact-coefficient polynomials on the standard k-simplex
///        {t_i >= 0, sum t_i <= 1} and exact integration of their monomials.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"

namespace monorun {

inline constexpr unsigned kMaxSimplexDim = 8;

/// Exponent tuple packed one byte per variable.
using MonomialKey = std::uint64_t;

inline unsigned exponent(MonomialKey key, unsigned var) { return static_cast<unsigned>((key >> (8 * var)) & 0xff); }

inline MonomialKey make_key(std::span<const unsigned> exps) {
  MonomialKey key = 0;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] > 255) fail(ErrorKind::usage, "monomial exponent exceeds 255");
    key |= static_cast<MonomialKey>(exps[i]) << (8 * i);
  }
  return key;
}

inline unsigned total_degree(MonomialKey key, unsigned k) {
  unsigned d = 0;
  for (unsigned i = 0; i < k; ++i) d += exponent(key, i);
  return d;
}

/// Integral over the k-simplex of prod t_i^{a_i} = (prod a_i!) / (k + sum a_i)!.
inline Rational simplex_monomial_integral(unsigned k, std::span<const unsigned> exps) {
  if (exps.size() != k) fail(ErrorKind::usage, "simplex_monomial_integral: exponent count != k");
  Int num = 1;
  unsigned total = 0;
  for (unsigned a : exps) {
    num *= factorial(a);
    total += a;
  }
  Rational r(num, factorial(k + total));
  r.canonicalize();
  return r;
}

inline Rational simplex_monomial_integral(unsigned k, MonomialKey key) {
  std::vector<unsigned> e(k);
  for (unsigned i = 0; i < k; ++i) e[i] = exponent(key, i);
  return simplex_monomial_integral(k, e);
}

/// Caches monomial integrals for one dimension.
class MonomialIntegrals {
 public:
  explicit MonomialIntegrals(unsigned k) : k_(k) {}
  const Rational& operator()(MonomialKey key) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, simplex_monomial_integral(k_, key)).first->second;
  }

 private:
  unsigned k_;
  std::unordered_map<MonomialKey, Rational> cache_;
};

class SimplexPolynomial {
 public:
  explicit SimplexPolynomial(unsigned k = 1) : k_(k) {
    if (k > kMaxSimplexDim) fail(ErrorKind::usage, "SimplexPolynomial: dimension above 8");
  }

  static SimplexPolynomial constant(unsigned k, const Rational& c) {
    SimplexPolynomial p(k);
    p.add_term(0, c);
    return p;
  }

  static SimplexPolynomial variable(unsigned k, unsigned i) {
    if (i >= k) fail(ErrorKind::usage, "SimplexPolynomial::variable: index out of range");
    SimplexPolynomial p(k);
    p.add_term(MonomialKey{1} << (8 * i), Rational(1));
    return p;
  }

  /// 1 - (t_1 + ... + t_k).
  static SimplexPolynomial one_minus_sum(unsigned k) {
    SimplexPolynomial p = constant(k, 1);
    for (unsigned i = 0; i < k; ++i) p -= variable(k, i);
    return p;
  }

  unsigned dim() const noexcept { return k_; }
  const std::map<MonomialKey, Rational>& terms() const noexcept { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(MonomialKey key, const Rational& c) {
    if (sgn(c) == 0) return;
    auto [it, inserted] = terms_.emplace(key, c);
    if (!inserted) {
      it->second += c;
      if (sgn(it->second) == 0) terms_.erase(it);
    }
  }

  void add_term(std::span<const unsigned> exps, const Rational& c) {
    if (exps.size() != k_) fail(ErrorKind::usage, "add_term: exponent count != k");
    add_term(make_key(exps), c);
  }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [key, c] : terms_) d = std::max(d, total_degree(key, k_));
    return d;
  }

  SimplexPolynomial& operator+=(const SimplexPolynomial& o) {
    check_dim(o);
    for (const auto& [key, c] : o.terms_) add_term(key, c);
    return *this;
  }
  SimplexPolynomial& operator-=(const SimplexPolynomial& o) {
    check_dim(o);
    for (const auto& [key, c] : o.terms_) add_term(key, -c);
    return *this;
  }
  SimplexPolynomial& operator*=(const Rational& s) {
    if (sgn(s) == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [key, c] : terms_) c *= s;
    return *this;
  }

  friend SimplexPolynomial operator+(SimplexPolynomial a, const SimplexPolynomial& b) { return a += b; }
  friend SimplexPolynomial operator-(SimplexPolynomial a, const SimplexPolynomial& b) { return a -= b; }
  friend SimplexPolynomial operator*(SimplexPolynomial a, const Rational& s) { return a *= s; }

  friend SimplexPolynomial operator*(const SimplexPolynomial& a, const SimplexPolynomial& b) {
    a.check_dim(b);
    SimplexPolynomial r(a.k_);
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) r.add_term(ka + kb, ca * cb);
    return r;
  }

  SimplexPolynomial pow(unsigned n) const {
    SimplexPolynomial r = constant(k_, 1);
    for (unsigned i = 0; i < n; ++i) r = r * *this;
    return r;
  }

  bool operator==(const SimplexPolynomial& o) const { return k_ == o.k_ && terms_ == o.terms_; }

  /// Exact value; zero outside the simplex.
  Rational evaluate(std::span<const Rational> t) const {
    if (t.size() != k_) fail(ErrorKind::usage, "evaluate: point dimension != k");
    Rational s = 0;
    for (const auto& x : t) {
      if (sgn(x) < 0) return 0;
      s += x;
    }
    if (s > 1) return 0;
    Rational v = 0;
    for (const auto& [key, c] : terms_) {
      Rational m = c;
      for (unsigned i = 0; i < k_; ++i)
        for (unsigned e = exponent(key, i); e > 0; --e) m *= t[i];
      v += m;
    }
    return v;
  }

  /// Floating-point value; zero outside the simplex.
  double evaluate(std::span<const double> t) const {
    if (t.size() != k_) fail(ErrorKind::usage, "evaluate: point dimension != k");
    double s = 0;
    for (double x : t) {
      if (x < 0) return 0;
      s += x;
    }
    if (s > 1) return 0;
    double v = 0;
    for (const auto& [key, c] : terms_) {
      double m = c.get_d();
      for (unsigned i = 0; i < k_; ++i)
        for (unsigned e = exponent(key, i); e > 0; --e) m *= t[i];
      v += m;
    }
    return v;
  }

  /// Exact integral over the k-simplex.
  Rational integrate() const {
    MonomialIntegrals ints(k_);
    Rational s = 0;
    for (const auto& [key, c] : terms_) s += c * ints(key);
    return s;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [key, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += "(" + c.get_str() + ")";
      for (unsigned i = 0; i < k_; ++i)
        if (unsigned e = exponent(key, i); e > 0) s += "*t" + std::to_string(i + 1) + (e > 1 ? "^" + std::to_string(e) : "");
    }
    return s;
  }

 private:
  void check_dim(const SimplexPolynomial& o) const {
    if (o.k_ != k_) fail(ErrorKind::usage, "SimplexPolynomial: dimension mismatch");
  }

  unsigned k_;
  std::map<MonomialKey, Rational> terms_;
};

/// Exact integral of the product P * Q over the simplex, without forming P * Q.
inline Rational integrate_product(const SimplexPolynomial& P, const SimplexPolynomial& Q, MonomialIntegrals& ints) {
  if (P.dim() != Q.dim()) fail(ErrorKind::usage, "integrate_product: dimension mismatch");
  Rational total = 0, inner = 0;
  for (const auto& [ka, ca] : P.terms()) {
    inner = 0;
    for (const auto& [kb, cb] : Q.terms()) inner += cb * ints(ka + kb);
    total += ca * inner;
  }
  return total;
}

}  // namespace monorun
