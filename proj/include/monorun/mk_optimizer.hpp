#pragma once
/// @file mk_optimizer.hpp
/// @brief The functionals I_k, J_k^{(m)} on simplex polynomials and certified
///        lower bounds for M_k = sup sum_m J_k^{(m)}(F) / I_k(F).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "simplex_poly.hpp"

namespace monorun {

/// I_k(F): integral of F^2 over the simplex.
inline Rational I_functional(const SimplexPolynomial& F) {
  MonomialIntegrals ints(F.dim());
  return integrate_product(F, F, ints);
}

namespace detail {

inline MonomialKey drop_variable(MonomialKey key, unsigned k, unsigned m) {
  MonomialKey out = 0;
  unsigned pos = 0;
  for (unsigned i = 0; i < k; ++i) {
    if (i == m) continue;
    out |= static_cast<MonomialKey>(exponent(key, i)) << (8 * pos++);
  }
  return out;
}

}  // namespace detail

/// Integral of F over t_m from 0 to 1 - sum_{i != m} t_i, as a polynomial in
/// the remaining k-1 variables (in their original order). m is zero-based.
inline SimplexPolynomial integrate_out(const SimplexPolynomial& F, unsigned m) {
  const unsigned k = F.dim();
  if (m >= k) fail(ErrorKind::usage, "integrate_out: variable index out of range");
  const SimplexPolynomial base = SimplexPolynomial::one_minus_sum(k - 1);
  std::vector<SimplexPolynomial> powers{SimplexPolynomial::constant(k - 1, 1)};
  SimplexPolynomial out(k - 1);
  for (const auto& [key, c] : F.terms()) {
    const unsigned a = exponent(key, m);
    while (powers.size() < a + 2) powers.push_back(powers.back() * base);
    const MonomialKey rest = detail::drop_variable(key, k, m);
    const Rational coef = c / Rational(a + 1);
    for (const auto& [pk, pc] : powers[a + 1].terms()) out.add_term(rest + pk, coef * pc);
  }
  return out;
}

/// J_k^{(m)}(F) with m one-based.
inline Rational J_functional(const SimplexPolynomial& F, unsigned m) {
  if (m < 1 || m > F.dim()) fail(ErrorKind::usage, "J_functional: m must satisfy 1 <= m <= k");
  return I_functional(integrate_out(F, m - 1));
}

/// Sum over m of J_k^{(m)}(F).
inline Rational J_sum(const SimplexPolynomial& F) {
  Rational s = 0;
  for (unsigned m = 1; m <= F.dim(); ++m) s += J_functional(F, m);
  return s;
}

using RationalMatrix = std::vector<std::vector<Rational>>;

struct FunctionalForms {
  std::vector<SimplexPolynomial> basis;
  RationalMatrix gram_I;
  RationalMatrix gram_J;
};

/// Exact gram matrices of I and sum_m J over a basis. Entries are spread over
/// `threads` workers.
inline FunctionalForms functional_forms(std::vector<SimplexPolynomial> basis, unsigned threads = 1) {
  if (basis.empty()) fail(ErrorKind::usage, "functional_forms: empty basis");
  const unsigned k = basis.front().dim();
  for (const auto& b : basis)
    if (b.dim() != k) fail(ErrorKind::usage, "functional_forms: basis dimensions differ");
  const std::size_t n = basis.size();

  std::vector<std::vector<SimplexPolynomial>> inner(n);
  for (std::size_t i = 0; i < n; ++i)
    for (unsigned m = 0; m < k; ++m) inner[i].push_back(integrate_out(basis[i], m));

  std::vector<std::pair<std::size_t, std::size_t>> entries;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) entries.emplace_back(i, j);

  FunctionalForms out{std::move(basis), RationalMatrix(n, std::vector<Rational>(n)),
                      RationalMatrix(n, std::vector<Rational>(n))};
  auto work = [&](std::size_t first, std::size_t step) {
    MonomialIntegrals full(k), reduced(k - 1);
    for (std::size_t e = first; e < entries.size(); e += step) {
      const auto [i, j] = entries[e];
      Rational gi = integrate_product(out.basis[i], out.basis[j], full);
      Rational gj = 0;
      for (unsigned m = 0; m < k; ++m) gj += integrate_product(inner[i][m], inner[j][m], reduced);
      out.gram_I[i][j] = out.gram_I[j][i] = gi;
      out.gram_J[i][j] = out.gram_J[j][i] = gj;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(entries.size())));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

/// Exact rank of a rational matrix.
inline std::size_t exact_rank(RationalMatrix a) {
  std::size_t rank = 0;
  const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && sgn(a[piv][c]) == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (sgn(a[r][c]) == 0) continue;
      const Rational f = a[r][c] / a[rank][c];
      for (std::size_t cc = c; cc < cols; ++cc) a[r][cc] -= f * a[rank][cc];
    }
    ++rank;
  }
  return rank;
}

/// Greedy maximal independent subset of basis indices, judged by exact rank of
/// the principal submatrix of gram_I.
inline std::vector<std::size_t> independent_indices(const RationalMatrix& gram) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < gram.size(); ++i) {
    std::vector<std::size_t> trial = kept;
    trial.push_back(i);
    RationalMatrix sub(trial.size(), std::vector<Rational>(trial.size()));
    for (std::size_t r = 0; r < trial.size(); ++r)
      for (std::size_t c = 0; c < trial.size(); ++c) sub[r][c] = gram[trial[r]][trial[c]];
    if (exact_rank(std::move(sub)) == trial.size()) kept.push_back(i);
  }
  return kept;
}

/// Best rational approximation with denominator at most max_den.
inline Rational continued_fraction(long double x, long long max_den = 1'000'000'000LL) {
  const bool neg = x < 0;
  if (neg) x = -x;
  Int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  long double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a = std::floor(r);
    const Int ai(to_int(static_cast<u64>(a)));
    const Int h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > Int(static_cast<long>(max_den))) break;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    const long double frac = r - a;
    if (frac < 1e-18L) break;
    r = 1.0L / frac;
    if (r > 1e18L) break;
  }
  Rational q(h1, k1);
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

struct SymmetricTerm {
  unsigned a = 0;  ///< power of (1 - P1)
  unsigned b = 0;  ///< power of P2
};

/// Exponents (a, b) with a + 2b <= degree, ordered by a then b.
inline std::vector<SymmetricTerm> symmetric_terms(unsigned degree) {
  std::vector<SymmetricTerm> out;
  for (unsigned a = 0; a <= degree; ++a)
    for (unsigned b = 0; a + 2 * b <= degree; ++b) out.push_back({a, b});
  return out;
}

/// (1 - P1)^a * P2^b with P1 = sum t_i, P2 = sum t_i^2.
inline std::vector<SimplexPolynomial> symmetric_basis(unsigned k, unsigned degree) {
  if (k < 1) fail(ErrorKind::usage, "symmetric_basis: k must be positive");
  const SimplexPolynomial one_minus = SimplexPolynomial::one_minus_sum(k);
  SimplexPolynomial p2(k);
  for (unsigned i = 0; i < k; ++i) {
    const auto t = SimplexPolynomial::variable(k, i);
    p2 += t * t;
  }
  std::vector<SimplexPolynomial> basis;
  for (const auto& [a, b] : symmetric_terms(degree)) basis.push_back(one_minus.pow(a) * p2.pow(b));
  return basis;
}

struct RayleighResult {
  double bound = 0;          ///< exact quotient rounded toward zero
  Rational quotient;         ///< sum J(F) / I(F) in exact arithmetic
  long double eigenvalue = 0;
  std::vector<Rational> coefficients;  ///< one per basis element, zero where pruned
  std::vector<std::size_t> kept;
  SimplexPolynomial F;
  bool certified = false;
};

namespace detail {

inline Rational quadratic_form(const RationalMatrix& g, const std::vector<std::size_t>& idx,
                               const std::vector<Rational>& v) {
  Rational s = 0;
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) s += v[r] * g[idx[r]][idx[c]] * v[c];
  return s;
}

}  // namespace detail

/// Maximizes v'Jv / v'Iv over the span of the given forms.
inline RayleighResult maximize_rayleigh(const FunctionalForms& forms) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  RayleighResult res;
  res.kept = independent_indices(forms.gram_I);
  if (res.kept.empty()) fail(ErrorKind::degenerate, "maximize_rayleigh: basis spans nothing");
  const std::size_t n = res.kept.size();
  Mat I(n, n), J(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      I(r, c) = to_long_double(forms.gram_I[res.kept[r]][res.kept[c]]);
      J(r, c) = to_long_double(forms.gram_J[res.kept[r]][res.kept[c]]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(J, I);
  if (solver.info() != Eigen::Success) fail(ErrorKind::degenerate, "maximize_rayleigh: eigen solver failed");
  res.eigenvalue = solver.eigenvalues()(static_cast<Eigen::Index>(n - 1));
  Eigen::Matrix<long double, Eigen::Dynamic, 1> v = solver.eigenvectors().col(static_cast<Eigen::Index>(n - 1));
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  v /= v(arg);

  auto quotient_of = [&](const std::vector<Rational>& x) -> Rational {
    return detail::quadratic_form(forms.gram_J, res.kept, x) / detail::quadratic_form(forms.gram_I, res.kept, x);
  };
  auto close = [&](const Rational& q) {
    const long double qd = to_long_double(q);
    return std::fabs(qd - res.eigenvalue) <= 1e-9L * std::fabs(res.eigenvalue);
  };

  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = continued_fraction(v(static_cast<Eigen::Index>(i)));
  Rational q = quotient_of(x);
  if (!close(q)) {
    for (std::size_t i = 0; i < n; ++i) x[i] = to_rational(v(static_cast<Eigen::Index>(i)));
    q = quotient_of(x);
  }
  res.quotient = q;
  res.bound = q.get_d();
  res.certified = close(q);
  res.coefficients.assign(forms.basis.size(), Rational(0));
  res.F = SimplexPolynomial(forms.basis.front().dim());
  for (std::size_t i = 0; i < n; ++i) {
    res.coefficients[res.kept[i]] = x[i];
    res.F += forms.basis[res.kept[i]] * x[i];
  }
  return res;
}

struct MkResult : RayleighResult {
  unsigned k = 0;
  unsigned degree = 0;
  std::vector<SymmetricTerm> terms;
};

/// Certified lower bound for M_k over the symmetric basis of the given degree.
inline MkResult mk_lower_bound(unsigned k, unsigned degree, unsigned threads = 1) {
  if (k < 1 || k > kMaxSimplexDim) fail(ErrorKind::usage, "mk_lower_bound: k must be in [1, 8]");
  MkResult out;
  static_cast<RayleighResult&>(out) = maximize_rayleigh(functional_forms(symmetric_basis(k, degree), threads));
  out.k = k;
  out.degree = degree;
  out.terms = symmetric_terms(degree);
  return out;
}

/// Smallest k >= 2 in the table with ceil(bound / 4) > K - 1.
inline std::optional<unsigned> choose_k(long long K, const std::map<unsigned, double>& table) {
  for (const auto& [k, bound] : table) {
    if (k < 2) continue;
    if (static_cast<long long>(std::ceil(bound / 4.0)) > K - 1) return k;
  }
  return std::nullopt;
}

struct AsymptoticComparison {
  unsigned k = 0;
  double bound = 0;
  double rhs = 0;  ///< log k - 2 log log k - 2
  bool exceeds = false;
};

inline AsymptoticComparison asymptotic_comparison(unsigned k, double bound) {
  if (k < 16) fail(ErrorKind::usage, "asymptotic_comparison: k must be at least 16");
  const double lk = std::log(static_cast<double>(k));
  const double rhs = lk - 2.0 * std::log(lk) - 2.0;
  return {k, bound, rhs, bound > rhs};
}

/// Bounds for every k in [1, k_max] and degree in [0, d_max].
inline std::vector<MkResult> bounds_grid(unsigned k_max, unsigned d_max, unsigned threads = 1) {
  std::vector<MkResult> out;
  for (unsigned k = 1; k <= k_max; ++k)
    for (unsigned d = 0; d <= d_max; ++d) out.push_back(mk_lower_bound(k, d, threads));
  return out;
}

inline std::string bounds_csv(const std::vector<MkResult>& rows) {
  std::ostringstream os;
  os << "k,degree,bound,certified\n";
  os.precision(12);
  for (const auto& r : rows) os << r.k << ',' << r.degree << ',' << r.bound << ',' << (r.certified ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace monorun
