#pragma once
/// @file digit_construction.hpp
/// @brief Digit sums of primes: the local limit law for s_g(p) and the
///        constant / increasing / decreasing digit-sum tuple constructions.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <mpfr.h>

#include "bigint.hpp"
#include "core_arith.hpp"
#include "errors.hpp"
#include "tuple_engineering.hpp"

namespace monorun {

struct DigitLawParams {
  u64 g = 10;
  Rational mu;      ///< (g - 1) / 2
  Rational sigma2;  ///< (g^2 - 1) / 12

  explicit DigitLawParams(u64 base) : g(base) {
    if (g < 2) fail(ErrorKind::usage, "digit law: base must be at least 2");
    mu = Rational(static_cast<long>(g - 1), 2);
    mu.canonicalize();
    sigma2 = Rational(static_cast<long>(g * g - 1), 12);
    sigma2.canonicalize();
  }

  /// log x / log g
  static long double scale(u64 g, long double x) { return std::log(x) / std::log(static_cast<long double>(g)); }
  long double center(long double x) const { return to_long_double(mu) * scale(g, x); }
  long double spread(long double x) const { return std::sqrt(to_long_double(sigma2) * scale(g, x)); }
};

inline u64 euler_phi(u64 n) {
  u64 r = n;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    r -= r / p;
  }
  if (n > 1) r -= r / n;
  return r;
}

/// Main term of #{p <= x : s_g(p) = l} given pi(x).
inline long double dmr_prediction(u64 g, long double x, u64 ell, u64 pi_x) {
  const DigitLawParams law(g);
  if (std::gcd(ell, g - 1) != 1)
    fail(ErrorKind::not_applicable, "dmr_prediction: gcd(l, g-1) = " + std::to_string(std::gcd(ell, g - 1)) + " > 1");
  if (x < 100) fail(ErrorKind::usage, "dmr_prediction: x must be at least 100");
  const long double L = DigitLawParams::scale(g, x);
  const long double s2 = to_long_double(law.sigma2);
  const long double dev = static_cast<long double>(ell) - law.center(x);
  const long double front = static_cast<long double>(g - 1) / static_cast<long double>(euler_phi(g - 1));
  return front * static_cast<long double>(pi_x) / std::sqrt(2 * std::numbers::pi_v<long double> * s2 * L) *
         std::exp(-dev * dev / (2 * s2 * L));
}

inline long double dmr_prediction(u64 g, u64 x, u64 ell) {
  return dmr_prediction(g, static_cast<long double>(x), ell, primes_in(2, x + 1).size());
}

struct HistogramRow {
  u64 ell = 0;
  u64 observed = 0;
  std::optional<long double> predicted;
  std::optional<long double> ratio;
};

struct DigitHistogram {
  u64 g = 10;
  u64 x = 0;
  u64 pi_x = 0;
  std::vector<HistogramRow> rows;  ///< ell = 0 .. max digit sum below x

  const HistogramRow& row(u64 ell) const {
    if (ell >= rows.size()) fail(ErrorKind::usage, "digit histogram: l out of range");
    return rows[ell];
  }
};

inline DigitHistogram digit_histogram(u64 g, u64 x) {
  if (g < 2) fail(ErrorKind::usage, "digit_histogram: base must be at least 2");
  if (x < 100) fail(ErrorKind::usage, "digit_histogram: x must be at least 100");
  DigitHistogram h{g, x, 0, {}};
  u64 digits = 0;
  for (u64 v = x; v > 0; v /= g) ++digits;
  std::vector<u64> counts((g - 1) * digits + 1, 0);
  SegmentedSieve sieve(x + 1);
  std::vector<u64> block;
  constexpr u64 kBlock = u64{1} << 22;
  for (u64 lo = 2; lo <= x; lo += kBlock) {
    block.clear();
    sieve.primes(lo, std::min(x + 1, lo + kBlock), block);
    for (u64 p : block) ++counts[digit_sum(p, g)];
    h.pi_x += block.size();
  }
  for (u64 ell = 0; ell < counts.size(); ++ell) {
    HistogramRow r{ell, counts[ell], std::nullopt, std::nullopt};
    if (std::gcd(ell, g - 1) == 1) {
      r.predicted = dmr_prediction(g, static_cast<long double>(x), ell, h.pi_x);
      if (*r.predicted > 0) r.ratio = static_cast<long double>(r.observed) / *r.predicted;
    }
    h.rows.push_back(r);
  }
  return h;
}

struct DigitSearch {
  std::vector<u64> primes;
  bool exhausted = false;  ///< the range ran out before `count` primes were found
};

/// Up to `count` primes p in [lo, hi) with s_g(p) = ell, ascending.
inline DigitSearch primes_with_digit_sum(u64 g, u64 lo, u64 hi, u64 ell, std::size_t count) {
  if (g < 2) fail(ErrorKind::usage, "primes_with_digit_sum: base must be at least 2");
  if (lo >= hi) fail(ErrorKind::usage, "primes_with_digit_sum: need lo < hi");
  DigitSearch out;
  SegmentedSieve sieve(hi);
  std::vector<u64> block;
  constexpr u64 kBlock = u64{1} << 20;
  for (u64 a = lo; a < hi && out.primes.size() < count; a += std::min(kBlock, hi - a)) {
    block.clear();
    sieve.primes(a, std::min(hi, a + kBlock), block);
    for (u64 p : block) {
      if (digit_sum(p, g) != ell) continue;
      out.primes.push_back(p);
      if (out.primes.size() == count) break;
    }
  }
  out.exhausted = out.primes.size() < count;
  return out;
}

enum class DigitMode { constant, increasing, decreasing };

inline std::string to_string(DigitMode m) {
  switch (m) {
    case DigitMode::constant: return "constant";
    case DigitMode::increasing: return "increasing";
    case DigitMode::decreasing: return "decreasing";
  }
  return "?";
}

inline DigitMode parse_digit_mode(std::string_view s) {
  if (s == "constant") return DigitMode::constant;
  if (s == "increasing") return DigitMode::increasing;
  if (s == "decreasing") return DigitMode::decreasing;
  fail(ErrorKind::usage, "unknown digit mode '" + std::string(s) + "' (constant, increasing, decreasing)");
}

enum class Guarantee { unconditional_if_k_required, desk_scale_demo };

inline std::string to_string(Guarantee g) {
  return g == Guarantee::unconditional_if_k_required ? "unconditional_if_k_required" : "desk_scale_demo";
}

/// ceil(e^{8K+5}) in decimal, or "e^{8K+5}" when it exceeds 2^63.
struct RequiredK {
  std::optional<Int> exact;
  std::string text;
};

inline RequiredK required_k(u64 K) {
  const u64 e = 8 * K + 5;
  mpfr_t v;
  mpfr_init2(v, 256);
  mpfr_set_ui(v, static_cast<unsigned long>(e), MPFR_RNDN);
  mpfr_exp(v, v, MPFR_RNDU);
  Int z;
  mpfr_get_z(z.get_mpz_t(), v, MPFR_RNDU);
  mpfr_clear(v);
  RequiredK out;
  if (mpz_sizeinbase(z.get_mpz_t(), 2) <= 63) {
    out.exact = z;
    out.text = z.get_str();
  } else {
    out.text = "e^" + std::to_string(e);
  }
  return out;
}

struct DigitRunPlan {
  u64 g = 10;
  u64 K = 2;
  RequiredK k_required;
  u64 k_used = 0;
  DigitMode mode = DigitMode::constant;
  std::vector<u64> primes;
  std::vector<u64> target_sums;
  unsigned Npow = 0;
  Int A;
  Guarantee guarantee = Guarantee::desk_scale_demo;

  /// Violated invariants, empty when the plan is sound.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (primes.size() != k_used || target_sums.size() != k_used) out.push_back("tuple length differs from k_used");
    const u64 floor_p = std::max(g, k_used);
    std::vector<u64> sorted = primes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) out.push_back("primes not distinct");
    for (std::size_t i = 0; i < primes.size(); ++i) {
      if (!is_prime_u64(primes[i])) out.push_back(std::to_string(primes[i]) + " is not prime");
      if (primes[i] <= floor_p) out.push_back(std::to_string(primes[i]) + " does not exceed max(g, k)");
      if (i < target_sums.size() && digit_sum(primes[i], g) != target_sums[i])
        out.push_back("digit sum of " + std::to_string(primes[i]) + " differs from its target");
    }
    std::vector<i64> entries(sorted.begin(), sorted.end());
    if (!entries.empty() && std::adjacent_find(entries.begin(), entries.end()) == entries.end() &&
        !is_admissible(entries).admissible)
      out.push_back("prime tuple is not admissible");
    Int prod = 1;
    for (u64 p : primes) prod *= to_int(p);
    Int g_;
    mpz_gcd(g_.get_mpz_t(), A.get_mpz_t(), prod.get_mpz_t());
    if (g_ != 1) out.push_back("gcd(A, prod p_i) > 1");
    for (u64 p : primes)
      if (A <= to_int(p)) out.push_back("A does not exceed " + std::to_string(p));
    for (std::size_t i = 1; i < target_sums.size(); ++i) {
      const u64 a = target_sums[i - 1], b = target_sums[i];
      const bool ok = mode == DigitMode::constant ? a == b : mode == DigitMode::increasing ? a < b : a > b;
      if (!ok) out.push_back("target sums break the " + to_string(mode) + " relation");
    }
    return out;
  }

  bool valid() const { return violations().empty(); }

  /// s_g(A n + p_i) = s_g(n) + s_g(p_i) for all i, and the mode relation holds
  /// on the candidates' digit sums.
  bool candidates_follow(const Int& n) const {
    const u64 sn = digit_sum(n, g);
    std::vector<u64> sums;
    for (u64 p : primes) {
      const Int v = A * n + to_int(p);
      const u64 s = digit_sum(v, g);
      if (s != sn + digit_sum(p, g)) return false;
      sums.push_back(s);
    }
    for (std::size_t i = 1; i < sums.size(); ++i) {
      const bool ok = mode == DigitMode::constant   ? sums[i - 1] == sums[i]
                      : mode == DigitMode::increasing ? sums[i - 1] < sums[i]
                                                      : sums[i - 1] > sums[i];
      if (!ok) return false;
    }
    return true;
  }
};

namespace detail {

inline void finish_plan(DigitRunPlan& plan) {
  const u64 top = plan.primes.empty() ? 0 : *std::max_element(plan.primes.begin(), plan.primes.end());
  plan.A = 1;
  plan.Npow = 0;
  while (plan.A <= to_int(top)) {
    plan.A *= to_int(plan.g);
    ++plan.Npow;
  }
  plan.guarantee = plan.k_required.exact && to_int(plan.k_used) >= *plan.k_required.exact
                       ? Guarantee::unconditional_if_k_required
                       : Guarantee::desk_scale_demo;
  if (auto v = plan.violations(); !v.empty()) fail(ErrorKind::internal, "digit plan invariant: " + v.front());
}

inline void check_plan_args(u64 g, u64 K, u64 k) {
  if (g < 2) fail(ErrorKind::usage, "digit plan: base must be at least 2");
  if (K < 1) fail(ErrorKind::usage, "digit plan: K must be at least 1");
  if (k < 2) fail(ErrorKind::usage, "digit plan: k must be at least 2");
}

}  // namespace detail

/// Nearest integer to mu_g log x / log g coprime to g - 1; ties go to the smaller.
inline u64 nearest_coprime_sum(u64 g, long double x) {
  const long double c = DigitLawParams(g).center(x);
  const long double base = std::floor(c);
  std::optional<u64> best;
  long double best_dist = 0;
  for (long double step = 0; step <= static_cast<long double>(g) + 1; ++step) {
    for (long double cand : {base - step, base + 1 + step}) {
      if (cand < 0) continue;
      const u64 v = static_cast<u64>(cand);
      if (std::gcd(v, g - 1) != 1) continue;
      const long double d = std::fabs(cand - c);
      if (!best || d < best_dist || (d == best_dist && v < *best)) best = v, best_dist = d;
    }
  }
  if (!best) fail(ErrorKind::internal, "nearest_coprime_sum: no candidate found");
  return *best;
}

/// k primes p in (max(g, k), x] sharing the digit sum l nearest the mean.
inline DigitRunPlan constant_run_plan(u64 g, u64 K, u64 k, u64 x) {
  detail::check_plan_args(g, K, k);
  DigitRunPlan plan;
  plan.g = g, plan.K = K, plan.k_used = k, plan.mode = DigitMode::constant;
  plan.k_required = required_k(K);
  const u64 ell = nearest_coprime_sum(g, static_cast<long double>(x));
  const u64 lo = std::max(g, k) + 1;
  if (lo > x) fail(ErrorKind::infeasible, "constant plan: search range (max(g,k), x] is empty");
  auto found = primes_with_digit_sum(g, lo, x + 1, ell, k);
  if (found.primes.size() < k)
    fail(ErrorKind::infeasible, "constant plan: only " + std::to_string(found.primes.size()) + " primes with digit sum " +
                                    std::to_string(ell) + " in range, need " + std::to_string(k));
  plan.primes = std::move(found.primes);
  plan.target_sums.assign(k, ell);
  detail::finish_plan(plan);
  return plan;
}

/// The k smallest integers exceeding mu_g log x / log g that are coprime to g - 1.
inline std::vector<u64> monotone_sums(u64 g, long double x, u64 k) {
  const long double c = DigitLawParams(g).center(x);
  std::vector<u64> out;
  for (u64 v = static_cast<u64>(std::floor(c)) + 1; out.size() < k; ++v)
    if (std::gcd(v, g - 1) == 1 && static_cast<long double>(v) > c) out.push_back(v);
  return out;
}

/// p_i in [2^{i-1} x, 2^i x) with digit sum l_i (increasing) or l_{k+1-i}
/// (decreasing); the smallest such prime is taken in each window.
inline DigitRunPlan monotone_run_plan(u64 g, u64 K, u64 k, u64 x, DigitMode direction) {
  detail::check_plan_args(g, K, k);
  if (direction == DigitMode::constant) fail(ErrorKind::usage, "monotone plan: direction must be increasing or decreasing");
  if (x < 1) fail(ErrorKind::usage, "monotone plan: x must be positive");
  if (k > 62 || (x >> (63 - k)) != 0) fail(ErrorKind::resource, "monotone plan: dyadic windows overflow 64 bits");
  DigitRunPlan plan;
  plan.g = g, plan.K = K, plan.k_used = k, plan.mode = direction;
  plan.k_required = required_k(K);
  const auto ells = monotone_sums(g, static_cast<long double>(x), k);
  const u64 floor_p = std::max(g, k);
  for (u64 i = 0; i < k; ++i) {
    const u64 ell = direction == DigitMode::increasing ? ells[i] : ells[k - 1 - i];
    const u64 lo = std::max(x << i, floor_p + 1), hi = x << (i + 1);
    auto found = lo < hi ? primes_with_digit_sum(g, lo, hi, ell, 1) : DigitSearch{{}, true};
    if (found.primes.empty())
      fail(ErrorKind::infeasible, "monotone plan: window " + std::to_string(i + 1) + " has no prime with digit sum " +
                                      std::to_string(ell) + " (i=" + std::to_string(i + 1) + ", l=" + std::to_string(ell) + ")");
    plan.primes.push_back(found.primes.front());
    plan.target_sums.push_back(ell);
  }
  detail::finish_plan(plan);
  return plan;
}

/// s_g(g^Npow n + b) == s_g(n) + s_g(b) for 0 <= b < g^Npow.
inline bool concat_identity_check(u64 g, unsigned Npow, const Int& n, const Int& b) {
  if (g < 2) fail(ErrorKind::usage, "concat_identity_check: base must be at least 2");
  Int A;
  mpz_ui_pow_ui(A.get_mpz_t(), g, Npow);
  if (sgn(b) < 0 || b >= A) fail(ErrorKind::usage, "concat_identity_check: b must satisfy 0 <= b < g^Npow");
  if (sgn(n) < 0) fail(ErrorKind::usage, "concat_identity_check: n must be nonnegative");
  const Int v = A * n + b;
  return digit_sum(v, g) == digit_sum(n, g) + digit_sum(b, g);
}

inline nlohmann::json to_json(const DigitRunPlan& p) {
  return {
      {"g", p.g},
      {"K", p.K},
      {"k_required", p.k_required.text},
      {"k_used", p.k_used},
      {"mode", to_string(p.mode)},
      {"primes", p.primes},
      {"sums", p.target_sums},
      {"A", p.A.get_str()},
      {"guarantee", to_string(p.guarantee)},
  };
}

}  // namespace monorun
