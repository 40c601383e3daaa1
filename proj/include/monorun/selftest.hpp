#pragma once
/// @file selftest.hpp
/// @brief Quick invariant suite behind `monorun selftest`.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "core_arith.hpp"
#include "digit_construction.hpp"
#include "maynard_sieve.hpp"
#include "mk_optimizer.hpp"
#include "run_finder.hpp"
#include "simplex_poly.hpp"
#include "tuple_engineering.hpp"

namespace monorun {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace selftest_detail {

inline ArithValues naive_values(u64 n) {
  ArithValues v;
  u64 m = n;
  for (u64 p = 2; p * p <= m; ++p) {
    if (m % p) continue;
    unsigned e = 0;
    u64 pe = 1;
    while (m % p == 0) m /= p, ++e, pe *= p;
    v.phi *= pe / p * (p - 1);
    v.sigma *= (pe * p - 1) / (p - 1);
    v.omega += 1, v.varrho += e, v.tau *= e + 1;
  }
  if (m > 1) v.phi *= m - 1, v.sigma *= m + 1, v.omega += 1, v.varrho += 1, v.tau *= 2;
  return v;
}

inline bool first_run_is(RunFunction fn, RunMode mode, std::size_t len, std::vector<u64> primes) {
  RunQuery q;
  q.function = fn, q.mode = mode, q.min_length = len;
  const auto r = first_run(q, 1'000'000);
  return r.run && r.run->primes == primes;
}

}  // namespace selftest_detail

inline std::vector<SelfTestResult> run_selftest() {
  std::vector<std::pair<std::string, std::function<bool()>>> checks = {
      {"arith_values matches trial division for n <= 10^4",
       [] {
         FactorTable t(10'000);
         for (u64 n = 1; n <= 10'000; ++n)
           if (!(arith_values(factorize(n, t)) == selftest_detail::naive_values(n))) return false;
         return true;
       }},
      {"2^omega <= tau <= 2^varrho for n <= 10^4",
       [] {
         FactorTable t(10'000);
         for (u64 n = 1; n <= 10'000; ++n) {
           const auto f = factorize(n, t);
           const auto v = arith_values(f);
           if ((u64{1} << v.omega) > v.tau || v.tau > (u64{1} << v.varrho)) return false;
           if (((u64{1} << v.omega) == v.tau) != f.squarefree()) return false;
         }
         return true;
       }},
      {"digit sums are congruent mod g-1",
       [] {
         for (u64 g : {2, 10, 16})
           for (u64 n = 0; n <= 10'000; ++n)
             if (g > 2 && digit_sum(n, g) % (g - 1) != n % (g - 1)) return false;
         return true;
       }},
      {"first witnesses of the run searches",
       [] {
         using selftest_detail::first_run_is;
         return first_run_is(RunFunction::phi(), RunMode::increasing, 3, {19, 23, 29}) &&
                first_run_is(RunFunction::sigma(), RunMode::decreasing, 3, {73, 79, 83}) &&
                first_run_is(RunFunction::tau(), RunMode::increasing, 4, {2, 3, 5, 7}) &&
                first_run_is(RunFunction::omega(), RunMode::increasing, 3, {197, 199, 211}) &&
                first_run_is(RunFunction::digit(10), RunMode::constant, 2, {523, 541}) &&
                first_run_is(RunFunction::digit(10), RunMode::decreasing, 2, {7, 11});
       }},
      {"tuples h_i = (i-1)(2k)! are admissible for k <= 8",
       [] {
         for (unsigned k = 1; k <= 8; ++k)
           for (int s : {1, -1})
             if (!is_admissible(paper_tuple(k, s).entries).admissible) return false;
         return true;
       }},
      {"assembled selections satisfy gcd(nu + h_i, W) = 1",
       [] {
         RangePlan plan;
         plan.z1 = 3, plan.z2 = 47, plan.z3 = 101;
         plan.intervals = {{0.2L, 0.3L}, {0.2L, 0.3L}};
         const auto H = paper_tuple(2, 1);
         const auto d = assemble_selection(plan, H);
         if (!satisfies_coprimality(d.selection, H)) return false;
         for (const auto& a : d.selection.assignments)
           if (a.provenance == Provenance::greedy_set &&
               mod_floor(d.selection.nu + H.entries[static_cast<std::size_t>(a.tag - 1)] - 1, a.p) != 0)
             return false;
         return true;
       }},
      {"sieve rearrangement identity (k=1, N=10^4)",
       [] {
         SieveConfig cfg;
         cfg.N = 10'000;
         cfg.selection = coprime_selection(cfg.tuple, std::vector<u64>{2, 3});
         const auto lt = lambda_table(cfg);
         const FactorTable t(2 * cfg.N + 2);
         const auto sp = weighted_space(cfg, lt, t);
         const auto re = rearranged_S1(cfg, lt);
         return sp.total == re.value && re.nonempty_noncoprime == 0;
       }},
      {"lambda support is squarefree, coprime to W and below R",
       [] {
         SieveConfig cfg;
         cfg.N = 100'000, cfg.k = 2, cfg.tuple = AdmissibleTuple{{0, 2}};
         cfg.F = SimplexPolynomial::one_minus_sum(2);
         cfg.selection = coprime_selection(cfg.tuple, std::vector<u64>{2, 3});
         const auto lt = lambda_table(cfg);
         for (const auto& [d, v] : lt.values()) {
           u64 prod = 1;
           for (u64 x : d) {
             if (std::gcd(x, cfg.coprime_modulus()) != 1) return false;
             if (std::gcd(prod, x) != 1) return false;
             prod *= x;
           }
           if (prod > cfg.support_max()) return false;
           for (u64 p = 2; p * p <= prod; ++p)
             if (prod % (p * p) == 0) return false;
         }
         return !lt.values().empty();
       }},
      {"M_1 = 1 exactly", [] { return mk_lower_bound(1, 3).quotient == 1; }},
      {"simplex monomial integrals",
       [] {
         const unsigned e00[] = {0, 0}, e3[] = {3}, e11[] = {1, 1};
         return simplex_monomial_integral(2, e00) == Rational(1, 2) && simplex_monomial_integral(1, e3) == Rational(1, 4) &&
                simplex_monomial_integral(2, e11) == Rational(1, 24);
       }},
      {"digit run plans",
       [] {
         const auto c = constant_run_plan(10, 2, 5, 150);
         const auto m = monotone_run_plan(10, 3, 3, 100, DigitMode::increasing);
         return c.primes == std::vector<u64>{19, 37, 73, 109, 127} && c.A == 1000 &&
                m.primes == std::vector<u64>{109, 227, 409} && c.valid() && m.valid();
       }},
      {"digit concatenation identity",
       [] {
         std::mt19937_64 rng(12345);
         for (u64 g : {2, 10, 16})
           for (int i = 0; i < 1000; ++i) {
             Int A;
             mpz_ui_pow_ui(A.get_mpz_t(), g, 6);
             const Int n = to_int(static_cast<u64>(rng() % 1'000'000'000));
             const Int b = to_int(static_cast<u64>(rng())) % A;
             if (!concat_identity_check(g, 6, n, b)) return false;
           }
         return true;
       }},
  };

  std::vector<SelfTestResult> out;
  for (auto& [name, fn] : checks) {
    SelfTestResult r{name, false, {}};
    try {
      r.passed = fn();
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace monorun
