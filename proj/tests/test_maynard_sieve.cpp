#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <monorun/maynard_sieve.hpp>

#include "oracles.hpp"

using namespace monorun;

namespace {

SieveConfig config(u64 N, unsigned k, std::vector<i64> tuple, std::vector<u64> w_primes) {
  SieveConfig cfg;
  cfg.N = N;
  cfg.k = k;
  cfg.tuple = AdmissibleTuple{std::move(tuple)};
  cfg.selection = coprime_selection(cfg.tuple, w_primes);
  cfg.F = SimplexPolynomial::one_minus_sum(k);
  return cfg;
}

// lambda_d straight from its definition, with F supplied as a double function.
// Products of r are bounded by R - 1; the sum runs over all r_i with d_i | r_i.
double lambda_oracle(const std::vector<u64>& d, u64 R, u64 coprime_to, double log_R,
                     const std::function<double(const std::vector<double>&)>& F) {
  const std::size_t k = d.size();
  u64 prod_d = 1;
  for (u64 x : d) prod_d *= x;
  if (prod_d >= R || oracle::mobius(prod_d) == 0 || std::gcd(prod_d, coprime_to) != 1) return 0;
  double sum = 0;
  std::vector<u64> r(k, 1);
  std::function<void(std::size_t, u64)> rec = [&](std::size_t i, u64 prod) {
    if (i == k) {
      if (oracle::mobius(prod) == 0 || std::gcd(prod, coprime_to) != 1) return;
      std::vector<double> t;
      double ph = 1;
      for (u64 x : r) {
        t.push_back(std::log(static_cast<double>(x)) / log_R);
        ph *= static_cast<double>(oracle::phi(x));
      }
      sum += F(t) / ph;
      return;
    }
    for (u64 m = 1; prod * d[i] * m < R; ++m) {
      r[i] = d[i] * m;
      rec(i + 1, prod * r[i]);
    }
  };
  rec(0, 1);
  double sign_scale = 1;
  for (u64 x : d) sign_scale *= oracle::mobius(x) * static_cast<double>(x);
  return sign_scale * sum;
}

double one_minus_sum(const std::vector<double>& t) {
  double s = 1;
  for (double x : t) s -= x;
  return s < 0 ? 0 : s;
}

std::vector<u64> divisors(u64 n) {
  std::vector<u64> out;
  for (u64 d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

}  // namespace

TEST(LambdaTable, HandExampleConstantF) {
  SieveConfig cfg = config(10, 1, {0}, {2});
  cfg.R_explicit = 10;
  cfg.F = SimplexPolynomial::constant(1, 1);
  const auto lt = lambda_table(cfg);
  EXPECT_EQ(lt.at({3}), Rational(-3, 2));
  EXPECT_EQ(lt.at({1}), Rational(23, 12));
  EXPECT_EQ(lt.at({2}), 0);
  EXPECT_EQ(lt.at({9}), 0);
  EXPECT_EQ(weight_w(11, cfg, lt), Rational(529, 144));
}

TEST(LambdaTable, MatchesDirectDefinition) {
  for (unsigned k : {1u, 2u}) {
    SieveConfig cfg = config(5000, k, k == 1 ? std::vector<i64>{0} : std::vector<i64>{0, 2}, {2, 3});
    cfg.R_explicit = 60;
    const auto lt = lambda_table(cfg);
    const double logR = std::log(60.0);
    std::size_t checked = 0;
    std::vector<u64> d(k, 1);
    std::function<void(unsigned, u64)> rec = [&](unsigned i, u64 prod) {
      if (i == k) {
        const double want = lambda_oracle(d, 60, cfg.W(), logR, one_minus_sum);
        const double got = to_double(lt.at(d));
        ASSERT_NEAR(got, want, 1e-12 * std::max(1.0, std::fabs(want))) << d[0];
        ++checked;
        return;
      }
      for (u64 x = 1; prod * x < 80; ++x) {
        d[i] = x;
        rec(i + 1, prod * x);
      }
    };
    rec(0, 1);
    EXPECT_GT(checked, 50u);
  }
}

TEST(LambdaTable, SupportInvariants) {
  SieveConfig cfg = config(100'000, 2, {0, 2}, {2, 3});
  cfg.p_bad = 7;
  const auto lt = lambda_table(cfg);
  ASSERT_GT(lt.size(), 0u);
  for (const auto& [d, v] : lt.values()) {
    ASSERT_NE(sgn(v), 0);
    u64 prod = 1;
    for (u64 x : d) prod *= x;
    EXPECT_LE(prod, cfg.support_max());
    EXPECT_NE(oracle::mobius(prod), 0);
    EXPECT_EQ(std::gcd(prod, cfg.W() * 7), 1u);
  }
  // Entries sharing a factor with W or with a square factor vanish.
  EXPECT_EQ(lt.at({2, 1}), 0);
  EXPECT_EQ(lt.at({1, 3}), 0);
  EXPECT_EQ(lt.at({5, 5}), 0);
  EXPECT_EQ(lt.at({7, 1}), 0);
}

TEST(LambdaTable, RejectsLargeK) {
  SieveConfig cfg = config(10'000, 5, {0, 2, 6, 8, 12}, {2, 3, 5});
  try {
    lambda_table(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resource);
  }
}

TEST(LambdaTable, RejectsMismatchedF) {
  SieveConfig cfg = config(10'000, 2, {0, 2}, {2, 3});
  cfg.F = SimplexPolynomial::one_minus_sum(1);
  EXPECT_THROW(lambda_table(cfg), Error);
}

TEST(WeightW, MatchesDivisorSumOracle) {
  for (unsigned k : {1u, 2u}) {
    SieveConfig cfg = config(3000, k, k == 1 ? std::vector<i64>{0} : std::vector<i64>{0, 2}, {2, 3});
    cfg.R_explicit = 40;
    const auto lt = lambda_table(cfg);
    const double logR = std::log(40.0);
    const FactorTable t(detail::table_limit(cfg));
    const auto members = cfg.omega_members();
    for (std::size_t j = 0; j < members.size(); j += 7) {
      const u64 n = members[j];
      double s = 0;
      if (k == 1) {
        for (u64 d : divisors(n)) s += lambda_oracle({d}, 40, cfg.W(), logR, one_minus_sum);
      } else {
        for (u64 d1 : divisors(n))
          for (u64 d2 : divisors(n + 2))
            if (d1 * d2 < 40) s += lambda_oracle({d1, d2}, 40, cfg.W(), logR, one_minus_sum);
      }
      const double w = to_double(weight_w(n, cfg, lt, t));
      ASSERT_GE(w, 0);
      ASSERT_NEAR(w, s * s, 1e-9 * std::max(1.0, s * s)) << n;
    }
  }
}

TEST(WeightW, LargePrimeFactorsLeaveOnlyTheUnitTuple) {
  SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const auto lt = lambda_table(cfg);
  const FactorTable t(detail::table_limit(cfg));
  for (u64 n : cfg.omega_members()) {
    if (!t.is_prime(n)) continue;
    ASSERT_EQ(weight_w(n, cfg, lt, t), lt.at({1}) * lt.at({1}));
  }
}

TEST(WeightW, RejectsNonMembers) {
  SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const auto lt = lambda_table(cfg);
  EXPECT_THROW(weight_w(cfg.omega_members().front() + 1, cfg, lt), Error);
}

TEST(SieveSums, ZeroWeightsAreDegenerate) {
  SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  cfg.F = SimplexPolynomial(1);
  const auto lt = lambda_table(cfg);
  const FactorTable t(detail::table_limit(cfg));
  const auto sp = weighted_space(cfg, lt, t);
  try {
    compute_S1_S2(cfg, sp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
  EXPECT_EQ(second_moment_ratio(cfg, sp).sum_w2, 0);
}

TEST(SieveSums, RearrangementIdentity) {
  struct Case {
    u64 N;
    unsigned k;
    std::vector<i64> tuple;
  };
  for (const Case& c : {Case{10'000, 1, {0}}, Case{10'000, 2, {0, 2}}, Case{100'000, 1, {0}}}) {
    const SieveConfig cfg = config(c.N, c.k, c.tuple, {2, 3});
    const auto lt = lambda_table(cfg);
    const FactorTable t(detail::table_limit(cfg));
    const auto sp = weighted_space(cfg, lt, t);
    const auto re = rearranged_S1(cfg, lt);
    EXPECT_EQ(sp.total, re.value) << c.N << " " << c.k;
    EXPECT_EQ(re.nonempty_noncoprime, 0u);
  }
}

TEST(SieveSums, ProbabilityInequality) {
  for (unsigned k : {1u, 2u}) {
    SieveConfig cfg = config(10'000, k, k == 1 ? std::vector<i64>{0} : std::vector<i64>{0, 2}, {2, 3});
    const auto lt = lambda_table(cfg);
    const FactorTable t(detail::table_limit(cfg));
    const auto sp = weighted_space(cfg, lt, t);
    const auto s = compute_S1_S2(cfg, sp);
    EXPECT_EQ(s.EX, s.S2 / s.S1);
    EXPECT_EQ(s.prob_at_least(0), 1);
    for (unsigned K = 1; K <= k + 1; ++K) {
      EXPECT_GE(s.prob_at_least(K), 0);
      EXPECT_LE(s.prob_at_least(K), 1);
      if (s.EX > Rational(static_cast<long>(K) - 1)) EXPECT_GE(s.prob_at_least(K), probability_lower_bound(s, k, K));
    }
  }
}

TEST(SieveSums, ThreadsGiveIdenticalWeights) {
  const SieveConfig cfg = config(20'000, 2, {0, 2}, {2, 3});
  const auto lt = lambda_table(cfg);
  const FactorTable t(detail::table_limit(cfg));
  const auto a = weighted_space(cfg, lt, t, 1);
  const auto b = weighted_space(cfg, lt, t, 3);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.total, b.total);
}

TEST(Prediction, ClosedForms) {
  SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const auto p = predicted_S1_S2(cfg);
  EXPECT_EQ(p.ratio_limit, cfg.theta * Rational(3, 4));

  SieveConfig scaled = cfg;
  scaled.F = cfg.F * Rational(3);
  const auto q = predicted_S1_S2(scaled);
  EXPECT_EQ(q.ratio_limit, p.ratio_limit);
  EXPECT_NEAR(static_cast<double>(q.S1 / p.S1), 9.0, 1e-12);
  EXPECT_NEAR(static_cast<double>(q.S2 / p.S2), 9.0, 1e-12);

  SieveConfig two = config(10'000, 2, {0, 2}, {2, 3});
  two.F = SimplexPolynomial::constant(2, 1);
  const auto r = predicted_S1_S2(two);
  EXPECT_EQ(r.J_total / r.I, Rational(4, 3));

  SieveConfig zero = cfg;
  zero.F = SimplexPolynomial(1);
  EXPECT_THROW(predicted_S1_S2(zero), Error);
}

TEST(ErrorE, Examples) {
  EXPECT_EQ(error_E(10, 3), 1);
  EXPECT_EQ(error_E(1000, 1), 1);
  EXPECT_EQ(error_E(1000, 4), oracle::error_E(1000, 4));
}

TEST(ErrorE, MatchesDirectCount) {
  for (u64 N : {1000, 10'000})
    for (u64 q = 1; q <= 50; ++q) ASSERT_EQ(error_E(N, q), oracle::error_E(N, q)) << N << " " << q;
}

TEST(BvScan, Examples) {
  EXPECT_EQ(bv_scan(10'000, 1, 0).sum, 0);
  const auto s = bv_scan(10'000, 1, 30);
  Rational want = 0;
  for (u64 d = 1; d <= 30; ++d) want += oracle::error_E(10'000, d);
  EXPECT_EQ(s.sum, want);
  EXPECT_EQ(s.terms.size(), 30u);

  const auto t = bv_scan(10'000, 6, 30);
  for (const auto& [d, e] : t.terms) EXPECT_EQ(std::gcd(d, u64{6}), 1u);
  EXPECT_THROW(bv_scan(10'000, 6, 30, 3), Error);
}

TEST(Expectations, LogRatio) {
  const SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const auto lt = lambda_table(cfg);
  const FactorTable t(detail::table_limit(cfg));
  const auto sp = weighted_space(cfg, lt, t);
  EXPECT_EQ(log_ratio_expectation(cfg, sp, t, 0, 10, 5), 0);
  EXPECT_GE(log_ratio_expectation(cfg, sp, t, 0, 5, 100), 0);

  // Uniform weights: double count over primes of the window.
  const auto un = uniform_space(cfg, t);
  long double direct = 0;
  for (u64 p = 5; p <= 100; ++p) {
    if (!oracle::is_prime(p)) continue;
    u64 hits = 0;
    for (u64 n : un.members) hits += (n - 1) % p == 0;
    direct += hits * std::log(static_cast<long double>(p) / (p - 1));
  }
  direct /= un.members.size();
  EXPECT_NEAR(static_cast<double>(log_ratio_expectation(cfg, un, t, 0, 5, 100)), static_cast<double>(direct), 1e-12);
}

TEST(Expectations, OmegaTilde) {
  const SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const auto lt = lambda_table(cfg);
  const FactorTable t(detail::table_limit(cfg));
  const auto sp = weighted_space(cfg, lt, t);
  EXPECT_EQ(omega_tilde_expectation(cfg, sp, t, 0, 50, 50), 0);

  const auto [lo, hi] = default_omega_interval(cfg.N);
  Rational acc = 0;
  for (std::size_t j = 0; j < sp.members.size(); ++j) {
    long c = 0;
    for (auto [p, e] : oracle::factor(sp.members[j] - 1)) c += p > lo && p <= hi;
    acc += sp.weights[j] * c;
  }
  const Rational got = omega_tilde_expectation(cfg, sp, t, 0, lo, hi);
  EXPECT_EQ(got, acc / sp.total);
  EXPECT_LE(got, Rational(static_cast<long>(std::log2(3.0 * cfg.N))));
}

TEST(SecondMoment, DirectSummation) {
  SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const auto lt = lambda_table(cfg);
  const FactorTable t(detail::table_limit(cfg));
  const auto sp = weighted_space(cfg, lt, t);
  Rational s = 0;
  for (u64 n : cfg.omega_members()) {
    const Rational w = weight_w(n, cfg, lt, t);
    s += w * w;
  }
  const auto m = second_moment_ratio(cfg, sp);
  EXPECT_EQ(m.sum_w2, s);
  EXPECT_GT(m.ratio, 0);

  // Omega with a single member: N = 2, W = 2 gives Omega = {3}.
  SieveConfig one = config(2, 1, {0}, {2});
  one.R_explicit = 2;
  one.F = SimplexPolynomial::constant(1, 1);
  const auto lt1 = lambda_table(one);
  const FactorTable t1(detail::table_limit(one));
  const auto sp1 = weighted_space(one, lt1, t1);
  ASSERT_EQ(sp1.members.size(), 1u);
  const Rational w0 = weight_w(sp1.members[0], one, lt1, t1);
  EXPECT_EQ(second_moment_ratio(one, sp1).sum_w2, w0 * w0);
}

TEST(ExceptionalScan, Thresholds) {
  const SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  const FactorTable t(detail::table_limit(cfg));
  const auto all = exceptional_scan(cfg, t, 0, 1, 0);
  EXPECT_EQ(all.excess, all.members);
  const unsigned high = static_cast<unsigned>(std::log2(3.0 * cfg.N)) + 1;
  EXPECT_EQ(exceptional_scan(cfg, t, 0, 1, high).excess, 0u);
  EXPECT_THROW(exceptional_scan(cfg, t, 0, 0, 1), Error);
}

TEST(ExceptionalScan, MatchesFactorizationOracle) {
  SieveConfig cfg = config(1'000'000, 1, {0}, {2, 3});
  const FactorTable t(detail::table_limit(cfg));
  const auto got = exceptional_scan(cfg, t, 0, 2, 3);
  u64 excess = 0, squarefull = 0, members = 0;
  for (u64 n : cfg.omega_members()) {
    ++members;
    const auto f = oracle::factor(n - 1);
    unsigned rho = 0;
    u64 sf = 1;
    for (auto [p, e] : f) {
      rho += e;
      if (e >= 2 && p > 3)
        for (unsigned i = 0; i < e; ++i) sf *= p;
    }
    excess += rho - f.size() >= 3;
    squarefull += sf >= 16;
  }
  EXPECT_EQ(got.members, members);
  EXPECT_EQ(got.excess, excess);
  EXPECT_EQ(got.squarefull, squarefull);
}

TEST(SieveConfig, RootBound) {
  SieveConfig cfg = config(100'000, 1, {0}, {2, 3});
  EXPECT_EQ(cfg.R_floor(), 10u);     // 10^5^(1/5) = 10 exactly
  EXPECT_EQ(cfg.support_max(), 9u);  // products strictly below R
  cfg.N = 10'000;
  EXPECT_EQ(cfg.R_floor(), 6u);
  EXPECT_EQ(cfg.support_max(), 6u);
}

TEST(SieveConfig, Validation) {
  SieveConfig cfg = config(10'000, 1, {0}, {2, 3});
  cfg.theta = Rational(1, 3);
  EXPECT_THROW(cfg.validate(), Error);
  cfg.theta = Rational(1, 5);
  cfg.p_bad = 3;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.p_bad = 1;
  cfg.R_cap = 3;
  try {
    cfg.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resource);
  }
}

TEST(RecoverY, InvertsLambda) {
  const SieveConfig cfg = config(100'000, 2, {0, 2}, {2, 3});
  const auto lt = lambda_table(cfg);
  const auto y = recover_y(cfg, lt);
  for (const auto& [r, v] : lt.y_values()) {
    auto it = y.find(r);
    ASSERT_NE(it, y.end());
    EXPECT_EQ(it->second, v);
  }
}
