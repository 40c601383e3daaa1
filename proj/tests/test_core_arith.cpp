#include <random>

#include <gtest/gtest.h>

#include <monorun/core_arith.hpp>

#include "oracles.hpp"

using namespace monorun;

TEST(FactorTable, SmallestPrimeFactors) {
  const auto t = build_factor_table(10);
  EXPECT_EQ(t.spf(4), 2u);
  EXPECT_EQ(t.spf(9), 3u);
  EXPECT_EQ(t.spf(7), 7u);
  EXPECT_EQ(build_factor_table(2).spf(2), 2u);
}

TEST(FactorTable, RejectsOversizedLimit) {
  try {
    build_factor_table(1'000'000, 1000);
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(FactorTable, RandomPointsAgainstTrialDivision) {
  const auto t = build_factor_table(100'000'000);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10'000; ++i) {
    const u64 n = 2 + rng() % (100'000'000 - 1);
    EXPECT_EQ(t.spf(n), oracle::factor(n).front().first) << n;
  }
}

TEST(Factorize, Examples) {
  const auto t = build_factor_table(1000);
  EXPECT_EQ(factorize(12, t).pairs, (std::vector<PrimePower>{{2, 2}, {3, 1}}));
  EXPECT_EQ(factorize(97, t).pairs, (std::vector<PrimePower>{{97, 1}}));
  EXPECT_EQ(factorize(720, t).pairs, (std::vector<PrimePower>{{2, 4}, {3, 2}, {5, 1}}));
  EXPECT_TRUE(factorize(1, t).pairs.empty());
}

TEST(Factorize, ValueRoundTrips) {
  const auto t = build_factor_table(50'000);
  for (u64 n = 1; n <= 50'000; ++n) {
    const auto f = factorize(n, t);
    ASSERT_EQ(f.value(), n);
    for (std::size_t i = 1; i < f.pairs.size(); ++i) ASSERT_LT(f.pairs[i - 1].p, f.pairs[i].p);
  }
}

TEST(Factorize, BeyondTheTable) {
  const auto t = build_factor_table(1'000'000);
  const u64 n = 999'983ull * 1'000'003ull;
  const auto f = factorize_any(n, t);
  EXPECT_EQ(f.pairs, (std::vector<PrimePower>{{999'983, 1}, {1'000'003, 1}}));
  EXPECT_EQ(factorize_any(4 * 1'000'003ull, build_factor_table(2100)).pairs.size(), 2u);
  EXPECT_THROW(factorize_any(n, build_factor_table(1000)), Error);
}

TEST(ArithValues, Examples) {
  const auto t = build_factor_table(5000);
  const auto one = arith_values(factorize(1, t));
  EXPECT_EQ(one.phi, 1u);
  EXPECT_EQ(one.sigma, 1u);
  EXPECT_EQ(one.omega, 0u);
  EXPECT_EQ(one.varrho, 0u);
  EXPECT_EQ(one.tau, 1u);

  const auto v12 = arith_values(factorize(12, t));
  const auto o12 = oracle::values(12);
  EXPECT_EQ(v12.phi, o12.phi);
  EXPECT_EQ(v12.sigma, o12.sigma);
  EXPECT_EQ(v12.omega, o12.omega);
  EXPECT_EQ(v12.varrho, o12.varrho);
  EXPECT_EQ(v12.tau, o12.tau);
  EXPECT_EQ(v12.phi, 4u);
  EXPECT_EQ(v12.sigma, 28u);
  EXPECT_EQ(v12.tau, 6u);

  const auto v1024 = arith_values(factorize(1024, t));
  EXPECT_EQ(v1024.phi, 512u);
  EXPECT_EQ(v1024.sigma, 2047u);
  EXPECT_EQ(v1024.omega, 1u);
  EXPECT_EQ(v1024.varrho, 10u);
  EXPECT_EQ(v1024.tau, 11u);
}

TEST(ArithValues, MatchesOracleAndBounds) {
  const auto t = build_factor_table(100'000);
  for (u64 n = 1; n <= 100'000; ++n) {
    const auto f = factorize(n, t);
    const auto v = arith_values(f);
    const auto o = oracle::values(n);
    ASSERT_EQ(v.phi, o.phi) << n;
    ASSERT_EQ(v.sigma, o.sigma) << n;
    ASSERT_EQ(v.omega, o.omega) << n;
    ASSERT_EQ(v.varrho, o.varrho) << n;
    ASSERT_EQ(v.tau, o.tau) << n;
    ASSERT_LE(u64{1} << v.omega, v.tau);
    ASSERT_LE(v.tau, u64{1} << v.varrho);
    ASSERT_EQ((u64{1} << v.omega) == v.tau, f.squarefree()) << n;
    ASSERT_LE(v.phi, n);
    ASSERT_GE(v.sigma, static_cast<u128>(n));
  }
}

TEST(ArithValues, Multiplicative) {
  const auto t = build_factor_table(1'000'000);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const u64 a = 1 + rng() % 999, b = 1 + rng() % 999;
    if (std::gcd(a, b) != 1) continue;
    const auto va = arith_values(factorize(a, t)), vb = arith_values(factorize(b, t));
    const auto vab = arith_values(factorize(a * b, t));
    ASSERT_EQ(vab.phi, va.phi * vb.phi);
    ASSERT_EQ(vab.sigma, va.sigma * vb.sigma);
    ASSERT_EQ(vab.tau, va.tau * vb.tau);
    ASSERT_EQ(vab.omega, va.omega + vb.omega);
    ASSERT_EQ(vab.varrho, va.varrho + vb.varrho);
  }
}

TEST(DigitSum, Examples) {
  EXPECT_EQ(digit_sum(523, 10), 10u);
  EXPECT_EQ(digit_sum(255, 16), 30u);
  EXPECT_EQ(digit_sum(1023, 2), 10u);
  EXPECT_EQ(digit_sum(0, 10), 0u);
  EXPECT_EQ(digit_sum(Int("123456789012345678901234567890"), 10), 135u);
}

TEST(DigitSum, CongruentModBaseMinusOne) {
  for (u64 g : {3, 7, 10, 16})
    for (u64 n = 0; n < 20'000; ++n) {
      ASSERT_EQ(digit_sum(n, g) % (g - 1), n % (g - 1));
      ASSERT_EQ(digit_sum(n, g), oracle::digit_sum(n, g));
    }
}

TEST(DigitSum, RejectsBaseOne) { EXPECT_THROW(digit_sum(5, 1), Error); }

TEST(SquarefullPart, Examples) {
  const auto t = build_factor_table(1000);
  EXPECT_EQ(squarefull_part(factorize(12, t)), 4u);
  EXPECT_EQ(squarefull_part(factorize(30, t)), 1u);
  EXPECT_EQ(squarefull_part(factorize(720, t)), 144u);
}

TEST(SquarefullPart, DividesAndLeavesSquarefreeCofactor) {
  const auto t = build_factor_table(20'000);
  for (u64 n = 1; n <= 20'000; ++n) {
    const u64 s = squarefull_part(factorize(n, t));
    ASSERT_EQ(n % s, 0u);
    const u64 c = n / s;
    ASSERT_EQ(std::gcd(c, s), 1u);
    ASSERT_TRUE(factorize(c, t).squarefree());
  }
}

TEST(PrimesIn, Examples) {
  EXPECT_EQ(primes_in(10, 20), (std::vector<u64>{11, 13, 17, 19}));
  EXPECT_EQ(primes_in(2, 3), (std::vector<u64>{2}));
  EXPECT_TRUE(primes_in(20, 20).empty());
}

TEST(PrimesIn, CountBelowTenMillion) {
  EXPECT_EQ(primes_in(1, 10'000'000).size(), 664'579u);
  EXPECT_EQ(oracle::primes_below(10'000'000).size(), 664'579u);
}

TEST(PrimesIn, SegmentsAgreeWithOracle) {
  const auto ref = oracle::primes_below(200'000);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    u64 lo = rng() % 200'000, hi = rng() % 200'001;
    if (lo > hi) std::swap(lo, hi);
    std::vector<u64> expect;
    for (u64 p : ref)
      if (p >= lo && p < hi) expect.push_back(p);
    ASSERT_EQ(primes_in(lo, hi), expect) << lo << " " << hi;
  }
}

TEST(Primality, MillerRabinAgreesWithTrialDivision) {
  for (u64 n = 0; n < 100'000; ++n) ASSERT_EQ(is_prime_u64(n), oracle::is_prime(n)) << n;
  EXPECT_TRUE(is_prime_u64(18'446'744'073'709'551'557ull));
  EXPECT_FALSE(is_prime_u64(3'215'031'751ull));
  EXPECT_TRUE(is_prime(Int("170141183460469231731687303715884105727")));
}

TEST(Isqrt, Exact) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10'000; ++i) {
    const u64 n = rng();
    const u64 r = isqrt(n);
    ASSERT_LE(static_cast<u128>(r) * r, n);
    ASSERT_GT(static_cast<u128>(r + 1) * (r + 1), n);
  }
}
