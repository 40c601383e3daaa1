#pragma once
/// @file core_arith.hpp
/// @brief Prime generation, factorization and the multiplicative / digit
///        functions evaluated at shifted primes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"

namespace monorun {

// ---------------------------------------------------------------------------
// Primality
// ---------------------------------------------------------------------------

inline u64 mul_mod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

/// Deterministic Miller-Rabin; the first twelve prime bases are exact below 3.3e24.
inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  constexpr u64 kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : kBases) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : kBases) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline bool is_prime(const Int& n) {
  if (sgn(n) <= 0) return false;
  if (fits_u64(n)) return is_prime_u64(to_u64(n));
  return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

// ---------------------------------------------------------------------------
// Small prime lists
// ---------------------------------------------------------------------------

/// All primes p <= limit, plain Eratosthenes on odd numbers.
inline std::vector<u64> primes_up_to(u64 limit) {
  std::vector<u64> out;
  if (limit < 2) return out;
  out.push_back(2);
  const u64 half = (limit - 1) / 2;  // index i <-> 2i+1, i >= 1
  std::vector<bool> composite(half + 1, false);
  for (u64 i = 1; i <= half; ++i) {
    if (composite[i]) continue;
    const u64 p = 2 * i + 1;
    out.push_back(p);
    for (u64 j = (p * p - 1) / 2; j <= half; j += p) composite[j] = true;
  }
  return out;
}

inline u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// ---------------------------------------------------------------------------
// Smallest-prime-factor table
// ---------------------------------------------------------------------------

inline constexpr u64 kDefaultTableBudget = 400'000'000;

/// Smallest-prime-factor table on [2, limit], built by a linear sieve.
/// Immutable after construction.
class FactorTable {
 public:
  explicit FactorTable(u64 limit, u64 budget = kDefaultTableBudget) : limit_(limit) {
    if (limit < 2) fail(ErrorKind::config, "factor table limit must be >= 2");
    if (limit > budget || limit >= (u64{1} << 32))
      fail(ErrorKind::config, "factor table limit " + std::to_string(limit) + " exceeds memory budget");
    spf_.assign(limit + 1, 0);
    for (u64 i = 2; i <= limit; ++i) {
      if (spf_[i] == 0) {
        spf_[i] = static_cast<std::uint32_t>(i);
        primes_.push_back(i);
      }
      const u64 si = spf_[i];
      for (u64 p : primes_) {
        if (p > si || p * i > limit) break;
        spf_[p * i] = static_cast<std::uint32_t>(p);
      }
    }
  }

  u64 limit() const noexcept { return limit_; }

  u64 spf(u64 n) const {
    if (n < 2 || n > limit_) fail(ErrorKind::usage, "spf argument out of table range");
    return spf_[n];
  }

  bool is_prime(u64 n) const { return n >= 2 && n <= limit_ && spf_[n] == n; }

  std::span<const u64> primes() const noexcept { return primes_; }

 private:
  u64 limit_;
  std::vector<std::uint32_t> spf_;
  std::vector<u64> primes_;
};

inline FactorTable build_factor_table(u64 limit, u64 budget = kDefaultTableBudget) {
  return FactorTable(limit, budget);
}

// ---------------------------------------------------------------------------
// Factorizations and arithmetic functions
// ---------------------------------------------------------------------------

struct PrimePower {
  u64 p;
  unsigned e;
  bool operator==(const PrimePower&) const = default;
};

/// Primes strictly increasing, exponents >= 1. The empty factorization is n = 1.
struct Factorization {
  std::vector<PrimePower> pairs;

  u64 value() const {
    u64 n = 1;
    for (auto [p, e] : pairs)
      for (unsigned i = 0; i < e; ++i) n *= p;
    return n;
  }
  std::size_t omega() const { return pairs.size(); }
  unsigned varrho() const {
    unsigned s = 0;
    for (const auto& pp : pairs) s += pp.e;
    return s;
  }
  bool squarefree() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const PrimePower& pp) { return pp.e == 1; });
  }
  bool operator==(const Factorization&) const = default;
};

inline Factorization factorize(u64 n, const FactorTable& t) {
  if (n < 1 || n > t.limit()) fail(ErrorKind::usage, "factorize: n=" + std::to_string(n) + " outside table range");
  Factorization f;
  while (n > 1) {
    const u64 p = t.spf(n);
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    f.pairs.push_back({p, e});
  }
  return f;
}

/// Factorization of n beyond the table: trial division by the cached table
/// primes, stopping early once the cofactor tests prime. Requires limit^2 >= n.
inline Factorization factorize_any(u64 n, const FactorTable& t) {
  if (n <= t.limit()) return factorize(n, t);
  if (static_cast<u128>(t.limit()) * t.limit() < n) fail(ErrorKind::usage, "factorize_any: n exceeds limit^2");
  Factorization f;
  for (u64 p : t.primes()) {
    if (n == 1) break;
    if (static_cast<u128>(p) * p > n) break;
    if (n % p == 0) {
      unsigned e = 0;
      while (n % p == 0) {
        n /= p;
        ++e;
      }
      f.pairs.push_back({p, e});
      if (n > 1 && is_prime_u64(n)) break;
    }
  }
  if (n > 1) f.pairs.push_back({n, 1});
  return f;
}

/// The five arithmetic functions used throughout. sigma is held in 128 bits:
/// sigma(n)/n < 60 for every n < 2^64, so no overflow is possible.
struct ArithValues {
  u64 phi = 1;
  u128 sigma = 1;
  u64 omega = 0;
  u64 varrho = 0;
  u64 tau = 1;
  bool operator==(const ArithValues&) const = default;
};

inline ArithValues arith_values(const Factorization& f) {
  ArithValues v;
  for (auto [p, e] : f.pairs) {
    u64 pe_1 = 1;  // p^(e-1)
    for (unsigned i = 1; i < e; ++i) pe_1 *= p;
    v.phi *= pe_1 * (p - 1);
    u128 s = 0, pk = 1;
    for (unsigned i = 0; i <= e; ++i) {
      s += pk;
      pk *= p;
    }
    v.sigma *= s;
    v.omega += 1;
    v.varrho += e;
    v.tau *= e + 1;
  }
  return v;
}

inline u64 digit_sum(u64 n, u64 g) {
  if (g < 2) fail(ErrorKind::usage, "digit_sum: base must be >= 2");
  u64 s = 0;
  while (n > 0) {
    s += n % g;
    n /= g;
  }
  return s;
}

inline u64 digit_sum(const Int& n, u64 g) {
  if (g < 2) fail(ErrorKind::usage, "digit_sum: base must be >= 2");
  if (sgn(n) < 0) fail(ErrorKind::usage, "digit_sum: n must be nonnegative");
  if (fits_u64(n)) return digit_sum(to_u64(n), g);
  Int q = n;
  u64 s = 0;
  while (sgn(q) > 0) s += mpz_fdiv_q_ui(q.get_mpz_t(), q.get_mpz_t(), g);
  return s;
}

/// Product of the prime powers p^e with e >= 2.
inline u64 squarefull_part(const Factorization& f) {
  u64 s = 1;
  for (auto [p, e] : f.pairs)
    if (e >= 2)
      for (unsigned i = 0; i < e; ++i) s *= p;
  return s;
}

// ---------------------------------------------------------------------------
// Segmented sieving
// ---------------------------------------------------------------------------

/// Segmented odd-only Eratosthenes. Base primes are cached up to sqrt(max_hi).
class SegmentedSieve {
 public:
  explicit SegmentedSieve(u64 max_hi) : max_hi_(max_hi), base_(primes_up_to(isqrt(max_hi) + 1)) {}

  u64 max_hi() const noexcept { return max_hi_; }
  std::span<const u64> base_primes() const noexcept { return base_; }

  /// Appends the primes in [lo, hi) to out, ascending.
  void primes(u64 lo, u64 hi, std::vector<u64>& out) const {
    if (hi > max_hi_) fail(ErrorKind::usage, "segment end beyond sieve reach");
    if (lo >= hi) return;
    if (lo <= 2 && hi > 2) out.push_back(2);
    u64 start = std::max<u64>(lo, 3) | 1;  // first odd >= max(lo,3)
    if (start >= hi) return;
    const u64 count = (hi - start + 1) / 2;  // odd numbers start, start+2, ...
    std::vector<char> composite(count, 0);
    for (u64 p : base_) {
      if (p == 2) continue;
      if (p * p >= hi) break;
      u64 first = std::max(p * p, (start + p - 1) / p * p);
      if ((first & 1) == 0) first += p;
      for (u64 m = first; m < hi; m += 2 * p) composite[(m - start) / 2] = 1;
    }
    for (u64 i = 0; i < count; ++i) {
      const u64 m = start + 2 * i;
      if (!composite[i] && m >= 2 && m < hi && m != 1) out.push_back(m);
    }
  }

 private:
  u64 max_hi_;
  std::vector<u64> base_;
};

/// All primes p with lo <= p < hi, ascending; segmented so hi may exceed any
/// in-memory table.
inline std::vector<u64> primes_in(u64 lo, u64 hi) {
  if (lo > hi) fail(ErrorKind::usage, "primes_in: lo > hi");
  std::vector<u64> out;
  if (hi <= 2) return out;
  SegmentedSieve sieve(hi);
  constexpr u64 kSegment = u64{1} << 20;
  for (u64 a = lo; a < hi; a += kSegment) sieve.primes(a, std::min(hi, a + kSegment), out);
  return out;
}

/// Arithmetic function selector for shifted-prime evaluation.
enum class ArithFn { phi, sigma, omega, tau };

inline u128 select(const ArithValues& v, ArithFn fn) {
  switch (fn) {
    case ArithFn::phi: return v.phi;
    case ArithFn::sigma: return v.sigma;
    case ArithFn::omega: return v.omega;
    case ArithFn::tau: return v.tau;
  }
  return 0;
}

/// Evaluates fn(p - 1) for each prime p of an ascending list lying in [lo, hi)
/// with a segmented factor sieve over [lo - 1, hi - 1). base_primes must cover
/// sqrt(hi).
inline std::vector<u128> shifted_values(std::span<const u64> primes, u64 lo, u64 hi,
                                        std::span<const u64> base_primes, ArithFn fn) {
  std::vector<u128> out(primes.size());
  if (primes.empty()) return out;
  const u64 a = lo == 0 ? 0 : lo - 1;  // m ranges over [a, b)
  const u64 b = hi - 1;
  const u64 len = b - a;
  std::vector<u64> rem(len);
  std::vector<ArithValues> acc(len);
  std::vector<char> wanted(len, 0);
  for (u64 p : primes) wanted[p - 1 - a] = 1;
  for (u64 i = 0; i < len; ++i) rem[i] = a + i;
  for (u64 q : base_primes) {
    if (q * q >= b) break;  // every m < b has at most one prime factor >= q left
    for (u64 m = (a + q - 1) / q * q; m < b; m += q) {
      const u64 i = m - a;
      if (!wanted[i] || m == 0) continue;
      unsigned e = 0;
      u64 pe = 1;
      u128 s = 1;
      while (rem[i] % q == 0) {
        rem[i] /= q;
        ++e;
        pe *= q;
        s += pe;
      }
      ArithValues& t = acc[i];
      t.phi *= pe / q * (q - 1);
      t.sigma *= s;
      t.omega += 1;
      t.varrho += e;
      t.tau *= e + 1;
    }
  }
  for (std::size_t j = 0; j < primes.size(); ++j) {
    const u64 i = primes[j] - 1 - a;
    ArithValues& t = acc[i];
    if (rem[i] > 1) {
      const u64 r = rem[i];
      t.phi *= r - 1;
      t.sigma *= static_cast<u128>(r) + 1;
      t.omega += 1;
      t.varrho += 1;
      t.tau *= 2;
    }
    out[j] = select(t, fn);
  }
  return out;
}

}  // namespace monorun
