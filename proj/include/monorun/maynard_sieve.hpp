#pragma once
/// @file maynard_sieve.hpp
/// @brief Maynard-Tao sieve weights on desk-scale configurations: the lambda
///        table, w(n), exact S1/S2, the induced probability space and the
///        empirical statistics computed on it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bigint.hpp"
#include "core_arith.hpp"
#include "errors.hpp"
#include "mk_optimizer.hpp"
#include "simplex_poly.hpp"
#include "tuple_engineering.hpp"

namespace monorun {

using DivisorTuple = std::vector<u64>;

struct SieveConfig {
  u64 N = 10'000;
  unsigned k = 1;
  Rational theta{1, 5};
  std::optional<u64> R_explicit;  ///< replaces N^theta when set
  AdmissibleTuple tuple{{0}};
  ResidueSelection selection;
  u64 p_bad = 1;
  SimplexPolynomial F = SimplexPolynomial::one_minus_sum(1);
  unsigned k_cap = 4;
  u64 R_cap = 10'000;

  u64 W() const {
    if (!fits_u64(selection.W)) fail(ErrorKind::resource, "W does not fit in 64 bits");
    return to_u64(selection.W);
  }
  u64 nu() const { return mod_floor(selection.nu, W()); }

  /// floor(N^theta), or the explicit R.
  u64 R_floor() const {
    if (R_explicit) return *R_explicit;
    return root_bound(false);
  }

  /// Largest admissible value of prod d_i: the integers strictly below R.
  u64 support_max() const {
    if (R_explicit) return *R_explicit - 1;
    return root_bound(true);
  }

  long double log_R() const {
    if (R_explicit) return std::log(static_cast<long double>(*R_explicit));
    return to_long_double(theta) * std::log(static_cast<long double>(N));
  }

  /// theta, or log R / log N when R is explicit.
  Rational effective_theta() const {
    if (!R_explicit) return theta;
    return to_rational(log_R() / std::log(static_cast<long double>(N)));
  }

  u64 coprime_modulus() const { return W() * p_bad; }

  i64 max_shift() const { return tuple.entries.empty() ? 0 : tuple.back(); }

  void validate() const {
    if (k == 0) fail(ErrorKind::usage, "sieve config: k must be positive");
    if (k > k_cap) fail(ErrorKind::resource, "sieve config: k=" + std::to_string(k) + " exceeds the cap " + std::to_string(k_cap));
    if (tuple.size() != k) fail(ErrorKind::usage, "sieve config: tuple size differs from k");
    if (F.dim() != k) fail(ErrorKind::usage, "sieve config: F must be a polynomial in k variables on the simplex");
    if (!R_explicit && (sgn(theta) <= 0 || theta >= Rational(1, 4)))
      fail(ErrorKind::usage, "sieve config: theta must lie in (0, 1/4)");
    if (R_explicit && *R_explicit < 2) fail(ErrorKind::usage, "sieve config: R must be at least 2");
    if (N < 2) fail(ErrorKind::usage, "sieve config: N must be at least 2");
    if (p_bad < 1) fail(ErrorKind::usage, "sieve config: p_bad must be at least 1");
    if (std::gcd(p_bad, W()) != 1) fail(ErrorKind::usage, "sieve config: gcd(p_bad, W) must be 1");
    if (tuple.front() + static_cast<i64>(N) < 2) fail(ErrorKind::usage, "sieve config: n + h_i must be at least 2");
    if (R_floor() > R_cap) fail(ErrorKind::resource, "sieve config: R=" + std::to_string(R_floor()) + " exceeds the cap " + std::to_string(R_cap));
    if (omega_members().empty()) fail(ErrorKind::usage, "sieve config: Omega is empty");
  }

  /// Omega = {N <= n < 2N : n = nu mod W}.
  std::vector<u64> omega_members() const {
    const u64 w = W(), r = nu();
    std::vector<u64> out;
    u64 n = N + (r + w - N % w) % w;
    for (; n < 2 * N; n += w) out.push_back(n);
    return out;
  }

 private:
  u64 root_bound(bool strict) const {
    const Int num = theta.get_num(), den = theta.get_den();
    const Int target = pow_int(to_int(N), to_u64(num));
    const u64 e = to_u64(den);
    u64 lo = 1, hi = 2;
    auto ok = [&](u64 m) { return strict ? pow_int(to_int(m), e) < target : pow_int(to_int(m), e) <= target; };
    while (ok(hi)) hi *= 2;
    while (hi - lo > 1) {
      const u64 mid = lo + (hi - lo) / 2;
      (ok(mid) ? lo : hi) = mid;
    }
    return lo;
  }

  static Int pow_int(const Int& b, u64 e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
  }
};

/// Squarefree d < bound (d <= support_max) coprime to m, with their prime factors.
struct SquarefreeEntry {
  u64 value = 1;
  std::vector<u64> primes;
};

inline std::vector<SquarefreeEntry> squarefree_coprime_upto(u64 max_value, u64 m) {
  std::vector<SquarefreeEntry> out;
  for (u64 d = 1; d <= max_value; ++d) {
    u64 rest = d;
    std::vector<u64> ps;
    bool ok = std::gcd(d, m) == 1;
    for (u64 p = 2; ok && p * p <= rest; ++p) {
      if (rest % p) continue;
      rest /= p;
      if (rest % p == 0) ok = false;
      ps.push_back(p);
    }
    if (!ok) continue;
    if (rest > 1) ps.push_back(rest);
    out.push_back({d, std::move(ps)});
  }
  return out;
}

inline std::vector<u64> squarefree_divisors(std::span<const u64> primes) {
  std::vector<u64> out{1};
  for (u64 p : primes) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] * p);
  }
  return out;
}

inline Rational mobius_times(u64 d, std::size_t omega) { return Rational(omega % 2 ? -static_cast<long>(d) : static_cast<long>(d)); }

class LambdaTable {
 public:
  const std::map<DivisorTuple, Rational>& values() const noexcept { return values_; }
  /// y-values F(log r_1 / log R, ...) on the admissible r-tuples.
  const std::map<DivisorTuple, Rational>& y_values() const noexcept { return y_; }

  Rational at(const DivisorTuple& d) const {
    auto it = values_.find(d);
    return it == values_.end() ? Rational(0) : it->second;
  }

  std::size_t size() const noexcept { return values_.size(); }

 private:
  friend LambdaTable lambda_table(const SieveConfig& cfg);
  std::map<DivisorTuple, Rational> values_;
  std::map<DivisorTuple, Rational> y_;
};

namespace detail {

/// Calls fn(tuple, prime lists) for every k-tuple of pairwise coprime entries
/// of `pool` with product <= bound.
inline void for_each_coprime_tuple(std::span<const SquarefreeEntry> pool, unsigned k, u64 bound,
                                   const std::function<void(const std::vector<const SquarefreeEntry*>&)>& fn) {
  std::vector<const SquarefreeEntry*> cur;
  std::function<void(u64, u64)> rec = [&](u64 product, u64 used) {
    if (cur.size() == k) {
      fn(cur);
      return;
    }
    for (const auto& e : pool) {
      if (product * e.value > bound) break;
      if (std::gcd(e.value, used) != 1) continue;
      cur.push_back(&e);
      rec(product * e.value, used * e.value);
      cur.pop_back();
    }
  };
  rec(1, 1);
}

inline Rational F_at(const SimplexPolynomial& F, std::span<const u64> r, long double log_R) {
  std::vector<Rational> t;
  t.reserve(r.size());
  for (u64 x : r) t.push_back(to_rational(std::log(static_cast<long double>(x)) / log_R));
  return F.evaluate(t);
}

inline u64 euler_phi_squarefree(std::span<const u64> primes) {
  u64 v = 1;
  for (u64 p : primes) v *= p - 1;
  return v;
}

}  // namespace detail

/// lambda_d = prod(mu(d_i) d_i) * sum_{d_i | r_i} y_r / prod phi(r_i).
inline LambdaTable lambda_table(const SieveConfig& cfg) {
  cfg.validate();
  const u64 bound = cfg.support_max();
  const long double log_R = cfg.log_R();
  const auto pool = squarefree_coprime_upto(bound, cfg.coprime_modulus());

  LambdaTable out;
  std::map<DivisorTuple, Rational> sums;
  detail::for_each_coprime_tuple(pool, cfg.k, bound, [&](const std::vector<const SquarefreeEntry*>& r) {
    DivisorTuple key;
    u64 phi = 1;
    for (const auto* e : r) {
      key.push_back(e->value);
      phi *= detail::euler_phi_squarefree(e->primes);
    }
    const Rational y = detail::F_at(cfg.F, key, log_R);
    if (sgn(y) == 0) return;
    out.y_[key] = y;
    const Rational contrib = y / Rational(static_cast<long>(phi));
    std::vector<std::vector<u64>> divs;
    for (const auto* e : r) divs.push_back(squarefree_divisors(e->primes));
    DivisorTuple d(cfg.k);
    std::function<void(unsigned)> rec = [&](unsigned i) {
      if (i == cfg.k) {
        sums[d] += contrib;
        return;
      }
      for (u64 x : divs[i]) {
        d[i] = x;
        rec(i + 1);
      }
    };
    rec(0);
  });

  for (auto& [d, s] : sums) {
    if (sgn(s) == 0) continue;
    Rational scale = 1;
    for (u64 x : d) {
      std::size_t omega = 0;
      for (u64 y = x, p = 2; y > 1; ++p)
        if (y % p == 0) {
          ++omega;
          while (y % p == 0) y /= p;
        }
      scale *= mobius_times(x, omega);
    }
    out.values_.emplace(d, s * scale);
  }
  return out;
}

/// Divisors of m that may carry a nonzero lambda entry: squarefree, coprime to
/// W * p_bad and at most support_max.
inline std::vector<u64> lambda_divisors(u64 m, const SieveConfig& cfg, const FactorTable& t) {
  const Factorization f = factorize(m, t);
  std::vector<u64> ps;
  const u64 cm = cfg.coprime_modulus();
  for (const auto& pp : f.pairs)
    if (cm % pp.p != 0) ps.push_back(pp.p);
  std::vector<u64> divs = squarefree_divisors(ps);
  std::erase_if(divs, [&](u64 d) { return d > cfg.support_max(); });
  std::sort(divs.begin(), divs.end());
  return divs;
}

namespace detail {

inline Rational lambda_sum(u64 n, const SieveConfig& cfg, const LambdaTable& lt, const FactorTable& t) {
  std::vector<std::vector<u64>> divs;
  for (i64 h : cfg.tuple.entries) divs.push_back(lambda_divisors(static_cast<u64>(static_cast<i64>(n) + h), cfg, t));
  const u64 bound = cfg.support_max();
  Rational s = 0;
  DivisorTuple d(cfg.k);
  std::function<void(unsigned, u64)> rec = [&](unsigned i, u64 product) {
    if (i == cfg.k) {
      auto it = lt.values().find(d);
      if (it != lt.values().end()) s += it->second;
      return;
    }
    for (u64 x : divs[i]) {
      if (product * x > bound) break;
      d[i] = x;
      rec(i + 1, product * x);
    }
  };
  rec(0, 1);
  return s;
}

inline u64 table_limit(const SieveConfig& cfg) { return 2 * cfg.N + static_cast<u64>(std::max<i64>(cfg.max_shift(), 0)) + 1; }

}  // namespace detail

/// w(n) = (sum over divisor tuples d_i | n + h_i of lambda_d)^2.
inline Rational weight_w(u64 n, const SieveConfig& cfg, const LambdaTable& lt, const FactorTable& t) {
  if (n < cfg.N || n >= 2 * cfg.N || n % cfg.W() != cfg.nu()) fail(ErrorKind::usage, "weight_w: n is not in Omega");
  const Rational s = detail::lambda_sum(n, cfg, lt, t);
  return s * s;
}

inline Rational weight_w(u64 n, const SieveConfig& cfg, const LambdaTable& lt) {
  return weight_w(n, cfg, lt, FactorTable(detail::table_limit(cfg)));
}

struct WeightedSpace {
  std::vector<u64> members;
  std::vector<Rational> weights;
  std::vector<unsigned> prime_counts;  ///< number of primes among n + h_i
  Rational total;                      ///< S1
};

/// Computes w(n) over Omega. Members are split into contiguous chunks across
/// threads and reduced in order.
inline WeightedSpace weighted_space(const SieveConfig& cfg, const LambdaTable& lt, const FactorTable& t,
                                    unsigned threads = 1) {
  cfg.validate();
  if (t.limit() < detail::table_limit(cfg)) fail(ErrorKind::usage, "weighted_space: factor table too small");
  WeightedSpace sp;
  sp.members = cfg.omega_members();
  const std::size_t n = sp.members.size();
  sp.weights.resize(n);
  sp.prime_counts.resize(n);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const Rational s = detail::lambda_sum(sp.members[j], cfg, lt, t);
      sp.weights[j] = s * s;
      unsigned c = 0;
      for (i64 h : cfg.tuple.entries) c += t.is_prime(static_cast<u64>(static_cast<i64>(sp.members[j]) + h));
      sp.prime_counts[j] = c;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work, std::min(n, i * chunk), std::min(n, (i + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  sp.total = 0;
  for (const auto& w : sp.weights) sp.total += w;
  return sp;
}

/// The space with w = 1 on every member.
inline WeightedSpace uniform_space(const SieveConfig& cfg, const FactorTable& t) {
  WeightedSpace sp;
  sp.members = cfg.omega_members();
  sp.weights.assign(sp.members.size(), Rational(1));
  for (u64 n : sp.members) {
    unsigned c = 0;
    for (i64 h : cfg.tuple.entries) c += t.is_prime(static_cast<u64>(static_cast<i64>(n) + h));
    sp.prime_counts.push_back(c);
  }
  sp.total = static_cast<long>(sp.members.size());
  return sp;
}

struct SieveSums {
  Rational S1;
  Rational S2;
  Rational EX;
  std::vector<Rational> prob_table;  ///< index K: probability that X >= K

  Rational prob_at_least(std::size_t K) const { return K < prob_table.size() ? prob_table[K] : Rational(0); }
};

inline SieveSums compute_S1_S2(const SieveConfig& cfg, const WeightedSpace& sp) {
  if (sgn(sp.total) == 0) fail(ErrorKind::degenerate, "S1 = 0: every weight vanishes");
  SieveSums out;
  out.S1 = sp.total;
  out.S2 = 0;
  std::vector<Rational> at_count(cfg.k + 1, Rational(0));
  for (std::size_t j = 0; j < sp.members.size(); ++j) {
    out.S2 += sp.weights[j] * sp.prime_counts[j];
    at_count[sp.prime_counts[j]] += sp.weights[j];
  }
  out.EX = out.S2 / out.S1;
  out.prob_table.assign(cfg.k + 1, Rational(0));
  Rational tail = 0;
  for (std::size_t K = cfg.k + 1; K-- > 0;) {
    tail += at_count[K];
    out.prob_table[K] = tail / out.S1;
  }
  return out;
}

/// Lower bound on P(X >= K) from the expectation: (EX - (K - 1)) / k.
inline Rational probability_lower_bound(const SieveSums& s, unsigned k, long K) {
  return (s.EX - Rational(K - 1)) / Rational(static_cast<long>(k));
}

namespace detail {

/// n = a mod m combined with n = b mod q; nullopt when inconsistent.
inline std::optional<std::pair<Int, Int>> crt_merge(const Int& a, const Int& m, const Int& b, const Int& q) {
  Int g, s, t;
  mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), m.get_mpz_t(), q.get_mpz_t());
  const Int diff = b - a;
  if (!mpz_divisible_p(diff.get_mpz_t(), g.get_mpz_t())) return std::nullopt;
  const Int l = m / g * q;
  Int x = a + m * ((diff / g * s) % (q / g));
  mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), l.get_mpz_t());
  return std::make_pair(x, l);
}

inline u64 count_in_range(const Int& a, const Int& L, u64 lo, u64 hi) {
  auto upto = [&](u64 x) {  // #{0 <= n < x : n = a mod L}
    Int c = (to_int(x) + L - 1 - a) / L;
    return sgn(c) > 0 ? to_u64(c) : u64{0};
  };
  return upto(hi) - upto(lo);
}

inline u64 lcm_u64(u64 a, u64 b) { return a / std::gcd(a, b) * b; }

}  // namespace detail

struct RearrangedS1 {
  Rational value;
  std::size_t pairs = 0;
  std::size_t nonempty_noncoprime = 0;  ///< pairs with non-coprime moduli yet a nonempty count
};

/// sum_{d, e} lambda_d lambda_e #{n in Omega : [d_i, e_i] | n + h_i for all i}.
inline RearrangedS1 rearranged_S1(const SieveConfig& cfg, const LambdaTable& lt) {
  RearrangedS1 out;
  out.value = 0;
  const Int W = to_int(cfg.W()), nu = to_int(cfg.nu());
  for (const auto& [d, ld] : lt.values())
    for (const auto& [e, le] : lt.values()) {
      ++out.pairs;
      std::vector<u64> mods(cfg.k);
      bool coprime = true;
      std::optional<std::pair<Int, Int>> cls = std::make_pair(nu, W);
      for (unsigned i = 0; i < cfg.k && cls; ++i) {
        mods[i] = detail::lcm_u64(d[i], e[i]);
        if (std::gcd(mods[i], cfg.W()) != 1) coprime = false;
        for (unsigned j = 0; j < i; ++j)
          if (std::gcd(mods[i], mods[j]) != 1) coprime = false;
        const Int m = to_int(mods[i]);
        Int r = -to_int(cfg.tuple.entries[i]);
        mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
        cls = detail::crt_merge(cls->first, cls->second, r, m);
      }
      if (!cls) continue;
      const u64 count = detail::count_in_range(cls->first, cls->second, cfg.N, 2 * cfg.N);
      if (count == 0) continue;
      if (!coprime) ++out.nonempty_noncoprime;
      out.value += ld * le * Rational(static_cast<long>(count));
    }
  return out;
}

struct SievePrediction {
  long double S1 = 0;
  long double S2 = 0;
  Rational I;
  Rational J_total;
  Rational ratio_limit;  ///< theta * sum J / I
};

inline SievePrediction predicted_S1_S2(const SieveConfig& cfg) {
  SievePrediction out;
  out.I = I_functional(cfg.F);
  if (sgn(out.I) == 0) fail(ErrorKind::usage, "predicted_S1_S2: I_k(F) vanishes");
  out.J_total = 0;
  for (unsigned m = 1; m <= cfg.k; ++m) {
    const Rational j = J_functional(cfg.F, m);
    if (sgn(j) == 0) fail(ErrorKind::usage, "predicted_S1_S2: J_k^(" + std::to_string(m) + ")(F) vanishes");
    out.J_total += j;
  }
  const long double W = static_cast<long double>(cfg.W());
  long double phiW = 1;
  for (u64 p : cfg.selection.primes()) phiW *= static_cast<long double>(p - 1);
  const long double N = static_cast<long double>(cfg.N), logR = cfg.log_R(), logN = std::log(N);
  const long double front = std::pow(phiW, cfg.k) / std::pow(W, cfg.k + 1);
  out.S1 = front * N * std::pow(logR, cfg.k) * to_long_double(out.I);
  out.S2 = front * (N / logN) * std::pow(logR, cfg.k + 1) * to_long_double(out.J_total);
  out.ratio_limit = cfg.effective_theta() * out.J_total / out.I;
  return out;
}

/// E(N; q) = 1 + max over reduced a mod q of |#{N <= p < 2N, p = a mod q} - X_N / phi(q)|.
inline Rational error_E(std::span<const u64> primes_N_2N, u64 q) {
  if (q < 1) fail(ErrorKind::usage, "error_E: q must be positive");
  std::vector<u64> counts(q, 0);
  for (u64 p : primes_N_2N) ++counts[p % q];
  u64 phi = 0;
  for (u64 a = 0; a < q; ++a) phi += std::gcd(a, q) == 1;
  Rational mean(static_cast<long>(primes_N_2N.size()), static_cast<long>(phi));
  mean.canonicalize();
  Rational worst = 0;
  for (u64 a = 0; a < q; ++a) {
    if (std::gcd(a, q) != 1) continue;
    Rational dev = Rational(static_cast<long>(counts[a])) - mean;
    if (sgn(dev) < 0) dev = -dev;
    if (dev > worst) worst = dev;
  }
  return 1 + worst;
}

inline Rational error_E(u64 N, u64 q) { return error_E(primes_in(N, 2 * N), q); }

struct BvScan {
  Rational sum;
  std::vector<std::pair<u64, Rational>> terms;  ///< (d, E(N; dP))
};

/// sum over d <= d_max with gcd(d, P p_bad) = 1 of E(N; dP).
inline BvScan bv_scan(u64 N, u64 P, u64 d_max, u64 p_bad = 1) {
  if (P < 1 || p_bad < 1) fail(ErrorKind::usage, "bv_scan: P and p_bad must be positive");
  if (std::gcd(P, p_bad) != 1) fail(ErrorKind::usage, "bv_scan: gcd(P, p_bad) must be 1");
  BvScan out;
  out.sum = 0;
  if (d_max == 0) return out;
  const auto primes = primes_in(N, 2 * N);
  for (u64 d = 1; d <= d_max; ++d) {
    if (std::gcd(d, P * p_bad) != 1) continue;
    Rational e = error_E(primes, d * P);
    out.sum += e;
    out.terms.emplace_back(d, std::move(e));
  }
  return out;
}

/// Weighted mean of sum_{p | n + h_i - 1, lo <= p <= hi} log(p / phi(p)). i is zero-based.
inline long double log_ratio_expectation(const SieveConfig& cfg, const WeightedSpace& sp, const FactorTable& t,
                                         unsigned i, u64 lo, u64 hi) {
  if (i >= cfg.k) fail(ErrorKind::usage, "log_ratio_expectation: index out of range");
  if (sgn(sp.total) == 0) fail(ErrorKind::degenerate, "log_ratio_expectation: total weight is zero");
  if (lo > hi) return 0;
  long double acc = 0;
  for (std::size_t j = 0; j < sp.members.size(); ++j) {
    const u64 m = static_cast<u64>(static_cast<i64>(sp.members[j]) + cfg.tuple.entries[i]) - 1;
    long double s = 0;
    for (const auto& pp : factorize(m, t).pairs)
      if (pp.p >= lo && pp.p <= hi) s += std::log(static_cast<long double>(pp.p) / static_cast<long double>(pp.p - 1));
    acc += s * to_long_double(sp.weights[j]);
  }
  return acc / to_long_double(sp.total);
}

/// (log N / (log log N)^2, N^{1 / log log N}].
inline std::pair<long double, long double> default_omega_interval(u64 N) {
  const long double l = std::log(static_cast<long double>(N)), ll = std::log(l);
  return {l / (ll * ll), std::exp(l / ll)};
}

/// Weighted mean of #{p | n + h_i - 1 : lo < p <= hi}. i is zero-based.
inline Rational omega_tilde_expectation(const SieveConfig& cfg, const WeightedSpace& sp, const FactorTable& t,
                                        unsigned i, long double lo, long double hi) {
  if (i >= cfg.k) fail(ErrorKind::usage, "omega_tilde_expectation: index out of range");
  if (sgn(sp.total) == 0) fail(ErrorKind::degenerate, "omega_tilde_expectation: total weight is zero");
  if (!(lo < hi)) return 0;
  Rational acc = 0;
  for (std::size_t j = 0; j < sp.members.size(); ++j) {
    const u64 m = static_cast<u64>(static_cast<i64>(sp.members[j]) + cfg.tuple.entries[i]) - 1;
    long c = 0;
    for (const auto& pp : factorize(m, t).pairs) {
      const long double p = static_cast<long double>(pp.p);
      c += p > lo && p <= hi;
    }
    if (c) acc += sp.weights[j] * Rational(c);
  }
  return acc / sp.total;
}

struct SecondMoment {
  Rational sum_w2;
  long double ratio = 0;  ///< sum w^2 / ((N / W) (log R)^{19k})
};

inline SecondMoment second_moment_ratio(const SieveConfig& cfg, const WeightedSpace& sp) {
  SecondMoment out;
  out.sum_w2 = 0;
  for (const auto& w : sp.weights) out.sum_w2 += w * w;
  const long double scale = static_cast<long double>(cfg.N) / static_cast<long double>(cfg.W()) *
                            std::pow(cfg.log_R(), 19.0L * cfg.k);
  out.ratio = to_long_double(out.sum_w2) / scale;
  return out;
}

/// floor(log log N * log log log log N / 4), clamped below at 0.
inline long default_B(u64 N) {
  const long double v = iterated_log(static_cast<long double>(N), 2) * iterated_log(static_cast<long double>(N), 4) / 4;
  return std::isfinite(v) && v > 0 ? static_cast<long>(std::floor(v)) : 0;
}

struct ExceptionalCounts {
  u64 members = 0;
  u64 excess = 0;      ///< varrho - omega >= threshold
  u64 squarefull = 0;  ///< squarefull part (away from W) >= 2^{2B}
  long double target = 0;  ///< N / (W (log N)^A)
};

inline ExceptionalCounts exceptional_scan(const SieveConfig& cfg, const FactorTable& t, unsigned i, long B,
                                          unsigned threshold, long double A = 1) {
  if (i >= cfg.k) fail(ErrorKind::usage, "exceptional_scan: index out of range");
  if (B < 1) fail(ErrorKind::usage, "exceptional_scan: B must be at least 1");
  ExceptionalCounts out;
  const u64 W = cfg.W();
  const long double cut = std::ldexp(1.0L, static_cast<int>(2 * B));
  for (u64 n : cfg.omega_members()) {
    ++out.members;
    const u64 m = static_cast<u64>(static_cast<i64>(n) + cfg.tuple.entries[i]) - 1;
    const Factorization f = factorize(m, t);
    if (f.varrho() - f.omega() >= threshold) ++out.excess;
    Factorization away;
    for (const auto& pp : f.pairs)
      if (W % pp.p != 0) away.pairs.push_back(pp);
    if (static_cast<long double>(squarefull_part(away)) >= cut) ++out.squarefull;
  }
  const long double N = static_cast<long double>(cfg.N);
  out.target = N / (static_cast<long double>(W) * std::pow(std::log(N), A));
  return out;
}

/// y_r = prod(mu(r_i) phi(r_i)) * sum_{r_i | d_i} lambda_d / prod d_i.
inline std::map<DivisorTuple, Rational> recover_y(const SieveConfig& cfg, const LambdaTable& lt) {
  const auto pool = squarefree_coprime_upto(cfg.support_max(), cfg.coprime_modulus());
  std::map<DivisorTuple, Rational> out;
  detail::for_each_coprime_tuple(pool, cfg.k, cfg.support_max(), [&](const std::vector<const SquarefreeEntry*>& r) {
    Rational s = 0;
    for (const auto& [d, l] : lt.values()) {
      bool divides = true;
      u64 prod = 1;
      for (unsigned i = 0; i < cfg.k && divides; ++i) {
        divides = d[i] % r[i]->value == 0;
        prod *= d[i];
      }
      if (divides) s += l / Rational(static_cast<long>(prod));
    }
    if (sgn(s) == 0) return;
    Rational scale = 1;
    DivisorTuple key;
    for (const auto* e : r) {
      key.push_back(e->value);
      const long phi = static_cast<long>(detail::euler_phi_squarefree(e->primes));
      scale *= Rational(e->primes.size() % 2 ? -phi : phi);
    }
    out.emplace(std::move(key), s * scale);
  });
  return out;
}

inline nlohmann::json sieve_results_json(const SieveConfig& cfg, const SieveSums& s, const SievePrediction& p) {
  nlohmann::json prob = nlohmann::json::array();
  for (std::size_t K = 0; K < s.prob_table.size(); ++K)
    prob.push_back({{"K", K}, {"prob", s.prob_table[K].get_str()}, {"prob_approx", s.prob_table[K].get_d()}});
  const long double S1 = to_long_double(s.S1), S2 = to_long_double(s.S2);
  return {
      {"N", cfg.N},
      {"k", cfg.k},
      {"R", cfg.R_floor()},
      {"W", cfg.selection.W.get_str()},
      {"nu", cfg.selection.nu.get_str()},
      {"S1", s.S1.get_str()},
      {"S2", s.S2.get_str()},
      {"EX", s.EX.get_str()},
      {"EX_approx", s.EX.get_d()},
      {"prob_table", prob},
      {"predicted", {{"S1", static_cast<double>(p.S1)}, {"S2", static_cast<double>(p.S2)}, {"ratio_limit", p.ratio_limit.get_str()}}},
      {"ratios",
       {{"S1_over_predicted", static_cast<double>(S1 / p.S1)},
        {"S2_over_predicted", static_cast<double>(S2 / p.S2)},
        {"EX_over_ratio_limit", static_cast<double>(to_long_double(s.EX) / to_long_double(p.ratio_limit))}}},
  };
}

}  // namespace monorun
