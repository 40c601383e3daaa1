#pragma once
// Independent reference implementations used by the tests. Nothing here calls
// into the library except for plain types.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gmpxx.h>

namespace oracle {

using u64 = std::uint64_t;
__extension__ using u128 = unsigned __int128;

inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::vector<u64> primes_below(u64 hi) {
  std::vector<char> comp(hi > 2 ? hi : 2, 0);
  std::vector<u64> out;
  for (u64 i = 2; i < hi; ++i) {
    if (comp[i]) continue;
    out.push_back(i);
    for (u64 j = i * i; j < hi; j += i) comp[j] = 1;
  }
  return out;
}

inline std::vector<std::pair<u64, unsigned>> factor(u64 n) {
  std::vector<std::pair<u64, unsigned>> f;
  for (u64 p = 2; p * p <= n; ++p) {
    unsigned e = 0;
    while (n % p == 0) n /= p, ++e;
    if (e) f.emplace_back(p, e);
  }
  if (n > 1) f.emplace_back(n, 1);
  return f;
}

struct Values {
  u64 phi, omega, varrho, tau;
  u128 sigma;
};

inline Values values(u64 n) {
  Values v{1, 0, 0, 1, 1};
  for (auto [p, e] : factor(n)) {
    u128 pe = 1;
    for (unsigned i = 0; i < e; ++i) pe *= p;
    v.phi *= static_cast<u64>(pe / p * (p - 1));
    u128 s = 0, q = 1;
    for (unsigned i = 0; i <= e; ++i) s += q, q *= p;
    v.sigma *= s;
    v.omega += 1;
    v.varrho += e;
    v.tau *= e + 1;
  }
  return v;
}

inline u64 digit_sum(u64 n, u64 g) {
  u64 s = 0;
  for (; n; n /= g) s += n % g;
  return s;
}

inline u64 phi(u64 n) { return values(n).phi; }

inline int mobius(u64 n) {
  int m = 1;
  for (auto [p, e] : factor(n)) {
    if (e > 1) return 0;
    m = -m;
  }
  return m;
}

/// Maximal runs over `primes` (with trailing sentinel) of length >= min_len,
/// keeping only runs whose last prime is below `bound`.
struct Run {
  std::vector<u64> primes;
  std::vector<u128> values;
};

inline std::vector<Run> maximal_runs(const std::vector<u64>& primes, const std::vector<u128>& vals, int mode,
                                     std::size_t min_len, u64 bound) {
  auto rel = [&](u128 a, u128 b) { return mode == 0 ? a < b : mode == 1 ? a > b : a == b; };
  std::vector<Run> out;
  std::size_t s = 0;
  for (std::size_t i = 1; i <= primes.size(); ++i) {
    if (i < primes.size() && rel(vals[i - 1], vals[i])) continue;
    // run [s, i)
    if (i - s >= min_len && i < primes.size() && primes[i - 1] < bound) {
      Run r;
      r.primes.assign(primes.begin() + s, primes.begin() + i);
      r.values.assign(vals.begin() + s, vals.begin() + i);
      out.push_back(std::move(r));
    }
    s = i;
  }
  return out;
}

/// E(N; q) by direct count over [N, 2N).
inline mpq_class error_E(u64 N, u64 q) {
  std::vector<u64> counts(q, 0);
  u64 X = 0;
  for (u64 n = N; n < 2 * N; ++n)
    if (is_prime(n)) ++X, ++counts[n % q];
  u64 ph = phi(q);
  mpq_class worst = 0;
  for (u64 a = 0; a < q; ++a) {
    if (std::gcd(a, q) != 1) continue;
    mpq_class dev = mpq_class(static_cast<unsigned long>(counts[a])) - mpq_class(static_cast<unsigned long>(X), static_cast<unsigned long>(ph));
    dev.canonicalize();
    if (abs(dev) > worst) worst = abs(dev);
  }
  return 1 + worst;
}

/// Adaptive Gauss-Kronrod over [0, len], mapped onto [0, 1] so the relative
/// tolerance does not shrink with the interval.
template <class F>
double integrate_interval(F&& f, double len) {
  using boost::math::quadrature::gauss_kronrod;
  if (len <= 0) return 0.0;
  auto g = [&](double u) { return f(len * u); };
  return len * gauss_kronrod<double, 21>::integrate(g, 0.0, 1.0, 8, 1e-13);
}

/// Integral over the simplex {t_i >= 0, sum t_i <= 1} by nested adaptive
/// quadrature.
inline double simplex_integral(unsigned k, const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> t(k, 0.0);
  std::function<double(unsigned, double)> inner = [&](unsigned i, double rest) -> double {
    if (i == k) return f(t);
    return integrate_interval(
        [&](double x) {
          t[i] = x;
          return inner(i + 1, rest - x);
        },
        rest);
  };
  return inner(0, 1.0);
}

}  // namespace oracle
