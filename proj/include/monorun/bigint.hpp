#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <gmpxx.h>
#include <mpfr.h>

namespace monorun {

using u64 = std::uint64_t;
using i64 = std::int64_t;
__extension__ using u128 = unsigned __int128;

using Int = mpz_class;
using Rational = mpq_class;

inline Int to_int(u64 v) {
  Int r;
  mpz_import(r.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return r;
}

inline Int to_int(i64 v) {
  Int r = to_int(static_cast<u64>(v < 0 ? -static_cast<u128>(v) : v));
  return v < 0 ? Int(-r) : r;
}

inline Int to_int(u128 v) {
  Int hi = to_int(static_cast<u64>(v >> 64));
  Int lo = to_int(static_cast<u64>(v));
  return (hi << 64) + lo;
}

inline u64 to_u64(const Int& v) {
  u64 out = 0;
  std::size_t count = 0;
  mpz_export(&out, &count, -1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

inline bool fits_u64(const Int& v) { return sgn(v) >= 0 && mpz_sizeinbase(v.get_mpz_t(), 2) <= 64; }

inline std::string to_string(const Int& v) { return v.get_str(); }

inline std::string to_string(const Rational& v) { return v.get_str(); }

inline std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return s;
}

/// Exact rational value of a finite long double (no rounding).
inline Rational to_rational(long double x) {
  if (x == 0.0L) return Rational(0);
  int exp = 0;
  long double mant = std::frexp(std::fabs(x), &exp);  // mant in [0.5, 1)
  u64 bits = static_cast<u64>(std::ldexp(mant, 64));
  exp -= 64;
  Rational r(to_int(bits));
  if (exp > 0) {
    mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(exp));
  } else if (exp < 0) {
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-exp));
  }
  r.canonicalize();
  return x < 0 ? Rational(-r) : r;
}

inline double to_double(const Rational& r) { return r.get_d(); }

/// Nearest long double to a rational.
inline long double to_long_double(const Rational& r) {
  mpfr_t x;
  mpfr_init2(x, 64);
  mpfr_set_q(x, r.get_mpq_t(), MPFR_RNDN);
  const long double v = mpfr_get_ld(x, MPFR_RNDN);
  mpfr_clear(x);
  return v;
}

inline Int factorial(unsigned long n) {
  Int r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

}  // namespace monorun
