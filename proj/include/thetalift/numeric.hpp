#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace thetalift {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using Cplx = std::complex<double>;

inline Int rat_num(const Rat& r) { return numerator(r); }
inline Int rat_den(const Rat& r) { return denominator(r); }

inline long to_long(const Int& n) {
  if (n > std::numeric_limits<long>::max() || n < std::numeric_limits<long>::min())
    throw std::overflow_error("to_long: value out of range");
  return static_cast<long>(n);
}

inline double to_double(const Int& n) { return n.convert_to<double>(); }
inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Int ipow(Int b, unsigned e) {
  Int r = 1;
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline Int powmod(Int b, Int e, const Int& m) {
  Int r = 1;
  b %= m;
  if (b < 0) b += m;
  while (e > 0) {
    if (bit_test(e, 0)) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

inline Int invmod(const Int& a, const Int& m) {
  Int old_r = a % m, r = m, old_s = 1, s = 0;
  if (old_r < 0) old_r += m;
  while (r != 0) {
    Int q = old_r / r;
    Int t = old_r - q * r; old_r = r; r = t;
    t = old_s - q * s; old_s = s; s = t;
  }
  if (old_r != 1) throw std::domain_error("invmod: not invertible");
  old_s %= m;
  if (old_s < 0) old_s += m;
  return old_s;
}

// Kronecker symbol (a|n), n can be any integer.
inline int kronecker(Int a, Int n) {
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  if (a % 2 == 0 && n % 2 == 0) return 0;
  int k = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) k = -k;
  }
  int v = 0;
  while (n % 2 == 0) { n /= 2; ++v; }
  if (v % 2 != 0) {
    Int am8 = ((a % 8) + 8) % 8;
    if (am8 == 3 || am8 == 5) k = -k;
  }
  a %= n;
  if (a < 0) a += n;
  while (a != 0) {
    v = 0;
    while (a % 2 == 0) { a /= 2; ++v; }
    if (v % 2 != 0) {
      Int nm8 = n % 8;
      if (nm8 == 3 || nm8 == 5) k = -k;
    }
    if (a % 4 == 3 && n % 4 == 3) k = -k;
    Int t = n % a;
    n = a;
    a = t;
  }
  return (n == 1) ? k : 0;
}

inline bool is_prime(long n) {
  if (n < 2) return false;
  for (long p : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L, 31L}) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  // deterministic Miller-Rabin for 64-bit range
  long d = n - 1;
  int s = 0;
  while (d % 2 == 0) { d /= 2; ++s; }
  for (long a : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L, 31L, 37L}) {
    if (a % n == 0) continue;
    Int x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int i = 0; i + 1 < s; ++i) {
      x = x * x % n;
      if (x == n - 1) { comp = false; break; }
    }
    if (comp) return false;
  }
  return true;
}

inline std::vector<std::pair<long, int>> factorize(long n) {
  std::vector<std::pair<long, int>> fac;
  for (long p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
    if (n % p == 0) {
      int e = 0;
      while (n % p == 0) { n /= p; ++e; }
      fac.push_back({p, e});
    }
  }
  if (n > 1) fac.push_back({n, 1});
  return fac;
}

inline long euler_phi(long n) {
  long r = n;
  for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
  return r;
}

// square root of a mod odd prime p (a must be a QR); Tonelli-Shanks
inline long sqrt_mod(Int a, long p) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return 0;
  if (p % 4 == 3) return to_long(powmod(a, (Int(p) + 1) / 4, p));
  Int q = p - 1;
  int s = 0;
  while (q % 2 == 0) { q /= 2; ++s; }
  long z = 2;
  while (kronecker(z, p) != -1) ++z;
  Int m = s, c = powmod(z, q, p), t = powmod(a, q, p), r = powmod(a, (q + 1) / 2, p);
  while (t != 1) {
    Int tt = t;
    long i = 0;
    while (tt != 1) { tt = tt * tt % p; ++i; }
    Int b = c;
    for (long j = 0; j < to_long(m) - i - 1; ++j) b = b * b % p;
    m = i;
    c = b * b % p;
    t = t * c % p;
    r = r * b % p;
  }
  return to_long(r);
}

inline long primitive_root(long p) {
  auto fac = factorize(p - 1);
  for (long g = 2; g < p; ++g) {
    bool ok = true;
    for (auto [q, e] : fac) {
      (void)e;
      if (powmod(g, (p - 1) / q, p) == 1) { ok = false; break; }
    }
    if (ok) return g;
  }
  throw std::logic_error("primitive_root: none found");
}

// Deterministic xorshift RNG so test randomization is reproducible.
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ULL) : s(seed ? seed : 1) {}
  uint64_t next() {
    s ^= s << 13; s ^= s >> 7; s ^= s << 17;
    return s;
  }
  long uniform(long lo, long hi) {  // inclusive
    return lo + static_cast<long>(next() % static_cast<uint64_t>(hi - lo + 1));
  }
};

}  // namespace thetalift
