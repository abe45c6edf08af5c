#pragma once

#include <map>
#include <optional>
#include <string>

#include "thetalift/numeric.hpp"

namespace thetalift {

// Element of Q(zeta_m), stored as a sparse rational combination of powers of
// zeta_m. Reduction mod the cyclotomic polynomial Phi_m happens lazily, only
// when testing for zero/equality or extracting a canonical form.
class Cyc {
 public:
  Cyc() : order_(1) {}
  explicit Cyc(const Rat& r) : order_(1) {
    if (r != 0) terms_[0] = r;
  }
  Cyc(long num, long den) : Cyc(Rat(num, den)) {}

  static Cyc zero() { return Cyc(); }
  static Cyc one() { return Cyc(Rat(1)); }
  // zeta_m^k
  static Cyc root(long m, long k);
  // sqrt(-d) for squarefree d with -d ≡ 1 (mod 4), via the Gauss sum in Q(zeta_d).
  static Cyc sqrt_minus(long d);

  long order() const { return order_; }
  const std::map<long, Rat>& terms() const { return terms_; }

  Cyc operator-() const;
  Cyc operator+(const Cyc& o) const;
  Cyc operator-(const Cyc& o) const { return *this + (-o); }
  Cyc operator*(const Cyc& o) const;
  Cyc& operator+=(const Cyc& o) { *this = *this + o; return *this; }
  Cyc& operator-=(const Cyc& o) { *this = *this - o; return *this; }
  Cyc& operator*=(const Cyc& o) { *this = *this * o; return *this; }
  Cyc operator*(const Rat& r) const;

  // complex conjugation (zeta -> zeta^{-1})
  Cyc conj() const { return galois(-1); }
  // Galois action zeta -> zeta^k, gcd(k, order) must be 1.
  Cyc galois(long k) const;

  Cyc inverse() const;

  bool is_zero() const;
  bool operator==(const Cyc& o) const { return (*this - o).is_zero(); }
  bool operator!=(const Cyc& o) const { return !(*this == o); }

  // If the value lies in Q, return it.
  std::optional<Rat> as_rational() const;

  // Embedding zeta_m -> exp(2*pi*i/m).
  Cplx embed() const;

  // canonical dense form: coefficients of 1, zeta, ..., zeta^{phi(m)-1} mod Phi_m
  std::vector<Rat> dense_reduced() const;

  std::string str() const;

 private:
  void set_order(long m);  // promote to Q(zeta_m); current order must divide m
  long order_;
  std::map<long, Rat> terms_;  // exponent in [0, order_) -> nonzero coefficient
};

inline Cyc operator*(const Rat& r, const Cyc& c) { return c * r; }

// Coefficients of Phi_m (cached).
const std::vector<Int>& cyclotomic_polynomial(long m);

}  // namespace thetalift
