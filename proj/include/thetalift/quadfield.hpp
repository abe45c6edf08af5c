#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "thetalift/numeric.hpp"

namespace thetalift {

class QuadField;

// Element x + y*omega of K = Q(sqrt(-d)), omega = (1 + sqrt(-d))/2.
struct KElem {
  Rat x{0}, y{0};

  KElem() = default;
  KElem(Rat x_, Rat y_) : x(std::move(x_)), y(std::move(y_)) {}
  static KElem from_int(long n) { return KElem(Rat(n), Rat(0)); }

  bool operator==(const KElem& o) const { return x == o.x && y == o.y; }
  bool is_zero() const { return x == 0 && y == 0; }
  bool is_integral() const { return rat_den(x) == 1 && rat_den(y) == 1; }

  KElem operator+(const KElem& o) const { return {x + o.x, y + o.y}; }
  KElem operator-(const KElem& o) const { return {x - o.x, y - o.y}; }
  KElem operator-() const { return {-x, -y}; }

  std::string str() const;
};

// Fractional ideal (Z*a + Z*(b + c*omega)) / den in HNF: c | a, c | b,
// 0 <= b < a, a,c > 0, gcd over the numerator basis with den reduced.
struct QIdeal {
  Int a{1}, b{0}, c{1}, den{1};

  bool operator==(const QIdeal& o) const {
    return a == o.a && b == o.b && c == o.c && den == o.den;
  }
  bool is_integral() const { return den == 1; }
  Rat norm() const { return Rat(a * c, den * den); }
  std::string str() const;
};

enum class SplitType { kSplit, kInert, kRamified };

struct PrimeFactor {
  QIdeal prime;
  int ramification = 1;  // e
};

struct PrimeSplitting {
  SplitType type;
  std::vector<PrimeFactor> primes;  // split: {w, wbar}; inert: {w}; ramified: {w}
};

// Exact arithmetic in an imaginary quadratic field K = Q(sqrt(-d)), d ≡ 7 mod 8.
class QuadField {
 public:
  explicit QuadField(long d);

  long d() const { return d_; }
  long disc() const { return disc_; }          // fundamental discriminant -d
  Rat omega_norm() const { return Rat(n0_); }  // N(omega) = (1+d)/4
  const QIdeal& different() const { return different_; }  // (sqrt(-d))

  // --- element arithmetic ---
  KElem mul(const KElem& u, const KElem& v) const;
  KElem conj(const KElem& u) const { return {u.x + u.y, -u.y}; }
  Rat norm(const KElem& u) const { return u.x * u.x + u.x * u.y + u.y * u.y * Rat(n0_); }
  Rat trace(const KElem& u) const { return 2 * u.x + u.y; }
  KElem inv(const KElem& u) const;
  KElem div(const KElem& u, const KElem& v) const { return mul(u, inv(v)); }
  KElem sqrt_minus_d() const { return KElem(Rat(-1), Rat(2)); }  // 2*omega - 1
  Cplx embed(const KElem& u) const;  // fixed CM embedding, Im(sqrt(-d)) > 0

  // --- ideal arithmetic ---
  QIdeal ideal_from_generators(const std::vector<KElem>& gens) const;
  QIdeal principal_ideal(const KElem& g) const { return ideal_from_generators({g}); }
  QIdeal unit_ideal() const { return QIdeal{}; }
  QIdeal mul(const QIdeal& i, const QIdeal& j) const;
  QIdeal mul(const QIdeal& i, const KElem& g) const { return mul(i, principal_ideal(g)); }
  QIdeal pow(const QIdeal& i, long e) const;
  QIdeal conj(const QIdeal& i) const;
  QIdeal inverse(const QIdeal& i) const;
  QIdeal sum(const QIdeal& i, const QIdeal& j) const;           // gcd
  QIdeal intersect(const QIdeal& i, const QIdeal& j) const;     // lcm
  bool contains(const QIdeal& i, const KElem& g) const;
  bool divides(const QIdeal& i, const QIdeal& j) const;  // i | j, i.e. j ⊂ i
  bool is_coprime(const QIdeal& i, const QIdeal& j) const;
  long valuation(const QIdeal& i, const QIdeal& prime) const;
  long valuation(const KElem& g, const QIdeal& prime) const;

  // two Z-basis vectors of the numerator lattice (a, b + c*omega)
  std::pair<KElem, KElem> z_basis(const QIdeal& i) const;

  // Shortest nonzero vector of the ideal lattice wrt the norm form.
  KElem shortest_vector(const QIdeal& i) const;
  // Generator if principal.
  std::optional<KElem> principal_generator(const QIdeal& i) const;

  PrimeSplitting factor_prime(long p) const;
  // all prime-power factors (prime, exponent) of an integral ideal
  std::vector<std::pair<QIdeal, int>> factor(const QIdeal& i) const;

  // canonical key of the ideal class of i: the reduced quadratic form (A,B,C)
  std::array<Int, 3> class_key(const QIdeal& i) const;

  // element of I with x ≡ r mod I*J given CRT data; see solve_crt below
  KElem solve_crt(const std::vector<std::pair<QIdeal, KElem>>& congruences) const;

 private:
  long d_;
  long disc_;
  long n0_;  // N(omega) = (1+d)/4
  QIdeal different_;
};

}  // namespace thetalift
