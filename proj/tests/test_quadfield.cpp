#include <set>

#include "doctest.h"
#include "thetalift/quadfield.hpp"

using namespace thetalift;

namespace {

// oracle: number of reduced primitive binary quadratic forms of discriminant -d
long form_class_number(long d) {
  long count = 0;
  for (long A = 1; A * A <= d / 3 + 1; ++A)
    for (long B = -A + 1; B <= A; ++B) {
      if ((B * B + d) % (4 * A) != 0) continue;
      long C = (B * B + d) / (4 * A);
      if (C < A) continue;
      if (A == C && B < 0) continue;
      if (std::gcd(std::gcd(A, std::abs(B)), C) != 1) continue;
      ++count;
    }
  return count;
}

}  // namespace

TEST_CASE("factor_prime on Q(sqrt(-7))") {
  QuadField K(7);
  CHECK(K.disc() == -7);

  // oracle: factor x^2 - x + 2 mod 2 by brute force
  {
    int roots = 0;
    for (int x = 0; x < 2; ++x)
      if ((x * x - x + 2) % 2 == 0) ++roots;
    CHECK(roots == 2);
  }
  auto s2 = K.factor_prime(2);
  CHECK(s2.type == SplitType::kSplit);
  CHECK(s2.primes.size() == 2);
  CHECK(s2.primes[0].prime.norm() == Rat(2));
  // (2) = p * pbar
  QIdeal two = K.principal_ideal(KElem::from_int(2));
  CHECK(K.mul(s2.primes[0].prime, s2.primes[1].prime) == two);
  CHECK(K.conj(s2.primes[0].prime) == s2.primes[1].prime);

  auto s7 = K.factor_prime(7);
  CHECK(s7.type == SplitType::kRamified);
  CHECK(K.mul(s7.primes[0].prime, s7.primes[0].prime) ==
        K.principal_ideal(KElem::from_int(7)));

  // oracle: exhaustive square search mod 5
  {
    bool found = false;
    for (int x = 0; x < 5; ++x)
      if ((x * x - (-7 % 5 + 5)) % 5 == 0) found = true;
    CHECK_FALSE(found);
  }
  CHECK(K.factor_prime(5).type == SplitType::kInert);
}

TEST_CASE("factor_prime agrees with Kronecker oracle for p < 200") {
  QuadField K(7);
  for (long p = 2; p < 200; ++p) {
    if (!is_prime(p)) continue;
    auto sp = K.factor_prime(p);
    int kr = kronecker(K.disc(), p);
    if (kr == 1) CHECK(sp.type == SplitType::kSplit);
    if (kr == -1) CHECK(sp.type == SplitType::kInert);
    if (kr == 0) CHECK(sp.type == SplitType::kRamified);
    // product of returned primes with multiplicity equals (p)
    QIdeal prod = K.unit_ideal();
    for (auto& pf : sp.primes)
      for (int i = 0; i < pf.ramification; ++i) prod = K.mul(prod, pf.prime);
    if (sp.type == SplitType::kInert) prod = sp.primes[0].prime;
    CHECK(prod == K.principal_ideal(KElem::from_int(p)));
  }
}

TEST_CASE("ideal normal form is canonical and norm-multiplicative") {
  QuadField K(7);
  Rng rng(42);
  for (int i = 0; i < 50; ++i) {
    KElem a(Rat(rng.uniform(-30, 30)), Rat(rng.uniform(-30, 30)));
    KElem b(Rat(rng.uniform(-30, 30)), Rat(rng.uniform(-30, 30)));
    if (a.is_zero() || b.is_zero()) continue;
    QIdeal I = K.ideal_from_generators({a, b});
    QIdeal J = K.ideal_from_generators({b, a, a + b});
    CHECK(I == J);  // same module, same tuple
    QIdeal P = K.mul(I, I);
    CHECK(P.norm() == I.norm() * I.norm());
    // N(I J) = N(I) N(J) for random pairs
    QIdeal I2 = K.principal_ideal(a);
    CHECK(K.mul(I, I2).norm() == I.norm() * I2.norm());
    // I * I^{-1} = O
    CHECK(K.mul(I, K.inverse(I)) == K.unit_ideal());
    // conj multiplicativity: I * conj(I) = (N(I))
    CHECK(K.mul(I, K.conj(I)) ==
          K.principal_ideal(KElem(I.norm(), Rat(0))));
  }
}

TEST_CASE("different has norm |disc|") {
  for (long d : {7L, 15L, 23L}) {
    QuadField K(d);
    CHECK(K.different().norm() == Rat(d));
  }
}

TEST_CASE("shortest vector and principal generators") {
  QuadField K(7);
  auto sp = K.factor_prime(2);
  // p_2 = (2, omega) has norm 2; N(omega) = 2 so it is principal, generated by omega
  auto g = K.principal_generator(sp.primes[0].prime);
  REQUIRE(g.has_value());
  CHECK(K.norm(*g) == Rat(2));
  // (11) splits; each factor principal in class number one
  auto s11 = K.factor_prime(11);
  CHECK(s11.type == SplitType::kSplit);
  CHECK(K.principal_generator(s11.primes[0].prime).has_value());
}

TEST_CASE("class keys match reduced-form enumeration oracle") {
  // d=7: h=1, d=23: h=3, d=15: h=2
  CHECK(form_class_number(7) == 1);
  CHECK(form_class_number(23) == 3);
  CHECK(form_class_number(15) == 2);
  for (long d : {7L, 15L, 23L}) {
    QuadField K(d);
    // enumerate distinct class keys of prime ideals with norm < 60
    std::set<std::array<Int, 3>> keys;
    keys.insert(K.class_key(K.unit_ideal()));
    for (long p = 2; p < 60; ++p) {
      if (!is_prime(p)) continue;
      auto sp = K.factor_prime(p);
      if (sp.type == SplitType::kInert) continue;
      for (auto& pf : sp.primes) keys.insert(K.class_key(pf.prime));
    }
    CHECK(static_cast<long>(keys.size()) == form_class_number(d));
  }
}

TEST_CASE("valuations and crt") {
  QuadField K(7);
  auto s2 = K.factor_prime(2);
  auto s11 = K.factor_prime(11);
  QIdeal I = K.mul(K.pow(s2.primes[0].prime, 3), s11.primes[0].prime);
  CHECK(K.valuation(I, s2.primes[0].prime) == 3);
  CHECK(K.valuation(I, s2.primes[1].prime) == 0);
  CHECK(K.valuation(I, s11.primes[0].prime) == 1);
  CHECK(K.valuation(K.inverse(I), s2.primes[0].prime) == -3);

  KElem alpha = K.solve_crt({{K.pow(s2.primes[0].prime, 2), KElem::from_int(1)},
                             {s11.primes[0].prime, KElem::from_int(5)}});
  CHECK(K.contains(K.pow(s2.primes[0].prime, 2), alpha - KElem::from_int(1)));
  CHECK(K.contains(s11.primes[0].prime, alpha - KElem::from_int(5)));
}
