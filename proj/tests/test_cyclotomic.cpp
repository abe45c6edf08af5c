#include "doctest.h"
#include "thetalift/cyclotomic.hpp"

using namespace thetalift;

TEST_CASE("roots of unity basics") {
  Cyc z5 = Cyc::root(5, 1);
  Cyc s = Cyc::zero();
  for (int k = 0; k < 5; ++k) s += Cyc::root(5, k);
  CHECK(s.is_zero());

  // zeta_5^5 = 1
  Cyc p = Cyc::one();
  for (int k = 0; k < 5; ++k) p *= z5;
  CHECK(p == Cyc::one());

  // primitive 6th root: zeta_6 = -zeta_3^2
  CHECK(Cyc::root(6, 1) == -Cyc::root(3, 2));
}

TEST_CASE("arithmetic and inverse") {
  Cyc a = Cyc::root(7, 3) + Cyc(Rat(2)) * Cyc::root(7, 5);
  Cyc inv = a.inverse();
  CHECK(a * inv == Cyc::one());

  Cyc b = Cyc::root(12, 1) - Cyc::root(12, 5);
  CHECK((b * b.inverse()) == Cyc::one());
}

TEST_CASE("galois and conjugation") {
  Cyc a = Cyc::root(11, 2) + Cyc::root(11, 5);
  CHECK(a.conj() == Cyc::root(11, 9) + Cyc::root(11, 6));
  // norm down to Q: product over all Galois conjugates of 1 - zeta_11 is 11
  Cyc prod = Cyc::one();
  for (int k = 1; k <= 10; ++k) prod *= (Cyc::one() - Cyc::root(11, 1)).galois(k);
  CHECK(prod.as_rational().value() == Rat(11));
}

TEST_CASE("sqrt(-d) via Gauss sum") {
  for (long d : {7L, 15L, 23L}) {
    Cyc s = Cyc::sqrt_minus(d);
    CHECK((s * s).as_rational().value() == Rat(-d));
    Cplx z = s.embed();
    CHECK(std::abs(z.real()) < 1e-9);
    CHECK(z.imag() > 0);  // positive imaginary part under the fixed embedding
  }
}

TEST_CASE("embedding consistency") {
  Cyc a = Cyc::root(8, 1);
  Cplx z = a.embed();
  CHECK(std::abs(z.real() - std::sqrt(0.5)) < 1e-12);
  CHECK(std::abs(z.imag() - std::sqrt(0.5)) < 1e-12);
}
