#include <cmath>

#include "doctest.h"
#include "thetalift/characters.hpp"

using namespace thetalift;

namespace {

std::shared_ptr<const QuadField> K7() { return std::make_shared<QuadField>(7); }

}  // namespace

TEST_CASE("canonical chi0 for Q(sqrt(-7))") {
  auto K = K7();
  HeckeCharacter chi0 = HeckeCharacter::canonical_chi0(K);
  CHECK(chi0.inf_type() == InfinityType{0, 1});
  CHECK(chi0.conductor() == K->different());
  CHECK(chi0.restricts_to_quadratic_character());

  // multiplicativity of values on random coprime principal ideals
  Rng rng(3);
  int done = 0;
  for (int t = 0; t < 100 && done < 25; ++t) {
    KElem a(Rat(rng.uniform(-9, 9)), Rat(rng.uniform(-9, 9)));
    KElem b(Rat(rng.uniform(-9, 9)), Rat(rng.uniform(-9, 9)));
    if (a.is_zero() || b.is_zero()) continue;
    if (rat_num(K->norm(a)) % 7 == 0 || rat_num(K->norm(b)) % 7 == 0) continue;
    ++done;
    QIdeal A = K->principal_ideal(a), B = K->principal_ideal(b);
    CHECK(chi0.value(K->mul(A, B)) == chi0.value(A) * chi0.value(B));
  }
  CHECK(done >= 20);

  // |chi0(P)|^2 = 1/N(P): chi0(P) * conj = N^{-1}
  auto s11 = K->factor_prime(11);
  Cyc v = chi0.value(s11.primes[0].prime);
  CHECK((v * v.conj()).as_rational().value() == Rat(1, 11));
}

TEST_CASE("base change and conjugation") {
  auto K = K7();
  auto s11 = K->factor_prime(11);
  auto G = std::make_shared<RayClassGroup>(K, s11.primes[0].prime);
  REQUIRE(G->order() == 5);
  HeckeCharacter eta = HeckeCharacter::finite_order(G, {1});

  // trivial -> trivial
  HeckeCharacter triv = HeckeCharacter::trivial(G);
  HeckeCharacter trivbc = triv.base_change();
  CHECK(trivbc.value(K->factor_prime(2).primes[0].prime) == Cyc::one());

  // eta~ on q qbar is 1
  HeckeCharacter bc = eta.base_change();
  for (long q : {2L, 23L, 29L}) {
    QIdeal qq = K->principal_ideal(KElem::from_int(q));
    CHECK(bc.value(qq) == Cyc::one());
  }

  // inf type (k,0) -> (k,-k)
  HeckeCharacter chi0 = HeckeCharacter::canonical_chi0(K);
  HeckeCharacter etak = chi0.conj_char();  // type (1, 0)
  CHECK(etak.inf_type() == InfinityType{1, 0});
  CHECK(etak.base_change().inf_type() == InfinityType{1, -1});
}

TEST_CASE("local components") {
  auto K = K7();
  auto s11 = K->factor_prime(11);
  auto G = std::make_shared<RayClassGroup>(K, s11.primes[0].prime);

  // trivial character -> trivial local component
  HeckeCharacter triv = HeckeCharacter::trivial(G);
  LocalCharacter lt = triv.local_component(s11.primes[0].prime);
  CHECK(lt.cond_exp() == 0);

  // character of conductor p11: cond_exp 1 at w, 0 at wbar
  HeckeCharacter eta = HeckeCharacter::finite_order(G, {1});
  LocalCharacter lw = eta.local_component(s11.primes[0].prime);
  CHECK(lw.cond_exp() == 1);
  LocalCharacter lwbar = eta.local_component(s11.primes[1].prime);
  CHECK(lwbar.cond_exp() == 0);

  // multiplicative on random unit pairs
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    long u1 = rng.uniform(1, 10), u2 = rng.uniform(1, 10);
    CHECK(lw.at_unit(u1) * lw.at_unit(u2) == lw.at_unit((u1 * u2) % 11));
  }

  // conductor exponents reassemble the global conductor
  QIdeal cond = eta.conductor();
  CHECK(cond == s11.primes[0].prime);

  // consistency: eta(q-ideal) = product of local data for a split prime q
  auto s23 = K->factor_prime(23);
  Cyc lhs = eta.value(s23.primes[0].prime);
  // at an unramified place the local uniformizer value equals the ideal value
  LocalCharacter l23 = eta.local_component(s23.primes[0].prime);
  CHECK(lhs == l23.at_p());
}

TEST_CASE("epsilon factors: basics and duality") {
  // unramified -> 1
  LocalCharacter un = LocalCharacter::unramified(11, Cyc::root(5, 2));
  EpsilonFactor e0 = epsilon_factor(un);
  CHECK(e0.root_part == Cyc::one());
  CHECK(e0.half_power == 0);

  // quadratic character mod p: Gauss sum, |eps| = 1
  for (long p : {3L, 7L, 11L, 13L}) {
    ZpUnits zu(p, 1);
    LocalCharacter quad(p, 1, 2, {1}, Cyc::one());  // the quadratic character
    EpsilonFactor e = epsilon_factor(quad);
    // |root|^2 = p^{c}: root * conj(root) == p
    CHECK((e.root_part * e.root_part.conj()).as_rational().value() == Rat(p));
    CHECK(e.half_power == -1);
  }

  // duality eps(mu) eps(mu^{-1}) = mu(-1), exact, for assorted ramified mu
  Rng rng(17);
  int count = 0;
  for (long p : {3L, 5L, 7L, 11L, 13L}) {
    for (int c = 1; c <= 2; ++c) {
      ZpUnits zu(p, c);
      long n = zu.orders()[0];
      for (int t = 0; t < 4; ++t) {
        long k = rng.uniform(1, n - 1);
        long L = n / std::gcd(n, k);
        if (L == 1) continue;
        long exp = k * (L / (n / std::gcd(n, k)));
        exp = (k * L / n) % L;  // scaled exponent
        if ((Int(k) * L) % n != 0) continue;
        LocalCharacter mu(p, c, L, {exp}, Cyc::root(7, t % 7));
        LocalCharacter muc = mu.primitive();
        if (muc.cond_exp() != c) continue;  // want conductor exactly p^c
        EpsilonFactor e1 = epsilon_factor(mu);
        EpsilonFactor e2 = epsilon_factor(mu.inverse());
        // e1 e2 = mu(-1): root parts satisfy g1 g2 = mu(-1) p^{c}
        Cyc lhs = e1.root_part * e2.root_part;
        Cyc rhs = mu.at_minus1() * Cyc(Rat(ipow(Int(p), c)));
        CHECK(lhs == rhs);
        CHECK(e1.half_power + e2.half_power == -2 * c);
        ++count;
      }
    }
  }
  CHECK(count >= 25);
}

TEST_CASE("find_delta on the desk instance") {
  auto K = K7();
  HeckeCharacter chi0 = HeckeCharacter::canonical_chi0(K);
  KElem delta = find_delta(chi0, 11);
  // expected: sqrt(-7) itself
  CHECK(delta == K->sqrt_minus_d());
  // (delta2): unit at the primes over 11
  for (auto& pf : K->factor_prime(11).primes) CHECK(K->valuation(delta, pf.prime) == 0);
  // Im(delta) > 0 under the fixed embedding
  CHECK(K->embed(delta).imag() > 0);
}

TEST_CASE("L-values") {
  auto K = K7();
  auto G1 = std::make_shared<RayClassGroup>(K, K->unit_ideal());
  HeckeCharacter triv = HeckeCharacter::trivial(G1);

  SUBCASE("zeta_K(2) against the Euler product oracle") {
    LValue lv = central_L_value(triv, 2.0, 2e5);
    // oracle: product of local factors
    double prod = 1;
    for (long p = 2; p < 1000000; ++p) {
      if (!is_prime(p)) continue;
      int kr = kronecker(-7, p);
      double x = std::pow(static_cast<double>(p), -2.0);
      if (kr == 1) prod *= 1.0 / ((1 - x) * (1 - x));
      else if (kr == -1) prod *= 1.0 / (1 - x * x);
      else prod *= 1.0 / (1 - x);
    }
    CHECK(std::abs(lv.value.real() - prod) < 1e-6);
    CHECK(std::abs(lv.value.imag()) < 1e-9);
    // the 10^4-truncated product agrees at the 1e-4 level as a sanity check
    double prod4 = 1;
    for (long p = 2; p < 10000; ++p) {
      if (!is_prime(p)) continue;
      int kr = kronecker(-7, p);
      double x = std::pow(static_cast<double>(p), -2.0);
      if (kr == 1) prod4 *= 1.0 / ((1 - x) * (1 - x));
      else if (kr == -1) prod4 *= 1.0 / (1 - x * x);
      else prod4 *= 1.0 / (1 - x);
    }
    CHECK(std::abs(lv.value.real() - prod4) < 1e-4);
  }

  SUBCASE("L(1, eps_{K/Q}) matches the class number formula") {
    // L(s, chi0 restricted...) : build eps_{K/Q} as the quadratic character via
    // the ratio zeta_K(s)/zeta(s) - easier directly: L(1,eps) = pi h / (w sqrt d) * 2
    // For K = Q(sqrt(-7)): h = 1, w = 2: L(1, eps) = pi / sqrt(7).
    // Use: zeta_K(s) = zeta(s) L(s, eps) and evaluate the eps-series through
    // the quadratic character sum directly.
    double target = 3.14159265358979323846 / std::sqrt(7.0);
    // smoothed quadratic L-series with the same Gaussian cutoff machinery:
    double X = 2e5;
    long N = static_cast<long>(5 * X);
    double s = 0, c = 0;
    for (long n = 1; n <= N; ++n) {
      int kr = kronecker(-7, n);
      if (kr == 0) continue;
      double term = kr * std::exp(-(n / X) * (n / X)) / n - c;
      double t = s + term;
      c = (t - s) - term;
      s = t;
    }
    CHECK(std::abs(s - target) < 1e-6);
    // and zeta_K(2) = zeta(2) L(2, eps) consistency through central_L_value
    LValue z2 = central_L_value(triv, 2.0, 2e5);
    double zeta2 = 3.14159265358979323846 * 3.14159265358979323846 / 6.0;
    double leps2 = 0;
    c = 0;
    for (long n = 1; n <= N; ++n) {
      int kr = kronecker(-7, n);
      if (kr == 0) continue;
      double term = kr * std::exp(-(n / X) * (n / X)) / (static_cast<double>(n) * n) - c;
      double t = leps2 + term;
      c = (t - leps2) - term;
      leps2 = t;
    }
    CHECK(std::abs(z2.value.real() - zeta2 * leps2) < 1e-6);
  }

  SUBCASE("conjugate symmetry") {
    auto s11 = K->factor_prime(11);
    auto G = std::make_shared<RayClassGroup>(K, s11.primes[0].prime);
    HeckeCharacter eta = HeckeCharacter::finite_order(G, {1});
    LValue a = central_L_value(eta, 1.5, 1e5);
    LValue b = central_L_value(eta.power(-1).conj_char(), 1.5, 1e5);
    // L(s, eta) = conj(L(s, eta conj-bar)); here eta-bar = inverse of eta, and
    // conjugating the field swaps the primes: eta^{-c} has conjugate values
    CHECK(std::abs(a.value - std::conj(b.value)) < 1e-7);
  }
}

TEST_CASE("chi admissibility report") {
  auto K = K7();
  HeckeCharacter chi0 = HeckeCharacter::canonical_chi0(K);
  auto rep = verify_chi_admissible(chi0, 11, 2e5);
  CHECK(rep.conductor_prime_to_p);
  CHECK(rep.infinity_type_ok);
  CHECK(rep.central_value_nonzero);

  // conductor sharing a factor with p: (chi2) must be flagged
  auto rep7 = verify_chi_admissible(chi0, 7, 2e5);
  CHECK_FALSE(rep7.conductor_prime_to_p);
}
