#include <memory>

#include "doctest.h"
#include "thetalift/rayclass.hpp"

using namespace thetalift;

namespace {

std::shared_ptr<const QuadField> field(long d) {
  return std::make_shared<QuadField>(d);
}

long group_order(const RayClassGroup& G) {
  long o = 1;
  for (long x : G.orders()) o *= x;
  return o;
}

}  // namespace

TEST_CASE("class group with trivial modulus") {
  // h(-7) = 1, h(-23) = 3, h(-15) = 2, oracle checked in test_quadfield
  auto K7 = field(7);
  RayClassGroup G7(K7, K7->unit_ideal());
  CHECK(G7.order() == 1);

  auto K23 = field(23);
  RayClassGroup G23(K23, K23->unit_ideal());
  CHECK(G23.order() == 3);
  CHECK(G23.orders() == std::vector<long>{3});

  auto K15 = field(15);
  RayClassGroup G15(K15, K15->unit_ideal());
  CHECK(G15.order() == 2);
}

TEST_CASE("ray class group mod a split prime over 11 in Q(sqrt(-7))") {
  auto K = field(7);
  auto s11 = K->factor_prime(11);
  RayClassGroup G(K, s11.primes[0].prime);
  // brute-force oracle: |(O/p11)^x| / |{±1}| = 10/2 = 5
  CHECK(G.order() == 5);
  CHECK(group_order(G) == 5);
}

TEST_CASE("ray class group mod (11) in Q(sqrt(-7))") {
  auto K = field(7);
  QIdeal m = K->principal_ideal(KElem::from_int(11));
  RayClassGroup G(K, m);
  // oracle: brute force over (O/11)^x: (C_10 x C_10)/{±1}, order 50
  long units = 0;
  for (long x = 0; x < 11; ++x)
    for (long y = 0; y < 11; ++y) {
      KElem z{Rat(x), Rat(y)};
      Rat n = K->norm(z);
      if (rat_num(n) % 11 != 0) ++units;
    }
  CHECK(units == 100);
  CHECK(G.order() == units / 2);
}

TEST_CASE("dlog is a homomorphism") {
  auto K = field(7);
  QIdeal m = K->mul(K->principal_ideal(KElem::from_int(11)),
                    K->factor_prime(2).primes[0].prime);
  RayClassGroup G(K, m);
  Rng rng(7);
  int done = 0;
  for (int trial = 0; trial < 200 && done < 40; ++trial) {
    KElem a(Rat(rng.uniform(-20, 20)), Rat(rng.uniform(-20, 20)));
    KElem b(Rat(rng.uniform(-20, 20)), Rat(rng.uniform(-20, 20)));
    if (a.is_zero() || b.is_zero()) continue;
    QIdeal I = K->principal_ideal(a), J = K->principal_ideal(b);
    bool ok = true;
    for (auto& [p, e] : K->factor(m)) {
      (void)e;
      if (K->valuation(I, p) != 0 || K->valuation(J, p) != 0) ok = false;
    }
    if (!ok) continue;
    ++done;
    auto dI = G.dlog(I), dJ = G.dlog(J), dIJ = G.dlog(K->mul(I, J));
    CHECK(G.add(dI, dJ) == dIJ);
  }
  CHECK(done >= 30);

  // principal (alpha) with alpha ≡ 1 mod m -> zero vector
  KElem one = KElem::from_int(1);
  auto [u1, u2] = K->z_basis(m);
  KElem alpha = one + u1 + u2;  // ≡ 1 mod m
  CHECK(G.dlog(K->principal_ideal(alpha)) == G.zero());
}

TEST_CASE("dlog against exhaustive table in Q(sqrt(-23))") {
  auto K = field(23);
  auto s2 = K->factor_prime(2);
  RayClassGroup G(K, s2.primes[0].prime);
  // random ideals of bounded norm: dlog(I*J) = dlog(I) + dlog(J)
  Rng rng(11);
  std::vector<QIdeal> pool;
  for (long p = 3; p < 100; ++p) {
    if (!is_prime(p)) continue;
    auto sp = K->factor_prime(p);
    if (sp.type == SplitType::kInert) continue;
    for (auto& pf : sp.primes) pool.push_back(pf.prime);
  }
  for (int i = 0; i < 30; ++i) {
    auto& A = pool[rng.uniform(0, static_cast<long>(pool.size()) - 1)];
    auto& B = pool[rng.uniform(0, static_cast<long>(pool.size()) - 1)];
    CHECK(G.dlog(K->mul(A, B)) == G.add(G.dlog(A), G.dlog(B)));
  }
}

TEST_CASE("conjugation action is an involution") {
  auto K = field(7);
  QIdeal m = K->principal_ideal(KElem::from_int(11));
  RayClassGroup G(K, m);
  auto M = G.conj_action();
  // applying conj twice is the identity on generators
  size_t n = G.orders().size();
  for (size_t j = 0; j < n; ++j) {
    // c(c(g_j)): map the vector M[j] through M
    std::vector<long> v(n, 0);
    for (size_t i = 0; i < n; ++i)
      for (size_t k = 0; k < n; ++k)
        v[k] = (v[k] + M[j][i] * M[i][k]) % G.orders()[k];
    std::vector<long> e(n, 0);
    e[j] = 1 % G.orders()[j];
    CHECK(v == e);
  }
}
