#include "thetalift/characters.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace thetalift {

namespace {

long lmod(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

Cyc kcyc(const QuadField& K, const KElem& e) {
  // omega = (1 + sqrt(-d))/2
  Cyc om = (Cyc::one() + Cyc::sqrt_minus(K.d())) * Rat(1, 2);
  return Cyc(e.x) + om * Cyc(e.y);
}

Cyc cyc_pow(const Cyc& c, long n) {
  if (n < 0) return cyc_pow(c.inverse(), -n);
  Cyc r = Cyc::one();
  Cyc b = c;
  unsigned long e = static_cast<unsigned long>(n);
  while (e) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

long root_match_member(const Cyc& v, long L) {
  for (long e = 0; e < L; ++e)
    if (v == Cyc::root(L, e)) return e;
  throw std::logic_error("root_match: value is not a stored root of unity");
}

long class_number(const QuadField& K) {
  // count distinct ideal class keys generated by small primes
  RayClassGroup G(std::make_shared<QuadField>(K.d()), K.unit_ideal());
  return G.order();
}

}  // namespace

// ---------------------------------------------------------------------------
// ZpUnits
// ---------------------------------------------------------------------------

ZpUnits::ZpUnits(long p, int c) : p_(p), c_(c) {
  mod_ = 1;
  for (int i = 0; i < c; ++i) {
    mod_ *= p;
    if (mod_ > 4000000) throw std::overflow_error("ZpUnits: modulus too large");
  }
  if (c == 0) { mod_ = 1; return; }
  if (p == 2) {
    if (c == 1) return;  // trivial
    if (c == 2) {
      gens_ = {3};
      orders_ = {2};
    } else {
      gens_ = {mod_ - 1, 5};
      orders_ = {2, mod_ / 4};
    }
  } else {
    long g = primitive_root(p);
    if (c >= 2 && powmod(g, p - 1, Int(p) * p) == 1) g += p;
    gens_ = {g % mod_};
    orders_ = {(p - 1) * (mod_ / p)};
  }
  // full dlog table
  size_ = 1;
  for (long o : orders_) size_ *= o;
  std::vector<long> exps(gens_.size(), 0);
  for (long i = 0; i < size_; ++i) {
    Int v = 1;
    for (size_t j = 0; j < gens_.size(); ++j) v = v * powmod(gens_[j], exps[j], mod_) % mod_;
    table_[to_long(v)] = exps;
    // increment multi-index
    for (size_t j = gens_.size(); j-- > 0;) {
      if (++exps[j] < orders_[j]) break;
      exps[j] = 0;
    }
  }
}

std::vector<long> ZpUnits::dlog(long u) const {
  u = lmod(u, mod_);
  if (c_ == 0 || gens_.empty()) return {};
  auto it = table_.find(u);
  if (it == table_.end()) throw std::domain_error("ZpUnits::dlog: not a unit");
  return it->second;
}

// ---------------------------------------------------------------------------
// LocalCharacter
// ---------------------------------------------------------------------------

LocalCharacter LocalCharacter::unramified(long p, Cyc value_at_p) {
  LocalCharacter x;
  x.p_ = p;
  x.cond_ = 0;
  x.L_ = 1;
  x.unif_value_ = std::move(value_at_p);
  x.units_ = std::make_shared<ZpUnits>(p, 0);
  return x;
}

LocalCharacter::LocalCharacter(long p, int cond_exp, long L, std::vector<long> gen_exps,
                               Cyc value_at_p)
    : p_(p), cond_(cond_exp), L_(L), gen_exps_(std::move(gen_exps)),
      unif_value_(std::move(value_at_p)) {
  units_ = std::make_shared<ZpUnits>(p, cond_exp);
  if (gen_exps_.size() != units_->gens().size())
    throw std::invalid_argument("LocalCharacter: generator exponent count mismatch");
  // exponents must be compatible with generator orders
  for (size_t i = 0; i < gen_exps_.size(); ++i)
    if (lmod(gen_exps_[i] * units_->orders()[i], L_) != 0)
      throw std::invalid_argument("LocalCharacter: value not an order-compatible root");
}

const ZpUnits& LocalCharacter::units() const { return *units_; }

Cyc LocalCharacter::at_unit(long u) const {
  if (cond_ == 0) return Cyc::one();
  auto d = units_->dlog(u);
  long e = 0;
  for (size_t i = 0; i < d.size(); ++i) e = lmod(e + d[i] * gen_exps_[i], L_);
  return Cyc::root(L_, e);
}

Cyc LocalCharacter::at_unit(const Rat& u) const {
  if (cond_ == 0) return Cyc::one();
  Int num = rat_num(u), den = rat_den(u);
  long m = units_->modulus();
  Int r = num % m * invmod(den, m) % m;
  return at_unit(to_long((r + m) % m));
}

Cyc LocalCharacter::at(const Rat& x) const {
  if (x == 0) throw std::domain_error("LocalCharacter::at(0)");
  Int num = rat_num(x), den = rat_den(x);
  long v = 0;
  while (num % p_ == 0) { num /= p_; ++v; }
  while (den % p_ == 0) { den /= p_; --v; }
  Cyc out = cyc_pow(unif_value_, v);
  if (cond_ > 0) out *= at_unit(Rat(num, den));
  return out;
}

LocalCharacter LocalCharacter::inverse() const {
  LocalCharacter x = *this;
  for (auto& e : x.gen_exps_) e = lmod(-e, L_);
  x.unif_value_ = unif_value_.inverse();
  return x;
}

LocalCharacter LocalCharacter::operator*(const LocalCharacter& o) const {
  if (p_ != o.p_) throw std::invalid_argument("LocalCharacter product: different primes");
  int c = std::max(cond_, o.cond_);
  long L = std::lcm(L_, o.L_);
  ZpUnits big(p_, c);
  std::vector<long> exps;
  for (size_t i = 0; i < big.gens().size(); ++i) {
    // exponent of this*o at big generator
    Cyc v = at_unit(Rat(big.gens()[i])) * o.at_unit(Rat(big.gens()[i]));
    // match the root: v = zeta_L^e
    bool found = false;
    for (long e = 0; e < L; ++e)
      if (v == Cyc::root(L, e)) { exps.push_back(e); found = true; break; }
    if (!found) throw std::logic_error("LocalCharacter product: value not in mu_L");
  }
  return LocalCharacter(p_, c, L, exps, unif_value_ * o.unif_value_);
}

LocalCharacter LocalCharacter::primitive() const {
  if (cond_ == 0) return *this;
  int c = cond_;
  while (c > 0) {
    // trivial on the kernel of (Z/p^c)^x -> (Z/p^{c-1})^x ?
    long pc1 = 1;
    for (int i = 0; i < c - 1; ++i) pc1 *= p_;
    bool trivial = true;
    for (long j = 1; j < p_; ++j) {
      long u = lmod(1 + j * pc1, units_->modulus());
      if (c == 1) u = lmod(j, p_);  // kernel is the whole group when c = 1
      if (!(at_unit(u) == Cyc::one())) { trivial = false; break; }
    }
    if (c == 1 && trivial) { c = 0; break; }
    if (!trivial) break;
    --c;
    // re-express on the smaller group
    ZpUnits small(p_, c);
    std::vector<long> exps;
    for (size_t i = 0; i < small.gens().size(); ++i) {
      Cyc v = at_unit(Rat(small.gens()[i]));
      bool found = false;
      for (long e = 0; e < L_; ++e)
        if (v == Cyc::root(L_, e)) { exps.push_back(e); found = true; break; }
      if (!found) throw std::logic_error("LocalCharacter::primitive: root match failed");
    }
    return LocalCharacter(p_, c, L_, exps, unif_value_).primitive();
  }
  if (c == 0) return unramified(p_, unif_value_);
  return *this;
}

// ---------------------------------------------------------------------------
// epsilon factor
// ---------------------------------------------------------------------------

EpsilonFactor epsilon_factor(const LocalCharacter& mu, int psi_cond) {
  if (psi_cond != 0) throw std::invalid_argument("epsilon_factor: psi conductor 0 only over Q_p");
  if (mu.cond_exp() == 0) return {Cyc::one(), 0, mu.p()};
  long pc = mu.units().modulus();
  int c = mu.cond_exp();
  // eps(1/2, mu, psi) = mu(p)^c p^{-c/2} sum_u mu^{-1}(u) zeta_{p^c}^{-u}
  Cyc sum = Cyc::zero();
  for (long u = 1; u < pc; ++u) {
    if (u % mu.p() == 0) continue;
    sum += mu.at_unit(u).inverse() * Cyc::root(pc, -u);
  }
  Cyc root = cyc_pow(mu.at_p(), c) * sum;
  return {root, -c, mu.p()};
}

// ---------------------------------------------------------------------------
// HeckeCharacter
// ---------------------------------------------------------------------------

HeckeCharacter HeckeCharacter::trivial(std::shared_ptr<const RayClassGroup> G) {
  return finite_order(G, std::vector<long>(G->orders().size(), 0));
}

HeckeCharacter HeckeCharacter::finite_order(std::shared_ptr<const RayClassGroup> G,
                                            const std::vector<long>& k) {
  HeckeCharacter x;
  x.G_ = G;
  x.inf_ = {0, 0};
  if (k.size() != G->orders().size())
    throw std::invalid_argument("finite_order: exponent count mismatch");
  x.class_number_one_ = (class_number(G->field()) == 1);
  // value order: chi(G_i) = zeta_{n_i}^{k_i} = zeta_L^{k_i L / n_i}
  long L = 1;
  for (size_t i = 0; i < k.size(); ++i) {
    long n = G->orders()[i];
    long kk = lmod(k[i], n);
    if (kk != 0) L = std::lcm(L, n / std::gcd(n, kk));
  }
  x.L_ = L;
  x.snf_exp_.resize(k.size());
  for (size_t i = 0; i < k.size(); ++i) {
    long n = G->orders()[i];
    Int scaled = Int(lmod(k[i], n)) * L;
    if (scaled % n != 0) throw std::logic_error("finite_order: exponent scaling not integral");
    x.snf_exp_[i] = to_long(scaled / n % L);
  }
  if (x.class_number_one_) {
    // convert to eps-representation when there is a nontrivial modulus
    if (!(G->modulus() == G->field().unit_ideal())) {
      ResidueUnits ru(G->field(), G->modulus());
      x.eps_exp_.clear();
      for (auto& g : ru.generators()) {
        auto d = G->dlog(G->field().principal_ideal(g));
        long e = 0;
        for (size_t i = 0; i < d.size(); ++i) e = lmod(e + d[i] * x.snf_exp_[i], x.L_);
        x.eps_exp_.push_back(e);
      }
    }
  }
  return x;
}

HeckeCharacter HeckeCharacter::canonical_chi0(std::shared_ptr<const QuadField> K) {
  if (class_number(*K) != 1)
    throw std::invalid_argument("canonical_chi0: requires class number one");
  HeckeCharacter x;
  QIdeal dd = K->different();
  x.G_ = std::make_shared<RayClassGroup>(K, dd);
  x.inf_ = {0, 1};
  x.L_ = 2;
  x.class_number_one_ = true;
  ResidueUnits ru(*K, dd);
  long d = K->d();
  // residue map O/(sqrt(-d)) = Z/d sends omega to -b from the HNF [d, b + omega]
  long romega = to_long(((-dd.b) % d + d) % d);
  for (auto& g : ru.generators()) {
    long xr = to_long(((rat_num(g.x) + rat_num(g.y) * romega) % d + d) % d);
    int kr = kronecker(xr, d);
    if (kr == 0) throw std::logic_error("canonical_chi0: generator not coprime");
    x.eps_exp_.push_back(kr == 1 ? 0 : 1);
  }
  // well-definedness: eps(-1) = (-1)^{a+b} = -1
  if (kronecker(d - 1, d) != -1)
    throw std::logic_error("canonical_chi0: eps(-1) != -1");
  return x;
}

Cyc HeckeCharacter::eps_of(const KElem& alpha) const {
  if (eps_exp_.empty()) return Cyc::one();
  if (!ru_) ru_ = std::make_shared<ResidueUnits>(field(), modulus());
  auto dl = ru_->dlog(alpha);
  long e = 0;
  for (size_t i = 0; i < dl.size(); ++i) e = lmod(e + dl[i] * eps_exp_[i], L_);
  return Cyc::root(L_, e);
}

Cyc HeckeCharacter::value_integral(const QIdeal& I) const {
  const QuadField& K = field();
  if (class_number_one_) {
    auto alpha = K.principal_generator(I);
    if (!alpha) throw std::logic_error("HeckeCharacter::value: ideal not principal (h=1?)");
    Cyc v = eps_of(*alpha);
    if (inf_.a != 0) v *= cyc_pow(kcyc(K, *alpha), -inf_.a);
    if (inf_.b != 0) v *= cyc_pow(kcyc(K, K.conj(*alpha)), -inf_.b);
    return v;
  }
  if (!is_finite_order())
    throw std::logic_error("HeckeCharacter: algebraic values need class number one");
  auto d = G_->dlog(I);
  long e = 0;
  for (size_t i = 0; i < d.size(); ++i) e = lmod(e + d[i] * snf_exp_[i], L_);
  return Cyc::root(L_, e);
}

Cyc HeckeCharacter::value(const QIdeal& I) const {
  const QuadField& K = field();
  if (I.is_integral()) return value_integral(I);
  QIdeal num{I.a, I.b, I.c, 1};
  QIdeal den = K.principal_ideal(KElem(Rat(I.den), Rat(0)));
  QIdeal g = K.sum(num, den);
  QIdeal A = K.mul(num, K.inverse(g));
  QIdeal B = K.mul(den, K.inverse(g));
  return value_integral(A) * value_integral(B).inverse();
}

Cplx HeckeCharacter::unitary_value(const QIdeal& I) const {
  double n = to_double(I.norm());
  return value(I).embed() * std::pow(n, (inf_.a + inf_.b) / 2.0);
}

HeckeCharacter HeckeCharacter::to_modulus(const QIdeal& m) const {
  const QuadField& K = field();
  if (!K.divides(modulus(), m))
    throw std::invalid_argument("to_modulus: new modulus must be divisible by the old");
  if (m == modulus()) return *this;
  HeckeCharacter x;
  x.G_ = std::make_shared<RayClassGroup>(G_->field_ptr(), m);
  x.inf_ = inf_;
  x.L_ = L_;
  x.class_number_one_ = class_number_one_;
  if (class_number_one_) {
    if (!(m == K.unit_ideal())) {
      ResidueUnits ru(K, m);
      for (auto& g : ru.generators()) {
        // eps_new(g) = eps_old(g): g is coprime to m, hence to the old modulus
        Cyc v = eps_of(g);
        bool found = false;
        for (long e = 0; e < L_; ++e)
          if (v == Cyc::root(L_, e)) { x.eps_exp_.push_back(e); found = true; break; }
        if (!found) throw std::logic_error("to_modulus: eps root match failed");
      }
    }
  } else {
    for (auto& g : x.G_->generators()) {
      Cyc v = value(g);
      bool found = false;
      for (long e = 0; e < L_; ++e)
        if (v == Cyc::root(L_, e)) { x.snf_exp_.push_back(e); found = true; break; }
      if (!found) throw std::logic_error("to_modulus: snf root match failed");
    }
    // snf_exp_ now holds zeta_L-exponents directly
  }
  return x;
}

HeckeCharacter HeckeCharacter::operator*(const HeckeCharacter& o) const {
  const QuadField& K = field();
  if (K.d() != o.field().d()) throw std::invalid_argument("HeckeCharacter product: fields differ");
  QIdeal m = K.intersect(modulus(), o.modulus());
  HeckeCharacter a = to_modulus(m), b = o.to_modulus(m);
  HeckeCharacter x;
  x.G_ = a.G_;
  x.inf_ = {a.inf_.a + b.inf_.a, a.inf_.b + b.inf_.b};
  x.L_ = std::lcm(a.L_, b.L_);
  x.class_number_one_ = a.class_number_one_;
  if (x.class_number_one_) {
    for (size_t i = 0; i < a.eps_exp_.size(); ++i)
      x.eps_exp_.push_back(lmod(a.eps_exp_[i] * (x.L_ / a.L_) + b.eps_exp_[i] * (x.L_ / b.L_), x.L_));
  } else {
    if (!(x.inf_ == InfinityType{0, 0}))
      throw std::logic_error("HeckeCharacter: algebraic product needs h = 1");
    for (size_t i = 0; i < a.snf_exp_.size(); ++i)
      x.snf_exp_.push_back(lmod(a.snf_exp_[i] * (x.L_ / a.L_) + b.snf_exp_[i] * (x.L_ / b.L_), x.L_));
  }
  return x;
}

HeckeCharacter HeckeCharacter::power(long n) const {
  HeckeCharacter x = *this;
  x.inf_ = {inf_.a * n, inf_.b * n};
  long nn = lmod(n, L_);
  for (auto& e : x.eps_exp_) e = lmod(e * nn, L_);
  for (auto& e : x.snf_exp_) e = lmod(e * nn, L_);
  return x;
}

HeckeCharacter HeckeCharacter::conj_char() const {
  const QuadField& K = field();
  QIdeal mc = K.conj(modulus());
  HeckeCharacter x;
  x.G_ = (mc == modulus()) ? G_ : std::make_shared<RayClassGroup>(G_->field_ptr(), mc);
  x.inf_ = {inf_.b, inf_.a};
  x.L_ = L_;
  x.class_number_one_ = class_number_one_;
  if (class_number_one_) {
    if (!(mc == K.unit_ideal())) {
      ResidueUnits ru(K, mc);
      for (auto& g : ru.generators()) {
        Cyc v = eps_of(K.conj(g));
        bool found = false;
        for (long e = 0; e < L_; ++e)
          if (v == Cyc::root(L_, e)) { x.eps_exp_.push_back(e); found = true; break; }
        if (!found) throw std::logic_error("conj_char: eps root match failed");
      }
    }
  } else {
    for (auto& g : x.G_->generators()) {
      Cyc v = value(K.conj(g));
      bool found = false;
      for (long e = 0; e < L_; ++e)
        if (v == Cyc::root(L_, e)) { x.snf_exp_.push_back(e); found = true; break; }
      if (!found) throw std::logic_error("conj_char: snf root match failed");
    }
  }
  return x;
}

HeckeCharacter HeckeCharacter::base_change() const {
  return *this * conj_char().power(-1);
}

QIdeal HeckeCharacter::conductor() const {
  const QuadField& K = field();
  if (modulus() == K.unit_ideal()) return K.unit_ideal();
  auto factors = K.factor(modulus());
  QIdeal cond = K.unit_ideal();
  for (size_t fi = 0; fi < factors.size(); ++fi) {
    auto [prime, e] = factors[fi];
    // smallest f with the character trivial on the CRT'd subgroup 1 + p^f (mod p^e)
    int f = e;
    for (int cand = e - 1; cand >= 0; --cand) {
      // generators of (1 + p^cand)/(1 + p^e) at this factor, 1 at the others
      std::vector<KElem> gens;
      if (cand == 0) {
        ResidueUnits local(K, K.pow(prime, e));
        for (auto& g : local.generators()) gens.push_back(g);
      } else {
        auto [u, v] = K.z_basis(K.pow(prime, cand));
        long pchar = factorize(to_long(prime.a * prime.c))[0].first;
        for (KElem base : {u, v}) {
          Rat scale(1);
          for (int j = 0; j < e; ++j) {
            gens.push_back(KElem(Rat(1), Rat(0)) + KElem(base.x * scale, base.y * scale));
            scale *= pchar;
          }
        }
      }
      bool trivial = true;
      for (auto& g : gens) {
        std::vector<std::pair<QIdeal, KElem>> congr;
        for (size_t fj = 0; fj < factors.size(); ++fj)
          congr.push_back({K.pow(factors[fj].first, factors[fj].second),
                           fi == fj ? g : KElem::from_int(1)});
        KElem alpha = factors.size() == 1 ? g : K.solve_crt(congr);
        // finite-part value of (alpha): strip the algebraic part, which is
        // trivial since we only need the eps/snf exponent
        Cyc v;
        if (class_number_one_) v = eps_of(alpha);
        else v = value(K.principal_ideal(alpha));
        if (!(v == Cyc::one())) { trivial = false; break; }
      }
      if (!trivial) break;
      f = cand;
    }
    cond = K.mul(cond, K.pow(prime, f));
  }
  return cond;
}

Cyc HeckeCharacter::primitive_value(const QIdeal& I) const {
  const QuadField& K = field();
  QIdeal cond = conductor();
  bool coprime_mod = true;
  for (auto& [q, e] : K.factor(modulus())) {
    (void)e;
    if (K.valuation(I, q) != 0) coprime_mod = false;
    if (K.valuation(I, q) != 0 && K.valuation(cond, q) > 0)
      throw std::invalid_argument("primitive_value: ideal not coprime to the conductor");
  }
  if (coprime_mod) return value(I);
  if (!class_number_one_)
    throw std::logic_error("primitive_value: descent requires class number one");
  auto alpha = K.principal_generator(I);
  if (!alpha) throw std::logic_error("primitive_value: ideal not principal");
  // adjust the generator to be ≡ alpha mod the conductor part and 1 elsewhere
  auto factors = K.factor(modulus());
  std::vector<std::pair<QIdeal, KElem>> congr;
  for (auto& [q, e] : factors) {
    bool in_cond = K.valuation(cond, q) > 0;
    congr.push_back({K.pow(q, e), in_cond ? *alpha : KElem::from_int(1)});
  }
  KElem adj = factors.size() == 1 ? congr[0].second : K.solve_crt(congr);
  Cyc v = eps_of(adj);
  if (inf_.a != 0) v *= cyc_pow(kcyc(K, *alpha), -inf_.a);
  if (inf_.b != 0) v *= cyc_pow(kcyc(K, K.conj(*alpha)), -inf_.b);
  return v;
}

HeckeCharacter HeckeCharacter::primitive() const {
  QIdeal cond = conductor();
  if (cond == modulus()) return *this;
  const QuadField& K = field();
  if (!class_number_one_)
    throw std::logic_error("primitive(): descent requires class number one");
  HeckeCharacter x;
  x.G_ = std::make_shared<RayClassGroup>(G_->field_ptr(), cond);
  x.inf_ = inf_;
  x.L_ = L_;
  x.class_number_one_ = true;
  if (!(cond == K.unit_ideal())) {
    ResidueUnits ru(K, cond);
    auto factors = K.factor(modulus());
    for (auto& g : ru.generators()) {
      // adjust g to be coprime to the full modulus, matching it mod the conductor
      std::vector<std::pair<QIdeal, KElem>> congr;
      for (auto& [q, e] : factors) {
        bool in_cond = K.valuation(cond, q) > 0;
        congr.push_back({K.pow(q, e), in_cond ? g : KElem::from_int(1)});
      }
      KElem adj = factors.size() == 1 ? congr[0].second : K.solve_crt(congr);
      Cyc v = eps_of(adj);
      x.eps_exp_.push_back(root_match_member(v, L_));
    }
  }
  return x;
}

long HeckeCharacter::eps_exponent(const KElem& alpha) const {
  if (eps_exp_.empty()) return 0;
  if (!ru_) ru_ = std::make_shared<ResidueUnits>(field(), modulus());
  auto dl = ru_->dlog(alpha);
  long e = 0;
  for (size_t i = 0; i < dl.size(); ++i) e = lmod(e + dl[i] * eps_exp_[i], L_);
  return e;
}

LocalCharacter HeckeCharacter::local_component(const QIdeal& w) const {
  const QuadField& K = field();
  QIdeal cond = conductor();
  long p = to_long(w.a * w.c);  // split prime: N(w) = p
  if (w.c != 1 || K.d() % p == 0 || K.factor_prime(p).type != SplitType::kSplit)
    throw std::invalid_argument("local_component: split primes only");
  int cw = static_cast<int>(K.valuation(cond, w));
  // unit part
  std::vector<long> exps;
  long L = L_;
  ZpUnits zu(p, cw);
  if (cw > 0) {
    int ew = static_cast<int>(K.valuation(modulus(), w));
    auto factors = K.factor(modulus());
    for (long g : zu.gens()) {
      std::vector<std::pair<QIdeal, KElem>> congr;
      for (auto& [q, e] : factors) {
        bool is_w = (K.valuation(w, q) > 0);
        congr.push_back({K.pow(q, e), is_w ? KElem(Rat(g), Rat(0)) : KElem::from_int(1)});
      }
      (void)ew;
      KElem alpha = factors.size() == 1 ? KElem(Rat(g), Rat(0)) : K.solve_crt(congr);
      // chi_w(u) = [chi_oo(alpha) * chi_ideal((alpha))]^{-1}; the algebraic
      // parts cancel, leaving the finite part inverse
      Cyc v;
      if (class_number_one_) v = eps_of(alpha).inverse();
      else v = value(K.principal_ideal(alpha)).inverse();
      bool found = false;
      for (long e = 0; e < L; ++e)
        if (v == Cyc::root(L, e)) { exps.push_back(e); found = true; break; }
      if (!found) throw std::logic_error("local_component: unit root match failed");
    }
  }
  // uniformizer value
  Cyc unif;
  if (K.valuation(modulus(), w) == 0) {
    unif = value(w);
  } else {
    if (!class_number_one_)
      throw std::logic_error("local_component at a modulus prime requires h = 1");
    auto pi = K.principal_generator(w);
    if (!pi) throw std::logic_error("local_component: prime not principal");
    // pi diagonal: 1 = chi_w(pi_w) * chi_wbar(pi) * prod_{w'|m, w' != w} chi_{w'}(pi) * chi_oo(pi)
    // chi_w(p) = chi_w(pi_w) / chi_w(unit part of pi_w)
    // Assemble the product of all the other local values exactly.
    Cyc other = Cyc::one();
    // chi_oo(pi) = pi^a pibar^b
    other *= cyc_pow(kcyc(K, *pi), inf_.a) * cyc_pow(kcyc(K, K.conj(*pi)), inf_.b);
    // components at the modulus places away from w: pi is a unit there
    auto factors = K.factor(modulus());
    for (auto& [q, e] : factors) {
      if (K.valuation(w, q) > 0) continue;
      // chi_q(unit) = eps-part restricted: use CRT trick per place
      std::vector<std::pair<QIdeal, KElem>> congr;
      for (auto& [q2, e2] : factors)
        congr.push_back({K.pow(q2, e2), (q2 == q) ? *pi : KElem::from_int(1)});
      KElem alpha = factors.size() == 1 ? *pi : K.solve_crt(congr);
      other *= eps_of(alpha).inverse();
    }
    Cyc chiw_pi = other.inverse();
    // unit part of iota_w(pi): u = pi / p in Z_p^x ... value via the unit data
    // iota_w(pi) has valuation 1: chi_w(pi_w) = chi_w(p) * chi_w(iota_w(pi)/p)
    // We need iota_w(pi)/p mod p^{cw}: compute iota_w(pi) mod p^{cw+1}.
    if (cw == 0) {
      unif = chiw_pi;
    } else {
      // residue of pi at w modulo w^{cw+1}: omega = -b from HNF of w^{cw+1}
      QIdeal wpow = K.pow(w, cw + 1);
      long mod = to_long(wpow.a);
      long rom = lmod(to_long((-wpow.b) % mod), mod);
      long pi_res = lmod(to_long((rat_num(pi->x) + rat_num(pi->y) * rom) % mod), mod);
      if (pi_res % p != 0) throw std::logic_error("local_component: pi not divisible at w");
      long u = (pi_res / p) % (mod / p);
      LocalCharacter tmp(p, cw, L, exps, Cyc::one());
      unif = chiw_pi * tmp.at_unit(u).inverse();
    }
  }
  return LocalCharacter(p, cw, std::max(L, 1L), exps, unif);
}

bool HeckeCharacter::restricts_to_quadratic_character(long prime_bound) const {
  const QuadField& K = field();
  for (long q = 2; q <= prime_bound; ++q) {
    if (!is_prime(q)) continue;
    QIdeal qq = K.principal_ideal(KElem::from_int(q));
    if (!K.is_coprime(qq, modulus())) continue;
    // unitary chi(rational-prime idele) = value((q)) * q^{a+b}
    Cyc v = value(qq);
    long s = inf_.a + inf_.b;
    Rat qs = s >= 0 ? Rat(ipow(Int(q), static_cast<unsigned>(s)))
                    : Rat(1, ipow(Int(q), static_cast<unsigned>(-s)));
    if (!(v * Cyc(qs) == Cyc(Rat(kronecker(K.disc(), q))))) return false;
  }
  return true;
}


// ---------------------------------------------------------------------------
// Local characters at non-split places, the delta search, admissibility
// ---------------------------------------------------------------------------

namespace {

// character of K_w^x at a non-split place w (inert or ramified), extracted
// from a global character with h(K) = 1
struct LocalCharE {
  const QuadField* K = nullptr;
  QIdeal w;
  int cond = 0;
  long L = 1;
  std::shared_ptr<LocalUnitGroup> units;
  std::vector<long> exps;
  KElem pi;       // uniformizer (global generator of w or of p for inert)
  Cyc pi_value;   // chi_w(pi)

  Cyc at_unit(const KElem& u) const {
    if (cond == 0) return Cyc::one();
    auto d = units->dlog(u);
    long e = 0;
    for (size_t i = 0; i < d.size(); ++i) e = (e + d[i] * exps[i]) % L;
    if (e < 0) e += L;
    return Cyc::root(L, e);
  }
};

long root_match(const Cyc& v, long L) {
  for (long e = 0; e < L; ++e)
    if (v == Cyc::root(L, e)) return e;
  throw std::logic_error("root_match: value is not a stored root of unity");
}

LocalCharE local_component_nonsplit(const HeckeCharacter& chi, const QIdeal& w) {
  const QuadField& K = chi.field();
  LocalCharE out;
  out.K = &K;
  out.w = w;
  out.L = chi.value_order();
  QIdeal cond = chi.conductor();
  out.cond = static_cast<int>(K.valuation(cond, w));
  auto factors = K.factor(chi.modulus());
  if (out.cond > 0) {
    out.units = std::make_shared<LocalUnitGroup>(K, w, out.cond);
    for (auto& g : out.units->generators()) {
      std::vector<std::pair<QIdeal, KElem>> congr;
      for (auto& [q, e] : factors)
        congr.push_back({K.pow(q, e), (K.valuation(w, q) > 0) ? g : KElem::from_int(1)});
      KElem alpha = factors.size() == 1 ? g : K.solve_crt(congr);
      // chi_w(u) = [finite part of chi at (alpha)]^{-1}
      Cyc v = chi.value(K.principal_ideal(alpha)).inverse();
      // strip the algebraic part: alpha^{a} conj(alpha)^{b}
      v *= cyc_pow(kcyc(K, alpha), -chi.inf_type().a) *
           cyc_pow(kcyc(K, K.conj(alpha)), -chi.inf_type().b);
      out.exps.push_back(root_match(v, out.L));
    }
  }
  // uniformizer
  auto pi = K.principal_generator(w);
  if (!pi) throw std::logic_error("local_component_nonsplit: prime not principal");
  out.pi = *pi;
  if (K.valuation(chi.modulus(), w) == 0) {
    out.pi_value = chi.value(w);
  } else {
    // product formula: chi_w(pi) = [chi_oo(pi) * prod_{w' | m, w' != w} chi_{w'}(pi)]^{-1}
    Cyc other = cyc_pow(kcyc(K, *pi), chi.inf_type().a) *
                cyc_pow(kcyc(K, K.conj(*pi)), chi.inf_type().b);
    for (auto& [q, e] : factors) {
      if (K.valuation(w, q) > 0) continue;
      std::vector<std::pair<QIdeal, KElem>> congr;
      for (auto& [q2, e2] : factors)
        congr.push_back({K.pow(q2, e2), (q2 == q) ? *pi : KElem::from_int(1)});
      KElem alpha = factors.size() == 1 ? *pi : K.solve_crt(congr);
      Cyc v = chi.value(K.principal_ideal(alpha)).inverse();
      v *= cyc_pow(kcyc(K, alpha), -chi.inf_type().a) *
           cyc_pow(kcyc(K, K.conj(alpha)), -chi.inf_type().b);
      other *= v;
    }
    out.pi_value = other.inverse();
  }
  return out;
}

// psi_E(z) = e^{-2 pi i {Tr(z)}_p}, exact
Cyc psi_E(const QuadField& K, const KElem& z, long p) {
  Rat tr = K.trace(z);
  Int den = rat_den(tr);
  long pk = 1;
  while (den % p == 0) { den /= p; pk *= p; }
  // fractional part at p: write tr = a / (pk * den'), den' coprime to p
  // {tr}_p = a * inv(den') / pk mod 1
  Int num = rat_num(tr);
  Int denp = rat_den(tr) / pk;
  Int r = num % pk;
  if (r < 0) r += pk;
  r = r * invmod(denp % pk, pk) % pk;
  return Cyc::root(pk, to_long(-r));
}

// eps(1/2, mu, psi_E) at a non-split place, numeric; psi conductor n = val_w(d_K)
Cplx epsilon_nonsplit(const QuadField& K, const LocalCharE& mu, int n) {
  long p = factorize(to_long(mu.w.a * mu.w.c))[0].first;
  bool ramified = (K.d() % p == 0);
  double qE = ramified ? p : static_cast<double>(p) * p;
  int c = mu.cond;
  // eps(1/2, mu, psi of conductor n) = mu(pi)^{c+n} q^{-c/2} *
  //   sum_{u in (O/p^c)^x} mu^{-1}(u) psi(u pi^{-(c+n)})
  if (c == 0) return cyc_pow(mu.pi_value, n).embed();
  QIdeal wc = K.pow(mu.w, c);
  long A = to_long(wc.a), C = to_long(wc.c);
  KElem pishift = KElem::from_int(1);
  for (int i = 0; i < c + n; ++i) pishift = K.mul(pishift, mu.pi);
  KElem pinv = K.inv(pishift);
  Cplx sum = 0;
  for (long y = 0; y < C; ++y)
    for (long x = 0; x < A; ++x) {
      KElem u{Rat(x), Rat(y)};
      if (K.contains(mu.w, u)) continue;
      sum += mu.at_unit(u).inverse().embed() * psi_E(K, K.mul(u, pinv), p).embed();
    }
  return cyc_pow(mu.pi_value, c + n).embed() * std::pow(qE, -c / 2.0) * sum;
}

// residue data of an integral element at a split prime power
std::pair<long, long> split_unit_residue(const QuadField& K, const KElem& z, const QIdeal& w,
                                         int precision) {
  long val = K.valuation(z, w);
  long p = to_long(w.a);
  QIdeal wk = K.pow(w, precision + val);
  Int mod = wk.a;
  Int rom = ((-wk.b) % mod + mod) % mod;
  Int res = (rat_num(z.x) + rat_num(z.y) * rom) % mod;
  if (res < 0) res += mod;
  Int pv = ipow(Int(p), static_cast<unsigned>(val));
  if (res % pv != 0) throw std::logic_error("split_unit_residue: valuation mismatch");
  Int u = res / pv % (mod / pv);
  return {val, to_long(u)};
}

// the (delta1) product over w | v, as a complex number
Cplx delta_place_product(const HeckeCharacter& chi, long v, const KElem& delta) {
  const QuadField& K = chi.field();
  auto sp = K.factor_prime(v);
  Cplx prod = 1;
  if (sp.type == SplitType::kSplit) {
    for (auto& pf : sp.primes) {
      LocalCharacter cw = chi.local_component(pf.prime);
      // chi_w(delta): split integral-element residue plus rational parts
      Int den = lcm(rat_den(delta.x), rat_den(delta.y));
      KElem num(delta.x * Rat(den), delta.y * Rat(den));
      auto [val, u] = split_unit_residue(K, num, pf.prime, std::max(cw.cond_exp(), 1));
      Cyc cv = cyc_pow(cw.at_p(), val);
      if (cw.cond_exp() > 0) cv *= cw.at_unit(u);
      cv *= cw.at(Rat(1, den));
      long valden = 0;
      Int dd = den;
      while (dd % v == 0) { dd /= v; --valden; }
      LocalCharacter cwinv = cw.inverse();
      EpsilonFactor eps = epsilon_factor(cwinv);
      // unitary shift: chi_w = chi0_w |.|^{-1/2} and eps at s = 1 instead of 1/2
      double shift = std::pow(static_cast<double>(v),
                              (val + valden) / 2.0 - cw.cond_exp() / 2.0);
      prod *= cv.embed() * eps.embed() * shift;
    }
  } else {
    QIdeal w = sp.primes[0].prime;
    LocalCharE cw = local_component_nonsplit(chi, w);
    long vd = K.valuation(delta, w);
    KElem unit = delta;
    for (long i = 0; i < vd; ++i) unit = K.div(unit, cw.pi);
    for (long i = 0; i < -vd; ++i) unit = K.mul(unit, cw.pi);
    // unit may be non-integral (denominator prime to w after scaling); clear it
    Int den = lcm(rat_den(unit.x), rat_den(unit.y));
    KElem unum(unit.x * Rat(den), unit.y * Rat(den));
    Cyc cv = cyc_pow(cw.pi_value, vd);
    if (cw.cond > 0) {
      cv *= cw.at_unit(unum);
      // divide by chi_w(den): den is a rational unit at w
      cv *= cw.at_unit(KElem(Rat(den % (cw.units->prime_power().a)), Rat(0))).inverse();
    }
    // inverse character for the epsilon factor
    LocalCharE cwinv = cw;
    for (auto& e : cwinv.exps) e = (cw.L - e) % cw.L;
    cwinv.pi_value = cw.pi_value.inverse();
    int n = static_cast<int>(K.valuation(K.different(), w));
    bool ram = (K.d() % v == 0);
    double qE = ram ? v : static_cast<double>(v) * v;
    double shift = std::pow(qE, vd / 2.0 - (cw.cond + n) / 2.0);
    prod *= cv.embed() * epsilon_nonsplit(K, cwinv, n) * shift;
  }
  return prod;
}

}  // namespace

ChiAdmissibilityReport verify_chi_admissible(const HeckeCharacter& chi0, long p,
                                             double lvalue_cutoff) {
  if (!chi0.restricts_to_quadratic_character())
    throw std::invalid_argument("verify_chi_admissible: chi does not restrict to eps_{K/Q}");
  ChiAdmissibilityReport rep;
  const QuadField& K = chi0.field();
  QIdeal cond = chi0.conductor();
  auto spp = K.factor_prime(p);
  rep.conductor_prime_to_p = true;
  for (auto& pf : spp.primes)
    if (K.valuation(cond, pf.prime) != 0) rep.conductor_prime_to_p = false;
  rep.infinity_type_ok = (chi0.inf_type() == InfinityType{0, 1});
  LValue lv = central_L_value(chi0, 0.5, lvalue_cutoff);
  rep.central_value_abs = std::abs(lv.value);
  rep.central_value_err = lv.error_estimate;
  rep.central_value_nonzero = rep.central_value_abs > 10 * std::max(lv.error_estimate, 1e-9);
  return rep;
}

KElem find_delta(const HeckeCharacter& chi0, long p, long height_bound) {
  const QuadField& K = chi0.field();
  KElem delta0 = K.sqrt_minus_d();
  auto try_delta = [&](const KElem& delta) -> bool {
    // (delta2): unit at places above p
    for (auto& pf : K.factor_prime(p).primes)
      if (K.valuation(delta, pf.prime) != 0) return false;
    // (delta1) at all finite places with possibly nontrivial contribution
    std::vector<long> suspicious;
    Rat nd = K.norm(delta);
    Int numn = rat_num(nd), denn = rat_den(nd);
    auto add_from = [&](Int n) {
      if (n < 0) n = -n;
      for (auto [q, e] : factorize(to_long(n))) { (void)e; suspicious.push_back(q); }
    };
    add_from(numn);
    add_from(denn);
    add_from(Int(2 * K.d()));
    add_from(rat_num(chi0.conductor().norm()));
    std::sort(suspicious.begin(), suspicious.end());
    suspicious.erase(std::unique(suspicious.begin(), suspicious.end()), suspicious.end());
    for (long v : suspicious) {
      Cplx pr = delta_place_product(chi0, v, delta);
      if (std::abs(pr - 1.0) > 1e-8) return false;
    }
    return true;
  };
  // search delta = sqrt(-d) * t over rationals of bounded height, t > 0
  for (long h = 1; h <= height_bound; ++h) {
    for (long a = 1; a <= h; ++a) {
      for (long b = 1; b <= h; ++b) {
        if (std::max(a, b) != h || std::gcd(a, b) != 1) continue;
        KElem delta(delta0.x * Rat(a, b), delta0.y * Rat(a, b));
        if (try_delta(delta)) return delta;
      }
    }
  }
  throw std::runtime_error("find_delta: search bound exhausted");
}


}  // namespace thetalift
