#include "thetalift/quadfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thetalift {

std::string KElem::str() const {
  std::ostringstream os;
  os << x.str();
  if (y != 0) os << " + " << y.str() << "*w";
  return os.str();
}

std::string QIdeal::str() const {
  std::ostringstream os;
  os << "[" << a.str() << ", " << b.str() << " + " << c.str() << "*w]";
  if (den != 1) os << "/" << den.str();
  return os.str();
}

QuadField::QuadField(long d) : d_(d) {
  if (d <= 0 || d % 8 != 7) throw std::invalid_argument("QuadField: need d ≡ 7 mod 8, d > 0");
  for (auto [p, e] : factorize(d))
    if (e > 1) throw std::invalid_argument("QuadField: d must be squarefree");
  disc_ = -d;
  n0_ = (1 + d) / 4;
  different_ = principal_ideal(sqrt_minus_d());
}

KElem QuadField::mul(const KElem& u, const KElem& v) const {
  // (x1 + y1 w)(x2 + y2 w), w^2 = w - n0
  Rat yy = u.y * v.y;
  return {u.x * v.x - yy * Rat(n0_), u.x * v.y + u.y * v.x + yy};
}

KElem QuadField::inv(const KElem& u) const {
  Rat n = norm(u);
  if (n == 0) throw std::domain_error("KElem inverse of zero");
  KElem c = conj(u);
  return {c.x / n, c.y / n};
}

Cplx QuadField::embed(const KElem& u) const {
  double s = std::sqrt(static_cast<double>(d_));
  // omega = (1 + i*sqrt(d))/2
  return Cplx(to_double(u.x) + 0.5 * to_double(u.y), 0.5 * to_double(u.y) * s);
}

namespace {

// HNF of the Z-module spanned by columns (x_i, y_i) in basis (1, omega):
// returns (a, b, c) with module = Z*a + Z*(b + c*omega), a,c > 0, 0 <= b < a.
// Requires full rank.
// extended gcd: returns (g, s, t) with g = s*a + t*b, g >= 0
std::array<Int, 3> ext_gcd(Int a, Int b) {
  Int s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (b != 0) {
    Int q = a / b;
    Int tmp = a - q * b; a = b; b = tmp;
    tmp = s0 - q * s1; s0 = s1; s1 = tmp;
    tmp = t0 - q * t1; t0 = t1; t1 = tmp;
  }
  if (a < 0) { a = -a; s0 = -s0; t0 = -t0; }
  return {a, s0, t0};
}

std::array<Int, 3> hnf2(std::vector<std::pair<Int, Int>> v) {
  // Clear omega-components by gcd elimination, accumulating into (b, c).
  Int b = 0, c = 0;
  for (auto& [x, y] : v) {
    if (y == 0) continue;
    if (c == 0) {
      c = y;
      b = x;
      x = 0;
    } else {
      auto [g, s, t] = ext_gcd(c, y);
      Int leftover = (y / g) * b - (c / g) * x;  // pure-integer remainder
      b = s * b + t * x;
      c = g;
      x = leftover;
    }
    y = 0;
  }
  if (c < 0) { c = -c; b = -b; }
  // gcd of pure-integer parts (the accumulated entries now have y == 0 and x
  // set to their leftover; the accumulator itself lives in (b, c))
  Int a = 0;
  for (auto& [x, y] : v)
    if (y == 0 && x != 0) a = (a == 0) ? Int(abs(x)) : Int(gcd(a, abs(x)));
  if (a == 0 || c == 0) throw std::domain_error("hnf2: module not of full rank");
  b %= a;
  if (b < 0) b += a;
  return {a, b, c};
}

}  // namespace

QIdeal QuadField::ideal_from_generators(const std::vector<KElem>& gens) const {
  // common denominator
  Int den = 1;
  for (auto& g : gens) {
    den = lcm(den, rat_den(g.x));
    den = lcm(den, rat_den(g.y));
  }
  std::vector<std::pair<Int, Int>> v;
  for (auto& g : gens) {
    Int x = rat_num(g.x) * (den / rat_den(g.x));
    Int y = rat_num(g.y) * (den / rat_den(g.y));
    if (x == 0 && y == 0) continue;
    v.push_back({x, y});
    // omega * (x + y*w) = -n0*y + (x + y)*w
    v.push_back({-Int(n0_) * y, x + y});
  }
  if (v.empty()) throw std::domain_error("ideal_from_generators: zero ideal");
  auto [a, b, c] = hnf2(std::move(v));
  // normalize: divide out content shared with den
  Int g = gcd(gcd(a, gcd(b, c)), den);
  QIdeal I{a / g, b / g, c / g, den / g};
  // HNF invariants: c | a and c | b must hold for an O-module; b reduced mod a.
  if (I.a % I.c != 0 || I.b % I.c != 0)
    throw std::logic_error("ideal HNF invariant violated");
  return I;
}

std::pair<KElem, KElem> QuadField::z_basis(const QIdeal& i) const {
  Rat d(1, i.den);
  return {KElem(Rat(i.a) * d, Rat(0)), KElem(Rat(i.b) * d, Rat(i.c) * d)};
}

QIdeal QuadField::mul(const QIdeal& i, const QIdeal& j) const {
  auto [u1, u2] = z_basis(i);
  auto [v1, v2] = z_basis(j);
  return ideal_from_generators({mul(u1, v1), mul(u1, v2), mul(u2, v1), mul(u2, v2)});
}

QIdeal QuadField::pow(const QIdeal& i, long e) const {
  if (e < 0) return pow(inverse(i), -e);
  QIdeal r = unit_ideal();
  QIdeal base = i;
  unsigned long ee = static_cast<unsigned long>(e);
  while (ee) {
    if (ee & 1) r = mul(r, base);
    base = mul(base, base);
    ee >>= 1;
  }
  return r;
}

QIdeal QuadField::conj(const QIdeal& i) const {
  auto [u1, u2] = z_basis(i);
  return ideal_from_generators({conj(u1), conj(u2)});
}

QIdeal QuadField::inverse(const QIdeal& i) const {
  QIdeal cj = conj(i);
  Rat n = i.norm();
  auto [u1, u2] = z_basis(cj);
  KElem s(Rat(1) / n, Rat(0));
  return ideal_from_generators({mul(u1, s), mul(u2, s)});
}

QIdeal QuadField::sum(const QIdeal& i, const QIdeal& j) const {
  auto [u1, u2] = z_basis(i);
  auto [v1, v2] = z_basis(j);
  return ideal_from_generators({u1, u2, v1, v2});
}

QIdeal QuadField::intersect(const QIdeal& i, const QIdeal& j) const {
  // I ∩ J = I*J / (I + J)
  return mul(mul(i, j), inverse(sum(i, j)));
}

bool QuadField::contains(const QIdeal& i, const KElem& g) const {
  // g = (x + y*omega), solve g*den = s*a + t*(b + c*omega)
  Rat X = g.x * Rat(i.den), Y = g.y * Rat(i.den);
  if (rat_den(X) != 1 || rat_den(Y) != 1) return false;
  Int x = rat_num(X), y = rat_num(Y);
  if (y % i.c != 0) return false;
  Int t = y / i.c;
  Int rem = x - t * i.b;
  return rem % i.a == 0;
}

bool QuadField::divides(const QIdeal& i, const QIdeal& j) const {
  auto [u1, u2] = z_basis(j);
  return contains(i, u1) && contains(i, u2);
}

bool QuadField::is_coprime(const QIdeal& i, const QIdeal& j) const {
  return sum(i, j) == unit_ideal();
}

long QuadField::valuation(const QIdeal& i, const QIdeal& prime) const {
  QIdeal inv_p = inverse(prime);
  // val(I) = val(numerator lattice) - val((den))
  auto count = [&](QIdeal cur) {
    long v = 0;
    while (divides(prime, cur)) {
      cur = mul(cur, inv_p);
      ++v;
    }
    return v;
  };
  long v = count(QIdeal{i.a, i.b, i.c, 1});
  if (i.den != 1) v -= count(principal_ideal(KElem(Rat(i.den), Rat(0))));
  return v;
}

long QuadField::valuation(const KElem& g, const QIdeal& prime) const {
  return valuation(principal_ideal(g), prime);
}

KElem QuadField::shortest_vector(const QIdeal& i) const {
  // Lagrange-Gauss reduction of basis (u, v) wrt N(.)
  auto [u, v] = z_basis(i);
  auto N = [&](const KElem& e) { return norm(e); };
  auto B = [&](const KElem& e, const KElem& f) {
    // bilinear form: (N(e+f) - N(e) - N(f))/2
    return (N(e + f) - N(e) - N(f)) / 2;
  };
  if (N(u) > N(v)) std::swap(u, v);
  while (true) {
    Rat mu = B(u, v) / N(u);
    // round to nearest
    Int num = rat_num(mu), den = rat_den(mu);
    Int q = (2 * num + den) / (2 * den);
    if (2 * num + den < 0) q = -((-2 * num - den + 2 * den - 1) / (2 * den));
    KElem w = v - KElem(Rat(q) * u.x, Rat(q) * u.y);
    if (N(w) >= N(u)) {
      return u;
    }
    v = u;
    u = w;
  }
}

std::optional<KElem> QuadField::principal_generator(const QIdeal& i) const {
  KElem s = shortest_vector(i);
  if (norm(s) == i.norm()) return s;
  return std::nullopt;
}

PrimeSplitting QuadField::factor_prime(long p) const {
  if (!is_prime(p)) throw std::invalid_argument("factor_prime: p not prime");
  PrimeSplitting out;
  auto make_prime = [&](long root) {
    // [p, root + omega]
    long bb = ((-root) % p + p) % p;
    return ideal_from_generators({KElem(Rat(p), Rat(0)), KElem(Rat(bb), Rat(1))});
  };
  if (p == 2) {
    // d ≡ 7 mod 8: x^2 - x + n0 ≡ x(x-1) mod 2
    out.type = SplitType::kSplit;
    out.primes = {{make_prime(0), 1}, {make_prime(1), 1}};
    return out;
  }
  int kr = kronecker(disc_, p);
  if (kr == 1) {
    // roots of x^2 - x + n0 mod p: x = (1 ± sqrt(disc)) / 2
    long sq = sqrt_mod(Int(disc_), p);
    long r = to_long((Int(1) + sq) % p * invmod(2, p) % p);
    if ((Int(r) * r - r + n0_) % p != 0) throw std::logic_error("split prime: no root found");
    long r2 = static_cast<long>(((Int(1) - r) % p + p) % p);
    out.type = SplitType::kSplit;
    out.primes = {{make_prime(r), 1}, {make_prime(r2), 1}};
    if (r == r2) throw std::logic_error("split prime: repeated root");
    return out;
  }
  if (kr == -1) {
    out.type = SplitType::kInert;
    out.primes = {{ideal_from_generators({KElem(Rat(p), Rat(0)), KElem(Rat(0), Rat(p))}), 1}};
    return out;
  }
  // ramified: p | d, double root r = (p+1)/2 mod p
  long r = static_cast<long>(((Int(p) + 1) / 2) % p);
  out.type = SplitType::kRamified;
  out.primes = {{make_prime(r), 2}};
  return out;
}

std::vector<std::pair<QIdeal, int>> QuadField::factor(const QIdeal& i) const {
  if (!i.is_integral()) throw std::invalid_argument("factor: ideal must be integral");
  std::vector<std::pair<QIdeal, int>> out;
  Int n = i.a * i.c;
  if (n > std::numeric_limits<long>::max()) throw std::overflow_error("factor: norm too large");
  for (auto [p, e] : factorize(static_cast<long>(n))) {
    (void)e;
    auto sp = factor_prime(p);
    for (auto& pf : sp.primes) {
      long v = valuation(i, pf.prime);
      if (v > 0) out.push_back({pf.prime, static_cast<int>(v)});
    }
  }
  return out;
}

std::array<Int, 3> QuadField::class_key(const QIdeal& i) const {
  // primitive part: divide by c (the content of the Z-basis in omega-direction)
  QIdeal prim{i.a / i.c, i.b / i.c, 1, 1};
  // form (A, B, C) = norm form of the lattice [A, b + omega] scaled by 1/A:
  // A x^2 + (2b+1) x y + N(b+omega)/A y^2, discriminant -d.
  Int A = prim.a, b = prim.b;
  Int B = 2 * b + 1;
  Int Nb = b * b + b + n0_;
  if (Nb % A != 0) throw std::logic_error("class_key: non-integral form");
  Int C = Nb / A;
  auto floordiv = [](const Int& n, const Int& m) {
    Int q = n / m;
    if ((n % m != 0) && ((n < 0) != (m < 0))) --q;
    return q;
  };
  // Gauss reduction
  while (true) {
    // normalize B into (-A, A]
    Int q = floordiv(B + A - 1, 2 * A);
    B -= 2 * q * A;
    C = (B * B + Int(d_)) / (4 * A);
    if (A > C) {
      std::swap(A, C);
      B = -B;
      continue;
    }
    break;
  }
  if (A == C && B < 0) B = -B;
  return {A, B, C};
}

KElem QuadField::solve_crt(const std::vector<std::pair<QIdeal, KElem>>& congruences) const {
  // Find alpha with alpha ≡ r_i mod I_i for pairwise comaximal integral ideals I_i.
  // Iterative: combine two congruences via 1 = x + y, x in I, y in J.
  auto combine = [&](const QIdeal& I, const KElem& r1, const QIdeal& J,
                     const KElem& r2) -> KElem {
    // find x in I, y in J with x + y = 1: enumerate small combinations via HNF of I+J=O.
    // Solve s1*a_I + s2*(b_I + c_I w) + t1*a_J + t2*(b_J + c_J w) = 1 over Z.
    // 2 equations (coefficients of 1 and w), 4 unknowns: solve by HNF with transform.
    Int AI = I.a, BI = I.b, CI = I.c, AJ = J.a, BJ = J.b, CJ = J.c;
    if (I.den != 1 || J.den != 1) throw std::invalid_argument("solve_crt: integral ideals only");
    // columns: (AI,0), (BI,CI), (AJ,0), (BJ,CJ); want integer combo = (1,0).
    // Use: from w-components: s2*CI + t2*CJ = 0 combined with ... do a small search
    // via extended gcd: g = gcd(CI, CJ), then w-component zero requires
    // s2 = k*CJ/g, t2 = -k*CI/g. Constant: s1*AI + t1*AJ + s2*BI + t2*BJ = 1.
    Int g2 = gcd(CI, CJ);
    Int gA = gcd(AI, AJ);
    // s1*AI + t1*AJ + k*(CJ/g2*BI - CI/g2*BJ) = 1
    Int M = CJ / g2 * BI - CI / g2 * BJ;
    // solve u*gA + k*M = 1 via extended gcd(gA, M)
    Int s0 = 1, s1 = 0, t0 = 0, t1 = 1, a0 = gA, a1 = M;
    while (a1 != 0) {
      Int q = a0 / a1;
      Int tmp = a0 - q * a1; a0 = a1; a1 = tmp;
      tmp = s0 - q * s1; s0 = s1; s1 = tmp;
      tmp = t0 - q * t1; t0 = t1; t1 = tmp;
    }
    if (a0 != 1 && a0 != -1) throw std::domain_error("solve_crt: ideals not comaximal");
    if (a0 == -1) { s0 = -s0; t0 = -t0; }
    Int u = s0, k = t0;
    // x = u' * (AI or AJ parts) ... build x in I:
    // x = (u * AI-part distributed) + k*(CJ/g2)*(BI + CI w)
    // choose split of u*gA = uI*AI + uJ*AJ via extended gcd(AI, AJ)
    Int b0 = 1, b1 = 0, c0 = 0, c1 = 1, x0 = AI, x1 = AJ;
    while (x1 != 0) {
      Int q = x0 / x1;
      Int tmp = x0 - q * x1; x0 = x1; x1 = tmp;
      tmp = b0 - q * b1; b0 = b1; b1 = tmp;
      tmp = c0 - q * c1; c0 = c1; c1 = tmp;
    }
    // x0 = gA = b0*AI + c0*AJ
    Int uI = u * b0, uJ = u * c0;
    KElem x(Rat(uI * AI) + Rat(k * (CJ / g2) * BI), Rat(k * (CJ / g2) * CI));
    // verify x in I and 1 - x in J
    KElem one = KElem::from_int(1);
    if (!contains(I, x) || !contains(J, one - x))
      throw std::logic_error("solve_crt: partition of unity failed");
    // alpha = r2*x + r1*(1-x)
    return mul(r2, x) + mul(r1, one - x);
  };
  if (congruences.empty()) return KElem::from_int(0);
  QIdeal I = congruences[0].first;
  KElem r = congruences[0].second;
  for (size_t i = 1; i < congruences.size(); ++i) {
    r = combine(I, r, congruences[i].first, congruences[i].second);
    I = mul(I, congruences[i].first);
  }
  return r;
}

}  // namespace thetalift
