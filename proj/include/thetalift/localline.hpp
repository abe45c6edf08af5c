#pragma once

#include "thetalift/characters.hpp"

namespace thetalift {

// Exact coefficient c * p^{half/2} used throughout the local Weil calculus.
struct CycQ {
  Cyc c = Cyc::one();
  int half = 0;  // power of sqrt(p)
  long p = 0;

  static CycQ one(long p) { return {Cyc::one(), 0, p}; }
  CycQ operator*(const CycQ& o) const {
    if (p != o.p && p != 0 && o.p != 0) throw std::invalid_argument("CycQ: mixed primes");
    return {c * o.c, half + o.half, p ? p : o.p};
  }
  CycQ operator*(const Cyc& o) const { return {c * o, half, p}; }
  bool operator==(const CycQ& o) const { return half == o.half && c == o.c; }
  Cplx embed() const { return c.embed() * std::pow(static_cast<double>(p), half / 2.0); }
  bool exact_rational_power() const { return half % 2 == 0; }
  Cyc exact() const {  // only when half is even
    if (half % 2 != 0) throw std::logic_error("CycQ::exact: odd half power");
    Rat f = half >= 0 ? Rat(ipow(Int(p), half / 2)) : Rat(1, ipow(Int(p), -half / 2));
    return c * Cyc(f);
  }
};

// One term of a rank-1 elementary Schwartz function on Q_p:
// coeff * indicator of (center + p^e Z_p). Invariant: center == 0 or
// v_p(center) < e, and center is reduced mod p^e.
struct LineTerm {
  CycQ coeff;
  Rat center;
  long e;
};

// Finite sum of coset-indicator terms; multiplicative twists are expanded
// into residue cosets on construction so the class is closed under the Weil
// generators.
class LineFunction {
 public:
  LineFunction() = default;
  LineFunction(long p, std::vector<LineTerm> terms) : p_(p), terms_(std::move(terms)) {
    normalize();
  }
  static LineFunction zero(long p) { return LineFunction(p, {}); }
  // 1_{p^e Z_p}
  static LineFunction lattice(long p, long e);
  // 1_{Z_p^x}
  static LineFunction units(long p);
  // twist * 1_{Z_p^x}; the twist is expanded into cosets mod p^{cond}
  static LineFunction twisted_units(const LocalCharacter& chi);

  long p() const { return p_; }
  const std::vector<LineTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Cyc eval(const Rat& x) const;  // exact value (coefficients must have even half powers)
  Cplx eval_embed(const Rat& x) const;

  LineFunction operator+(const LineFunction& o) const;
  LineFunction operator-(const LineFunction& o) const;
  LineFunction scaled(const CycQ& c) const;

  // f(x) -> f(a x)
  LineFunction substitute_scale(const Rat& a) const;
  // multiply by psi(b x^2)
  LineFunction mult_psi_quadratic(const Rat& b) const;
  // multiply by psi(b x)
  LineFunction mult_psi_linear(const Rat& b) const;
  // Fourier transform: f^(y) = int f(x) psi(x y) dx  (psi = e^{-2 pi i {x}})
  LineFunction fourier() const;

  // int f(x) dx (self-dual measure, vol(Z_p) = 1)
  CycQ integral() const;
  // int f(x) g(x) dx
  static CycQ pair(const LineFunction& f, const LineFunction& g);

  // Tate integral Z(s, f, mu) as a finite sum plus a possible L-factor:
  // returns (finite exact part, geometric-part flag handled by caller).
  // Only the numeric value is provided here; the exact closed form for
  // elementary inputs is in tate_integral_* below.
  void split_by_valuation(std::map<long, LineFunction>& shells, long vmin, long vmax) const;

 private:
  void normalize();
  long p_ = 0;
  std::vector<LineTerm> terms_;
};

// exact Tate integral: Z(s, f, mu) = sum_v a_v p^{-v s} + sum_j b_j sum_{k >= k_j} t^k
// with t = mu(p) p^{-s}; all coefficients exact.
struct TateValue {
  long p = 0;
  std::map<long, CycQ> by_valuation;           // v -> a_v (mu-values folded in)
  std::vector<std::pair<CycQ, long>> geoms;    // (b_j, k_j)
  Cplx value(double s, const LocalCharacter& mu) const;
  bool is_finite_sum() const { return geoms.empty(); }
};

// Z(s, f, mu) = int f(x) mu(x) |x|^s d^x x, vol(Z_p^x, d^x) = 1.
TateValue tate_integral(const LineFunction& f, const LocalCharacter& mu);
// brute-force oracle: truncated sum over p^{-N} Z_p / p^N
Cplx tate_integral_bruteforce(const LineFunction& f, const LocalCharacter& mu, double s,
                              long depth = 12);

}  // namespace thetalift
