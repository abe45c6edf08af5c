#include "thetalift/localline.hpp"

#include <algorithm>
#include <cmath>

namespace thetalift {

namespace {

long val_p(const Rat& x, long p) {
  if (x == 0) throw std::domain_error("val_p(0)");
  long v = 0;
  Int num = rat_num(x), den = rat_den(x);
  while (num % p == 0) { num /= p; ++v; }
  while (den % p == 0) { den /= p; --v; }
  return v;
}

// psi_p(x) = e^{-2 pi i {x}_p}, exact
Cyc psi_value(const Rat& x, long p) {
  if (x == 0) return Cyc::one();
  Int num = rat_num(x), den = rat_den(x);
  long pk = 1;
  while (den % p == 0) { den /= p; pk *= p; }
  if (pk == 1) return Cyc::one();
  Int r = num % pk;
  if (r < 0) r += pk;
  r = r * invmod(den % pk, pk) % pk;
  return Cyc::root(pk, to_long(-r));
}

CycQ cycq_norm(CycQ c) {
  int fold = (c.half >= 0) ? c.half / 2 : -((-c.half + 1) / 2);
  if (fold != 0) {
    Rat f = fold >= 0 ? Rat(ipow(Int(c.p), fold)) : Rat(1, ipow(Int(c.p), -fold));
    c.c = c.c * Cyc(f);
    c.half -= 2 * fold;
  }
  return c;
}

}  // namespace

void LineFunction::normalize() {
  // canonicalize centers and merge equal cosets
  std::map<std::pair<std::pair<std::string, long>, int>, CycQ> acc;
  for (auto& t : terms_) {
    Rat c = t.center;
    if (c != 0) {
      long v = val_p(c, p_);
      if (v >= t.e) {
        c = 0;
      } else {
        // canonical representative of c mod p^e: integer residue of the unit
        // part mod p^{e-v}, times p^v
        Rat u = c * (v >= 0 ? Rat(1, ipow(Int(p_), v)) : Rat(ipow(Int(p_), -v)));
        Int mod = ipow(Int(p_), static_cast<unsigned>(t.e - v));
        Int r = rat_num(u) % mod * invmod(rat_den(u) % mod, mod) % mod;
        if (r < 0) r += mod;
        c = Rat(r) * (v >= 0 ? Rat(ipow(Int(p_), v)) : Rat(1, ipow(Int(p_), -v)));
      }
    }
    CycQ cq = cycq_norm(t.coeff);
    cq.p = p_;
    auto key = std::make_pair(std::make_pair(c.str(), t.e), cq.half);
    auto it = acc.find(key);
    if (it == acc.end()) {
      acc.emplace(key, cq);
    } else {
      it->second.c += cq.c;
    }
    // retain the canonical center by storing it back later; keep map of str->Rat
  }
  std::vector<LineTerm> out;
  for (auto& [key, cq] : acc) {
    if (cq.c.is_zero()) continue;
    Rat c(key.first.first);  // parse back; Rat has string constructor
    out.push_back({cq, c, key.first.second});
  }
  terms_ = std::move(out);
}

LineFunction LineFunction::lattice(long p, long e) {
  return LineFunction(p, {{CycQ::one(p), Rat(0), e}});
}

LineFunction LineFunction::units(long p) {
  return LineFunction(p, {{CycQ::one(p), Rat(0), 0},
                          {{-Cyc::one(), 0, p}, Rat(0), 1}});
}

LineFunction LineFunction::twisted_units(const LocalCharacter& chi) {
  long p = chi.p();
  if (chi.cond_exp() == 0) return units(p);
  long pc = chi.units().modulus();
  std::vector<LineTerm> terms;
  for (long u = 1; u < pc; ++u) {
    if (u % p == 0) continue;
    terms.push_back({{chi.at_unit(u), 0, p}, Rat(u), chi.cond_exp()});
  }
  return LineFunction(p, std::move(terms));
}

Cyc LineFunction::eval(const Rat& x) const {
  Cyc out = Cyc::zero();
  for (auto& t : terms_) {
    Rat d = x - t.center;
    if (d == 0 || val_p(d, p_) >= t.e) out += t.coeff.exact();
  }
  return out;
}

Cplx LineFunction::eval_embed(const Rat& x) const {
  Cplx out = 0;
  for (auto& t : terms_) {
    Rat d = x - t.center;
    if (d == 0 || val_p(d, p_) >= t.e) out += t.coeff.embed();
  }
  return out;
}

LineFunction LineFunction::operator+(const LineFunction& o) const {
  std::vector<LineTerm> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return LineFunction(p_ ? p_ : o.p_, std::move(t));
}

LineFunction LineFunction::operator-(const LineFunction& o) const {
  std::vector<LineTerm> t = terms_;
  for (auto& x : o.terms_) t.push_back({{-x.coeff.c, x.coeff.half, x.coeff.p}, x.center, x.e});
  return LineFunction(p_ ? p_ : o.p_, std::move(t));
}

LineFunction LineFunction::scaled(const CycQ& c) const {
  std::vector<LineTerm> t = terms_;
  for (auto& x : t) x.coeff = x.coeff * c;
  return LineFunction(p_, std::move(t));
}

LineFunction LineFunction::substitute_scale(const Rat& a) const {
  long v = val_p(a, p_);
  std::vector<LineTerm> t;
  for (auto& x : terms_) t.push_back({x.coeff, x.center / a, x.e - v});
  return LineFunction(p_, std::move(t));
}

LineFunction LineFunction::mult_psi_quadratic(const Rat& b) const {
  if (b == 0) return *this;
  std::vector<LineTerm> work(terms_.begin(), terms_.end());
  std::vector<LineTerm> out;
  long vb = val_p(b, p_);
  while (!work.empty()) {
    LineTerm t = work.back();
    work.pop_back();
    // psi(b x^2) constant on c + p^e iff v(2 b c) + e >= 0 and v(b) + 2e >= 0
    bool ok = vb + 2 * t.e >= 0;
    if (ok && t.center != 0) ok = val_p(Rat(2) * b * t.center, p_) + t.e >= 0;
    if (ok) {
      t.coeff = t.coeff * psi_value(b * t.center * t.center, p_);
      out.push_back(t);
    } else {
      for (long j = 0; j < p_; ++j)
        work.push_back({t.coeff,
                        t.center + Rat(j) * (t.e >= 0 ? Rat(ipow(Int(p_), t.e))
                                                      : Rat(1, ipow(Int(p_), -t.e))),
                        t.e + 1});
    }
  }
  return LineFunction(p_, std::move(out));
}

LineFunction LineFunction::mult_psi_linear(const Rat& b) const {
  if (b == 0) return *this;
  std::vector<LineTerm> work(terms_.begin(), terms_.end());
  std::vector<LineTerm> out;
  long vb = val_p(b, p_);
  while (!work.empty()) {
    LineTerm t = work.back();
    work.pop_back();
    if (vb + t.e >= 0) {
      t.coeff = t.coeff * psi_value(b * t.center, p_);
      out.push_back(t);
    } else {
      for (long j = 0; j < p_; ++j)
        work.push_back({t.coeff,
                        t.center + Rat(j) * (t.e >= 0 ? Rat(ipow(Int(p_), t.e))
                                                      : Rat(1, ipow(Int(p_), -t.e))),
                        t.e + 1});
    }
  }
  return LineFunction(p_, std::move(out));
}

LineFunction LineFunction::fourier() const {
  std::vector<LineTerm> out;
  for (auto& t : terms_) {
    CycQ vol = t.coeff;
    vol.half -= 2 * static_cast<int>(t.e);  // p^{-e}
    if (t.center == 0) {
      out.push_back({vol, Rat(0), -t.e});
    } else {
      long vc = val_p(t.center, p_);
      long f = -vc;  // refinement depth: psi(c y) constant on cosets mod p^{-vc}
      long count = 1;
      for (long i = 0; i < f + t.e; ++i) count *= p_;
      Rat step = t.e >= 0 ? Rat(ipow(Int(p_), t.e)) : Rat(1, ipow(Int(p_), -t.e));
      for (long j = 0; j < count; ++j) {
        Rat y0 = Rat(j) / step;  // j * p^{-e}
        out.push_back({vol * psi_value(t.center * y0, p_), y0, f});
      }
    }
  }
  return LineFunction(p_, std::move(out));
}

CycQ LineFunction::integral() const {
  CycQ sum{Cyc::zero(), 0, p_};
  for (auto& t : terms_) {
    CycQ v = t.coeff;
    v.half -= 2 * static_cast<int>(t.e);
    v = cycq_norm(v);
    if (v.half != sum.half && !sum.c.is_zero())
      throw std::logic_error("LineFunction::integral: mixed half powers");
    sum.half = v.half;
    sum.c += v.c;
  }
  return sum;
}

CycQ LineFunction::pair(const LineFunction& f, const LineFunction& g) {
  long p = f.p_ ? f.p_ : g.p_;
  CycQ sum{Cyc::zero(), 0, p};
  bool first = true;
  for (auto& a : f.terms_)
    for (auto& b : g.terms_) {
      long e = std::max(a.e, b.e);
      Rat d = a.center - b.center;
      if (!(d == 0) && val_p(d, p) < std::min(a.e, b.e)) continue;
      CycQ v = a.coeff * b.coeff;
      v.half -= 2 * static_cast<int>(e);
      v = cycq_norm(v);
      if (first) { sum.half = v.half; first = false; }
      if (v.half != sum.half) {
        // align by folding the difference (must be even)
        if ((v.half - sum.half) % 2 != 0)
          throw std::logic_error("LineFunction::pair: half mismatch");
        Rat fscale = v.half > sum.half ? Rat(ipow(Int(p), (v.half - sum.half) / 2))
                                       : Rat(1, ipow(Int(p), (sum.half - v.half) / 2));
        v.c = v.c * Cyc(fscale);
      }
      sum.c += v.c;
    }
  return sum;
}

// ---------------------------------------------------------------------------
// Tate integrals
// ---------------------------------------------------------------------------

TateValue tate_integral(const LineFunction& f, const LocalCharacter& mu) {
  long p = f.p();
  int m = mu.cond_exp();
  TateValue out;
  out.p = p;
  Rat punit(1, 1 - Rat(1, p));  // (1 - 1/p)^{-1}
  // refine terms so mu is constant on each coset not containing 0
  std::vector<LineTerm> work(f.terms().begin(), f.terms().end());
  while (!work.empty()) {
    LineTerm t = work.back();
    work.pop_back();
    if (t.center == 0) {
      // int_{p^e Z_p} mu |x|^s d^x = sum_{k >= e} (mu(p) p^{-s})^k [mu unram]
      if (m == 0) out.geoms.push_back({t.coeff, t.e});
      continue;
    }
    long v = val_p(t.center, p);
    if (t.e - v >= m) {
      // mu constant: mu(center); measure (1-1/p)^{-1} p^{v-e}
      Cyc muval = mu.at(t.center);
      CycQ add = t.coeff * muval;
      Rat meas = punit * (v - t.e >= 0 ? Rat(ipow(Int(p), v - t.e))
                                       : Rat(1, ipow(Int(p), t.e - v)));
      add.c = add.c * Cyc(meas);
      add = cycq_norm(add);
      auto it = out.by_valuation.find(v);
      if (it == out.by_valuation.end()) out.by_valuation.emplace(v, add);
      else {
        if (it->second.half != add.half)
          throw std::logic_error("tate_integral: half mismatch");
        it->second.c += add.c;
      }
    } else {
      Rat step = t.e >= 0 ? Rat(ipow(Int(p), t.e)) : Rat(1, ipow(Int(p), -t.e));
      for (long j = 0; j < p; ++j)
        work.push_back({t.coeff, t.center + Rat(j) * step, t.e + 1});
    }
  }
  // drop zero entries
  for (auto it = out.by_valuation.begin(); it != out.by_valuation.end();)
    it = it->second.c.is_zero() ? out.by_valuation.erase(it) : std::next(it);
  return out;
}

Cplx TateValue::value(double s, const LocalCharacter& mu) const {
  Cplx out = 0;
  for (auto& [v, a] : by_valuation) out += a.embed() * std::pow(static_cast<double>(p), -v * s);
  if (!geoms.empty()) {
    Cplx t = mu.at_p().embed() * std::pow(static_cast<double>(p), -s);
    if (std::abs(t) >= 1) throw std::domain_error("TateValue: divergent parameter range");
    for (auto& [b, k0] : geoms) out += b.embed() * std::pow(t, static_cast<double>(k0)) / (1.0 - t);
  }
  return out;
}

Cplx tate_integral_bruteforce(const LineFunction& f, const LocalCharacter& mu, double s,
                              long depth) {
  long p = f.p();
  long m0 = std::max<long>(1, mu.cond_exp());
  for (auto& t : f.terms()) {
    long dep = 1;
    if (!(t.center == 0)) {
      Int num = rat_num(t.center), den = rat_den(t.center);
      long v = 0;
      while (num % p == 0) { num /= p; ++v; }
      while (den % p == 0) { den /= p; --v; }
      dep = t.e - v;
    }
    m0 = std::max(m0, dep + 1);
  }
  // sum over shells v in [-depth, depth], averaging over units mod p^{m0 - ...}
  long pm = 1;
  int mm = static_cast<int>(std::min<long>(m0, 7));
  for (int i = 0; i < mm; ++i) pm *= p;
  Cplx out = 0;
  for (long v = -depth; v <= depth; ++v) {
    Cplx shell = 0;
    long count = 0;
    Rat pv = v >= 0 ? Rat(ipow(Int(p), v)) : Rat(1, ipow(Int(p), -v));
    for (long u = 1; u < pm; ++u) {
      if (u % p == 0) continue;
      ++count;
      Cplx fv = f.eval_embed(Rat(u) * pv);
      if (fv == 0.0) continue;
      shell += fv * mu.at(Rat(u) * pv).embed();
    }
    out += shell / static_cast<double>(count) * std::pow(static_cast<double>(p), -v * s);
  }
  return out;
}

}  // namespace thetalift
