#include "thetalift/schwartz.hpp"

#include <algorithm>
#include <sstream>

namespace thetalift {

namespace {

long val_p(const Rat& x, long p) {
  if (x == 0) return std::numeric_limits<long>::max() / 4;
  long v = 0;
  Int num = rat_num(x), den = rat_den(x);
  while (num % p == 0) { num /= p; ++v; }
  while (den % p == 0) { den /= p; --v; }
  return v;
}

Rat pow_p(long p, long e) {
  return e >= 0 ? Rat(ipow(Int(p), e)) : Rat(1, ipow(Int(p), -e));
}

// canonical fractional part: x - {x}_p in Z_p, {x}_p in [0,1) with p-power denominator
Rat frac_p(const Rat& x, long p) {
  if (x == 0) return Rat(0);
  Int num = rat_num(x), den = rat_den(x);
  long pk = 1;
  while (den % p == 0) { den /= p; pk *= p; }
  if (pk == 1) return Rat(0);
  Int r = num % pk;
  if (r < 0) r += pk;
  r = r * invmod(den % pk, pk) % pk;
  return Rat(r, pk);
}

Cyc psi_value(const Rat& x, long p) {
  Rat f = frac_p(x, p);
  if (f == 0) return Cyc::one();
  return Cyc::root(to_long(rat_den(f)), to_long(-rat_num(f)));
}

}  // namespace

// ---------------------------------------------------------------------------
// matrix helpers
// ---------------------------------------------------------------------------

Mat2 mat2_mul(const Mat2& a, const Mat2& b) {
  Mat2 c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

Rat mat2_det(const Mat2& a) { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }

Mat2 mat2_inv(const Mat2& a) {
  Rat d = mat2_det(a);
  if (d == 0) throw std::domain_error("mat2_inv: singular");
  return {{{a[1][1] / d, -a[0][1] / d}, {-a[1][0] / d, a[0][0] / d}}};
}

Mat4 mat4_identity() {
  Mat4 g{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g[i][j] = Rat(i == j ? 1 : 0);
  return g;
}

Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Rat s(0);
      for (int k = 0; k < 4; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

Mat4 mat4_from_blocks(const Mat2& A, const Mat2& B, const Mat2& C, const Mat2& D) {
  Mat4 g{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g[i][j] = A[i][j];
      g[i][j + 2] = B[i][j];
      g[i + 2][j] = C[i][j];
      g[i + 2][j + 2] = D[i][j];
    }
  return g;
}

// ---------------------------------------------------------------------------
// Lattice2Coset
// ---------------------------------------------------------------------------

Lattice2Coset Lattice2Coset::standard(long p) {
  Lattice2Coset c{p, {{{Rat(1), Rat(0)}, {Rat(0), Rat(1)}}}, {Rat(0), Rat(0)}};
  return c;
}

Lattice2Coset Lattice2Coset::diagonal(long p, const Rat& c1, long e1, const Rat& c2, long e2) {
  Lattice2Coset c{p, {{{pow_p(p, e1), Rat(0)}, {Rat(0), pow_p(p, e2)}}}, {c1, c2}};
  c.canonicalize();
  return c;
}

void Lattice2Coset::canonicalize() {
  auto& r1 = basis[0];
  auto& r2 = basis[1];
  // eliminate second coordinate of r1
  if (!(r1[1] == 0)) {
    if (r2[1] == 0 || val_p(r1[1], p) < val_p(r2[1], p)) std::swap(r1, r2);
    Rat q = r1[1] / r2[1];  // in Z_p
    r1[0] -= q * r2[0];
    r1[1] = Rat(0);
  }
  if (r1[0] == 0 || r2[1] == 0) throw std::domain_error("Lattice2Coset: degenerate lattice");
  // scale rows by units
  long a = val_p(r1[0], p);
  r1[0] = pow_p(p, a);
  long b = val_p(r2[1], p);
  Rat unit = r2[1] / pow_p(p, b);
  r2[0] = r2[0] / unit;
  r2[1] = pow_p(p, b);
  // reduce r2[0] mod p^a
  Rat t = r2[0] / r1[0];
  r2[0] = frac_p(t, p) * r1[0];
  // reduce the shift mod the lattice: x = shift * M^{-1}, take fractional parts
  Mat2 Minv = mat2_inv(basis);
  Rat x1 = shift[0] * Minv[0][0] + shift[1] * Minv[1][0];
  Rat x2 = shift[0] * Minv[0][1] + shift[1] * Minv[1][1];
  x1 = frac_p(x1, p);
  x2 = frac_p(x2, p);
  shift[0] = x1 * basis[0][0] + x2 * basis[1][0];
  shift[1] = x1 * basis[0][1] + x2 * basis[1][1];
}

bool Lattice2Coset::contains(const Rat& z1, const Rat& z2) const {
  Mat2 Minv = mat2_inv(basis);
  Rat d1 = z1 - shift[0], d2 = z2 - shift[1];
  Rat y1 = d1 * Minv[0][0] + d2 * Minv[1][0];
  Rat y2 = d1 * Minv[0][1] + d2 * Minv[1][1];
  return (y1 == 0 || val_p(y1, p) >= 0) && (y2 == 0 || val_p(y2, p) >= 0);
}

long Lattice2Coset::det_valuation() const { return val_p(mat2_det(basis), p); }

Lattice2Coset Lattice2Coset::pullback(const Mat2& M) const {
  Mat2 Minv = mat2_inv(M);
  Lattice2Coset out{p, {}, {}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.basis[i][j] = basis[i][0] * Minv[0][j] + basis[i][1] * Minv[1][j];
  out.shift[0] = shift[0] * Minv[0][0] + shift[1] * Minv[1][0];
  out.shift[1] = shift[0] * Minv[0][1] + shift[1] * Minv[1][1];
  out.canonicalize();
  return out;
}

Lattice2Coset Lattice2Coset::scaled_points(const Rat& c) const {
  Lattice2Coset out = *this;
  for (auto& r : out.basis)
    for (auto& x : r) x *= c;
  out.shift[0] *= c;
  out.shift[1] *= c;
  out.canonicalize();
  return out;
}

Lattice2Coset Lattice2Coset::dual() const {
  Mat2 Minv = mat2_inv(basis);
  Lattice2Coset out{p, {}, {Rat(0), Rat(0)}};
  // rows of (M^{-1})^T
  out.basis = {{{Minv[0][0], Minv[1][0]}, {Minv[0][1], Minv[1][1]}}};
  out.canonicalize();
  return out;
}

std::string Lattice2Coset::key() const {
  std::ostringstream os;
  os << basis[0][0].str() << "|" << basis[1][0].str() << "|" << basis[1][1].str() << "|"
     << shift[0].str() << "|" << shift[1].str();
  return os.str();
}

namespace {

// lattice sum L1 + L2: p-adic HNF of the stacked rows
Lattice2Coset lattice_sum(const Lattice2Coset& L1, const Lattice2Coset& L2) {
  long p = L1.p;
  std::vector<std::array<Rat, 2>> rows = {L1.basis[0], L1.basis[1], L2.basis[0], L2.basis[1]};
  // eliminate the second column down to one row
  // find the row with minimal valuation in the second coordinate
  auto minrow = [&](size_t start, int col) {
    size_t best = rows.size();
    long bv = std::numeric_limits<long>::max() / 8;
    for (size_t i = start; i < rows.size(); ++i) {
      if (rows[i][col] == 0) continue;
      long v = val_p(rows[i][col], p);
      if (v < bv) { bv = v; best = i; }
    }
    return best;
  };
  size_t piv = minrow(0, 1);
  std::array<Rat, 2> r2{Rat(0), Rat(0)};
  if (piv < rows.size()) {
    r2 = rows[piv];
    rows.erase(rows.begin() + piv);
    for (auto& r : rows) {
      if (r[1] == 0) continue;
      Rat q = r[1] / r2[1];
      r[0] -= q * r2[0];
      r[1] = Rat(0);
    }
  }
  // gcd of the first coordinates
  long bestv = std::numeric_limits<long>::max() / 8;
  for (auto& r : rows)
    if (!(r[0] == 0)) bestv = std::min(bestv, val_p(r[0], p));
  Lattice2Coset out{p, {{{pow_p(p, bestv), Rat(0)}, r2}}, {Rat(0), Rat(0)}};
  out.canonicalize();
  return out;
}

Lattice2Coset lattice_intersect(const Lattice2Coset& L1, const Lattice2Coset& L2) {
  return lattice_sum(L1.dual(), L2.dual()).dual();
}

// volume of (s1+L1) cap (s2+L2): p^{-v} if compatible, nullopt otherwise
std::optional<long> coset_intersection_detval(const Lattice2Coset& C1, const Lattice2Coset& C2) {
  // compatible iff s1 - s2 in L1 + L2
  Lattice2Coset S = lattice_sum(C1, C2);
  Rat d1 = C1.shift[0] - C2.shift[0], d2 = C1.shift[1] - C2.shift[1];
  Lattice2Coset T = S;
  T.shift = {Rat(0), Rat(0)};
  if (!T.contains(d1, d2)) return std::nullopt;
  return lattice_intersect(C1, C2).det_valuation();
}

}  // namespace

// ---------------------------------------------------------------------------
// SplitSchwartz
// ---------------------------------------------------------------------------

void SplitSchwartz::normalize() {
  std::map<std::pair<std::pair<std::string, std::string>, int>, SplitTerm> acc;
  for (auto& t : terms_) {
    SplitTerm u = t;
    u.A.canonicalize();
    u.B.canonicalize();
    // fold even half powers
    CycQ c = u.coeff;
    int fold = (c.half >= 0) ? c.half / 2 : -((-c.half + 1) / 2);
    if (fold != 0) {
      c.c = c.c * Cyc(fold >= 0 ? Rat(ipow(Int(p_), fold)) : Rat(1, ipow(Int(p_), -fold)));
      c.half -= 2 * fold;
    }
    c.p = p_;
    u.coeff = c;
    auto key = std::make_pair(std::make_pair(u.A.key(), u.B.key()), c.half);
    auto it = acc.find(key);
    if (it == acc.end()) acc.emplace(key, u);
    else it->second.coeff.c += c.c;
  }
  terms_.clear();
  for (auto& [k, t] : acc)
    if (!t.coeff.c.is_zero()) terms_.push_back(t);
}

SplitSchwartz SplitSchwartz::from_lines(const LineFunction& f1, const LineFunction& f2,
                                        const LineFunction& g1, const LineFunction& g2) {
  long p = f1.p();
  std::vector<SplitTerm> terms;
  for (auto& t1 : f1.terms())
    for (auto& t2 : f2.terms())
      for (auto& u1 : g1.terms())
        for (auto& u2 : g2.terms()) {
          CycQ c = t1.coeff * t2.coeff * u1.coeff * u2.coeff;
          terms.push_back({c, Lattice2Coset::diagonal(p, t1.center, t1.e, t2.center, t2.e),
                           Lattice2Coset::diagonal(p, u1.center, u1.e, u2.center, u2.e)});
        }
  return SplitSchwartz(p, std::move(terms));
}

Cplx SplitSchwartz::eval_embed(const Rat& a1, const Rat& a2, const Rat& b1,
                               const Rat& b2) const {
  Cplx out = 0;
  for (auto& t : terms_)
    if (t.A.contains(a1, a2) && t.B.contains(b1, b2)) out += t.coeff.embed();
  return out;
}

Cyc SplitSchwartz::eval(const Rat& a1, const Rat& a2, const Rat& b1, const Rat& b2) const {
  Cyc out = Cyc::zero();
  for (auto& t : terms_)
    if (t.A.contains(a1, a2) && t.B.contains(b1, b2)) out += t.coeff.exact();
  return out;
}

SplitSchwartz SplitSchwartz::operator+(const SplitSchwartz& o) const {
  std::vector<SplitTerm> t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return SplitSchwartz(p_ ? p_ : o.p_, std::move(t));
}

SplitSchwartz SplitSchwartz::scaled(const CycQ& c) const {
  std::vector<SplitTerm> t = terms_;
  for (auto& x : t) x.coeff = x.coeff * c;
  return SplitSchwartz(p_, std::move(t));
}

SplitSchwartz SplitSchwartz::act_central(const Rat& x) const {
  std::vector<SplitTerm> t;
  for (auto& u : terms_)
    t.push_back({u.coeff, u.A.scaled_points(x), u.B.scaled_points(Rat(1) / x)});
  return SplitSchwartz(p_, std::move(t));
}

namespace {

// refine coset pieces until psi(sign * s . y) is constant; multiply coefficients
void refine_linear(long p, CycQ coeff, Lattice2Coset C, const std::array<Rat, 2>& s, int sign,
                   std::vector<std::pair<CycQ, Lattice2Coset>>& out) {
  std::vector<std::pair<CycQ, Lattice2Coset>> work = {{coeff, C}};
  while (!work.empty()) {
    auto [c, T] = work.back();
    work.pop_back();
    bool ok = true;
    int bad = -1;
    for (int i = 0; i < 2; ++i) {
      Rat pr = T.basis[i][0] * s[0] + T.basis[i][1] * s[1];
      if (!(pr == 0) && val_p(pr, p) < 0) { ok = false; bad = i; break; }
    }
    if (ok) {
      Rat pr = T.shift[0] * s[0] + T.shift[1] * s[1];
      out.push_back({c * psi_value(Rat(sign) * pr, p), T});
    } else {
      // split along the bad basis direction into p cosets
      for (long j = 0; j < p; ++j) {
        Lattice2Coset U = T;
        U.shift[0] += Rat(j) * T.basis[bad][0];
        U.shift[1] += Rat(j) * T.basis[bad][1];
        U.basis[bad][0] *= p;
        U.basis[bad][1] *= p;
        work.push_back({c, U});
      }
    }
  }
}

// Fourier transform with kernel psi(-x.y) of coeff * 1_{C}: returns refined pieces
void ft2_minus(long p, const CycQ& coeff, const Lattice2Coset& C,
               std::vector<std::pair<CycQ, Lattice2Coset>>& out) {
  CycQ vol = coeff;
  vol.half -= 2 * static_cast<int>(C.det_valuation());
  Lattice2Coset D = C.dual();
  refine_linear(p, vol, D, C.shift, -1, out);
}

}  // namespace

SplitSchwartz SplitSchwartz::act(const WeilData& wd, const WeilGen& g) const {
  std::vector<SplitTerm> out;
  if (std::holds_alternative<GenBlockDiag>(g)) {
    const auto& bd = std::get<GenBlockDiag>(g);
    Rat dM = mat2_det(bd.M), dN = mat2_det(bd.N);
    Cyc chif = wd.chi_w.at(dM) * wd.chi_wbar.at(dN).inverse();
    int half = static_cast<int>(val_p(dN, p_) - val_p(dM, p_));
    Mat2 NinvT;
    {
      Mat2 Ninv = mat2_inv(bd.N);
      NinvT = {{{Ninv[0][0], Ninv[1][0]}, {Ninv[0][1], Ninv[1][1]}}};
    }
    for (auto& t : terms_) {
      CycQ c = t.coeff * chif;
      c.half += half;
      out.push_back({c, t.A.pullback(bd.M), t.B.pullback(NinvT)});
    }
  } else if (std::holds_alternative<GenUpper>(g)) {
    const auto& up = std::get<GenUpper>(g);
    const Mat2& Bm = up.B;
    // multiply by psi(a B b^T); refine until constant on each product piece
    std::vector<SplitTerm> work(terms_.begin(), terms_.end());
    while (!work.empty()) {
      SplitTerm t = work.back();
      work.pop_back();
      // constancy: for a = sA + lambda, b = sB + mu,
      // lambda B sB^T, sA B mu^T, lambda B mu^T all in Z_p
      auto quad = [&](const std::array<Rat, 2>& x, const std::array<Rat, 2>& y) {
        Rat s(0);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) s += x[i] * Bm[i][j] * y[j];
        return s;
      };
      bool ok = true;
      int badA = -1, badB = -1;
      for (int i = 0; i < 2 && ok; ++i) {
        Rat v = quad(t.A.basis[i], t.B.shift);
        if (!(v == 0) && val_p(v, p_) < 0) { ok = false; badA = i; }
      }
      for (int j = 0; j < 2 && ok; ++j) {
        Rat v = quad(t.A.shift, t.B.basis[j]);
        if (!(v == 0) && val_p(v, p_) < 0) { ok = false; badB = j; }
      }
      for (int i = 0; i < 2 && ok; ++i)
        for (int j = 0; j < 2 && ok; ++j) {
          Rat v = quad(t.A.basis[i], t.B.basis[j]);
          if (!(v == 0) && val_p(v, p_) < 0) { ok = false; badA = i; }
        }
      if (ok) {
        t.coeff = t.coeff * psi_value(quad(t.A.shift, t.B.shift), p_);
        out.push_back(t);
      } else if (badA >= 0) {
        for (long j = 0; j < p_; ++j) {
          SplitTerm u = t;
          u.A.shift[0] += Rat(j) * t.A.basis[badA][0];
          u.A.shift[1] += Rat(j) * t.A.basis[badA][1];
          u.A.basis[badA][0] *= p_;
          u.A.basis[badA][1] *= p_;
          work.push_back(u);
        }
      } else {
        for (long j = 0; j < p_; ++j) {
          SplitTerm u = t;
          u.B.shift[0] += Rat(j) * t.B.basis[badB][0];
          u.B.shift[1] += Rat(j) * t.B.basis[badB][1];
          u.B.basis[badB][0] *= p_;
          u.B.basis[badB][1] *= p_;
          work.push_back(u);
        }
      }
    }
  } else {
    // Weyl element: Phi^(a,b) = FT2-(f)(b) FT2-(g)(a), gamma = 1 at split places
    for (auto& t : terms_) {
      std::vector<std::pair<CycQ, Lattice2Coset>> fa, fb;
      ft2_minus(p_, t.coeff, t.A, fb);          // becomes a function of b
      ft2_minus(p_, CycQ::one(p_), t.B, fa);    // becomes a function of a
      for (auto& [cb, Cb] : fb)
        for (auto& [ca, Ca] : fa) out.push_back({cb * ca, Ca, Cb});
    }
  }
  return SplitSchwartz(p_, std::move(out));
}

SplitSchwartz SplitSchwartz::act(const WeilData& wd, const std::vector<WeilGen>& gs) const {
  SplitSchwartz cur = *this;
  for (auto it = gs.rbegin(); it != gs.rend(); ++it) cur = cur.act(wd, *it);
  return cur;
}

SplitSchwartz SplitSchwartz::act_matrix(const WeilData& wd, const Mat4& g) const {
  return act(wd, factor_gl4(g));
}

SplitSchwartz SplitSchwartz::act_iota_xi(const WeilData& wd, const Mat2& g1w,
                                         const Mat2& g2w) const {
  return act(wd, WeilGen{GenBlockDiag{g1w, g2w}});
}

CycQ SplitSchwartz::bilinear_flat(const SplitSchwartz& f, const SplitSchwartz& g) {
  long p = f.p() ? f.p() : g.p();
  CycQ sum{Cyc::zero(), 0, p};
  bool first = true;
  for (auto& t1 : f.terms())
    for (auto& t2 : g.terms()) {
      // int f-term(a,b) g-term(-b,-a) da db
      Lattice2Coset g2a = t2.B.scaled_points(Rat(-1));  // support of g(-b=..) in a
      Lattice2Coset g2b = t2.A.scaled_points(Rat(-1));
      auto va = coset_intersection_detval(t1.A, g2a);
      if (!va) continue;
      auto vb = coset_intersection_detval(t1.B, g2b);
      if (!vb) continue;
      CycQ v = t1.coeff * t2.coeff;
      v.half -= 2 * static_cast<int>(*va + *vb);
      int fold = (v.half >= 0) ? v.half / 2 : -((-v.half + 1) / 2);
      v.c = v.c * Cyc(fold >= 0 ? Rat(ipow(Int(p), fold)) : Rat(1, ipow(Int(p), -fold)));
      v.half -= 2 * fold;
      if (first) { sum.half = v.half; first = false; }
      if (v.half != sum.half) throw std::logic_error("bilinear_flat: half mismatch");
      sum.c += v.c;
    }
  return sum;
}

CycQ SplitSchwartz::hermitian(const SplitSchwartz& f, const SplitSchwartz& g) {
  long p = f.p() ? f.p() : g.p();
  CycQ sum{Cyc::zero(), 0, p};
  bool first = true;
  for (auto& t1 : f.terms())
    for (auto& t2 : g.terms()) {
      auto va = coset_intersection_detval(t1.A, t2.A);
      if (!va) continue;
      auto vb = coset_intersection_detval(t1.B, t2.B);
      if (!vb) continue;
      CycQ v = t1.coeff;
      v.c = v.c * t2.coeff.c.conj();
      v.half += t2.coeff.half;
      v.half -= 2 * static_cast<int>(*va + *vb);
      int fold = (v.half >= 0) ? v.half / 2 : -((-v.half + 1) / 2);
      v.c = v.c * Cyc(fold >= 0 ? Rat(ipow(Int(p), fold)) : Rat(1, ipow(Int(p), -fold)));
      v.half -= 2 * fold;
      if (first) { sum.half = v.half; first = false; }
      if (v.half != sum.half) throw std::logic_error("hermitian: half mismatch");
      sum.c += v.c;
    }
  return sum;
}

// ---------------------------------------------------------------------------
// GL4 factorization
// ---------------------------------------------------------------------------

std::vector<WeilGen> factor_gl4(const Mat4& g) {
  Mat2 A, B, C, D;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      A[i][j] = g[i][j];
      B[i][j] = g[i][j + 2];
      C[i][j] = g[i + 2][j];
      D[i][j] = g[i + 2][j + 2];
    }
  auto is_zero = [](const Mat2& m) {
    return m[0][0] == 0 && m[0][1] == 0 && m[1][0] == 0 && m[1][1] == 0;
  };
  if (is_zero(C)) {
    // [[A, B], [0, D]] = upper(B D^{-1}) bd(A, D)
    Mat2 F = mat2_mul(B, mat2_inv(D));
    std::vector<WeilGen> out;
    bool fzero = is_zero(F);
    if (!fzero) out.push_back(GenUpper{F});
    out.push_back(GenBlockDiag{A, D});
    return out;
  }
  if (!(mat2_det(C) == 0)) {
    // g = upper(A C^{-1}) . w . bd(C, N) . upper(C^{-1} D), N = A C^{-1} D - B
    Mat2 Cinv = mat2_inv(C);
    Mat2 F = mat2_mul(A, Cinv);
    Mat2 G = mat2_mul(Cinv, D);
    Mat2 N = mat2_mul(F, D);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) N[i][j] -= B[i][j];
    std::vector<WeilGen> out;
    if (!is_zero(F)) out.push_back(GenUpper{F});
    out.push_back(GenWeyl{});
    out.push_back(GenBlockDiag{C, N});
    if (!is_zero(G)) out.push_back(GenUpper{G});
    return out;
  }
  // C nonzero singular: find F with C + D F invertible, use g = (g lower(F)) lower(-F)
  Mat2 F{};
  bool found = false;
  for (int mask = 0; mask < 16 && !found; ++mask) {
    Mat2 cand{{{Rat((mask >> 0) & 1), Rat((mask >> 1) & 1)},
               {Rat((mask >> 2) & 1), Rat((mask >> 3) & 1)}}};
    Mat2 T = mat2_mul(D, cand);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) T[i][j] += C[i][j];
    if (!(mat2_det(T) == 0)) { F = cand; found = true; }
  }
  if (!found) throw std::logic_error("factor_gl4: no regularizing F found");
  // g' = g * lower(F), lower(F) = [[1,0],[F,1]]
  Mat4 lower = mat4_identity();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) lower[i + 2][j] = F[i][j];
  Mat4 gp = mat4_mul(g, lower);
  std::vector<WeilGen> out = factor_gl4(gp);
  // lower(-F) = bd(-1,-1) . w . upper(F) . w
  Mat2 minusF{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) minusF[i][j] = -F[i][j];
  Mat2 mI{{{Rat(-1), Rat(0)}, {Rat(0), Rat(-1)}}};
  out.push_back(GenBlockDiag{mI, mI});
  out.push_back(GenWeyl{});
  out.push_back(GenUpper{minusF});
  out.push_back(GenWeyl{});
  return out;
}

// ---------------------------------------------------------------------------
// archimedean
// ---------------------------------------------------------------------------

ArchSchwartz ArchSchwartz::gaussian(const Cplx& zscale, long k, long mono) {
  ArchSchwartz a;
  a.k = k;
  a.poly.assign(k + 1, 0.0);
  a.poly[mono] = 1.0;
  a.Z = {{{zscale, 0.0}, {0.0, zscale}}};
  return a;
}

Cplx ArchSchwartz::eval(const Cplx& z1, const Cplx& z2) const {
  Cplx P = 0;
  for (long j = 0; j <= k; ++j) {
    Cplx m = 1;
    for (long i = 0; i < k - j; ++i) m *= z1;
    for (long i = 0; i < j; ++i) m *= z2;
    P += poly[j] * m;
  }
  // tr(Z z* z) with z = (z1, z2) row vector: sum_{ij} Z_{ij} conj(z_i) z_j
  Cplx tr = 0;
  std::array<Cplx, 2> z{z1, z2};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) tr += Z[i][j] * std::conj(z[i]) * z[j];
  const double TWO_PI = 6.283185307179586476925286766559;
  return P * std::exp(Cplx(0, TWO_PI) * tr);
}

// ---------------------------------------------------------------------------
// Weil index
// ---------------------------------------------------------------------------

Cplx weil_index(const QuadField& K, long v, const KElem& delta) {
  if (v == 0) return Cplx(0, 1);  // archimedean
  auto sp = K.factor_prime(v);
  if (sp.type == SplitType::kSplit) return 1.0;
  // gamma_v = gamma(Delta, psi_v)^{-1}, Delta = delta^2 in Q_v^x
  Rat Delta = -K.norm(delta);  // delta^2 = -N(delta)
  long val = val_p(Delta, v);
  if (val % 2 == 0) {
    // unit square class times even power: gamma(unit, psi) = 1 for odd v
    return 1.0;
  }
  // gamma(u p, psi) = p^{-1/2} sum_{x mod p} psi(u x^2 / p)
  Rat u = Delta / pow_p(v, val);
  Cplx sum = 0;
  for (long x = 0; x < v; ++x)
    sum += psi_value(u * Rat(x * x, v), v).embed();
  Cplx gamma = sum / std::sqrt(static_cast<double>(v));
  return 1.0 / gamma;
}

// ---------------------------------------------------------------------------
// rank-1 intertwiner at split places
// ---------------------------------------------------------------------------

Cplx delta_psi_rank1_point(const LineFunction& f, const LineFunction& g, const Rat& delta_v,
                           const Rat& a, const Rat& b) {
  long p = f.p();
  // x = (a - b)/(2 delta), y = (a + b)/2; integral over u of
  // psi(-4 delta^2 u y) f(u + x) g(u - x) du
  Rat x = (a - b) / (2 * delta_v);
  Rat y = (a + b) / 2;
  Rat beta = Rat(-4) * delta_v * delta_v * y;
  long dep = 1;
  for (auto& t : f.terms()) dep = std::max(dep, t.e + 1);
  for (auto& t : g.terms()) dep = std::max(dep, t.e + 1);
  if (!(beta == 0)) dep = std::max(dep, -val_p(beta, p) + 1);
  long lo = 0;
  for (auto& t : f.terms()) lo = std::min(lo, t.e);
  for (auto& t : g.terms()) lo = std::min(lo, t.e);
  long steps = 1;
  for (long i = 0; i < dep - lo; ++i) steps *= p;
  if (steps > 3000000) throw std::overflow_error("delta_psi_rank1_point: too fine");
  Cplx sum = 0;
  Rat step = pow_p(p, lo);
  // u ranges over representatives of p^{lo} Z_p / p^{dep} Z_p; the supports are
  // contained in p^{lo} Z_p shifted by x, handled by sampling u in x's coset too
  Rat xfrac = frac_p(x / step, p) * step;
  for (long j = 0; j < steps; ++j) {
    Rat u = Rat(j) * step - xfrac;
    Cplx fv = f.eval_embed(u + x);
    if (fv == 0.0) continue;
    Cplx gv = g.eval_embed(u - x);
    if (gv == 0.0) continue;
    sum += psi_value(beta * u, p).embed() * fv * gv;
  }
  return sum * std::pow(static_cast<double>(p), static_cast<double>(-dep));
}

namespace {

// refine until psi of the quadratic form z^T M z is constant on each piece
void quad_refine(long p, CycQ coeff, Lattice2Coset C, const Mat2& M,
                 std::vector<std::pair<CycQ, Lattice2Coset>>& out) {
  auto qform = [&](const std::array<Rat, 2>& x, const std::array<Rat, 2>& y) {
    Rat s(0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s += x[i] * M[i][j] * y[j];
    return s;
  };
  std::vector<std::pair<CycQ, Lattice2Coset>> work = {{coeff, C}};
  while (!work.empty()) {
    auto [c, T] = work.back();
    work.pop_back();
    int bad = -1;
    for (int i = 0; i < 2 && bad < 0; ++i) {
      Rat v = qform(T.shift, T.basis[i]) * 2;
      if (!(v == 0) && val_p(v, p) < 0) bad = i;
      for (int j = 0; j < 2 && bad < 0; ++j) {
        Rat w = qform(T.basis[i], T.basis[j]);
        if (!(w == 0) && val_p(w, p) < 0) bad = i;
      }
    }
    if (bad < 0) {
      out.push_back({c * psi_value(qform(T.shift, T.shift), p), T});
    } else {
      for (long j = 0; j < p; ++j) {
        Lattice2Coset U = T;
        U.shift[0] += Rat(j) * T.basis[bad][0];
        U.shift[1] += Rat(j) * T.basis[bad][1];
        U.basis[bad][0] *= p;
        U.basis[bad][1] *= p;
        work.push_back({c, U});
      }
    }
  }
}

}  // namespace

Cplx Rank1Split::eval_embed(const Rat& a, const Rat& b) const {
  Cplx out = 0;
  for (auto& [c, C] : terms)
    if (C.contains(a, b)) out += c.embed();
  return out;
}

Cyc Rank1Split::eval(const Rat& a, const Rat& b) const {
  Cyc out = Cyc::zero();
  for (auto& [c, C] : terms)
    if (C.contains(a, b)) out += c.exact();
  return out;
}

Rank1Split delta_psi_rank1(const LineFunction& f, const LineFunction& g, const Rat& delta_v) {
  long p = f.p();
  long vd = val_p(delta_v, p);
  long v2 = val_p(Rat(2), p);
  Rank1Split out;
  out.p = p;
  for (auto& t1 : f.terms())
    for (auto& t2 : g.terms()) {
      long m = std::min(t1.e, t2.e);
      long E = std::max(t1.e, t2.e);
      // support region: (a-b) in delta(c1-c2) + delta 2 p^m Z_p,
      //                 (a+b) in p^{-E-2vd-2v2} ... precisely val(2 delta^2 (a+b)) >= -E
      // lattice in (a,b):
      Lattice2Coset C{p, {}, {}};
      Rat lam = delta_v * 2 * pow_p(p, m);       // generator of the (a-b) direction
      Rat mup = pow_p(p, -E - 2 * vd - 2 * v2);  // generator of the (a+b) direction
      C.basis = {{{lam / 2, -lam / 2}, {mup / 2, mup / 2}}};
      Rat sm = delta_v * (t1.center - t2.center);
      C.shift = {sm / 2, -sm / 2};
      C.canonicalize();
      CycQ base = t1.coeff * t2.coeff;
      base.half -= 2 * static_cast<int>(E);  // p^{-E} volume factor
      // phases: e1 >= e2 case uses u0 = c1 - x, else u0 = c2 + x
      bool first_case = (t1.e >= t2.e);
      Rat cc = first_case ? t1.center : t2.center;
      // psi(beta u0) = psi(-2 delta^2 cc (a+b) ± delta (a^2 - b^2))
      // linear part: s-vector for refine_linear with sign +1
      std::array<Rat, 2> lin{Rat(-2) * delta_v * delta_v * cc,
                             Rat(-2) * delta_v * delta_v * cc};
      std::vector<std::pair<CycQ, Lattice2Coset>> stage1;
      refine_linear(p, base, C, lin, 1, stage1);
      // quadratic part: ± delta (a^2 - b^2)
      Rat dsign = first_case ? delta_v : -delta_v;
      Mat2 M{{{dsign, Rat(0)}, {Rat(0), -dsign}}};
      for (auto& [c, T] : stage1) quad_refine(p, c, T, M, out.terms);
    }
  // merge
  std::map<std::pair<std::string, int>, std::pair<CycQ, Lattice2Coset>> acc;
  for (auto& [c, C] : out.terms) {
    CycQ cc = c;
    int fold = (cc.half >= 0) ? cc.half / 2 : -((-cc.half + 1) / 2);
    cc.c = cc.c * Cyc(fold >= 0 ? Rat(ipow(Int(p), fold)) : Rat(1, ipow(Int(p), -fold)));
    cc.half -= 2 * fold;
    auto key = std::make_pair(C.key(), cc.half);
    auto it = acc.find(key);
    if (it == acc.end()) acc.emplace(key, std::make_pair(cc, C));
    else it->second.first.c += cc.c;
  }
  out.terms.clear();
  for (auto& [k, v] : acc)
    if (!v.first.c.is_zero()) out.terms.push_back({v.first, v.second});
  return out;
}

std::vector<std::array<std::pair<Rat, long>, 2>> product_refine(const Lattice2Coset& Cin) {
  long p = Cin.p;
  std::vector<Lattice2Coset> work = {Cin}, done;
  while (!work.empty()) {
    Lattice2Coset T = work.back();
    work.pop_back();
    T.canonicalize();
    if (T.basis[1][0] == 0) {
      done.push_back(T);
      continue;
    }
    // split along the second basis row into p cosets
    for (long j = 0; j < p; ++j) {
      Lattice2Coset U = T;
      U.shift[0] += Rat(j) * T.basis[1][0];
      U.shift[1] += Rat(j) * T.basis[1][1];
      U.basis[1][0] *= p;
      U.basis[1][1] *= p;
      work.push_back(U);
    }
  }
  std::vector<std::array<std::pair<Rat, long>, 2>> out;
  for (auto& T : done) {
    long e1 = val_p(T.basis[0][0], p);
    long e2 = val_p(T.basis[1][1], p);
    out.push_back({std::make_pair(T.shift[0], e1), std::make_pair(T.shift[1], e2)});
  }
  return out;
}

SplitSchwartz tensor_rank1(const Rank1Split& r1, const Rank1Split& r2) {
  long p = r1.p;
  std::vector<SplitTerm> terms;
  for (auto& [c1, C1] : r1.terms) {
    auto pieces1 = product_refine(C1);
    for (auto& [c2, C2] : r2.terms) {
      auto pieces2 = product_refine(C2);
      for (auto& q1 : pieces1)
        for (auto& q2 : pieces2) {
          // q1 = (a1-coset, b1-coset), q2 = (a2-coset, b2-coset)
          Lattice2Coset A = Lattice2Coset::diagonal(p, q1[0].first, q1[0].second,
                                                    q2[0].first, q2[0].second);
          Lattice2Coset B = Lattice2Coset::diagonal(p, q1[1].first, q1[1].second,
                                                    q2[1].first, q2[1].second);
          terms.push_back({c1 * c2, A, B});
        }
    }
  }
  return SplitSchwartz(p, std::move(terms));
}

}  // namespace thetalift
