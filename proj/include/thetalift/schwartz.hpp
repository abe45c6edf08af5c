#pragma once

#include <variant>

#include "thetalift/localline.hpp"

namespace thetalift {

// row-span over Z_p of a 2x2 rational basis matrix, plus a shift: s + L
struct Lattice2Coset {
  long p;
  std::array<std::array<Rat, 2>, 2> basis;  // rows
  std::array<Rat, 2> shift;

  static Lattice2Coset standard(long p);
  static Lattice2Coset diagonal(long p, const Rat& c1, long e1, const Rat& c2, long e2);

  void canonicalize();
  bool contains(const Rat& x1, const Rat& x2) const;
  long det_valuation() const;  // v_p(det basis)
  // right multiplication of points: {x : x M in this} (pullback by M)
  Lattice2Coset pullback(const std::array<std::array<Rat, 2>, 2>& M) const;
  // scaled coset c * (s + L)
  Lattice2Coset scaled_points(const Rat& c) const;
  // dual lattice under the dot product, shift 0
  Lattice2Coset dual() const;
  std::string key() const;
};

// One product term coeff * 1_{A}(a1,a2) * 1_{B}(b1,b2) of a split-place
// elementary Schwartz function on K_v^2 = Q_p^2 x Q_p^2.
struct SplitTerm {
  CycQ coeff;
  Lattice2Coset A, B;
};

// local Weil representation data at a split place v = w wbar
struct WeilData {
  long p;
  LocalCharacter chi_w, chi_wbar;  // components of the splitting character
};

// generator of U(V)(Q_v) in iota_w coordinates
struct GenBlockDiag { std::array<std::array<Rat, 2>, 2> M, N; };  // [[M,0],[0,N]]
struct GenUpper { std::array<std::array<Rat, 2>, 2> B; };          // [[1,B],[0,1]]
struct GenWeyl {};                                                 // [[0,-1],[1,0]]
using WeilGen = std::variant<GenBlockDiag, GenUpper, GenWeyl>;

// factor g in GL4(Q_p) into Weil generators (left-to-right product order)
std::vector<WeilGen> factor_gl4(const std::array<std::array<Rat, 4>, 4>& g);

class SplitSchwartz {
 public:
  SplitSchwartz() = default;
  SplitSchwartz(long p, std::vector<SplitTerm> terms) : p_(p), terms_(std::move(terms)) {
    normalize();
  }
  // product of four line functions: f1(a1) f2(a2) g1(b1) g2(b2)
  static SplitSchwartz from_lines(const LineFunction& f1, const LineFunction& f2,
                                  const LineFunction& g1, const LineFunction& g2);

  long p() const { return p_; }
  const std::vector<SplitTerm>& terms() const { return terms_; }
  size_t term_count() const { return terms_.size(); }

  Cplx eval_embed(const Rat& a1, const Rat& a2, const Rat& b1, const Rat& b2) const;
  Cyc eval(const Rat& a1, const Rat& a2, const Rat& b1, const Rat& b2) const;

  SplitSchwartz operator+(const SplitSchwartz& o) const;
  SplitSchwartz scaled(const CycQ& c) const;

  // Weil actions
  SplitSchwartz act(const WeilData& wd, const WeilGen& g) const;
  SplitSchwartz act(const WeilData& wd, const std::vector<WeilGen>& gs) const;
  SplitSchwartz act_matrix(const WeilData& wd, const std::array<std::array<Rat, 4>, 4>& g) const;
  // central U(V)-variable: Phi(h^{-1} z), h = (x, x^{-1})
  SplitSchwartz act_central(const Rat& x) const;
  // action of iota(g1, g2) conjugated by xi: block-diagonal (g1_w, g2_w)
  SplitSchwartz act_iota_xi(const WeilData& wd, const std::array<std::array<Rat, 2>, 2>& g1w,
                            const std::array<std::array<Rat, 2>, 2>& g2w) const;

  // (phi1, phi2)^flat = int phi1(z) phi2(-zbar) dz
  static CycQ bilinear_flat(const SplitSchwartz& f, const SplitSchwartz& g);
  // Hermitian (phi1, phi2) = int phi1 conj(phi2)
  static CycQ hermitian(const SplitSchwartz& f, const SplitSchwartz& g);

 private:
  void normalize();
  long p_ = 0;
  std::vector<SplitTerm> terms_;
};

// 2x2 rational matrix helpers
using Mat2 = std::array<std::array<Rat, 2>, 2>;
using Mat4 = std::array<std::array<Rat, 4>, 4>;
Mat2 mat2_mul(const Mat2& a, const Mat2& b);
Mat2 mat2_inv(const Mat2& a);
Rat mat2_det(const Mat2& a);
Mat4 mat4_mul(const Mat4& a, const Mat4& b);
Mat4 mat4_identity();
Mat4 mat4_from_blocks(const Mat2& A, const Mat2& B, const Mat2& C, const Mat2& D);

// Archimedean Schwartz function P(z) e^{2 pi i tr(Z z* z)}, P homogeneous of
// degree k: coefficients of z1^{k-j} z2^j.
struct ArchSchwartz {
  long k = 0;
  std::vector<Cplx> poly;  // size k+1
  std::array<std::array<Cplx, 2>, 2> Z;  // tube-domain point

  static ArchSchwartz gaussian(const Cplx& zscale, long k, long monomial_index);
  Cplx eval(const Cplx& z1, const Cplx& z2) const;
};

// Weil index gamma_v attached to Delta = delta^2 at a place of Q.
// Returns an 8th root of unity as a complex number (exact cases in tests).
Cplx weil_index(const QuadField& K, long v, const KElem& delta);

// rank-1 intertwiner delta_psi(f otimes g)(z) at a split place, evaluated at a
// point z = (a, b) in K_v (coordinates a = iota_w z, b = iota_wbar z);
// the pairing is built from delta_v = iota_w(delta).
Cplx delta_psi_rank1_point(const LineFunction& f, const LineFunction& g, const Rat& delta_v,
                           const Rat& a, const Rat& b);
// symbolic image: exact 2D coset terms in the (a, b)-plane
struct Rank1Split {
  long p;
  std::vector<std::pair<CycQ, Lattice2Coset>> terms;
  Cplx eval_embed(const Rat& a, const Rat& b) const;
  Cyc eval(const Rat& a, const Rat& b) const;
};
Rank1Split delta_psi_rank1(const LineFunction& f, const LineFunction& g, const Rat& delta_v);
// decompose a 2D coset into products of 1D cosets: (center, exponent) pairs
std::vector<std::array<std::pair<Rat, long>, 2>> product_refine(const Lattice2Coset& C);
// assemble a rank-4 split function from two rank-1 intertwiner images
SplitSchwartz tensor_rank1(const Rank1Split& r1, const Rank1Split& r2);

}  // namespace thetalift
