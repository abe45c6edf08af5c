#pragma once

#include "thetalift/cyclotomic.hpp"
#include "thetalift/rayclass.hpp"

namespace thetalift {

struct InfinityType {
  long a = 0, b = 0;  // archimedean component z -> z^a zbar^b
  bool operator==(const InfinityType& o) const { return a == o.a && b == o.b; }
};

// Multiplicative group (Z/p^c)^x with discrete logs; small moduli only.
class ZpUnits {
 public:
  ZpUnits(long p, int c);
  long p() const { return p_; }
  int cond() const { return c_; }
  long modulus() const { return mod_; }
  long size() const { return size_; }
  const std::vector<long>& gens() const { return gens_; }
  const std::vector<long>& orders() const { return orders_; }
  std::vector<long> dlog(long u) const;  // u coprime to p

 private:
  long p_;
  int c_;
  long mod_;
  long size_ = 1;
  std::vector<long> gens_, orders_;
  std::unordered_map<long, std::vector<long>> table_;
};

// Character of Q_p^x with values in mu_L times an exact uniformizer value.
// The additive character used throughout is psi_p(x) = e^{-2 pi i {x}_p}
// (the finite component of the canonical global psi with psi_oo = e^{2 pi i x}).
class LocalCharacter {
 public:
  LocalCharacter() = default;
  // unramified with given value at p
  static LocalCharacter unramified(long p, Cyc value_at_p);
  // general: exponents on the generators of (Z/p^c)^x, values zeta_L^{exp}
  LocalCharacter(long p, int cond_exp, long L, std::vector<long> gen_exps, Cyc value_at_p);

  long p() const { return p_; }
  int cond_exp() const { return cond_; }
  long value_order() const { return L_; }
  const ZpUnits& units() const;

  Cyc at_unit(long u) const;        // u coprime to p (value on the unit part)
  Cyc at_unit(const Rat& u) const;  // rational with v_p = 0
  Cyc at(const Rat& x) const;       // chi(x) for nonzero rational x
  Cyc at_p() const { return unif_value_; }
  Cyc at_minus1() const { return at_unit(-1 + units_->modulus()); }

  bool is_trivial_on_units() const { return cond_ == 0; }
  LocalCharacter inverse() const;
  LocalCharacter operator*(const LocalCharacter& o) const;
  // restrict stored conductor exponent to the true conductor
  LocalCharacter primitive() const;

 private:
  long p_ = 0;
  int cond_ = 0;
  long L_ = 1;
  std::vector<long> gen_exps_;
  Cyc unif_value_ = Cyc::one();
  std::shared_ptr<const ZpUnits> units_;
};

// epsilon(1/2, mu, psi_p) as an exact Gauss sum times p^{half/2}
struct EpsilonFactor {
  Cyc root_part;  // exact cyclotomic
  int half_power; // value = root_part * p^{half_power/2}
  long p;
  Cplx embed() const { return root_part.embed() * std::pow(static_cast<double>(p), half_power / 2.0); }
};

EpsilonFactor epsilon_factor(const LocalCharacter& mu, int psi_cond = 0);

// Algebraic Hecke character of K. Internal representation:
//  - modulus m and its ray class group
//  - infinity type (a, b)
//  - finite data: for class number one, a character eps of (O/m)^x with
//    eps(-1) = (-1)^{a+b}, and chi((alpha)) = eps(alpha) alpha^{-a} conj(alpha)^{-b};
//    for h(K) > 1 only finite-order characters are supported, via exponents on
//    the SNF generators of the ray class group.
class HeckeCharacter {
 public:
  static HeckeCharacter trivial(std::shared_ptr<const RayClassGroup> G);
  static HeckeCharacter finite_order(std::shared_ptr<const RayClassGroup> G,
                                     const std::vector<long>& snf_exponents);
  // canonical character of infinity type (0,1) and conductor (sqrt(-d));
  // requires h(K) = 1
  static HeckeCharacter canonical_chi0(std::shared_ptr<const QuadField> K);

  const QuadField& field() const { return G_->field(); }
  std::shared_ptr<const RayClassGroup> group() const { return G_; }
  const QIdeal& modulus() const { return G_->modulus(); }
  InfinityType inf_type() const { return inf_; }
  long value_order() const { return L_; }
  bool is_finite_order() const { return inf_.a == 0 && inf_.b == 0; }

  // algebraic ideal value (exact); I coprime to the modulus
  Cyc value(const QIdeal& I) const;
  Cyc value(const KElem& g) const { return value(field().principal_ideal(g)); }
  // unitary value chi(I)/N(I)^{-(a+b)/2} as a complex number
  Cplx unitary_value(const QIdeal& I) const;

  HeckeCharacter operator*(const HeckeCharacter& o) const;
  HeckeCharacter power(long n) const;
  HeckeCharacter inverse_char() const { return power(-1); }
  HeckeCharacter conj_char() const;    // eta^c(I) = eta(conj I)
  HeckeCharacter base_change() const;  // eta~ = eta * (eta^c)^{-1}, trivial on Q-ideles
  HeckeCharacter to_modulus(const QIdeal& m) const;  // m divisible by the conductor

  QIdeal conductor() const;

  // value of the primitive character attached to this one; I must be coprime
  // to the conductor (class number one when I is not coprime to the modulus)
  Cyc primitive_value(const QIdeal& I) const;
  // the character at its own conductor (class number one unless already primitive)
  HeckeCharacter primitive() const;
  // finite-part exponent of eps(alpha) (h = 1; alpha integral coprime to modulus)
  long eps_exponent(const KElem& alpha) const;

  // local component at a split prime w over p, w not dividing the modulus
  // unless h(K) = 1. The component is a character of Q_p^x via iota_w.
  LocalCharacter local_component(const QIdeal& w) const;

  // check chi|_{A_Q} = eps_{K/Q} on rational primes up to the bound
  bool restricts_to_quadratic_character(long prime_bound = 60) const;

 private:
  HeckeCharacter() = default;
  std::shared_ptr<const RayClassGroup> G_;
  InfinityType inf_;
  long L_ = 1;
  bool class_number_one_ = false;
  std::vector<long> snf_exp_;  // finite-order path (h > 1)
  std::vector<long> eps_exp_;  // eps exponents over ResidueUnits generators (h = 1)
  mutable std::shared_ptr<const ResidueUnits> ru_;
  Cyc eps_of(const KElem& alpha) const;  // eps(alpha), alpha integral coprime (h = 1)
  Cyc value_integral(const QIdeal& I) const;
};

// Report for the admissibility conditions on chi.
struct ChiAdmissibilityReport {
  bool conductor_prime_to_p = false;  // (chi2)
  bool infinity_type_ok = false;      // (chi3)
  double central_value_abs = 0;       // |L(1/2, chi)|
  double central_value_err = 0;
  bool central_value_nonzero = false;  // (chi1), numeric with tolerance
  bool all() const { return conductor_prime_to_p && infinity_type_ok && central_value_nonzero; }
};

ChiAdmissibilityReport verify_chi_admissible(const HeckeCharacter& chi0, long p,
                                             double lvalue_cutoff = 1e6);

// delta search: purely imaginary delta with (delta1), (delta2); see the
// conditions on the splitting character. Returns delta as a K-element.
KElem find_delta(const HeckeCharacter& chi0, long p, long height_bound = 50);

// Smoothed L-value of the unitary character chi_u = chi * |.|^{-(a+b)/2}.
struct LValue {
  Cplx value;
  double error_estimate;
};
// L(s, chi_u) for real s; 'cutoff' is the Gaussian smoothing scale X.
LValue central_L_value(const HeckeCharacter& chi, double s, double cutoff = 1e6);

}  // namespace thetalift
