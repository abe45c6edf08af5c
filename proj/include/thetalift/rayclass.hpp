#pragma once

#include <map>
#include <memory>
#include <unordered_map>

#include "thetalift/quadfield.hpp"

namespace thetalift {

// Smith normal form of an integer matrix: U*R*V = D with U, V unimodular.
// Returns diagonal d and the column transforms V, Vinv (row transforms are
// not needed by callers).
struct SnfResult {
  std::vector<Int> diag;                  // size = cols
  std::vector<std::vector<Int>> V, Vinv;  // cols x cols
};
SnfResult smith_normal_form(std::vector<std::vector<Int>> rows, size_t cols);

// Unit group of O/q for q a prime power ideal, with discrete logarithms.
class LocalUnitGroup {
 public:
  LocalUnitGroup(const QuadField& K, const QIdeal& prime, int exponent);

  const QIdeal& prime_power() const { return q_; }
  const std::vector<KElem>& generators() const { return gens_; }
  const std::vector<long>& rel_orders() const { return rel_orders_; }  // g_i^{m_i} = prod_{j<i} g_j^{rel_[i][j]}
  const std::vector<std::vector<long>>& rel_tails() const { return rel_tails_; }
  long size() const { return size_; }

  // dlog of an integral element coprime to the prime; exponents match
  // generators() in the polycyclic sense (0 <= e_i < rel_orders_[i]).
  std::vector<long> dlog(const KElem& z) const;

 private:
  void build_generic();
  void build_split_cyclic();
  void build_split_two();

  const QuadField* K_;
  QIdeal p_;       // the prime
  int e_;          // exponent
  QIdeal q_;       // p^e
  long res_p_;     // residue characteristic
  bool split_;
  long size_ = 1;
  std::vector<KElem> gens_;
  std::vector<long> rel_orders_;
  std::vector<std::vector<long>> rel_tails_;
  // generic machinery
  long idx_A_ = 1, idx_C_ = 1, idx_B_ = 0;  // HNF of q_
  long index_of(const KElem& z) const;
  KElem reduce(const KElem& z) const;
  std::unordered_map<long, std::vector<long>> dlog_map_;
  // split-cyclic machinery
  long split_mod_ = 1;    // p^e
  long split_root_ = 0;   // omega ≡ root (mod p^e)
  long split_gen_ = 0;
  long split_order_ = 1;
  std::unordered_map<long, long> split_table_;
  long split_dlog(long r) const;
};

// (O/m)^x as a product of local unit groups, with CRT-lifted generators.
class ResidueUnits {
 public:
  ResidueUnits(const QuadField& K, const QIdeal& modulus);
  long size() const { return size_; }
  const std::vector<KElem>& generators() const { return gens_; }
  // relation rows over the generators (block polycyclic)
  const std::vector<std::vector<long>>& relations() const { return rels_; }
  // dlog of z in O with (z) coprime to modulus (concatenated local dlogs)
  std::vector<long> dlog(const KElem& z) const;
  size_t num_generators() const { return gens_.size(); }
  const std::vector<std::pair<QIdeal, int>>& local_factors() const { return factors_; }

 private:
  const QuadField* K_;
  QIdeal modulus_;
  long size_ = 1;
  std::vector<std::pair<QIdeal, int>> factors_;
  std::vector<std::unique_ptr<LocalUnitGroup>> locals_;
  std::vector<KElem> gens_;
  std::vector<std::vector<long>> rels_;
};

// Ray class group Cl_m(K) in Smith normal form, with dlog.
class RayClassGroup {
 public:
  RayClassGroup(std::shared_ptr<const QuadField> K, const QIdeal& modulus);

  const QuadField& field() const { return *K_; }
  const QIdeal& modulus() const { return modulus_; }
  const std::vector<long>& orders() const { return orders_; }  // d_1 | d_2 | ...
  const std::vector<QIdeal>& generators() const { return gen_ideals_; }
  long order() const { return order_; }

  // exponent vector (length orders().size()) of an ideal coprime to modulus
  std::vector<long> dlog(const QIdeal& I) const;
  std::vector<long> dlog(const KElem& g) const { return dlog(K_->principal_ideal(g)); }

  // group element arithmetic on exponent vectors
  std::vector<long> add(const std::vector<long>& a, const std::vector<long>& b) const;
  std::vector<long> neg(const std::vector<long>& a) const;
  std::vector<long> zero() const { return std::vector<long>(orders_.size(), 0); }
  long element_index(const std::vector<long>& e) const;
  std::vector<long> element_of_index(long idx) const;

  // matrix of the Galois conjugation c on the group (image of each generator)
  std::vector<std::vector<long>> conj_action() const;

  std::shared_ptr<const QuadField> field_ptr() const { return K_; }

 private:
  std::shared_ptr<const QuadField> K_;
  QIdeal modulus_;
  std::unique_ptr<ResidueUnits> units_;  // null for trivial modulus
  // class-group part
  std::vector<QIdeal> cl_primes_;
  std::vector<long> cl_multiple_;  // exponent M_s killing [q_s] in Cl(K)
  std::map<std::array<Int, 3>, std::vector<long>> cl_table_;  // class key -> exponents over cl_primes_
  // presentation -> SNF
  size_t n_units_ = 0, n_primes_ = 0;
  SnfResult snf_;
  std::vector<long> orders_;       // nontrivial SNF orders
  std::vector<size_t> keep_cols_;  // which SNF columns have order > 1
  std::vector<QIdeal> gen_ideals_;
  long order_ = 1;

  std::vector<long> presentation_dlog(const QIdeal& I) const;  // pre-SNF exponents
  std::vector<long> to_snf(const std::vector<long>& pre) const;
};

}  // namespace thetalift
