#include "thetalift/rayclass.hpp"

#include <algorithm>
#include <cmath>

namespace thetalift {

namespace {

Int floordiv(const Int& n, const Int& m) {
  Int q = n / m;
  if ((n % m != 0) && ((n < 0) != (m < 0))) --q;
  return q;
}

// canonical residue of an integral element modulo an integral ideal in HNF
KElem reduce_mod(const KElem& z, const QIdeal& I) {
  Int x = rat_num(z.x), y = rat_num(z.y);
  if (rat_den(z.x) != 1 || rat_den(z.y) != 1)
    throw std::invalid_argument("reduce_mod: element not integral");
  Int t = floordiv(y, I.c);
  y -= t * I.c;
  x -= t * I.b;
  x -= floordiv(x, I.a) * I.a;
  return KElem(Rat(x), Rat(y));
}

}  // namespace

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

SnfResult smith_normal_form(std::vector<std::vector<Int>> rows, size_t cols) {
  size_t r = rows.size();
  SnfResult out;
  out.V.assign(cols, std::vector<Int>(cols, 0));
  out.Vinv.assign(cols, std::vector<Int>(cols, 0));
  for (size_t i = 0; i < cols; ++i) out.V[i][i] = out.Vinv[i][i] = 1;

  auto col_add = [&](size_t dst, size_t src, const Int& c) {  // col_dst += c*col_src
    for (size_t i = 0; i < r; ++i) rows[i][dst] += c * rows[i][src];
    for (size_t i = 0; i < cols; ++i) out.V[i][dst] += c * out.V[i][src];
    for (size_t j = 0; j < cols; ++j) out.Vinv[src][j] -= c * out.Vinv[dst][j];
  };
  auto col_swap = [&](size_t a, size_t b) {
    for (size_t i = 0; i < r; ++i) std::swap(rows[i][a], rows[i][b]);
    for (size_t i = 0; i < cols; ++i) std::swap(out.V[i][a], out.V[i][b]);
    std::swap(out.Vinv[a], out.Vinv[b]);
  };
  auto col_neg = [&](size_t a) {
    for (size_t i = 0; i < r; ++i) rows[i][a] = -rows[i][a];
    for (size_t i = 0; i < cols; ++i) out.V[i][a] = -out.V[i][a];
    for (size_t j = 0; j < cols; ++j) out.Vinv[a][j] = -out.Vinv[a][j];
  };
  auto row_add = [&](size_t dst, size_t src, const Int& c) {
    for (size_t j = 0; j < cols; ++j) rows[dst][j] += c * rows[src][j];
  };

  size_t t = 0;
  size_t steps = std::min(r, cols);
  for (; t < steps; ++t) {
    // find pivot
    size_t pi = t, pj = t;
    bool found = false;
    Int best = 0;
    for (size_t i = t; i < r; ++i)
      for (size_t j = t; j < cols; ++j)
        if (rows[i][j] != 0 && (!found || abs(rows[i][j]) < best)) {
          best = abs(rows[i][j]);
          pi = i; pj = j;
          found = true;
        }
    if (!found) break;
    std::swap(rows[t], rows[pi]);
    if (pj != t) col_swap(t, pj);
    // clear row and column t
    bool again = true;
    while (again) {
      again = false;
      for (size_t i = t + 1; i < r; ++i) {
        if (rows[i][t] == 0) continue;
        Int q = floordiv(rows[i][t], rows[t][t]);
        row_add(i, t, -q);
        if (rows[i][t] != 0) { std::swap(rows[t], rows[i]); again = true; }
      }
      for (size_t j = t + 1; j < cols; ++j) {
        if (rows[t][j] == 0) continue;
        Int q = floordiv(rows[t][j], rows[t][t]);
        col_add(j, t, -q);
        if (rows[t][j] != 0) { col_swap(t, j); again = true; }
      }
    }
    if (rows[t][t] < 0) col_neg(t);
  }
  // enforce divisibility d_i | d_{i+1}
  bool changed = true;
  while (changed && t > 1) {
    changed = false;
    for (size_t i = 0; i + 1 < t; ++i) {
      size_t j = i + 1;
      if (rows[i][i] == 0 || rows[j][j] == 0) continue;
      if (rows[j][j] % rows[i][i] == 0) continue;
      changed = true;
      col_add(i, j, 1);  // now rows[j][i] = rows[j][j]
      // Euclid on (rows[i][i], rows[j][i]) via row ops
      while (rows[j][i] != 0) {
        Int q = floordiv(rows[i][i], rows[j][i]);
        row_add(i, j, -q);
        std::swap(rows[i], rows[j]);
      }
      // clear fill-in rows[i][j]
      if (rows[i][j] != 0) {
        if (rows[i][j] % rows[i][i] != 0)
          throw std::logic_error("snf: divisibility fill-in not divisible");
        col_add(j, i, -rows[i][j] / rows[i][i]);
      }
      if (rows[i][i] < 0) col_neg(i);
      if (rows[j][j] < 0) col_neg(j);
    }
  }
  out.diag.assign(cols, Int(0));
  for (size_t j = 0; j < std::min(r, cols); ++j) out.diag[j] = abs(rows[j][j]);
  return out;
}

// ---------------------------------------------------------------------------
// LocalUnitGroup
// ---------------------------------------------------------------------------

LocalUnitGroup::LocalUnitGroup(const QuadField& K, const QIdeal& prime, int exponent)
    : K_(&K), p_(prime), e_(exponent) {
  q_ = K.pow(prime, exponent);
  Int np = prime.a * prime.c;  // N(prime)
  // residue characteristic
  long p = 0;
  for (auto [q, e] : factorize(to_long(np))) { p = q; (void)e; }
  res_p_ = p;
  split_ = (prime.c == 1) && (Int(p) == np) && (K.d() % p != 0);
  if (split_ && p != 2) {
    build_split_cyclic();
  } else {
    build_generic();
  }
}

void LocalUnitGroup::build_split_cyclic() {
  long p = res_p_;
  Int mod = ipow(Int(p), e_);
  if (mod > (Int(1) << 40)) throw std::overflow_error("LocalUnitGroup: split modulus too large");
  split_mod_ = to_long(mod);
  // omega ≡ -b mod p^e from the HNF [p^e, b + omega]
  split_root_ = to_long(((-q_.b) % split_mod_ + split_mod_) % split_mod_);
  long g = primitive_root(p);
  if (e_ >= 2 && powmod(g, p - 1, Int(p) * p) == 1) g += p;
  split_gen_ = g;
  split_order_ = (p - 1);
  for (int i = 1; i < e_; ++i) split_order_ *= p;
  size_ = split_order_;
  gens_ = {KElem(Rat(g), Rat(0))};
  rel_orders_ = {split_order_};
  rel_tails_ = {{}};
  Int cur = 1;
  for (long j = 0; j < split_order_; ++j) {
    split_table_.emplace(to_long(cur), j);
    cur = cur * g % split_mod_;
  }
}

long LocalUnitGroup::split_dlog(long r) const {
  auto it = split_table_.find(r);
  if (it == split_table_.end()) throw std::domain_error("split_dlog: not a unit");
  return it->second;
}

KElem LocalUnitGroup::reduce(const KElem& z) const { return reduce_mod(z, q_); }

long LocalUnitGroup::index_of(const KElem& z) const {
  KElem r = reduce(z);
  return to_long(rat_num(r.x) + Int(idx_A_) * rat_num(r.y));
}

void LocalUnitGroup::build_generic() {
  idx_A_ = to_long(q_.a);
  idx_B_ = to_long(q_.b);
  idx_C_ = to_long(q_.c);
  Int total = Int(idx_A_) * idx_C_;
  if (total > 2000000) throw std::overflow_error("LocalUnitGroup: residue ring too large");
  // enumerate units and build the polycyclic structure greedily
  std::vector<std::pair<KElem, std::vector<long>>> elems;
  KElem one = KElem::from_int(1);
  dlog_map_[index_of(one)] = {};
  elems.push_back({one, {}});
  auto is_unit = [&](const KElem& z) { return !K_->contains(p_, z); };
  long unit_count = 0;
  for (long y = 0; y < idx_C_; ++y)
    for (long x = 0; x < idx_A_; ++x)
      if (is_unit(KElem{Rat(x), Rat(y)})) ++unit_count;
  size_ = unit_count;
  for (long y = 0; y < idx_C_ && static_cast<long>(elems.size()) < unit_count; ++y) {
    for (long x = 0; x < idx_A_ && static_cast<long>(elems.size()) < unit_count; ++x) {
      KElem u{Rat(x), Rat(y)};
      if (!is_unit(u)) continue;
      if (dlog_map_.count(index_of(u))) continue;
      // relative order of u over the current subgroup
      long m = 1;
      KElem pw = reduce(u);
      while (!dlog_map_.count(index_of(pw))) {
        pw = reduce(K_->mul(pw, u));
        ++m;
      }
      std::vector<long> tail = dlog_map_[index_of(pw)];
      tail.resize(gens_.size(), 0);
      gens_.push_back(u);
      rel_orders_.push_back(m);
      rel_tails_.push_back(tail);
      // extend subgroup
      auto snapshot = elems;
      KElem upow = one;
      for (long j = 1; j < m; ++j) {
        upow = reduce(K_->mul(upow, u));
        for (auto& [el, vec] : snapshot) {
          KElem z = reduce(K_->mul(el, upow));
          std::vector<long> v = vec;
          v.resize(gens_.size(), 0);
          v.back() = j;
          dlog_map_[index_of(z)] = v;
          elems.push_back({z, v});
        }
      }
    }
  }
  // pad all stored dlogs
  for (auto& [k, v] : dlog_map_) v.resize(gens_.size(), 0);
  if (static_cast<long>(dlog_map_.size()) != unit_count)
    throw std::logic_error("LocalUnitGroup: structure enumeration incomplete");
}

std::vector<long> LocalUnitGroup::dlog(const KElem& z) const {
  if (split_ && res_p_ != 2) {
    Int xi = rat_num(z.x) + rat_num(z.y) * split_root_;
    long r = to_long(((xi % split_mod_) + split_mod_) % split_mod_);
    if (r % res_p_ == 0) throw std::domain_error("LocalUnitGroup::dlog: not a unit");
    return {split_dlog(r)};
  }
  auto it = dlog_map_.find(index_of(z));
  if (it == dlog_map_.end()) throw std::domain_error("LocalUnitGroup::dlog: not a unit");
  return it->second;
}

// ---------------------------------------------------------------------------
// ResidueUnits
// ---------------------------------------------------------------------------

ResidueUnits::ResidueUnits(const QuadField& K, const QIdeal& modulus)
    : K_(&K), modulus_(modulus) {
  if (!modulus.is_integral()) throw std::invalid_argument("ResidueUnits: modulus not integral");
  factors_ = K.factor(modulus);
  for (auto& [p, e] : factors_) locals_.push_back(std::make_unique<LocalUnitGroup>(K, p, e));
  // CRT lift generators
  for (size_t i = 0; i < locals_.size(); ++i) {
    size_ *= locals_[i]->size();
    for (auto& g : locals_[i]->generators()) {
      std::vector<std::pair<QIdeal, KElem>> congr;
      for (size_t j = 0; j < locals_.size(); ++j)
        congr.push_back({locals_[j]->prime_power(),
                         i == j ? g : KElem::from_int(1)});
      KElem lift = locals_.size() == 1 ? g : K.solve_crt(congr);
      gens_.push_back(reduce_mod(lift, modulus_));
    }
  }
  // block relations
  size_t off = 0;
  size_t total = gens_.size();
  for (auto& loc : locals_) {
    for (size_t i = 0; i < loc->generators().size(); ++i) {
      std::vector<long> row(total, 0);
      row[off + i] = loc->rel_orders()[i];
      for (size_t j = 0; j < loc->rel_tails()[i].size(); ++j)
        row[off + j] -= loc->rel_tails()[i][j];
      rels_.push_back(std::move(row));
    }
    off += loc->generators().size();
  }
}

std::vector<long> ResidueUnits::dlog(const KElem& z) const {
  std::vector<long> out;
  for (auto& loc : locals_) {
    auto v = loc->dlog(reduce_mod(z, loc->prime_power()));
    v.resize(loc->generators().size(), 0);
    for (long e : v) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// RayClassGroup
// ---------------------------------------------------------------------------

RayClassGroup::RayClassGroup(std::shared_ptr<const QuadField> K, const QIdeal& modulus)
    : K_(std::move(K)), modulus_(modulus) {
  const QuadField& F = *K_;
  if (!modulus.is_integral()) throw std::invalid_argument("RayClassGroup: modulus not integral");
  bool trivial_modulus = (modulus == F.unit_ideal());
  if (!trivial_modulus) units_ = std::make_unique<ResidueUnits>(F, modulus);

  // --- class group part: find prime generators coprime to the modulus ---
  auto identity_key = F.class_key(F.unit_ideal());
  double bnd = 2.0 * std::sqrt(static_cast<double>(F.d())) / 3.14159265358979;
  long minkowski = static_cast<long>(std::floor(bnd)) + 1;
  std::vector<QIdeal> needed;  // primes below the bound dividing the modulus
  for (long p = 2; p <= minkowski; ++p) {
    if (!is_prime(p)) continue;
    auto sp = F.factor_prime(p);
    for (auto& pf : sp.primes) {
      if (!trivial_modulus && !F.is_coprime(pf.prime, modulus)) {
        needed.push_back(pf.prime);
        continue;
      }
      if (F.class_key(pf.prime) != identity_key) cl_primes_.push_back(pf.prime);
    }
  }
  // close the subgroup; make sure classes of excluded primes are covered
  auto bfs = [&]() {
    std::map<std::array<Int, 3>, std::vector<long>> table;
    table[identity_key] = std::vector<long>(cl_primes_.size(), 0);
    std::vector<std::pair<QIdeal, std::vector<long>>> frontier = {
        {F.unit_ideal(), std::vector<long>(cl_primes_.size(), 0)}};
    while (!frontier.empty()) {
      std::vector<std::pair<QIdeal, std::vector<long>>> next;
      for (auto& [I, v] : frontier) {
        for (size_t s = 0; s < cl_primes_.size(); ++s) {
          QIdeal J = F.mul(I, cl_primes_[s]);
          auto key = F.class_key(J);
          if (table.count(key)) continue;
          auto w = v;
          w[s] += 1;
          table[key] = w;
          next.push_back({J, w});
        }
      }
      frontier = std::move(next);
    }
    return table;
  };
  cl_table_ = bfs();
  // extend generators until classes of 'needed' primes are present
  long p_next = minkowski;
  int guard = 0;
  while (true) {
    bool ok = true;
    for (auto& q : needed)
      if (!cl_table_.count(F.class_key(q))) { ok = false; break; }
    if (ok) break;
    // add the next usable prime
    do { ++p_next; } while (!is_prime(p_next));
    if (++guard > 100) throw std::logic_error("RayClassGroup: class generators not found");
    auto sp = F.factor_prime(p_next);
    for (auto& pf : sp.primes) {
      if (!trivial_modulus && !F.is_coprime(pf.prime, modulus)) continue;
      if (F.class_key(pf.prime) == identity_key) continue;
      cl_primes_.push_back(pf.prime);
    }
    cl_table_ = bfs();
  }
  long h = static_cast<long>(cl_table_.size());

  // orders M_s of the prime classes
  for (auto& q : cl_primes_) {
    long m = 1;
    QIdeal pw = q;
    while (F.class_key(pw) != identity_key) { pw = F.mul(pw, q); ++m; }
    cl_multiple_.push_back(m);
  }

  n_units_ = units_ ? units_->num_generators() : 0;
  n_primes_ = cl_primes_.size();
  size_t n = n_units_ + n_primes_;

  // --- relation rows ---
  std::vector<std::vector<Int>> rows;
  auto unit_dlog = [&](const KElem& g) {
    return units_ ? units_->dlog(g) : std::vector<long>{};
  };
  if (units_) {
    for (auto& r : units_->relations()) {
      std::vector<Int> row(n, 0);
      for (size_t j = 0; j < r.size(); ++j) row[j] = r[j];
      rows.push_back(std::move(row));
    }
    // image of the unit group {±1}
    std::vector<Int> row(n, 0);
    auto dm = unit_dlog(KElem::from_int(-1));
    for (size_t j = 0; j < dm.size(); ++j) row[j] = dm[j];
    rows.push_back(std::move(row));
  }
  // chain relations for the prime generators
  {
    std::map<std::array<Int, 3>, std::vector<long>> H;
    H[identity_key] = {};
    for (size_t t = 0; t < n_primes_; ++t) {
      // find minimal m with [q_t]^m in H = <q_0.., q_{t-1}>
      long m = 0;
      QIdeal pw = F.unit_ideal();
      std::vector<long> w;
      while (true) {
        ++m;
        pw = F.mul(pw, cl_primes_[t]);
        auto it = H.find(F.class_key(pw));
        if (it != H.end()) { w = it->second; break; }
        if (m > h) throw std::logic_error("RayClassGroup: chain order overflow");
      }
      w.resize(t, 0);
      // relation ideal q_t^m * prod_{s<t} q_s^{k_s M_s - w_s}, all exponents >= 0
      QIdeal rel = F.pow(cl_primes_[t], m);
      std::vector<Int> row(n, 0);
      row[n_units_ + t] = m;
      for (size_t s = 0; s < t; ++s) {
        long ks = (w[s] == 0) ? 0 : ((w[s] + cl_multiple_[s] - 1) / cl_multiple_[s]);
        long exp = ks * cl_multiple_[s] - w[s];
        rel = F.mul(rel, F.pow(cl_primes_[s], exp));
        row[n_units_ + s] = exp;
      }
      auto gamma = F.principal_generator(rel);
      if (!gamma) throw std::logic_error("RayClassGroup: relation ideal not principal");
      auto dg = unit_dlog(*gamma);
      for (size_t j = 0; j < dg.size(); ++j) row[j] -= dg[j];
      rows.push_back(std::move(row));
      // recompute H over generators 0..t
      H.clear();
      H[identity_key] = std::vector<long>(t + 1, 0);
      std::vector<std::pair<QIdeal, std::vector<long>>> frontier = {
          {F.unit_ideal(), std::vector<long>(t + 1, 0)}};
      while (!frontier.empty()) {
        std::vector<std::pair<QIdeal, std::vector<long>>> nx;
        for (auto& [I, v] : frontier) {
          for (size_t s = 0; s <= t; ++s) {
            QIdeal J = F.mul(I, cl_primes_[s]);
            auto key = F.class_key(J);
            if (H.count(key)) continue;
            auto w2 = v;
            w2[s] += 1;
            H[key] = w2;
            nx.push_back({J, w2});
          }
        }
        frontier = std::move(nx);
      }
    }
  }

  // --- SNF ---
  if (n == 0) {
    order_ = 1;
    snf_ = SnfResult{};
  } else {
    snf_ = smith_normal_form(rows, n);
    order_ = 1;
    for (size_t j = 0; j < n; ++j) {
      if (snf_.diag[j] == 0)
        throw std::logic_error("RayClassGroup: infinite quotient (missing relations)");
      if (snf_.diag[j] > 1) {
        keep_cols_.push_back(j);
        orders_.push_back(to_long(snf_.diag[j]));
        order_ *= to_long(snf_.diag[j]);
      }
    }
  }

  // canonical generator ideals: G_j = prod_i gens_i^{Vinv[j][i]}
  std::vector<QIdeal> pre_gens;
  if (units_)
    for (auto& g : units_->generators()) pre_gens.push_back(F.principal_ideal(g));
  for (auto& q : cl_primes_) pre_gens.push_back(q);
  for (size_t idx = 0; idx < keep_cols_.size(); ++idx) {
    size_t j = keep_cols_[idx];
    QIdeal G = F.unit_ideal();
    for (size_t i = 0; i < pre_gens.size(); ++i) {
      long e = to_long(snf_.Vinv[j][i]);
      if (e != 0) G = F.mul(G, F.pow(pre_gens[i], e));
    }
    gen_ideals_.push_back(G);
  }

  // independent order check: |Cl_m| = h * phi(m) / [O^x : O^x_{m,1}]
  long phi_m = units_ ? units_->size() : 1;
  long unit_image = 2;
  if (!units_) {
    unit_image = 1;
  } else {
    auto dm = units_->dlog(KElem::from_int(-1));
    bool trivial = true;
    for (long e : dm)
      if (e != 0) trivial = false;
    unit_image = trivial ? 1 : 2;
  }
  long expect = h * phi_m / unit_image;
  if (order_ != expect)
    throw std::logic_error("RayClassGroup: order mismatch vs. ray class number formula: got " +
                           std::to_string(order_) + " expected " + std::to_string(expect));
}

std::vector<long> RayClassGroup::presentation_dlog(const QIdeal& I) const {
  const QuadField& F = *K_;
  size_t n = n_units_ + n_primes_;
  // coprimality
  if (units_)
    for (auto& [p, e] : units_->local_factors())
      if (F.valuation(I, p) != 0) throw std::invalid_argument("dlog: ideal not coprime to modulus");
  // split fractional ideals into integral coprime parts
  if (!I.is_integral()) {
    QIdeal num{I.a, I.b, I.c, 1};
    QIdeal den_ideal = F.principal_ideal(KElem(Rat(I.den), Rat(0)));
    QIdeal g = F.sum(num, den_ideal);
    QIdeal A = F.mul(num, F.inverse(g));
    QIdeal B = F.mul(den_ideal, F.inverse(g));
    auto a = presentation_dlog(A);
    auto b = presentation_dlog(B);
    std::vector<long> out(n, 0);
    for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
    return out;
  }
  // class part
  auto it = cl_table_.find(F.class_key(I));
  if (it == cl_table_.end()) throw std::logic_error("dlog: class not in table");
  std::vector<long> u = it->second;
  u.resize(n_primes_, 0);
  QIdeal J = I;
  for (size_t s = 0; s < n_primes_; ++s) {
    long us = u[s] % cl_multiple_[s];
    if (us < 0) us += cl_multiple_[s];
    u[s] = us;
    if (us != 0) J = F.mul(J, F.pow(cl_primes_[s], cl_multiple_[s] - us));
  }
  auto gamma = F.principal_generator(J);
  if (!gamma) throw std::logic_error("dlog: residual ideal not principal");
  std::vector<long> out(n, 0);
  if (units_) {
    auto dg = units_->dlog(*gamma);
    for (size_t j = 0; j < dg.size(); ++j) out[j] = dg[j];
  }
  for (size_t s = 0; s < n_primes_; ++s) out[n_units_ + s] = u[s] == 0 ? 0 : u[s] - cl_multiple_[s];
  return out;
}

std::vector<long> RayClassGroup::to_snf(const std::vector<long>& pre) const {
  std::vector<long> out(orders_.size(), 0);
  for (size_t idx = 0; idx < keep_cols_.size(); ++idx) {
    size_t j = keep_cols_[idx];
    Int acc = 0;
    for (size_t i = 0; i < pre.size(); ++i) acc += Int(pre[i]) * snf_.V[i][j];
    Int m = orders_[idx];
    acc %= m;
    if (acc < 0) acc += m;
    out[idx] = to_long(acc);
  }
  return out;
}

std::vector<long> RayClassGroup::dlog(const QIdeal& I) const {
  if (n_units_ + n_primes_ == 0) return {};
  return to_snf(presentation_dlog(I));
}

std::vector<long> RayClassGroup::add(const std::vector<long>& a, const std::vector<long>& b) const {
  std::vector<long> out(orders_.size());
  for (size_t i = 0; i < orders_.size(); ++i) out[i] = (a[i] + b[i]) % orders_[i];
  return out;
}

std::vector<long> RayClassGroup::neg(const std::vector<long>& a) const {
  std::vector<long> out(orders_.size());
  for (size_t i = 0; i < orders_.size(); ++i) out[i] = (orders_[i] - a[i]) % orders_[i];
  return out;
}

long RayClassGroup::element_index(const std::vector<long>& e) const {
  long idx = 0;
  for (size_t i = 0; i < orders_.size(); ++i) idx = idx * orders_[i] + e[i];
  return idx;
}

std::vector<long> RayClassGroup::element_of_index(long idx) const {
  std::vector<long> e(orders_.size(), 0);
  for (size_t i = orders_.size(); i-- > 0;) {
    e[i] = idx % orders_[i];
    idx /= orders_[i];
  }
  return e;
}

std::vector<std::vector<long>> RayClassGroup::conj_action() const {
  std::vector<std::vector<long>> out;
  for (auto& g : gen_ideals_) out.push_back(dlog(K_->conj(g)));
  return out;
}

}  // namespace thetalift
