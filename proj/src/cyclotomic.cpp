#include "thetalift/cyclotomic.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace thetalift {

namespace {

// exact division of polynomials with integer coefficients (little-endian)
std::vector<Int> poly_divide_exact(std::vector<Int> num, const std::vector<Int>& den) {
  std::vector<Int> q(num.size() - den.size() + 1, Int(0));
  for (long i = static_cast<long>(q.size()) - 1; i >= 0; --i) {
    Int c = num[i + den.size() - 1] / den.back();
    q[i] = c;
    if (c != 0)
      for (size_t j = 0; j < den.size(); ++j) num[i + j] -= c * den[j];
  }
  return q;
}

}  // namespace

namespace {
const std::vector<Int>& cyclotomic_impl(long m,
                                        std::unordered_map<long, std::vector<Int>>& cache) {
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  // Phi_m = (x^m - 1) / prod_{d | m, d < m} Phi_d
  std::vector<Int> num(m + 1, Int(0));
  num[0] = -1;
  num[m] = 1;
  for (long d = 1; d < m; ++d) {
    if (m % d != 0) continue;
    const auto& phid = cyclotomic_impl(d, cache);
    num = poly_divide_exact(std::move(num), phid);
  }
  return cache.emplace(m, std::move(num)).first->second;
}
}  // namespace

const std::vector<Int>& cyclotomic_polynomial(long m) {
  static std::unordered_map<long, std::vector<Int>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  return cyclotomic_impl(m, cache);
}

Cyc Cyc::root(long m, long k) {
  if (m <= 0) throw std::invalid_argument("Cyc::root: order must be positive");
  k %= m;
  if (k < 0) k += m;
  long g = std::gcd(m, k == 0 ? m : k);
  m /= g;
  k /= g;
  Cyc c;
  c.order_ = m;
  c.terms_[k] = 1;
  return c;
}

Cyc Cyc::sqrt_minus(long d) {
  if (d % 4 != 3) throw std::invalid_argument("sqrt_minus: need -d ≡ 1 mod 4");
  // For squarefree d ≡ 3 mod 4 the Gauss sum  sum_{n mod d} (n|d) zeta_d^n  equals i*sqrt(d).
  Cyc s;
  s.order_ = d;
  for (long n = 1; n < d; ++n) {
    int chi = kronecker(n, d);
    if (chi != 0) s.terms_[n] = Rat(chi);
  }
  return s;
}

void Cyc::set_order(long m) {
  if (m == order_) return;
  if (m % order_ != 0) throw std::logic_error("Cyc::set_order: old order must divide new");
  long f = m / order_;
  std::map<long, Rat> t;
  for (auto& [e, c] : terms_) t[e * f] = c;
  terms_ = std::move(t);
  order_ = m;
}

Cyc Cyc::operator-() const {
  Cyc r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

Cyc Cyc::operator+(const Cyc& o) const {
  Cyc a = *this, b = o;
  long m = std::lcm(a.order_, b.order_);
  a.set_order(m);
  b.set_order(m);
  for (auto& [e, c] : b.terms_) {
    auto it = a.terms_.find(e);
    if (it == a.terms_.end()) {
      a.terms_[e] = c;
    } else {
      it->second += c;
      if (it->second == 0) a.terms_.erase(it);
    }
  }
  return a;
}

Cyc Cyc::operator*(const Cyc& o) const {
  Cyc a = *this, b = o;
  long m = std::lcm(a.order_, b.order_);
  a.set_order(m);
  b.set_order(m);
  Cyc r;
  r.order_ = m;
  for (auto& [e1, c1] : a.terms_)
    for (auto& [e2, c2] : b.terms_) {
      long e = (e1 + e2) % m;
      Rat c = c1 * c2;
      auto it = r.terms_.find(e);
      if (it == r.terms_.end()) {
        if (c != 0) r.terms_[e] = c;
      } else {
        it->second += c;
        if (it->second == 0) r.terms_.erase(it);
      }
    }
  return r;
}

Cyc Cyc::operator*(const Rat& s) const {
  Cyc r;
  r.order_ = order_;
  if (s == 0) return r;
  for (auto& [e, c] : terms_) r.terms_[e] = c * s;
  return r;
}

Cyc Cyc::galois(long k) const {
  long m = order_;
  k %= m;
  if (k < 0) k += m;
  if (std::gcd(k, m) != 1) throw std::invalid_argument("Cyc::galois: k not coprime to order");
  Cyc r;
  r.order_ = m;
  for (auto& [e, c] : terms_) {
    long ne = static_cast<long>((static_cast<Int>(e) * k % m).convert_to<long>());
    auto it = r.terms_.find(ne);
    if (it == r.terms_.end()) r.terms_[ne] = c;
    else {
      it->second += c;
      if (it->second == 0) r.terms_.erase(it);
    }
  }
  return r;
}

std::vector<Rat> Cyc::dense_reduced() const {
  const auto& phi = cyclotomic_polynomial(order_);
  long deg = static_cast<long>(phi.size()) - 1;
  std::vector<Rat> v(std::max<long>(order_, deg), Rat(0));
  for (auto& [e, c] : terms_) v[e] += c;
  // reduce mod Phi_m (monic)
  for (long i = static_cast<long>(v.size()) - 1; i >= deg; --i) {
    if (v[i] == 0) continue;
    Rat c = v[i];
    v[i] = 0;
    for (long j = 0; j < deg; ++j) v[i - deg + j] -= c * Rat(phi[j]);
  }
  v.resize(deg);
  return v;
}

bool Cyc::is_zero() const {
  if (terms_.empty()) return true;
  if (terms_.size() == 1 && order_ == 1) return false;
  auto v = dense_reduced();
  for (auto& c : v)
    if (c != 0) return false;
  return true;
}

std::optional<Rat> Cyc::as_rational() const {
  if (terms_.empty()) return Rat(0);
  auto v = dense_reduced();
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] != 0) return std::nullopt;
  return v[0];
}

Cyc Cyc::inverse() const {
  // Extended Euclid in Q[x] for (this mod Phi_m, Phi_m).
  if (is_zero()) throw std::domain_error("Cyc::inverse of zero");
  const auto& phiI = cyclotomic_polynomial(order_);
  std::vector<Rat> phi(phiI.size());
  for (size_t i = 0; i < phiI.size(); ++i) phi[i] = Rat(phiI[i]);
  std::vector<Rat> a = dense_reduced();
  while (!a.empty() && a.back() == 0) a.pop_back();
  // invariants: s * this ≡ r (mod Phi)
  std::vector<Rat> r0 = phi, r1 = a;
  std::vector<Rat> s0 = {}, s1 = {Rat(1)};
  auto deg = [](const std::vector<Rat>& p) { return static_cast<long>(p.size()) - 1; };
  while (deg(r1) > 0) {
    // divide r0 by r1
    std::vector<Rat> q(std::max<long>(deg(r0) - deg(r1) + 1, 0), Rat(0));
    std::vector<Rat> rem = r0;
    for (long i = deg(rem); i >= deg(r1); --i) {
      if (rem[i] == 0) continue;
      Rat c = rem[i] / r1.back();
      q[i - deg(r1)] = c;
      for (long j = 0; j <= deg(r1); ++j) rem[i - deg(r1) + j] -= c * r1[j];
    }
    while (!rem.empty() && rem.back() == 0) rem.pop_back();
    // s2 = s0 - q*s1
    std::vector<Rat> s2 = s0;
    s2.resize(std::max(s0.size(), q.size() + s1.size()), Rat(0));
    for (size_t i = 0; i < q.size(); ++i) {
      if (q[i] == 0) continue;
      for (size_t j = 0; j < s1.size(); ++j) s2[i + j] -= q[i] * s1[j];
    }
    while (!s2.empty() && s2.back() == 0) s2.pop_back();
    r0 = std::move(r1); r1 = std::move(rem);
    s0 = std::move(s1); s1 = std::move(s2);
  }
  if (r1.empty()) throw std::domain_error("Cyc::inverse: zero divisor (element is 0 mod Phi)");
  Rat lead = r1[0];
  Cyc inv;
  inv.order_ = order_;
  for (size_t i = 0; i < s1.size(); ++i)
    if (s1[i] != 0) inv.terms_[static_cast<long>(i)] = s1[i] / lead;
  return inv;
}

Cplx Cyc::embed() const {
  static const double TWO_PI = 6.283185307179586476925286766559;
  Cplx z = 0;
  for (auto& [e, c] : terms_) {
    double arg = TWO_PI * static_cast<double>(e) / static_cast<double>(order_);
    z += to_double(c) * Cplx(std::cos(arg), std::sin(arg));
  }
  return z;
}

std::string Cyc::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.str();
    if (e != 0) os << "*z" << order_ << "^" << e;
  }
  return os.str();
}

}  // namespace thetalift
