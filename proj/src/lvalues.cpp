#include <cmath>
#include <unordered_map>

#include "thetalift/characters.hpp"

namespace thetalift {

namespace {

// shortest vector of the lattice {(X,Y)} = Z(p,0) + Z(bt,1) under
// N(X,Y) = X^2 + XY + n0 Y^2, by integer Gauss reduction
std::pair<long, long> prime_generator_xy(long p, long bt, long n0) {
  auto norm = [&](__int128 x, __int128 y) { return x * x + x * y + __int128(n0) * y * y; };
  auto dot = [&](__int128 x1, __int128 y1, __int128 x2, __int128 y2) {
    // polarization of the norm form: B(u,v) = (N(u+v) - N(u) - N(v)) / 2, doubled
    return 2 * x1 * x2 + x1 * y2 + x2 * y1 + 2 * __int128(n0) * y1 * y2;  // = 2 B(u,v)
  };
  __int128 ux = p, uy = 0, vx = bt, vy = 1;
  if (norm(ux, uy) > norm(vx, vy)) { std::swap(ux, vx); std::swap(uy, vy); }
  while (true) {
    __int128 nu = norm(ux, uy);
    __int128 b2 = dot(ux, uy, vx, vy);  // 2B(u,v)
    // q = round(B/N) = round(b2 / (2 nu))
    __int128 q = (b2 >= 0) ? (b2 + nu) / (2 * nu) : -((-b2 + nu) / (2 * nu));
    __int128 wx = vx - q * ux, wy = vy - q * uy;
    if (norm(wx, wy) >= nu) return {static_cast<long>(ux), static_cast<long>(uy)};
    vx = ux; vy = uy;
    ux = wx; uy = wy;
  }
}

}  // namespace

// Smoothed Dirichlet series with Gaussian cutoff:
//   sum_n c_n n^{-s} exp(-(n/X)^2) = L(s, chi_u) + pole term + O(X^{-2})
// where c_n are the coefficients of the primitive unitary character.
LValue central_L_value(const HeckeCharacter& chi_in, double s, double cutoff) {
  HeckeCharacter chi = chi_in.primitive();
  const QuadField& K = chi.field();
  double X = cutoff;
  long N = static_cast<long>(5 * X);
  double halfshift = (chi.inf_type().a + chi.inf_type().b) / 2.0;
  long a_inf = chi.inf_type().a, b_inf = chi.inf_type().b;
  QIdeal cond = chi.modulus();  // primitive: modulus == conductor
  bool principal = (cond == K.unit_ideal()) && chi.is_finite_order();
  long n0 = to_long(rat_num(K.omega_norm()));
  long d = K.d();
  long L = chi.value_order();

  // conductor data: for each prime power in the conductor, record (p, bt) of
  // the underlying prime so prime ideals can be compared without ideal ops
  struct CondPrime { long p; long bt; };
  std::vector<CondPrime> cond_primes;
  for (auto& [q, e] : K.factor(cond)) {
    (void)e;
    cond_primes.push_back({to_long(q.a / q.c), to_long(q.b / q.c)});
  }
  auto in_conductor = [&](long p, long bt) {
    for (auto& cp : cond_primes)
      if (cp.p == p && (cp.bt % p + p) % p == (bt % p + p) % p) return true;
    return false;
  };

  // complex embeddings of the roots of unity zeta_L^e
  std::vector<Cplx> roots(L);
  for (long e = 0; e < L; ++e)
    roots[e] = std::polar(1.0, 2 * 3.14159265358979323846 * e / L);
  double sqrtd = std::sqrt(static_cast<double>(d));
  auto embed_xy = [&](long x, long y) {  // x + y*omega
    return Cplx(x + 0.5 * y, 0.5 * y * sqrtd);
  };
  bool h1 = true;
  // unitary value at the prime with generator (x, y) and norm np:
  //   eps(alpha) * alpha^{-a} conj(alpha)^{-b} * np^{(a+b)/2}
  auto unitary_of_gen = [&](long x, long y, double np) -> Cplx {
    Cplx alpha = embed_xy(x, y);
    Cplx v = roots[chi.eps_exponent(KElem(Rat(x), Rat(y)))];
    v *= std::pow(alpha, static_cast<double>(-a_inf)) *
         std::pow(std::conj(alpha), static_cast<double>(-b_inf));
    return v * std::pow(np, halfshift);
  };

  // smallest prime factor sieve
  std::vector<int32_t> spf(N + 1, 0);
  for (long i = 2; i <= N; ++i) {
    if (spf[i] != 0) continue;
    for (long j = i; j <= N; j += i)
      if (spf[j] == 0) spf[j] = static_cast<int32_t>(i);
  }

  struct PrimeData { Cplx xw, xwbar; int type; };  // type: 0 split, 1 inert, 2 ramified
  std::unordered_map<long, PrimeData> pdata;
  pdata.reserve(static_cast<size_t>(N / std::log(std::max(3.0, static_cast<double>(N)))) + 100);
  for (long p = 2; p <= N; ++p) {
    if (spf[p] != p) continue;
    PrimeData dt{0.0, 0.0, 1};
    int kr = (p == 2) ? 1 : kronecker(-d, p);
    if (d % p == 0) kr = 0;
    if (kr == 1) {
      dt.type = 0;
      long r = (p == 2) ? 0 : to_long((Int(1) + sqrt_mod(Int(-d), p)) % p * invmod(2, p) % p);
      long bt1 = ((-r) % p + p) % p;
      long bt2 = ((r - 1) % p + p) % p;  // -(1 - r) mod p
      for (int side = 0; side < 2; ++side) {
        long bt = side == 0 ? bt1 : bt2;
        Cplx val = 0;
        if (!in_conductor(p, bt)) {
          auto [x, y] = prime_generator_xy(p, bt, n0);
          if (x * x + x * y + n0 * y * y != p) { h1 = false; break; }
          val = unitary_of_gen(x, y, p);
        }
        (side == 0 ? dt.xw : dt.xwbar) = val;
      }
    } else if (kr == -1) {
      dt.type = 1;
      // (p) inert: generator p itself
      dt.xw = in_conductor(p, 0) ? 0.0 : unitary_of_gen(p, 0, static_cast<double>(p) * p);
    } else {
      dt.type = 2;
      long r = to_long(Int(p + 1) / 2 % p);
      long bt = ((-r) % p + p) % p;
      if (!in_conductor(p, bt)) {
        auto [x, y] = prime_generator_xy(p, bt, n0);
        if (x * x + x * y + n0 * y * y != p) { h1 = false; }
        else dt.xw = unitary_of_gen(x, y, p);
      }
    }
    if (!h1) throw std::logic_error("central_L_value: non-principal prime (h > 1 unsupported)");
    pdata.emplace(p, dt);
  }

  auto coeff_prime_power = [&](long p, int k) -> Cplx {
    const PrimeData& dt = pdata[p];
    if (dt.type == 0) {
      Cplx sum = 0, xi = 1;
      for (int i = 0; i <= k; ++i) {
        Cplx xj = 1;
        for (int j = 0; j < k - i; ++j) xj *= dt.xwbar;
        sum += xi * xj;
        xi *= dt.xw;
      }
      return sum;
    }
    if (dt.type == 1) {
      if (k % 2 != 0) return 0.0;
      Cplx x = 1;
      for (int i = 0; i < k / 2; ++i) x *= dt.xw;
      return x;
    }
    Cplx x = 1;
    for (int i = 0; i < k; ++i) x *= dt.xw;
    return x;
  };

  std::vector<Cplx> c(N + 1);
  c[1] = 1.0;
  for (long n = 2; n <= N; ++n) {
    long p = spf[n];
    long m = n;
    int k = 0;
    while (m % p == 0) { m /= p; ++k; }
    c[n] = c[m] * coeff_prime_power(p, k);
  }

  double re = 0, im = 0, cre = 0, cim = 0;
  for (long n = 1; n <= N; ++n) {
    if (c[n] == 0.0) continue;
    double w = std::pow(static_cast<double>(n), -s) * std::exp(-(n / X) * (n / X));
    double tr = c[n].real() * w - cre;
    double t1 = re + tr;
    cre = (t1 - re) - tr;
    re = t1;
    double ti = c[n].imag() * w - cim;
    double t2 = im + ti;
    cim = (t2 - im) - ti;
    im = t2;
  }
  Cplx value(re, im);
  if (principal) {
    double kappa = 3.14159265358979323846 / sqrtd;  // times h = 1 (checked above)
    value -= 0.5 * std::tgamma((1 - s) / 2) * std::pow(X, 1 - s) * kappa;
  }
  double condn = to_double(cond.norm());
  double err = 4.0 * std::pow(X, -2.0) * std::pow(std::max(condn, 4.0), 1.5) +
               1e-13 * std::sqrt(static_cast<double>(N));
  return {value, err};
}

}  // namespace thetalift
