#include "vlcshape/shaping_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vlcshape/errors.hpp"

namespace vlcshape::shaping {

namespace {

using boost::multiprecision::cpp_int;

constexpr int kMaxBisection = 200;
constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw DomainError("alpha must lie in (0, 1/2), got " + std::to_string(alpha));
  }
}

void check_cube(int n, double t) {
  if (n < 1) throw DomainError("dimension must be positive");
  if (!(t >= 0.0 && t <= n)) {
    throw DomainError("truncation parameter must lie in [0, n], got " + std::to_string(t));
  }
}

// x = m * 2^e exactly, with m a 53-bit integer (e <= 0 for the x we see).
struct Dyadic {
  cpp_int m;
  int e;
};

Dyadic to_dyadic(double x) {
  int exponent = 0;
  const double frac = std::frexp(x, &exponent);
  return {cpp_int(static_cast<long long>(std::ldexp(frac, 53))), exponent - 53};
}

// sum_{k <= t} C(n,k) (-1)^k (m - k 2^s)^p with t = m / 2^s, in integers. The
// alternating sum cancels catastrophically in floating point once n exceeds ~20.
cpp_int alternating_sum_scaled(int n, const cpp_int& m, int s, int p) {
  const cpp_int one_unit = cpp_int(1) << s;
  cpp_int sum = 0;
  cpp_int binom = 1;
  cpp_int base = m;
  for (int k = 0; k <= n && base >= 0; ++k) {
    const cpp_int term = binom * boost::multiprecision::pow(base, static_cast<unsigned>(p));
    if (k % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
    binom = binom * (n - k) / (k + 1);
    base -= one_unit;
  }
  return sum;
}

// num / den correctly to long-double precision, for huge operands.
long double quotient(cpp_int num, cpp_int den) {
  if (num == 0) return 0.0L;
  const bool negative = (num < 0) != (den < 0);
  num = abs(num);
  den = abs(den);
  const int shift = static_cast<int>(msb(den)) - static_cast<int>(msb(num)) + 80;
  if (shift > 0) {
    num <<= shift;
  } else {
    den <<= -shift;
  }
  const long double q = std::ldexp(static_cast<long double>(num / den), -shift);
  return negative ? -q : q;
}

Rational rational_pow(const Rational& base, int p) {
  Rational r = 1;
  for (int i = 0; i < p; ++i) r *= base;
  return r;
}

Rational alternating_sum_exact(int n, const Rational& t, int p) {
  Rational sum = 0;
  cpp_int binom = 1;
  for (int k = 0; k <= n && t >= k; ++k) {
    Rational term = Rational(binom) * rational_pow(t - k, p);
    if (k % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
    binom = binom * (n - k) / (k + 1);
  }
  return sum;
}

cpp_int factorial(int n) {
  cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// 1/mu - 1/(e^mu - 1), decreasing from 1/2 at mu = 0 to 0.
double mean_of_truncated_exponential(double mu) {
  if (mu < 1e-4) {
    const double mu2 = mu * mu;
    return 0.5 - mu / 12.0 + mu * mu2 / 720.0;
  }
  return 1.0 / mu - 1.0 / std::expm1(mu);
}

}  // namespace

TruncatedCube::TruncatedCube(int n_, double t_) : n(n_), t(t_) { check_cube(n, t); }

double TruncatedCube::volume() const { return shaping::volume(n, t); }

double TruncatedCube::avg_first_moment() const { return shaping::avg_first_moment(n, t); }

Rational volume_exact(int n, const Rational& t) {
  if (n < 1 || t < 0 || t > n) throw DomainError("truncated cube parameters out of range");
  return alternating_sum_exact(n, t, n) / Rational(factorial(n));
}

double volume(int n, double t) {
  check_cube(n, t);
  if (t == 0.0) return 0.0;
  const Dyadic d = to_dyadic(t);
  const int s = d.e < 0 ? -d.e : 0;
  const cpp_int m = d.e < 0 ? d.m : d.m << d.e;
  const cpp_int den = factorial(n) << (s * n);
  const long double v = quotient(alternating_sum_scaled(n, m, s, n), den);
  return static_cast<double>(std::clamp(v, 0.0L, 1.0L));
}

double avg_first_moment(int n, double t) {
  check_cube(n, t);
  if (t <= 0.0) throw DomainError("average first moment undefined for zero-volume region");
  const Dyadic d = to_dyadic(t);
  const int s = d.e < 0 ? -d.e : 0;
  const cpp_int m = d.e < 0 ? d.m : d.m << d.e;
  // S_{n+1} / ((n+1) S_n) in units of 2^-s.
  const long double ratio =
      quotient(alternating_sum_scaled(n, m, s, n + 1),
               alternating_sum_scaled(n, m, s, n) * (n + 1) << s);
  return static_cast<double>((static_cast<long double>(t) - ratio) / n);
}

double solve_mu_star(double alpha) {
  check_alpha(alpha);
  // mu* ~ 1/alpha for small alpha, so the bracket grows with 1/alpha.
  double lo = 0.0;
  double hi = std::max(700.0, 4.0 / alpha);
  for (int i = 0; i < kMaxBisection && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mean_of_truncated_exponential(mid) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double t_star_approx(int n, double alpha) { return n * alpha + 1.0 / solve_mu_star(alpha); }

double h_max(double alpha) {
  const double mu = solve_mu_star(alpha);
  // -E[ln p*] with p*(x) = mu e^{-mu x} / (1 - e^{-mu}).
  const double log_norm = mu < 1e-8 ? std::log1p(-0.5 * mu) : std::log(-std::expm1(-mu) / mu);
  return log_norm + mu * alpha;
}

double omega(double alpha) {
  const double mu = solve_mu_star(alpha);
  // Equals D(1 - alpha)^2 = mu^2 Var of the tilted uniform, positive in exact arithmetic.
  const double inner = -mu + 2.0 * alpha * mu + mu * mu * alpha * (1.0 - alpha);
  if (!(inner > 0.0)) {
    throw DomainError("second-order constant undefined: non-positive log argument at alpha = " +
                      std::to_string(alpha));
  }
  return 1.0 - 0.5 * std::log(2.0 * std::numbers::pi * inner);
}

double asymptotic_sg_db(double alpha) {
  return kDbPerNeper * (h_max(alpha) - std::log(2.0 * alpha));
}

double second_order_sg_db(int n, double alpha) {
  if (n < 1) throw DomainError("dimension must be positive");
  const double nn = n;
  return kDbPerNeper *
         (h_max(alpha) - std::log(2.0 * alpha) - std::log(nn) / (2.0 * nn) + omega(alpha) / nn);
}

double quadrature_offset_db() { return 10.0 * std::log10(std::numbers::pi / 3.0); }

double quadrature_sg_db(int n_half, double power_ratio) {
  return quadrature_offset_db() + second_order_sg_db(2 * n_half, power_ratio);
}

ShapingSolution solve_t_star(int n, double alpha) {
  check_alpha(alpha);
  if (n < 1) throw DomainError("dimension must be positive");
  ShapingSolution sol;
  sol.n = n;
  sol.alpha = alpha;
  if (alpha <= 1.0 / (n + 1)) {
    sol.t_star = (n + 1) * alpha;
  } else {
    double lo = n * alpha;
    double hi = n;
    for (int i = 0; i < kMaxBisection && hi - lo > 1e-13 * n; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (avg_first_moment(n, mid) < alpha) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    sol.t_star = 0.5 * (lo + hi);
  }
  sol.tau_star = sol.t_star / n;
  sol.sg_db = kDbPerNeper * (std::log(volume(n, sol.t_star)) / n - std::log(2.0 * alpha));
  sol.mu_star = solve_mu_star(alpha);
  sol.t_star_approx = n * alpha + 1.0 / sol.mu_star;
  sol.sg_db_approx = second_order_sg_db(n, alpha);
  return sol;
}

double irwin_hall_tail(int n, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("tail argument must lie in [0, 1]");
  return volume(n, n * (1.0 - x));
}

namespace kernel {

double log_mgf(double s) {
  if (s > 30.0) return s + std::log1p(-std::exp(-s)) - std::log(s);
  if (s < 1e-8) return 0.5 * s;
  return std::log(std::expm1(s) / s);
}

double tilted_mean(double s) {
  if (s < 1e-4) return 0.5 + s / 12.0 - s * s * s / 720.0;
  return -1.0 / std::expm1(-s) - 1.0 / s;
}

double saddle_point(double x) {
  if (!(x > 0.5 && x < 1.0)) throw DomainError("saddle point defined for x in (1/2, 1)");
  double lo = 0.0;
  double hi = std::max(700.0, 4.0 / (1.0 - x));
  for (int i = 0; i < kMaxBisection && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tilted_mean(mid) < x) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double rate(double x) {
  const double s = saddle_point(x);
  return log_mgf(s) - x * s;
}

double dispersion(double x) {
  const double s = saddle_point(x);
  double d2 = 0.0;
  if (s < 1e-3) {
    const double s2 = s * s;
    d2 = s2 / 12.0 - s2 * s2 / 240.0;
  } else {
    // e^s / (e^s - 1)^2 = 1 / (4 sinh^2(s/2))
    const double r = s / (2.0 * std::sinh(0.5 * s));
    d2 = 1.0 - r * r;
  }
  return std::sqrt(d2);
}

}  // namespace kernel

double ld_tail_approx(int n, double x) {
  if (n < 1) throw DomainError("dimension must be positive");
  if (!(x > 0.5 && x < 1.0)) throw DomainError("large-deviation tail defined for x in (1/2, 1)");
  const double nn = n;
  return std::exp(nn * kernel::rate(x)) /
         (std::sqrt(2.0 * std::numbers::pi * nn) * kernel::dispersion(x));
}

}  // namespace vlcshape::shaping
