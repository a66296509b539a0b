#pragma once

// Optimal shaping regions for a peak- and average-intensity constrained
// channel: truncated unit cubes, their volume and mean l1-norm, the exact
// optimal truncation parameter, and the large-deviation quantities that give
// its first- and second-order asymptotics in the blocklength n.
//
// All gains are in dB as 10*log10 of the amplitude ratio vol^(1/n) / (2 alpha).

#include <boost/multiprecision/cpp_int.hpp>

namespace vlcshape::shaping {

using Rational = boost::multiprecision::cpp_rational;

/// Unit n-cube intersected with the half-space {sum x_i <= t}.
struct TruncatedCube {
  int n;
  double t;

  /// Throws DomainError unless n >= 1 and 0 <= t <= n.
  TruncatedCube(int n, double t);

  double volume() const;
  double avg_first_moment() const;
};

/// Result of the optimal-shaping problem for one (n, alpha).
struct ShapingSolution {
  int n = 0;
  double alpha = 0.0;
  double t_star = 0.0;
  double tau_star = 0.0;  // t_star / n
  double sg_db = 0.0;     // exact maximum shaping gain
  double mu_star = 0.0;
  double t_star_approx = 0.0;  // n * alpha + 1 / mu_star
  double sg_db_approx = 0.0;   // second-order expansion
};

/// Volume of the truncated cube, i.e. the Irwin-Hall CDF at t.
double volume(int n, double t);

/// Exact volume for rational t (any n).
Rational volume_exact(int n, const Rational& t);

/// Mean l1-norm per coordinate of the uniform distribution on the truncated cube.
double avg_first_moment(int n, double t);

/// Exact optimal truncation parameter. Fills t_star, tau_star, sg_db and also
/// the asymptotic fields (mu_star, t_star_approx, sg_db_approx).
ShapingSolution solve_t_star(int n, double alpha);

/// Unique positive root of alpha = 1/mu - 1/(e^mu - 1).
double solve_mu_star(double alpha);

/// n * alpha + 1 / mu_star(alpha).
double t_star_approx(int n, double alpha);

/// Differential entropy (nats) of the truncated exponential density on [0, 1]
/// with mean alpha.
double h_max(double alpha);

/// h_max(alpha) - ln(2 alpha) - ln(n)/(2n) + omega_alpha / n, in dB.
double second_order_sg_db(int n, double alpha);

/// n -> infinity limit of the maximum shaping gain, in dB.
double asymptotic_sg_db(double alpha);

/// Constant -1/2 ln(2 pi D^2) + 1 term of the second-order expansion.
double omega(double alpha);

/// Second-order shaping gain of the peak- and average-power limited quadrature
/// Gaussian channel with complex blocklength n_half.
double quadrature_sg_db(int n_half, double power_ratio);

/// 10*log10(pi/3): the offset between the quadrature and intensity gains.
double quadrature_offset_db();

/// P{mean of n i.i.d. U[0,1] >= x}, computed as volume(n, n (1 - x)).
double irwin_hall_tail(int n, double x);

/// Saddle-point approximation exp(n L(x)) / (sqrt(2 pi n) D(x)), x in (1/2, 1).
double ld_tail_approx(int n, double x);

/// Cumulant-generating quantities for the uniform distribution on [0, 1].
namespace kernel {
/// M(s) = (e^s - 1) / s, returned as ln M(s).
double log_mgf(double s);
/// K(s) = M'(s) / M(s) = e^s / (e^s - 1) - 1/s.
double tilted_mean(double s);
/// s_x: the root of K(s) = x for x in (1/2, 1).
double saddle_point(double x);
/// L(x) = ln M(s_x) - x s_x.
double rate(double x);
/// D(x) = sqrt(1 - s_x^2 e^{s_x} / (e^{s_x} - 1)^2).
double dispersion(double x);
}  // namespace kernel

}  // namespace vlcshape::shaping
