#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vlcshape/errors.hpp"
#include "vlcshape/shaping_geometry.hpp"

namespace sg = vlcshape::shaping;
using vlcshape::DomainError;
using Rational = sg::Rational;

namespace {

// Independent root of alpha = 1/mu - 1/(e^mu - 1) straight from the defining
// expression, in long double.
double mu_oracle(double alpha) {
  long double lo = 1e-6L;
  long double hi = 1e4L;
  for (int i = 0; i < 400; ++i) {
    const long double mid = 0.5L * (lo + hi);
    const long double f = 1.0L / mid - 1.0L / (std::exp(mid) - 1.0L);
    if (f > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

// Composite Simpson on [0, 1] of -p ln p for the truncated exponential.
double entropy_by_quadrature(double mu) {
  const int steps = 200000;
  const double norm = mu / (1.0 - std::exp(-mu));
  auto f = [&](double x) {
    const double p = norm * std::exp(-mu * x);
    return -p * std::log(p);
  };
  const double h = 1.0 / steps;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < steps; ++i) acc += (i % 2 == 0 ? 2.0 : 4.0) * f(i * h);
  return acc * h / 3.0;
}

// Piecewise-polynomial Irwin-Hall density built by repeated convolution with
// U[0,1] in exact rationals; returns the CDF at rational t. Piece j covers
// [j, j+1] and stores coefficients in the local variable u = x - j.
Rational irwin_hall_cdf_by_convolution(int n, const Rational& t) {
  using Poly = std::vector<Rational>;
  auto eval = [](const Poly& p, const Rational& u) {
    Rational acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * u + *it;
    return acc;
  };
  auto integral = [](const Poly& p) {  // antiderivative vanishing at u = 0
    Poly q(p.size() + 1, Rational(0));
    for (std::size_t i = 0; i < p.size(); ++i) q[i + 1] = p[i] / Rational(static_cast<int>(i + 1));
    return q;
  };
  std::vector<Poly> density{Poly{Rational(1)}};
  for (int m = 2; m <= n; ++m) {
    // f_m(x) = int_{x-1}^{x} f_{m-1}; on piece j (x = j + u):
    //   int_u^1 of piece j-1 (in its local variable) + int_0^u of piece j.
    std::vector<Poly> next(m);
    for (int j = 0; j < m; ++j) {
      Poly acc(m, Rational(0));
      if (j - 1 >= 0) {
        const Poly a = integral(density[j - 1]);
        const Rational full = eval(a, Rational(1));
        acc[0] += full;
        for (std::size_t i = 0; i < a.size(); ++i) acc[i] -= a[i];
      }
      if (j < m - 1) {
        const Poly b = integral(density[j]);
        for (std::size_t i = 0; i < b.size(); ++i) acc[i] += b[i];
      }
      next[j] = acc;
    }
    density = std::move(next);
  }
  Rational cdf = 0;
  for (int j = 0; j < n; ++j) {
    if (t <= j) break;
    const Poly a = integral(density[j]);
    const Rational upper = t >= j + 1 ? Rational(1) : t - j;
    cdf += eval(a, upper);
  }
  return cdf;
}

}  // namespace

TEST(Volume, TrivialCases) {
  EXPECT_NEAR(sg::volume(1, 0.7), 0.7, 1e-15);
  EXPECT_NEAR(sg::volume(3, 3.0), 1.0, 1e-15);
  EXPECT_NEAR(sg::volume(2, 1.0), 0.5, 1e-15);
  EXPECT_EQ(sg::volume(4, 0.0), 0.0);
}

TEST(Volume, MatchesHitOrMissEstimate) {
  std::mt19937_64 rng(20240511);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int samples = 10'000'000;
  long hits = 0;
  for (int i = 0; i < samples; ++i) {
    double s = 0.0;
    for (int d = 0; d < 5; ++d) s += u(rng);
    hits += s <= 2.3;
  }
  const double p = static_cast<double>(hits) / samples;
  const double sigma = std::sqrt(p * (1.0 - p) / samples);
  EXPECT_NEAR(sg::volume(5, 2.3), p, 3.0 * sigma);
  EXPECT_NEAR(sg::volume(5, 2.3), 0.381859, 1e-12);
}

TEST(Volume, PropertiesOverGrid) {
  for (int n = 1; n <= 32; ++n) {
    EXPECT_NEAR(sg::volume(n, n), 1.0, 1e-12) << n;
    double prev = 0.0;
    for (int i = 0; i <= 64; ++i) {
      const double t = n * i / 64.0;
      const double v = sg::volume(n, t);
      EXPECT_GE(v, prev - 1e-15);
      EXPECT_NEAR(v, 1.0 - sg::volume(n, n - t), 1e-12) << "n=" << n << " t=" << t;
      prev = v;
    }
  }
}

TEST(Volume, FloatPathAgreesWithExactRational) {
  for (int n : {8, 24, 32, 40}) {
    for (double frac : {0.1, 0.25, 0.43, 0.5, 0.77}) {
      const double t = std::ldexp(std::round(std::ldexp(n * frac, 20)), -20);
      const double exact = sg::volume_exact(n, Rational(static_cast<long long>(std::ldexp(t, 20)),
                                                        1LL << 20))
                               .convert_to<double>();
      EXPECT_NEAR(sg::volume(n, t), exact, 1e-13 * std::max(exact, 1e-300) + 1e-300)
          << n << " " << t;
    }
  }
  EXPECT_NEAR(sg::volume(40, 17.3), 0.0697939297180284862902, 1e-15);
  EXPECT_NEAR(sg::volume(50, 21.7), 0.0530439477023996497800, 1e-15);
}

TEST(Volume, RejectsOutOfRange) {
  EXPECT_THROW(sg::volume(3, -0.1), DomainError);
  EXPECT_THROW(sg::volume(3, 3.1), DomainError);
  EXPECT_THROW(sg::volume(0, 0.0), DomainError);
  EXPECT_THROW(sg::TruncatedCube(2, 2.5), DomainError);
  EXPECT_NEAR(sg::TruncatedCube(2, 1.0).volume(), 0.5, 1e-15);
}

TEST(AvgFirstMoment, TrivialCases) {
  EXPECT_NEAR(sg::avg_first_moment(2, 2.0), 0.5, 1e-14);
  EXPECT_NEAR(sg::avg_first_moment(1, 0.6), 0.3, 1e-14);
  EXPECT_NEAR(sg::avg_first_moment(32, 13.0), 0.386592905488244627828, 1e-13);
  EXPECT_THROW(sg::avg_first_moment(3, 0.0), DomainError);
}

TEST(AvgFirstMoment, MatchesRejectionSampling) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int wanted = 1'000'000;
  double sum = 0.0;
  double sum_sq = 0.0;
  int accepted = 0;
  std::vector<double> x(6);
  while (accepted < wanted) {
    double s = 0.0;
    for (auto& xi : x) s += xi = u(rng);
    if (s > 2.0) continue;
    const double mean = s / 6.0;
    sum += mean;
    sum_sq += mean * mean;
    ++accepted;
  }
  const double m = sum / accepted;
  const double sd = std::sqrt((sum_sq / accepted - m * m) / accepted);
  EXPECT_NEAR(sg::avg_first_moment(6, 2.0), m, 3.0 * sd);
}

TEST(AvgFirstMoment, StrictlyIncreasingAndHalfAtFullCube) {
  for (int n = 1; n <= 32; ++n) {
    EXPECT_NEAR(sg::avg_first_moment(n, n), 0.5, 1e-12);
    double prev = 0.0;
    for (int i = 1; i <= 64; ++i) {
      const double p = sg::avg_first_moment(n, n * i / 64.0);
      // Near the full cube the increments fall below double resolution.
      if (i <= 48) {
        EXPECT_GT(p, prev) << n << " " << i;
      } else {
        EXPECT_GE(p, prev) << n << " " << i;
      }
      prev = p;
    }
  }
}

TEST(SolveTStar, ClosedFormAndBisectionBranches) {
  EXPECT_DOUBLE_EQ(sg::solve_t_star(3, 0.2).t_star, 0.8);
  const auto one = sg::solve_t_star(1, 0.3);
  EXPECT_NEAR(one.t_star, 0.6, 1e-12);
  EXPECT_NEAR(one.sg_db, 0.0, 1e-12);
  const auto s24 = sg::solve_t_star(24, 0.3);
  EXPECT_NEAR(sg::avg_first_moment(24, s24.t_star), 0.3, 1e-10);
  EXPECT_NEAR(s24.t_star, 7.554849257613684, 1e-9);
  EXPECT_NEAR(s24.sg_db, 0.905504487704352, 1e-9);
  EXPECT_DOUBLE_EQ(s24.tau_star, s24.t_star / 24);
  EXPECT_THROW(sg::solve_t_star(4, 0.5), DomainError);
  EXPECT_THROW(sg::solve_t_star(4, 0.0), DomainError);
}

TEST(SolveTStar, RoundTripAndMonotoneGain) {
  for (double alpha : {0.05, 0.1, 0.2, 0.3, 0.4, 0.45}) {
    double prev = -1.0;
    for (int n = 1; n <= 32; ++n) {
      const auto s = sg::solve_t_star(n, alpha);
      EXPECT_GE(s.t_star, n * alpha);
      EXPECT_GE(s.sg_db, 0.0);
      if (alpha >= 1.0 / (n + 1)) {
        EXPECT_NEAR(sg::avg_first_moment(n, s.t_star), alpha, 1e-9);
      }
      EXPECT_GE(s.sg_db, prev - 1e-12) << "alpha=" << alpha << " n=" << n;
      prev = s.sg_db;
    }
  }
}

TEST(SolveMuStar, MatchesOracleAndFrozenValues) {
  for (double alpha : {0.001, 0.01, 0.1, 0.2, 0.3, 0.4, 0.49}) {
    const double mu = sg::solve_mu_star(alpha);
    EXPECT_NEAR(mu, mu_oracle(alpha), 1e-9 * mu) << alpha;
    EXPECT_LT(std::fabs(alpha - (1.0 / mu - 1.0 / std::expm1(mu))), 1e-12) << alpha;
  }
  EXPECT_NEAR(sg::solve_mu_star(0.2), 4.801007549722518, 1e-11);
  EXPECT_NEAR(sg::solve_mu_star(0.3), 2.672103855273386, 1e-11);
  EXPECT_LT(sg::solve_mu_star(0.499), 0.05);
  EXPECT_NEAR(sg::solve_mu_star(0.499), 0.0120000288001086, 1e-12);
  EXPECT_THROW(sg::solve_mu_star(0.5), DomainError);
}

TEST(SolveMuStar, StrictlyDecreasingAndInvertible) {
  double prev = INFINITY;
  for (int i = 1; i < 500; ++i) {
    const double alpha = i / 1000.0;
    const double mu = sg::solve_mu_star(alpha);
    EXPECT_LT(mu, prev);
    prev = mu;
    const double back = 1.0 / mu - 1.0 / std::expm1(mu);
    EXPECT_NEAR(back, alpha, 1e-10);
  }
  for (double mu : {0.01, 0.5, 3.0, 40.0}) {
    const double alpha = 1.0 / mu - 1.0 / std::expm1(mu);
    EXPECT_NEAR(sg::solve_mu_star(alpha), mu, 1e-10 * std::max(1.0, mu));
  }
}

TEST(TStarApprox, ComposesAndConverges) {
  EXPECT_DOUBLE_EQ(sg::t_star_approx(8, 0.2), 1.6 + 1.0 / sg::solve_mu_star(0.2));
  for (double alpha : {0.2, 0.3}) {
    double prev = INFINITY;
    for (int n = 4; n <= 32; n *= 2) {
      const double err = std::fabs(sg::solve_t_star(n, alpha).t_star - sg::t_star_approx(n, alpha));
      EXPECT_LT(err, prev) << n;
      prev = err;
    }
  }
}

TEST(HMax, ClosedFormAgreesWithQuadrature) {
  EXPECT_NEAR(sg::h_max(0.2), entropy_by_quadrature(sg::solve_mu_star(0.2)), 1e-9);
  EXPECT_NEAR(sg::h_max(0.2), -0.616879734062483816, 1e-12);
  EXPECT_NEAR(sg::h_max(0.3), entropy_by_quadrature(sg::solve_mu_star(0.3)), 1e-9);
  EXPECT_NEAR(sg::h_max(0.01), 1.0 + std::log(0.01), 0.02);
  EXPECT_NEAR(sg::h_max(0.01), entropy_by_quadrature(sg::solve_mu_star(0.01)), 1e-6);
  EXPECT_NEAR(sg::h_max(0.4999999), 0.0, 1e-9);
}

TEST(SecondOrder, AgreesWithExactAndLimit) {
  EXPECT_NEAR(sg::second_order_sg_db(16, 0.2), sg::solve_t_star(16, 0.2).sg_db, 0.1);
  EXPECT_NEAR(sg::second_order_sg_db(16, 0.2), 0.975085099679744793, 1e-10);
  EXPECT_NEAR(sg::second_order_sg_db(24, 0.3), 0.923754894066954648, 1e-10);
  EXPECT_NEAR(sg::second_order_sg_db(1 << 30, 0.3), sg::asymptotic_sg_db(0.3), 1e-6);
  EXPECT_NEAR(sg::asymptotic_sg_db(0.3), 1.120393168299174012, 1e-10);
}

TEST(SecondOrder, InnerLogArgumentIsDispersionSquared) {
  for (double alpha : {0.01, 0.1, 0.25, 0.4, 0.49}) {
    const double mu = sg::solve_mu_star(alpha);
    const double inner = -mu + 2.0 * alpha * mu + mu * mu * alpha * (1.0 - alpha);
    const double d = sg::kernel::dispersion(1.0 - alpha);
    EXPECT_NEAR(inner, d * d, 1e-9 * std::max(1.0, inner)) << alpha;
    EXPECT_GT(inner, 0.0);
    EXPECT_NO_THROW(sg::omega(alpha));
  }
}

TEST(Quadrature, OffsetAndComposition) {
  EXPECT_NEAR(sg::quadrature_offset_db(), 0.200, 0.001);
  EXPECT_DOUBLE_EQ(sg::quadrature_sg_db(12, 0.3),
                   10.0 * std::log10(std::numbers::pi / 3.0) + sg::second_order_sg_db(24, 0.3));
  EXPECT_NEAR(sg::quadrature_offset_db() + sg::asymptotic_sg_db(1e-3), 1.53, 0.01);
}

TEST(IrwinHall, TrivialTails) {
  EXPECT_NEAR(sg::irwin_hall_tail(1, 0.25), 0.75, 1e-15);
  EXPECT_NEAR(sg::irwin_hall_tail(2, 0.75), 0.125, 1e-15);
  EXPECT_NEAR(sg::irwin_hall_tail(64, 0.75), 2.72401949923949198e-13, 1e-25);
}

TEST(IrwinHall, MatchesMonteCarlo) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int samples = 10'000'000;
  long hits = 0;
  for (int i = 0; i < samples; ++i) {
    double s = 0.0;
    for (int d = 0; d < 10; ++d) s += u(rng);
    hits += s >= 7.0;
  }
  const double p = static_cast<double>(hits) / samples;
  EXPECT_NEAR(sg::irwin_hall_tail(10, 0.7), p, 3.0 * std::sqrt(p * (1 - p) / samples));
}

TEST(IrwinHall, MatchesRationalConvolutionOracle) {
  for (int n = 1; n <= 10; ++n) {
    for (int num : {1, 3, 5, 7, 9, 11, 13, 15}) {
      const Rational tau(num, 16);
      const Rational t = tau * n;
      const Rational oracle = irwin_hall_cdf_by_convolution(n, t);
      // Truncated-cube volume and the Irwin-Hall CDF coincide exactly.
      EXPECT_EQ(sg::volume_exact(n, t), oracle) << n << " " << num;
      const double tail = sg::irwin_hall_tail(n, 1.0 - num / 16.0);
      EXPECT_NEAR(tail, oracle.convert_to<double>(), 1e-14) << n << " " << num;
    }
  }
}

TEST(LargeDeviation, SaddlePointMatchesMuStar) {
  for (double alpha : {0.1, 0.2, 0.3, 0.45}) {
    EXPECT_NEAR(sg::kernel::saddle_point(1.0 - alpha), sg::solve_mu_star(alpha),
                1e-10 * sg::solve_mu_star(alpha));
  }
  EXPECT_NEAR(sg::kernel::rate(0.8), sg::h_max(0.2), 1e-12);
}

TEST(LargeDeviation, RatioNearOneAndImproving) {
  const double r32 = sg::ld_tail_approx(32, 0.7) / sg::irwin_hall_tail(32, 0.7);
  EXPECT_GE(r32, 0.8);
  EXPECT_LE(r32, 1.2);
  EXPECT_NEAR(r32, 1.051, 1e-3);
  const double r8 = sg::ld_tail_approx(8, 0.75) / sg::irwin_hall_tail(8, 0.75);
  const double r64 = sg::ld_tail_approx(64, 0.75) / sg::irwin_hall_tail(64, 0.75);
  EXPECT_LT(std::fabs(r64 - 1.0), std::fabs(r8 - 1.0));
  EXPECT_THROW(sg::ld_tail_approx(8, 0.5), DomainError);
  EXPECT_THROW(sg::ld_tail_approx(8, 1.0), DomainError);
}

TEST(LargeDeviation, DispersionBoundedAndNondecreasing) {
  double prev = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double x = 0.5 + 0.5 * i / 1000.0;
    const double d = sg::kernel::dispersion(x);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_GE(d, prev - 1e-12) << x;
    prev = d;
  }
}
