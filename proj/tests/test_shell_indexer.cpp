#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "vlcshape/errors.hpp"
#include "vlcshape/shaping_geometry.hpp"
#include "vlcshape/shell_indexer.hpp"

using namespace vlcshape::shell;
using vlcshape::lattice::LatticePoint;

namespace {

std::int64_t l1(const LatticePoint& p) { return std::accumulate(p.begin(), p.end(), std::int64_t{0}); }

// Every even-sum point of {0..H}^n with sum <= max_sum, sorted by (l1, lex).
std::vector<LatticePoint> enumerate_td(int n, int H, int max_sum) {
  std::vector<LatticePoint> pts;
  LatticePoint x(n, 0);
  while (true) {
    const auto s = l1(x);
    if (s % 2 == 0 && s <= max_sum) pts.push_back(x);
    int i = n - 1;
    while (i >= 0 && x[i] == H) x[i--] = 0;
    if (i < 0) break;
    ++x[i];
  }
  std::stable_sort(pts.begin(), pts.end(), [](const LatticePoint& a, const LatticePoint& b) {
    const auto la = l1(a);
    const auto lb = l1(b);
    return la != lb ? la < lb : a < b;
  });
  return pts;
}

BigInt pow2(int k) { return BigInt(1) << k; }

}  // namespace

TEST(CountTd, SmallExamplesByEnumeration) {
  EXPECT_EQ(count_td(2, 1, 1), BigInt(enumerate_td(2, 1, 2).size()));
  EXPECT_EQ(count_td(2, 1, 1), 2);
  EXPECT_EQ(count_td(4, 3, 6), 128);
  EXPECT_EQ(count_td(1, 5, 2), 3);
  EXPECT_EQ(count_td(3, 0, 5), 1);
  EXPECT_THROW(count_td(0, 1, 1), vlcshape::DomainError);
}

TEST(CountTd, RandomParamsMatchEnumerationAtN8) {
  std::mt19937_64 rng(30);
  for (int t = 0; t < 12; ++t) {
    const int H = 1 + static_cast<int>(rng() % 4);
    const int L = static_cast<int>(rng() % (4 * H + 1));
    EXPECT_EQ(count_td(8, H, L), BigInt(enumerate_td(8, H, 2 * L).size())) << H << " " << L;
  }
}

TEST(CountTable, RecurrenceAndInvariants) {
  const CountTable t(5, 3, 15);
  EXPECT_EQ(t.at(0, 0), 1);
  for (int m = 1; m <= 5; ++m) {
    for (int s = 0; s <= 15; ++s) {
      BigInt want = 0;
      for (int v = 0; v <= std::min(3, s); ++v) want += t.at(m - 1, s - v);
      EXPECT_EQ(t.at(m, s), want);
    }
  }
  EXPECT_THROW(t.at(6, 0), vlcshape::ContractViolation);
}

TEST(CountTable, CacheRoundTrip) {
  const CountTable t(24, 40, 500);
  std::stringstream buf;
  t.save(buf);
  EXPECT_EQ(CountTable::load(buf), t);
  std::stringstream junk("nope");
  EXPECT_THROW(CountTable::load(junk), vlcshape::ConfigError);

  const auto dir = std::filesystem::temp_directory_path() / "vlcshape_cache_test";
  std::filesystem::remove_all(dir);
  const auto first = CountTable::load_or_build(6, 3, 10, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "td_6_3_10.bin"));
  EXPECT_EQ(CountTable::load_or_build(6, 3, 10, dir), first);
  std::filesystem::remove_all(dir);
}

TEST(DetermineParams, LeechRateTwo) {
  const auto p = determine_params(24, 2, 12, 1, 0.2);
  EXPECT_EQ(p.M_s, pow2(35));
  EXPECT_GE(count_td(24, p.H, p.L), p.M_s);
  // H* - 1 is either too small for M_s or its least-l1 region overshoots t*.
  const int h = p.H - 1;
  const BigInt full = count_td(24, h, 12 * h);
  if (full >= p.M_s) {
    int l_min = 0;
    while (count_td(24, h, l_min) < p.M_s) ++l_min;
    const double t_star = vlcshape::shaping::solve_t_star(24, 0.2).t_star;
    EXPECT_GT(2.0 * l_min, h * t_star + 2.0);
  }
}

TEST(DetermineParams, ApproachesFullBoxNearHalf) {
  // t* reaches n only in the limit; the grid keeps tracking tau* on the way.
  for (double alpha : {0.3, 0.4, 0.45, 0.49, 0.499, 0.4999999}) {
    const auto p = determine_params(24, 2, 12, 1, alpha);
    const double tau = vlcshape::shaping::solve_t_star(24, alpha).tau_star;
    EXPECT_GE(count_td(24, p.H, p.L), p.M_s);
    EXPECT_LE(p.L, 12 * p.H);
    EXPECT_GE(2.0 * p.L / (24.0 * p.H), tau - 1.0 / p.H) << alpha;
  }
  // Once t* exceeds n - 2/H the proportional bound is the whole box.
  const CountTable t(24, 2, 48);
  BigInt box = 0;
  for (int s = 0; s <= 48; s += 2) box += t.at(24, s);
  EXPECT_EQ(count_td(24, 2, 24), box);
}

TEST(DetermineParams, LargeRateIsExact) {
  const auto p = determine_params(24, 5, 12, 1, 0.2);
  EXPECT_EQ(p.M_s, pow2(107));
  EXPECT_GE(count_td(24, p.H, p.L), p.M_s);
  EXPECT_GT(p.M_s, BigInt(~std::uint64_t{0}));
}

TEST(DetermineParams, SmallDimensionAgainstEnumeration) {
  const auto p = determine_params(8, 2, 0, 0, 0.25);
  EXPECT_EQ(p.M_s, pow2(16));
  EXPECT_GE(BigInt(enumerate_td(8, p.H, 2 * p.L).size()), p.M_s);
  EXPECT_THROW(determine_params(24, 1, 12, 12, 0.2), vlcshape::ConfigError);
}

TEST(ShellIndexer, FullOrderingMatchesSortedEnumeration) {
  const auto pts = enumerate_td(6, 3, 8);
  const ShellIndexer idx({6, 3, 4, BigInt(pts.size())});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ASSERT_EQ(idx.index_to_point(BigInt(i)), pts[i]) << i;
    ASSERT_EQ(idx.point_to_index(pts[i]), BigInt(i));
  }
  EXPECT_EQ(idx.index_to_point(BigInt(0)), LatticePoint(6, 0));
}

TEST(ShellIndexer, BijectionAndLeastL1AtN8) {
  const int n = 8;
  const int H = 3;
  const int L = 8;
  const auto all = enumerate_td(n, H, 2 * L);
  const BigInt m_s = 4096;
  ASSERT_GE(BigInt(all.size()), m_s);
  const ShellIndexer idx({n, H, L, m_s});
  std::set<LatticePoint> seen;
  std::int64_t max_selected = 0;
  for (int i = 0; i < 4096; ++i) {
    const auto p = idx.index_to_point(BigInt(i));
    ASSERT_EQ(p, all[i]);
    ASSERT_EQ(idx.point_to_index(p), i);
    seen.insert(p);
    max_selected = std::max(max_selected, l1(p));
  }
  EXPECT_EQ(seen.size(), 4096U);
  EXPECT_EQ(max_selected, idx.last_shell());
  for (std::size_t i = 4096; i < all.size(); ++i) {
    EXPECT_GE(l1(all[i]), max_selected);
    EXPECT_FALSE(idx.try_point_to_index(all[i]).has_value());
  }
  EXPECT_THROW(idx.index_to_point(m_s), vlcshape::ContractViolation);
  EXPECT_THROW(idx.point_to_index(all[5000]), vlcshape::DemapError);
}

TEST(ShellIndexer, RejectsInvalidPoints) {
  const ShellIndexer idx({4, 3, 6, 100});
  EXPECT_THROW(idx.point_to_index(LatticePoint{1, 0, 0, 0}), vlcshape::DemapError);
  EXPECT_THROW(idx.point_to_index(LatticePoint{4, 0, 0, 0}), vlcshape::DemapError);
  EXPECT_THROW(idx.point_to_index(LatticePoint{-2, 0, 2, 0}), vlcshape::DemapError);
  EXPECT_THROW(idx.point_to_index(LatticePoint{0, 0}), vlcshape::ContractViolation);
  EXPECT_THROW(ShellIndexer({4, 3, 6, 129}), vlcshape::ConfigError);
}

TEST(ShellIndexer, RandomRoundTripAtLeechRate) {
  const auto p = determine_params(24, 5, 12, 1, 0.2);
  const ShellIndexer idx(p);
  ASSERT_TRUE(idx.fits_u128());
  std::mt19937_64 rng(31);
  for (int t = 0; t < 2000; ++t) {
    const u128 i = ((u128{rng()} << 64) | rng()) >> 21;  // 107 bits
    LatticePoint pt(24);
    idx.index_to_point(i, pt);
    ASSERT_EQ(idx.point_to_index(pt), to_bigint(i));
    ASSERT_EQ(idx.index_to_point(to_bigint(i)), pt);
    ASSERT_LE(l1(pt), 2 * p.L);
    ASSERT_EQ(l1(pt) % 2, 0);
  }
  for (int i = 0; i < 1 << 16; ++i) {
    ASSERT_EQ(idx.point_to_index(idx.index_to_point(BigInt(i))), i);
  }
}

TEST(ShellIndexer, WideIndexPathAgreesWithFastPath) {
  // Same grid, one selection above 2^126 and one below: the order is shared.
  const int H = 60;
  const int L = 360;
  const ShellIndexer wide({24, H, L, pow2(130)});
  const ShellIndexer fast({24, H, L, pow2(110)});
  ASSERT_FALSE(wide.fits_u128());
  ASSERT_TRUE(fast.fits_u128());
  std::mt19937_64 rng(32);
  for (int t = 0; t < 300; ++t) {
    const u128 i = ((u128{rng()} << 64) | rng()) >> 18;  // 110 bits
    EXPECT_EQ(wide.index_to_point(to_bigint(i)), fast.index_to_point(to_bigint(i)));
    BigInt big = to_bigint((u128{rng()} << 64) | rng()) << 2;  // up to 130 bits
    big |= rng() & 3;
    EXPECT_EQ(wide.point_to_index(wide.index_to_point(big)), big);
  }
}

TEST(ShellIndexer, L1StatsAgainstEnumeration) {
  const ShellIndexer single({8, 3, 8, 1});
  EXPECT_EQ(single.l1_stats().sum_l1, 0);

  const auto box = enumerate_td(4, 1, 4);
  const ShellIndexer full({4, 1, 2, BigInt(box.size())});
  std::int64_t sum = 0;
  for (const auto& p : box) sum += l1(p);
  EXPECT_EQ(full.l1_stats().sum_l1, sum);
  EXPECT_DOUBLE_EQ(full.l1_stats().mean_l1, static_cast<double>(sum) / box.size());

  std::mt19937_64 rng(33);
  for (int t = 0; t < 6; ++t) {
    const int H = 2 + static_cast<int>(rng() % 3);
    const int L = 4 * H;
    const auto all = enumerate_td(8, H, 2 * L);
    const std::size_t m = 1 + rng() % all.size();
    const ShellIndexer idx({8, H, L, BigInt(m)});
    std::int64_t s = 0;
    for (std::size_t i = 0; i < m; ++i) s += l1(all[i]);
    EXPECT_EQ(idx.l1_stats().sum_l1, s) << H << " " << m;
  }
}

TEST(ShellIndexer, CoordinateMarginalsAgainstEnumeration) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 6; ++t) {
    const int H = 2 + static_cast<int>(rng() % 3);
    const int L = 3 * H;
    const auto all = enumerate_td(7, H, 2 * L);
    const std::size_t m = 1 + rng() % all.size();
    const ShellIndexer idx({7, H, L, BigInt(m)});
    for (int c = 0; c < 7; ++c) {
      std::vector<BigInt> want(H + 1, BigInt(0));
      std::int64_t vmax = 0;
      for (std::size_t i = 0; i < m; ++i) {
        want[all[i][c]] += 1;
        vmax = std::max(vmax, all[i][c]);
      }
      EXPECT_EQ(idx.coordinate_marginal(c), want) << "coord " << c << " m " << m;
      EXPECT_EQ(idx.coordinate_max(c), vmax);
    }
  }
}

TEST(U128, Conversions) {
  const u128 v = (u128{0x0123456789abcdefULL} << 64) | 0xfedcba9876543210ULL;
  EXPECT_EQ(to_u128(to_bigint(v)), v);
  EXPECT_THROW(to_u128(pow2(128)), vlcshape::ContractViolation);
  EXPECT_THROW(to_u128(BigInt(-1)), vlcshape::ContractViolation);
}
