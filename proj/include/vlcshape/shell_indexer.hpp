#pragma once

// Enumerative indexing of the M_s least-l1 points of the D_n truncated box
//   TD_n(H, 2L) = {d in {0..H}^n : sum d even, sum d <= 2L}.
// Points are ordered by l1-norm, then lexicographically; index i maps to the
// i-th point. All counting is exact.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "vlcshape/lattice_engine.hpp"

namespace vlcshape::shell {

using BigInt = boost::multiprecision::cpp_int;
__extension__ typedef unsigned __int128 u128;

BigInt to_bigint(u128 v);
/// Throws ContractViolation when v does not fit.
u128 to_u128(const BigInt& v);

struct TdParams {
  int n = 0;
  int H = 0;
  int L = 0;
  BigInt M_s = 0;
};

/// N[m][s]: vectors of length m over {0..H} with coordinate sum exactly s,
/// for m <= n and s <= max_sum.
class CountTable {
 public:
  CountTable(int n, int H, int max_sum);

  int n() const { return n_; }
  int H() const { return H_; }
  int max_sum() const { return max_sum_; }
  const BigInt& at(int m, int s) const;
  /// Row-major (m, s) storage.
  const std::vector<BigInt>& entries() const { return entries_; }

  /// Versioned binary format: magic, version, n, H, max_sum, then every entry
  /// as a u32 byte count followed by little-endian magnitude bytes.
  void save(std::ostream& out) const;
  static CountTable load(std::istream& in);

  /// Reads `dir/td_<n>_<H>_<max_sum>.bin` when present and valid, otherwise
  /// builds and writes it. A null dir just builds.
  static CountTable load_or_build(int n, int H, int max_sum,
                                  const std::optional<std::filesystem::path>& dir);

  bool operator==(const CountTable& other) const = default;

 private:
  CountTable(int n, int H, int max_sum, std::vector<BigInt> entries);

  int n_;
  int H_;
  int max_sum_;
  std::vector<BigInt> entries_;  // row-major (m, s)
};

/// |TD_n(H, 2L)|.
BigInt count_td(int n, int H, int L);

/// Grid (H*, L*) mimicking the optimal truncated cube for M_s = 2^(n beta - k_c - k_a):
/// H* is the smallest H whose least-l1 region 2 L_min(H) <= H t* + 2, with
/// L_min(H) the smallest L holding M_s points, and
/// L* = max(L_min, min(ceil(H t* / 2), ceil(n H / 2))).
/// Throws ConfigError when n beta - k_c - k_a < 1.
TdParams determine_params(int n, int beta, int k_c, int k_a, double alpha);

struct L1Stats {
  BigInt sum_l1 = 0;
  double mean_l1 = 0.0;
};

class ShellIndexer {
 public:
  /// Throws ConfigError unless 1 <= M_s <= count_td(n, H, L).
  explicit ShellIndexer(TdParams params,
                        const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

  const TdParams& params() const { return params_; }
  const CountTable& table() const { return table_; }
  int n() const { return params_.n; }

  /// Throws ContractViolation unless 0 <= i < M_s.
  lattice::LatticePoint index_to_point(const BigInt& i) const;
  BigInt point_to_index(std::span<const std::int64_t> d) const;
  /// Nullopt for points outside the selected set.
  std::optional<BigInt> try_point_to_index(std::span<const std::int64_t> d) const;

  /// Fast path for M_s <= 2^126; writes n coordinates into out.
  bool fits_u128() const { return fast_; }
  void index_to_point(u128 i, std::span<std::int64_t> out) const;

  L1Stats l1_stats() const;
  /// Entry v counts selected points with d_coord = v, v = 0..H.
  std::vector<BigInt> coordinate_marginal(int coord) const;
  /// Largest value of d_coord over the selected set.
  int coordinate_max(int coord) const;

  /// l1-norm of the last selected point; every selected point is at most this.
  int last_shell() const { return last_shell_; }

 private:
  TdParams params_;
  CountTable table_;
  std::vector<BigInt> shell_start_;  // first index of each even shell, indexed by s / 2
  int last_shell_ = 0;
  BigInt last_shell_taken_ = 0;  // selected points in the last shell
  bool fast_ = false;
  std::vector<u128> table_fast_;  // saturating mirror of the table
  std::vector<u128> shell_start_fast_;
};

}  // namespace vlcshape::shell
