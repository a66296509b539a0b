#pragma once

// Finite nonnegative constellations for the intensity channel:
//   OSLC   lambda = 2 (2 d + c) + b_a * xi~(h), d from the shell indexer, c Golay
//   TCC    lambda = d, all bits through the shell indexer over D_24
//   Cubic  24-fold product of a 2^beta-level ASK
// Points are kept unscaled; the transmitted vector is kappa * lambda.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vlcshape/binary_codes.hpp"
#include "vlcshape/lattice_engine.hpp"
#include "vlcshape/shell_indexer.hpp"

namespace vlcshape::constellation {

using BigInt = shell::BigInt;
using Rational = boost::multiprecision::cpp_rational;
using shell::u128;

enum class Kind { OSLC, Cubic, TCC };

std::string to_string(Kind k);
/// Accepts "oslc", "cubic", "tcc"; throws ConfigError otherwise.
Kind kind_from_string(const std::string& s);

/// Message split (b_s | b_c | b_a). For the cubic scheme b_s holds every bit,
/// with the level of coordinate i in bits [i beta, (i + 1) beta).
struct BitWord {
  BigInt b_s = 0;
  codes::Word b_c = 0;
  int b_a = 0;

  bool operator==(const BitWord&) const = default;
};

struct ConstellationSpec {
  Kind kind = Kind::OSLC;
  int n = 24;
  int beta = 0;
  double alpha = 0.0;
  int k_s = 0;
  int k_c = 0;
  int k_a = 0;
  std::optional<shell::TdParams> shaping;               // OSLC and TCC
  std::shared_ptr<const shell::ShellIndexer> indexer;  // OSLC and TCC
  std::int64_t peak_unscaled = 0;
  Rational avg_l1_unscaled = 0;  // mean of sum_i lambda_i over the constellation
  Rational kappa_exact = 0;
  double kappa = 0.0;  // largest double <= kappa_exact
  bool average_binds = false;
  std::int64_t med_sq_unscaled = 0;

  /// log2 M.
  int bits() const { return n * beta; }
  int levels() const { return 1 << beta; }  // cubic only
};

/// Leech-based OSLC: k_c = 12, k_a = 1, k_s = 24 beta - 13. The optional
/// directory caches count tables across runs.
ConstellationSpec build_oslc_spec(int beta, double alpha,
                                  const std::optional<std::filesystem::path>& cache_dir = std::nullopt);
ConstellationSpec build_cubic_spec(int beta, double alpha);
ConstellationSpec build_tcc_spec(int beta, double alpha,
                                 const std::optional<std::filesystem::path>& cache_dir = std::nullopt);
ConstellationSpec build_spec(Kind kind, int beta, double alpha,
                             const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// (5, 1, ..., 1) when h_1 mod 4 is 0 or 1, otherwise (-3, 1, ..., 1).
lattice::LatticePoint xi_tilde(std::span<const std::int64_t> h);
/// First coordinate of xi_tilde.
std::int64_t xi_tilde_first(std::int64_t h1);

lattice::LatticePoint map_bits(const ConstellationSpec& spec, const BitWord& word);
/// Same mapping with the shaping index in 128 bits; requires b_s < 2^126.
void map_bits(const ConstellationSpec& spec, u128 b_s, codes::Word b_c, int b_a,
              std::span<std::int64_t> out);

/// Inverse of map_bits. Throws DemapError for points outside the constellation.
BitWord demap_point(const ConstellationSpec& spec, std::span<const std::int64_t> lambda);
std::optional<BitWord> try_demap(const ConstellationSpec& spec,
                                 std::span<const std::int64_t> lambda);

/// Flat bit vector (b_s LSB first, then b_c, then b_a) of length n beta.
std::vector<int> to_bits(const ConstellationSpec& spec, const BitWord& word);
BitWord from_bits(const ConstellationSpec& spec, std::span<const int> bits);

/// Exact feasibility: kappa * peak <= 1 and kappa * avg <= n alpha.
bool satisfies_constraints(const ConstellationSpec& spec);

nlohmann::json to_json(const ConstellationSpec& spec);

}  // namespace vlcshape::constellation
