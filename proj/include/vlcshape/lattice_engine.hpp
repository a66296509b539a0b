#pragma once

// Closest-point and bounded-distance decoders in unscaled integer coordinates:
//   U_n = 2Z^n + C          (Construction A)
//   H_n = 2D_n + C          (Construction B half-lattice)
//   Lambda_n = union over a of (2 H_n + a)
//   D_n = {z in Z^n : sum z even}
//
// Ties are always broken toward the smaller value or the smaller index.

#include <cstdint>
#include <span>
#include <vector>

#include "vlcshape/binary_codes.hpp"

namespace vlcshape::lattice {

using LatticePoint = std::vector<std::int64_t>;

struct DecodedLatticePoint {
  LatticePoint point;
  double distance_sq = 0.0;
  int coset_index = 0;
};

double distance_sq(std::span<const double> y, std::span<const std::int64_t> p);

bool in_dn(std::span<const std::int64_t> p);
/// Residues mod 2 form a codeword.
bool in_un(std::span<const std::int64_t> p, const codes::BinaryBlockCode& code);
/// In U_n, and the integer part z = (p - c) / 2 has even sum.
bool in_hn(std::span<const std::int64_t> p, const codes::BinaryBlockCode& code);

/// Exact closest point of U_n via per-coordinate even/odd representatives and
/// soft ML decoding of the code.
LatticePoint closest_point_construction_a(std::span<const double> w,
                                          const codes::BinaryBlockCode& code);

/// Closest U_n point followed by a single +-2 parity fix at the coordinate of
/// largest error. Exact whenever dist(w, H_n) is below half the minimum
/// distance of H_n.
LatticePoint bdd_half_lattice(std::span<const double> w, const codes::BinaryBlockCode& code);

/// For each coset a: scale * bdd_half_lattice((y - a) / scale) + a; keeps the
/// nearest candidate (first coset on ties).
DecodedLatticePoint decode_shifted_union(std::span<const double> y,
                                         const std::vector<LatticePoint>& cosets,
                                         const codes::BinaryBlockCode& code, int scale = 2);

/// Exact closest point of D_n.
LatticePoint nearest_point_dn(std::span<const double> y);

/// Leech lattice as 2 H_24 + {0, xi} with xi = (-3, 1, ..., 1).
namespace leech {
inline constexpr int kDimension = 24;
inline constexpr std::int64_t kKissingNumber = 196560;
/// Minimum squared distance of the unscaled lattice (d_min = 4 sqrt 2).
inline constexpr std::int64_t kMinDistanceSq = 32;

LatticePoint xi();
std::vector<LatticePoint> cosets();
bool contains(std::span<const std::int64_t> p);
DecodedLatticePoint decode(std::span<const double> y);
}  // namespace leech

}  // namespace vlcshape::lattice
