#include "vlcshape/lattice_engine.hpp"

#include <cmath>
#include <numeric>

#include "vlcshape/errors.hpp"

namespace vlcshape::lattice {

namespace {

std::int64_t mod2(std::int64_t v) { return v & 1; }

// Nearest integer of the given parity to x; ties go to the smaller candidate.
std::int64_t nearest_with_parity(double x, std::int64_t parity) {
  const auto lo = static_cast<std::int64_t>(std::floor((x - static_cast<double>(parity)) / 2.0)) * 2 +
                  parity;
  const std::int64_t hi = lo + 2;
  return (x - static_cast<double>(lo)) <= (static_cast<double>(hi) - x) ? lo : hi;
}

void check_length(std::size_t got, int want) {
  if (static_cast<int>(got) != want) throw ContractViolation("vector length does not match code");
}

// Index of the largest |w_i - u_i|, smallest index on ties.
std::size_t argmax_error(std::span<const double> w, std::span<const std::int64_t> u) {
  std::size_t best = 0;
  double best_err = -1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double e = std::fabs(w[i] - static_cast<double>(u[i]));
    if (e > best_err) {
      best_err = e;
      best = i;
    }
  }
  return best;
}

}  // namespace

double distance_sq(std::span<const double> y, std::span<const std::int64_t> p) {
  if (y.size() != p.size()) throw ContractViolation("dimension mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - static_cast<double>(p[i]);
    d += e * e;
  }
  return d;
}

bool in_dn(std::span<const std::int64_t> p) {
  return mod2(std::accumulate(p.begin(), p.end(), std::int64_t{0})) == 0;
}

bool in_un(std::span<const std::int64_t> p, const codes::BinaryBlockCode& code) {
  if (static_cast<int>(p.size()) != code.n()) return false;
  codes::Word c = 0;
  for (std::size_t i = 0; i < p.size(); ++i) c |= static_cast<codes::Word>(mod2(p[i])) << i;
  return code.contains(c);
}

bool in_hn(std::span<const std::int64_t> p, const codes::BinaryBlockCode& code) {
  if (!in_un(p, code)) return false;
  std::int64_t z_sum = 0;
  for (const auto v : p) z_sum += (v - mod2(v)) / 2;
  return mod2(z_sum) == 0;
}

LatticePoint closest_point_construction_a(std::span<const double> w,
                                          const codes::BinaryBlockCode& code) {
  check_length(w.size(), code.n());
  const std::size_t n = w.size();
  LatticePoint even(n);
  LatticePoint odd(n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    even[i] = nearest_with_parity(w[i], 0);
    odd[i] = nearest_with_parity(w[i], 1);
    const double de = w[i] - static_cast<double>(even[i]);
    const double dodd = w[i] - static_cast<double>(odd[i]);
    r[i] = dodd * dodd - de * de;
  }
  const codes::Word c = code.soft_decode(r).codeword;
  for (std::size_t i = 0; i < n; ++i) {
    if (c >> i & 1U) even[i] = odd[i];
  }
  return even;
}

LatticePoint bdd_half_lattice(std::span<const double> w, const codes::BinaryBlockCode& code) {
  LatticePoint u = closest_point_construction_a(w, code);
  std::int64_t z_sum = 0;
  for (const auto v : u) z_sum += (v - mod2(v)) / 2;
  if (mod2(z_sum) != 0) {
    // Moving one coordinate by 2 flips the parity of z and keeps the codeword.
    const std::size_t i = argmax_error(w, u);
    u[i] += w[i] > static_cast<double>(u[i]) ? 2 : -2;
  }
  return u;
}

DecodedLatticePoint decode_shifted_union(std::span<const double> y,
                                         const std::vector<LatticePoint>& cosets,
                                         const codes::BinaryBlockCode& code, int scale) {
  if (cosets.empty()) throw ContractViolation("coset list is empty");
  if (scale < 1) throw ContractViolation("scale must be positive");
  check_length(y.size(), code.n());
  DecodedLatticePoint best;
  std::vector<double> w(y.size());
  for (std::size_t a = 0; a < cosets.size(); ++a) {
    const LatticePoint& shift = cosets[a];
    check_length(shift.size(), code.n());
    for (std::size_t i = 0; i < y.size(); ++i) {
      w[i] = (y[i] - static_cast<double>(shift[i])) / scale;
    }
    LatticePoint cand = bdd_half_lattice(w, code);
    for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = scale * cand[i] + shift[i];
    const double d = distance_sq(y, cand);
    if (a == 0 || d < best.distance_sq) {
      best.point = std::move(cand);
      best.distance_sq = d;
      best.coset_index = static_cast<int>(a);
    }
  }
  return best;
}

LatticePoint nearest_point_dn(std::span<const double> y) {
  if (y.size() < 2) throw ContractViolation("D_n needs n >= 2");
  LatticePoint f(y.size());
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    f[i] = static_cast<std::int64_t>(std::ceil(y[i] - 0.5));
    sum += f[i];
  }
  if (mod2(sum) != 0) {
    const std::size_t k = argmax_error(y, f);
    f[k] += y[k] > static_cast<double>(f[k]) ? 1 : -1;
  }
  return f;
}

namespace leech {

LatticePoint xi() {
  LatticePoint v(kDimension, 1);
  v[0] = -3;
  return v;
}

std::vector<LatticePoint> cosets() { return {LatticePoint(kDimension, 0), xi()}; }

bool contains(std::span<const std::int64_t> p) {
  if (p.size() != static_cast<std::size_t>(kDimension)) return false;
  const LatticePoint shift = xi();
  for (int branch = 0; branch < 2; ++branch) {
    LatticePoint h(kDimension);
    bool even = true;
    for (int i = 0; i < kDimension; ++i) {
      const std::int64_t v = p[i] - (branch == 1 ? shift[i] : 0);
      if (mod2(v) != 0) {
        even = false;
        break;
      }
      h[i] = v / 2;
    }
    if (even && in_hn(h, codes::golay24())) return true;
  }
  return false;
}

DecodedLatticePoint decode(std::span<const double> y) {
  static const std::vector<LatticePoint> shifts = cosets();
  return decode_shifted_union(y, shifts, codes::golay24(), 2);
}

}  // namespace leech

}  // namespace vlcshape::lattice
