#include "vlcshape/constellation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "vlcshape/errors.hpp"

namespace vlcshape::constellation {

namespace {

constexpr int kLeechDim = lattice::leech::kDimension;
constexpr int kBuildCheckSamples = 4096;

Rational exact(double x) {
  int e = 0;
  const double frac = std::frexp(x, &e);
  Rational r = BigInt(static_cast<long long>(std::ldexp(frac, 53)));
  e -= 53;
  if (e >= 0) return r * Rational(BigInt(1) << e);
  return r / Rational(BigInt(1) << -e);
}

void check_rate(int beta, double alpha) {
  if (beta < 1 || beta > 5) throw ConfigError("beta must be an integer in [1, 5]");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
}

void set_kappa(ConstellationSpec& s) {
  const Rational avg_ratio = s.avg_l1_unscaled / (exact(s.alpha) * s.n);
  const Rational peak = s.peak_unscaled;
  s.average_binds = avg_ratio >= peak;
  s.kappa_exact = 1 / (s.average_binds ? avg_ratio : peak);
  double k = s.kappa_exact.convert_to<double>();
  while (exact(k) > s.kappa_exact) k = std::nextafter(k, 0.0);
  s.kappa = k;
}

BigInt random_bits(std::mt19937_64& rng, int bits) {
  BigInt v = 0;
  for (int done = 0; done < bits; done += 64) {
    const int take = std::min(64, bits - done);
    const std::uint64_t chunk = take == 64 ? rng() : rng() & ((std::uint64_t{1} << take) - 1);
    v |= BigInt(chunk) << done;
  }
  return v;
}

BitWord random_word(const ConstellationSpec& s, std::mt19937_64& rng) {
  BitWord w;
  w.b_s = random_bits(rng, s.k_s);
  w.b_c = static_cast<codes::Word>(rng() & ((std::uint64_t{1} << s.k_c) - 1));
  w.b_a = s.k_a > 0 ? static_cast<int>(rng() & 1U) : 0;
  return w;
}

// Mapping the closed-form average and peak were derived for: empirical mean of
// sum(lambda) within 5 standard errors, every coordinate in [0, peak].
void monte_carlo_check(const ConstellationSpec& s) {
  std::mt19937_64 rng(0x5eed5eedULL + static_cast<unsigned>(s.beta));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int t = 0; t < kBuildCheckSamples; ++t) {
    const auto lam = map_bits(s, random_word(s, rng));
    double l1 = 0.0;
    for (const auto v : lam) {
      if (v < 0 || v > s.peak_unscaled) {
        throw ConfigError("mapped point leaves [0, peak]: closed-form peak is wrong");
      }
      l1 += static_cast<double>(v);
    }
    sum += l1;
    sum_sq += l1 * l1;
  }
  const double mean = sum / kBuildCheckSamples;
  const double var = std::max(0.0, sum_sq / kBuildCheckSamples - mean * mean);
  const double se = std::sqrt(var / kBuildCheckSamples);
  const double want = s.avg_l1_unscaled.convert_to<double>();
  if (std::fabs(mean - want) > 5.0 * se + 1e-9 * want) {
    throw ConfigError("Monte-Carlo average " + std::to_string(mean) +
                      " disagrees with closed form " + std::to_string(want));
  }
}

void check_word(const ConstellationSpec& s, const BitWord& w) {
  if (w.b_s < 0 || (w.b_s != 0 && static_cast<int>(msb(w.b_s)) >= s.k_s)) {
    throw ContractViolation("b_s wider than k_s bits");
  }
  if (s.k_c < 32 && (w.b_c >> s.k_c) != 0) throw ContractViolation("b_c wider than k_c bits");
  if (w.b_a < 0 || w.b_a >= (1 << s.k_a)) throw ContractViolation("b_a out of range");
}

void oslc_from_parts(std::span<const std::int64_t> d, codes::Word c, int b_a,
                     std::span<std::int64_t> out) {
  const std::int64_t h1 = 2 * d[0] + static_cast<std::int64_t>(c & 1U);
  for (int i = 0; i < kLeechDim; ++i) {
    const std::int64_t h = 2 * d[i] + static_cast<std::int64_t>(c >> i & 1U);
    out[i] = 2 * h;
  }
  if (b_a != 0) {
    out[0] += xi_tilde_first(h1);
    for (int i = 1; i < kLeechDim; ++i) out[i] += 1;
  }
}

std::int64_t floor_div2(std::int64_t v) { return (v - (v & 1)) / 2; }

}  // namespace

std::string to_string(Kind k) {
  switch (k) {
    case Kind::OSLC:
      return "oslc";
    case Kind::Cubic:
      return "cubic";
    case Kind::TCC:
      return "tcc";
  }
  return "unknown";
}

Kind kind_from_string(const std::string& s) {
  if (s == "oslc") return Kind::OSLC;
  if (s == "cubic") return Kind::Cubic;
  if (s == "tcc") return Kind::TCC;
  throw ConfigError("unknown scheme '" + s + "' (expected oslc, cubic or tcc)");
}

std::int64_t xi_tilde_first(std::int64_t h1) {
  const std::int64_t r = ((h1 % 4) + 4) % 4;
  return r < 2 ? 5 : -3;
}

lattice::LatticePoint xi_tilde(std::span<const std::int64_t> h) {
  if (h.empty()) throw ContractViolation("empty point");
  lattice::LatticePoint xi(h.size(), 1);
  xi[0] = xi_tilde_first(h[0]);
  return xi;
}

ConstellationSpec build_oslc_spec(int beta, double alpha,
                                  const std::optional<std::filesystem::path>& cache_dir) {
  check_rate(beta, alpha);
  ConstellationSpec s;
  s.kind = Kind::OSLC;
  s.n = kLeechDim;
  s.beta = beta;
  s.alpha = alpha;
  s.k_c = 12;
  s.k_a = 1;
  s.k_s = kLeechDim * beta - s.k_c - s.k_a;
  s.shaping = shell::determine_params(s.n, beta, s.k_c, s.k_a, alpha);
  s.indexer = std::make_shared<shell::ShellIndexer>(*s.shaping, cache_dir);
  s.med_sq_unscaled = lattice::leech::kMinDistanceSq;

  const auto& idx = *s.indexer;
  const BigInt& m_s = s.shaping->M_s;
  // Average: 4 E|d|_1 + 2 E wt(c) + 1/2 (23 + E xi~_1), where xi~_1 = 5 exactly
  // when d_1 is even (h_1 mod 4 in {0, 1}) and -3 otherwise.
  const auto marg0 = idx.coordinate_marginal(0);
  BigInt even_first = 0;
  std::int64_t peak = 0;
  for (int v = 0; v < static_cast<int>(marg0.size()); ++v) {
    if (marg0[v] == 0) continue;
    if (v % 2 == 0) even_first += marg0[v];
    // With c_1 = 1 and b_a = 1: 4v + 2 + 5 for even v; for odd v the best is 4v + 2.
    peak = std::max<std::int64_t>(peak, v % 2 == 0 ? 4 * v + 7 : 4 * v + 2);
  }
  for (int j = 1; j < s.n; ++j) peak = std::max<std::int64_t>(peak, 4 * idx.coordinate_max(j) + 3);
  s.peak_unscaled = peak;

  const auto weights = codes::weight_enumerator(codes::golay24());
  BigInt weight_sum = 0;
  for (std::size_t w = 0; w < weights.size(); ++w) weight_sum += BigInt(weights[w]) * w;
  const Rational mean_weight(weight_sum, BigInt(1) << s.k_c);
  const Rational p_even(even_first, m_s);
  const Rational mean_l1_d(idx.l1_stats().sum_l1, m_s);
  const Rational mean_xi1 = 5 * p_even - 3 * (1 - p_even);
  s.avg_l1_unscaled = 4 * mean_l1_d + 2 * mean_weight + Rational(1, 2) * (Rational(s.n - 1) + mean_xi1);
  set_kappa(s);
  monte_carlo_check(s);
  return s;
}

ConstellationSpec build_cubic_spec(int beta, double alpha) {
  check_rate(beta, alpha);
  ConstellationSpec s;
  s.kind = Kind::Cubic;
  s.n = kLeechDim;
  s.beta = beta;
  s.alpha = alpha;
  s.k_s = kLeechDim * beta;
  s.peak_unscaled = (std::int64_t{1} << beta) - 1;
  s.avg_l1_unscaled = Rational(s.n * s.peak_unscaled, 2);
  s.med_sq_unscaled = 1;
  set_kappa(s);
  monte_carlo_check(s);
  return s;
}

ConstellationSpec build_tcc_spec(int beta, double alpha,
                                 const std::optional<std::filesystem::path>& cache_dir) {
  check_rate(beta, alpha);
  ConstellationSpec s;
  s.kind = Kind::TCC;
  s.n = kLeechDim;
  s.beta = beta;
  s.alpha = alpha;
  s.k_s = kLeechDim * beta;
  s.shaping = shell::determine_params(s.n, beta, 0, 0, alpha);
  s.indexer = std::make_shared<shell::ShellIndexer>(*s.shaping, cache_dir);
  s.med_sq_unscaled = 2;
  std::int64_t peak = 0;
  for (int j = 0; j < s.n; ++j) peak = std::max<std::int64_t>(peak, s.indexer->coordinate_max(j));
  s.peak_unscaled = peak;
  s.avg_l1_unscaled = Rational(s.indexer->l1_stats().sum_l1, s.shaping->M_s);
  set_kappa(s);
  monte_carlo_check(s);
  return s;
}

ConstellationSpec build_spec(Kind kind, int beta, double alpha,
                             const std::optional<std::filesystem::path>& cache_dir) {
  switch (kind) {
    case Kind::OSLC:
      return build_oslc_spec(beta, alpha, cache_dir);
    case Kind::Cubic:
      return build_cubic_spec(beta, alpha);
    case Kind::TCC:
      return build_tcc_spec(beta, alpha, cache_dir);
  }
  throw ConfigError("unknown constellation kind");
}

lattice::LatticePoint map_bits(const ConstellationSpec& spec, const BitWord& word) {
  check_word(spec, word);
  lattice::LatticePoint out(spec.n);
  switch (spec.kind) {
    case Kind::Cubic: {
      const BigInt mask = (BigInt(1) << spec.beta) - 1;
      for (int i = 0; i < spec.n; ++i) {
        out[i] = static_cast<std::int64_t>((word.b_s >> (i * spec.beta)) & mask);
      }
      break;
    }
    case Kind::TCC:
      out = spec.indexer->index_to_point(word.b_s);
      break;
    case Kind::OSLC: {
      const auto d = spec.indexer->index_to_point(word.b_s);
      oslc_from_parts(d, codes::golay_encode(word.b_c), word.b_a, out);
      break;
    }
  }
  return out;
}

void map_bits(const ConstellationSpec& spec, u128 b_s, codes::Word b_c, int b_a,
              std::span<std::int64_t> out) {
  if (static_cast<int>(out.size()) != spec.n) throw ContractViolation("output length != n");
  switch (spec.kind) {
    case Kind::Cubic: {
      const u128 mask = (u128{1} << spec.beta) - 1;
      for (int i = 0; i < spec.n; ++i) out[i] = static_cast<std::int64_t>((b_s >> (i * spec.beta)) & mask);
      break;
    }
    case Kind::TCC:
      spec.indexer->index_to_point(b_s, out);
      break;
    case Kind::OSLC: {
      std::array<std::int64_t, kLeechDim> d{};
      spec.indexer->index_to_point(b_s, d);
      oslc_from_parts(d, codes::golay_encode(b_c), b_a, out);
      break;
    }
  }
}

std::optional<BitWord> try_demap(const ConstellationSpec& spec,
                                 std::span<const std::int64_t> lambda) {
  if (static_cast<int>(lambda.size()) != spec.n) return std::nullopt;
  BitWord w;
  switch (spec.kind) {
    case Kind::Cubic: {
      const std::int64_t top = spec.levels() - 1;
      for (int i = 0; i < spec.n; ++i) {
        if (lambda[i] < 0 || lambda[i] > top) return std::nullopt;
        w.b_s |= BigInt(lambda[i]) << (i * spec.beta);
      }
      return w;
    }
    case Kind::TCC: {
      auto idx = spec.indexer->try_point_to_index(lambda);
      if (!idx) return std::nullopt;
      w.b_s = std::move(*idx);
      return w;
    }
    case Kind::OSLC: {
      // Coset: all coordinates even (b_a = 0) or all odd (b_a = 1).
      const std::int64_t parity = lambda[0] & 1;
      for (const auto v : lambda) {
        if ((v & 1) != parity) return std::nullopt;
      }
      w.b_a = static_cast<int>(parity);
      lattice::LatticePoint h(spec.n);
      if (parity == 0) {
        for (int i = 0; i < spec.n; ++i) h[i] = lambda[i] / 2;
      } else {
        for (int i = 1; i < spec.n; ++i) h[i] = (lambda[i] - 1) / 2;
        // Exactly one of the two translations is consistent with its own selector.
        const std::int64_t plus = (lambda[0] - 5) / 2;
        const std::int64_t minus = (lambda[0] + 3) / 2;
        if (xi_tilde_first(plus) == 5) {
          h[0] = plus;
        } else if (xi_tilde_first(minus) == -3) {
          h[0] = minus;
        } else {
          return std::nullopt;
        }
      }
      codes::Word c = 0;
      lattice::LatticePoint d(spec.n);
      for (int i = 0; i < spec.n; ++i) {
        c |= static_cast<codes::Word>(h[i] & 1) << i;
        d[i] = floor_div2(h[i]);
      }
      if (!codes::golay24().contains(c)) return std::nullopt;
      w.b_c = codes::golay24().message_of(c);
      auto idx = spec.indexer->try_point_to_index(d);
      if (!idx) return std::nullopt;
      w.b_s = std::move(*idx);
      return w;
    }
  }
  return std::nullopt;
}

BitWord demap_point(const ConstellationSpec& spec, std::span<const std::int64_t> lambda) {
  auto w = try_demap(spec, lambda);
  if (!w) throw DemapError("point is not in the " + to_string(spec.kind) + " constellation");
  return *w;
}

std::vector<int> to_bits(const ConstellationSpec& spec, const BitWord& word) {
  check_word(spec, word);
  std::vector<int> bits;
  bits.reserve(spec.bits());
  for (int i = 0; i < spec.k_s; ++i) bits.push_back(bit_test(word.b_s, i) ? 1 : 0);
  for (int i = 0; i < spec.k_c; ++i) bits.push_back(static_cast<int>(word.b_c >> i & 1U));
  for (int i = 0; i < spec.k_a; ++i) bits.push_back(word.b_a >> i & 1);
  return bits;
}

BitWord from_bits(const ConstellationSpec& spec, std::span<const int> bits) {
  if (static_cast<int>(bits.size()) != spec.bits()) throw ContractViolation("word length != n beta");
  BitWord w;
  int pos = 0;
  for (int i = 0; i < spec.k_s; ++i, ++pos) {
    if (bits[pos]) bit_set(w.b_s, i);
  }
  for (int i = 0; i < spec.k_c; ++i, ++pos) w.b_c |= static_cast<codes::Word>(bits[pos] != 0) << i;
  for (int i = 0; i < spec.k_a; ++i, ++pos) w.b_a |= (bits[pos] != 0) << i;
  return w;
}

bool satisfies_constraints(const ConstellationSpec& spec) {
  const Rational k = exact(spec.kappa);
  return k * spec.peak_unscaled <= 1 && k * spec.avg_l1_unscaled <= exact(spec.alpha) * spec.n;
}

nlohmann::json to_json(const ConstellationSpec& spec) {
  nlohmann::json j;
  j["scheme"] = to_string(spec.kind);
  j["n"] = spec.n;
  j["beta"] = spec.beta;
  j["alpha"] = spec.alpha;
  j["log2_M"] = spec.bits();
  j["k_s"] = spec.k_s;
  j["k_c"] = spec.k_c;
  j["k_a"] = spec.k_a;
  if (spec.shaping) {
    j["shaping"] = {{"H", spec.shaping->H}, {"L", spec.shaping->L}, {"M_s", spec.shaping->M_s.str()}};
  }
  j["peak_unscaled"] = spec.peak_unscaled;
  j["avg_l1_unscaled"] = spec.avg_l1_unscaled.str();
  j["avg_l1_unscaled_value"] = spec.avg_l1_unscaled.convert_to<double>();
  j["kappa"] = spec.kappa;
  j["kappa_exact"] = spec.kappa_exact.str();
  j["binding_constraint"] = spec.average_binds ? "average" : "peak";
  j["med_unscaled"] = std::sqrt(static_cast<double>(spec.med_sq_unscaled));
  return j;
}

}  // namespace vlcshape::constellation
