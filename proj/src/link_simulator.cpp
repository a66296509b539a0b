#include "vlcshape/link_simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "vlcshape/errors.hpp"

namespace vlcshape::sim {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kBlockTrials = 256;
constexpr double kZ95 = 1.959963984540054;
constexpr int kDim = lattice::leech::kDimension;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

shell::u128 draw_bits(TrialRng& rng, int bits) {
  if (bits == 0) return 0;
  shell::u128 v = rng.next();
  if (bits > 64) v |= static_cast<shell::u128>(rng.next()) << 64;
  if (bits < 128) v &= (shell::u128{1} << bits) - 1;
  return v;
}

bool detect_differs(const constellation::ConstellationSpec& spec, std::span<const double> y,
                    std::span<const std::int64_t> sent) {
  using constellation::Kind;
  switch (spec.kind) {
    case Kind::Cubic: {
      const double top = static_cast<double>(spec.levels() - 1);
      for (int i = 0; i < kDim; ++i) {
        const double level = std::clamp(std::floor(y[i] + 0.5), 0.0, top);
        if (static_cast<std::int64_t>(level) != sent[i]) return true;
      }
      return false;
    }
    case Kind::TCC: {
      const auto p = lattice::nearest_point_dn(y);
      return !std::equal(p.begin(), p.end(), sent.begin());
    }
    case Kind::OSLC: {
      // The mapping is injective, so the demapped word differs from the sent
      // word exactly when the decoded point differs from the sent point.
      const auto d = lattice::leech::decode(y);
      return !std::equal(d.point.begin(), d.point.end(), sent.begin());
    }
  }
  return true;
}

void check_sim_spec(const constellation::ConstellationSpec& spec) {
  if (spec.n != kDim) throw ConfigError("simulator supports n = 24 only");
  if (spec.indexer && !spec.indexer->fits_u128()) throw ConfigError("shaping index exceeds 126 bits");
  if (spec.k_s > 126) throw ConfigError("shaping index exceeds 126 bits");
  if (!(spec.kappa > 0.0)) throw ConfigError("spec has no scaling factor");
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double sigma_from_osnr_db(double osnr_db) { return std::pow(10.0, -osnr_db / 20.0); }

double osnr_db_from_sigma(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  return -20.0 * std::log10(sigma);
}

double q_function(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

double union_bound_ser(const constellation::ConstellationSpec& spec, double osnr_db) {
  if (spec.kind != constellation::Kind::OSLC) {
    throw ConfigError("union bound is available for the Leech-based OSLC only");
  }
  const double d_min = std::sqrt(static_cast<double>(lattice::leech::kMinDistanceSq));
  const double sigma = sigma_from_osnr_db(osnr_db);
  return static_cast<double>(lattice::leech::kKissingNumber) * q_function(spec.kappa * d_min / (2.0 * sigma));
}

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t trial)
    : state_(mix(seed ^ mix(trial + kGolden))) {}

std::uint64_t TrialRng::next() {
  state_ += kGolden;
  return mix(state_);
}

double TrialRng::uniform() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

std::pair<double, double> TrialRng::gaussian_pair() {
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double phi = 2.0 * std::numbers::pi * uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix(seed + kGolden * (index + 1));
}

std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = errors == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = errors == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

bool run_trial(const constellation::ConstellationSpec& spec, double noise_std_unscaled,
               std::uint64_t seed, std::uint64_t trial) {
  TrialRng rng(seed, trial);
  const shell::u128 b_s = draw_bits(rng, spec.k_s);
  const auto b_c = static_cast<codes::Word>(draw_bits(rng, spec.k_c));
  const auto b_a = static_cast<int>(draw_bits(rng, spec.k_a));
  std::array<std::int64_t, kDim> sent{};
  constellation::map_bits(spec, b_s, b_c, b_a, sent);
  std::array<double, kDim> y{};
  for (int i = 0; i < kDim; i += 2) {
    const auto [z0, z1] = rng.gaussian_pair();
    y[i] = static_cast<double>(sent[i]) + noise_std_unscaled * z0;
    y[i + 1] = static_cast<double>(sent[i + 1]) + noise_std_unscaled * z1;
  }
  return detect_differs(spec, y, sent);
}

SerRecord simulate_ser(const constellation::ConstellationSpec& spec, double osnr_db,
                       const StopRule& stop, std::uint64_t seed, unsigned threads) {
  if (stop.max_trials < 1) throw ContractViolation("max_trials must be at least 1");
  check_sim_spec(spec);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  const double noise = std::isinf(osnr_db) && osnr_db > 0 ? 0.0 : sigma_from_osnr_db(osnr_db) / spec.kappa;

  const std::uint64_t total_blocks = (stop.max_trials + kBlockTrials - 1) / kBlockTrials;
  const std::uint64_t round_blocks = 4ULL * threads;
  SerRecord rec;
  rec.osnr_db = osnr_db;
  rec.seed = seed;
  std::vector<std::uint64_t> block_errors;
  for (std::uint64_t first = 0; first < total_blocks; first += round_blocks) {
    const std::uint64_t count = std::min(round_blocks, total_blocks - first);
    block_errors.assign(count, 0);
    std::atomic<std::uint64_t> cursor{0};
    auto work = [&] {
      for (std::uint64_t b; (b = cursor.fetch_add(1)) < count;) {
        const std::uint64_t begin = (first + b) * kBlockTrials;
        const std::uint64_t end = std::min(begin + kBlockTrials, stop.max_trials);
        std::uint64_t e = 0;
        for (std::uint64_t t = begin; t < end; ++t) e += run_trial(spec, noise, seed, t) ? 1 : 0;
        block_errors[b] = e;
      }
    };
    if (threads == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < std::min<std::uint64_t>(threads, count); ++w) pool.emplace_back(work);
    }
    // Results are reduced in block order so the stopping point is fixed.
    for (std::uint64_t b = 0; b < count; ++b) {
      const std::uint64_t begin = (first + b) * kBlockTrials;
      rec.trials = std::min(begin + kBlockTrials, stop.max_trials);
      rec.errors += block_errors[b];
      if (stop.target_errors > 0 && rec.errors >= stop.target_errors) break;
    }
    if (stop.target_errors > 0 && rec.errors >= stop.target_errors) break;
  }
  rec.ser = static_cast<double>(rec.errors) / static_cast<double>(rec.trials);
  std::tie(rec.ci95_low, rec.ci95_high) = wilson_interval(rec.errors, rec.trials);
  return rec;
}

std::vector<SerRecord> ser_sweep(const constellation::ConstellationSpec& spec,
                                 std::span<const double> osnr_grid, const StopRule& stop,
                                 std::uint64_t seed, unsigned threads, bool append_noiseless) {
  if (osnr_grid.empty()) throw ConfigError("OSNR grid is empty");
  std::vector<SerRecord> out;
  for (std::size_t i = 0; i < osnr_grid.size(); ++i) {
    out.push_back(simulate_ser(spec, osnr_grid[i], stop, derive_seed(seed, i), threads));
  }
  if (append_noiseless) {
    out.push_back(simulate_ser(spec, std::numeric_limits<double>::infinity(), stop,
                               derive_seed(seed, osnr_grid.size()), threads));
  }
  return out;
}

bool is_nonincreasing(std::span<const SerRecord> records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].osnr_db > records[i - 1].osnr_db && records[i].ser > records[i - 1].ser) return false;
  }
  return true;
}

std::optional<double> osnr_at_ser(std::span<const SerRecord> records, double target) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    if (std::isinf(a.osnr_db) || std::isinf(b.osnr_db)) continue;
    if (!(a.ser >= target && b.ser <= target) || a.ser <= 0.0) continue;
    if (b.ser <= 0.0) continue;
    if (a.ser == b.ser) return a.osnr_db;
    const double f = (std::log10(a.ser) - std::log10(target)) / (std::log10(a.ser) - std::log10(b.ser));
    return a.osnr_db + f * (b.osnr_db - a.osnr_db);
  }
  return std::nullopt;
}

void write_csv(std::ostream& out, const constellation::ConstellationSpec& spec,
               std::span<const SerRecord> records, bool with_union_bound) {
  out << "osnr_db,trials,errors,ser,ci95_low,ci95_high,scheme,beta,alpha,seed";
  if (with_union_bound) out << ",union_bound";
  out << '\n';
  for (const auto& r : records) {
    out << format_double(r.osnr_db) << ',' << r.trials << ',' << r.errors << ',' << format_double(r.ser)
        << ',' << format_double(r.ci95_low) << ',' << format_double(r.ci95_high) << ','
        << constellation::to_string(spec.kind) << ',' << spec.beta << ',' << format_double(spec.alpha)
        << ',' << r.seed;
    if (with_union_bound) out << ',' << format_double(union_bound_ser(spec, r.osnr_db));
    out << '\n';
  }
}

double cubic_ser_closed_form(const constellation::ConstellationSpec& spec, double osnr_db) {
  if (spec.kind != constellation::Kind::Cubic) throw ConfigError("closed form is for the cubic scheme");
  const double sigma = sigma_from_osnr_db(osnr_db);
  const double p1 = 2.0 * (1.0 - std::ldexp(1.0, -spec.beta)) * q_function(spec.kappa / (2.0 * sigma));
  return -std::expm1(static_cast<double>(spec.n) * std::log1p(-p1));
}

}  // namespace vlcshape::sim
