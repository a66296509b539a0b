#pragma once

// Monte-Carlo symbol error rate over r = kappa * lambda + z, z ~ N(0, sigma^2 I),
// with sigma = 10^(-OSNR/20) (peak intensity normalized to 1).
//
// Trials are keyed by (seed, trial index) so the record depends only on the
// seed and stop rule, never on the worker count.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "vlcshape/constellation.hpp"

namespace vlcshape::sim {

double sigma_from_osnr_db(double osnr_db);
double osnr_db_from_sigma(double sigma);

/// Upper tail of the standard normal.
double q_function(double u);

/// N_A Q(kappa d_min / (2 sigma)) with the Leech constants. ConfigError for
/// any other constellation.
double union_bound_ser(const constellation::ConstellationSpec& spec, double osnr_db);

/// SplitMix64 stream keyed by (seed, trial).
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial);
  std::uint64_t next();
  /// Uniform on (0, 1].
  double uniform();
  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> gaussian_pair();

 private:
  std::uint64_t state_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct StopRule {
  std::uint64_t max_trials = 20'000'000;
  std::uint64_t target_errors = 100;
};

struct SerRecord {
  double osnr_db = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double ser = 0.0;
  double ci95_low = 0.0;  // Wilson score interval
  double ci95_high = 0.0;
  std::uint64_t seed = 0;
};

/// Wilson 95% interval for errors / trials.
std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials);

/// One trial: uniform word, map, add noise, lattice or threshold detection,
/// compare the whole vector. Returns true on a symbol error.
bool run_trial(const constellation::ConstellationSpec& spec, double noise_std_unscaled,
               std::uint64_t seed, std::uint64_t trial);

/// threads = 0 uses the hardware concurrency. An infinite OSNR is noiseless.
SerRecord simulate_ser(const constellation::ConstellationSpec& spec, double osnr_db,
                       const StopRule& stop, std::uint64_t seed, unsigned threads = 0);

/// One record per grid point (seed derive_seed(seed, i)), plus a noiseless
/// point at +inf when append_noiseless is set.
std::vector<SerRecord> ser_sweep(const constellation::ConstellationSpec& spec,
                                 std::span<const double> osnr_grid, const StopRule& stop,
                                 std::uint64_t seed, unsigned threads = 0,
                                 bool append_noiseless = true);

/// False when some finite point has a larger SER than its predecessor.
bool is_nonincreasing(std::span<const SerRecord> records);

/// OSNR where the SER curve crosses target, interpolating log10 SER linearly
/// between the bracketing points. Nullopt when the grid does not bracket it.
std::optional<double> osnr_at_ser(std::span<const SerRecord> records, double target);

/// Header and one row per record, plus a union-bound column when requested.
void write_csv(std::ostream& out, const constellation::ConstellationSpec& spec,
               std::span<const SerRecord> records, bool with_union_bound);

/// Symbol-vector error of the clamped ASK detector:
/// 1 - (1 - 2 (1 - 2^-beta) Q(kappa / (2 sigma)))^n.
double cubic_ser_closed_form(const constellation::ConstellationSpec& spec, double osnr_db);

}  // namespace vlcshape::sim
