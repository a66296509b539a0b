#pragma once

// Line-of-sight indoor room: four ceiling lamps of 7 x 7 LED chips, one
// upward-facing PD. Spatial repetition reduces the MISO link to the scalar
// channel R = X + Z' with std(Z') = sigma / (0.2 s gamma sum h).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "vlcshape/constellation.hpp"
#include "vlcshape/link_simulator.hpp"

namespace vlcshape::indoor {

using Vec3 = std::array<double, 3>;

struct RoomConfig {
  std::vector<Vec3> lamp_positions{{1.6, 1.6, 3.0}, {1.6, -1.6, 3.0}, {-1.6, 1.6, 3.0}, {-1.6, -1.6, 3.0}};
  int leds_per_side = 7;
  double led_pitch = 0.01;       // m
  bool point_source_lamps = false;  // collapse each array to its center
  double room_half_width = 2.0;  // m, floor is [-w, w]^2
  double pd_height = 0.6;        // m
  double i_min = 0.4;            // A
  double i_max = 0.6;            // A
  double semi_angle_deg = 60.0;
  double gamma = 0.45;           // W/A
  double pd_area = 1e-4;         // m^2
  double filter_gain = 1.0;
  double refractive_index = 1.5;
  double responsivity = 0.4;     // A/W
  double fov_deg = 60.0;
  double bandwidth = 10e6;       // Hz
  double i2 = 0.562;
  double i_bg = 100e-6;          // A
  double q_e = 1.602176634e-19;  // C

  /// Throws ConfigError on non-positive quantities or angles outside (0, 90).
  void validate() const;
};

/// Missing keys keep their defaults; unknown keys raise ConfigError.
RoomConfig room_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RoomConfig& room);

/// -ln 2 / ln cos(semi-angle).
double lambertian_order(double semi_angle_deg);

/// Receiver concentrator gain n^2 / sin^2(FOV).
double concentrator_gain(const RoomConfig& room);

/// Downward-facing chip at `chip`, upward-facing PD at `pd`:
/// (m + 1) A / (2 pi d^2) cos^m(phi) T_s g cos(psi), zero beyond the FOV.
double lambertian_gain(const Vec3& chip, const Vec3& pd, const RoomConfig& room);

/// Every chip position (4 x 49 by default).
std::vector<Vec3> chip_positions(const RoomConfig& room);

struct LinkBudget {
  double gain_sum = 0.0;
  double sigma = 0.0;     // A
  double eff_gain = 0.0;  // (I_max - I_min) s gamma gain_sum
  double osnr_db = 0.0;   // 20 log10(eff_gain / sigma); -inf when gain_sum = 0
};

LinkBudget link_budget(const RoomConfig& room, double x, double y, double alpha);

struct OsnrMap {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> osnr_db;  // row-major over (y, x)

  double at(std::size_t ix, std::size_t iy) const { return osnr_db[iy * xs.size() + ix]; }
  double min() const;
  double max() const;
};

/// Grid over the floor from -w to w inclusive.
OsnrMap osnr_map(const RoomConfig& room, double grid_step, double alpha);
/// Columns x, y, osnr_db.
void write_osnr_csv(std::ostream& out, const OsnrMap& map);

enum class Sampling {
  Floor,    // X_P, Y_P uniform on the floor [-w, w]
  Literal,  // uniform on [-4, 4]; points off the floor get zero gain
};

struct AverageSer {
  double average = 0.0;
  std::uint64_t positions = 0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  std::uint64_t zero_gain_positions = 0;
  double min_osnr_db = 0.0;
  double max_osnr_db = 0.0;
};

/// Mean over positions of the per-position SER. A position with zero gain
/// contributes the guessing error 1 - 2^(-n beta).
AverageSer average_ser(const RoomConfig& room, const constellation::ConstellationSpec& spec,
                       std::uint64_t n_positions, const sim::StopRule& per_position,
                       std::uint64_t seed, Sampling sampling = Sampling::Floor,
                       unsigned threads = 0);

}  // namespace vlcshape::indoor
