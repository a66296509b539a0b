#include "vlcshape/indoor_scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

#include "vlcshape/errors.hpp"

namespace vlcshape::indoor {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kLiteralHalfWidth = 4.0;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
}

void require_angle(double deg, const char* name) {
  if (!(deg > 0.0 && deg < 90.0)) throw ConfigError(std::string(name) + " must lie in (0, 90) degrees");
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void RoomConfig::validate() const {
  if (lamp_positions.empty()) throw ConfigError("at least one lamp is required");
  if (leds_per_side < 1) throw ConfigError("leds_per_side must be at least 1");
  require_positive(led_pitch, "led_pitch");
  require_positive(room_half_width, "room_half_width");
  require_positive(pd_height, "pd_height");
  require_positive(i_min, "i_min");
  require_positive(i_max, "i_max");
  if (!(i_max > i_min)) throw ConfigError("i_max must exceed i_min");
  require_angle(semi_angle_deg, "semi_angle_deg");
  require_angle(fov_deg, "fov_deg");
  require_positive(gamma, "gamma");
  require_positive(pd_area, "pd_area");
  require_positive(filter_gain, "filter_gain");
  require_positive(refractive_index, "refractive_index");
  require_positive(responsivity, "responsivity");
  require_positive(bandwidth, "bandwidth");
  require_positive(i2, "i2");
  require_positive(i_bg, "i_bg");
  require_positive(q_e, "q_e");
  for (const auto& lamp : lamp_positions) {
    if (!(lamp[2] > pd_height)) throw ConfigError("lamps must be above the PD plane");
  }
}

RoomConfig room_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "lamp_positions", "leds_per_side", "led_pitch", "point_source_lamps", "room_half_width",
      "pd_height", "i_min", "i_max", "semi_angle_deg", "gamma", "pd_area", "filter_gain",
      "refractive_index", "responsivity", "fov_deg", "bandwidth", "i2", "i_bg", "q_e"};
  if (!j.is_object()) throw ConfigError("room config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown room config key '" + key + "'");
  }
  RoomConfig r;
  try {
    read_field(j, "lamp_positions", r.lamp_positions);
    read_field(j, "leds_per_side", r.leds_per_side);
    read_field(j, "led_pitch", r.led_pitch);
    read_field(j, "point_source_lamps", r.point_source_lamps);
    read_field(j, "room_half_width", r.room_half_width);
    read_field(j, "pd_height", r.pd_height);
    read_field(j, "i_min", r.i_min);
    read_field(j, "i_max", r.i_max);
    read_field(j, "semi_angle_deg", r.semi_angle_deg);
    read_field(j, "gamma", r.gamma);
    read_field(j, "pd_area", r.pd_area);
    read_field(j, "filter_gain", r.filter_gain);
    read_field(j, "refractive_index", r.refractive_index);
    read_field(j, "responsivity", r.responsivity);
    read_field(j, "fov_deg", r.fov_deg);
    read_field(j, "bandwidth", r.bandwidth);
    read_field(j, "i2", r.i2);
    read_field(j, "i_bg", r.i_bg);
    read_field(j, "q_e", r.q_e);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad room config value: ") + e.what());
  }
  r.validate();
  return r;
}

nlohmann::json to_json(const RoomConfig& r) {
  return {{"lamp_positions", r.lamp_positions},
          {"leds_per_side", r.leds_per_side},
          {"led_pitch", r.led_pitch},
          {"point_source_lamps", r.point_source_lamps},
          {"room_half_width", r.room_half_width},
          {"pd_height", r.pd_height},
          {"i_min", r.i_min},
          {"i_max", r.i_max},
          {"semi_angle_deg", r.semi_angle_deg},
          {"gamma", r.gamma},
          {"pd_area", r.pd_area},
          {"filter_gain", r.filter_gain},
          {"refractive_index", r.refractive_index},
          {"responsivity", r.responsivity},
          {"fov_deg", r.fov_deg},
          {"bandwidth", r.bandwidth},
          {"i2", r.i2},
          {"i_bg", r.i_bg},
          {"q_e", r.q_e}};
}

double lambertian_order(double semi_angle_deg) {
  require_angle(semi_angle_deg, "semi-angle");
  return -std::numbers::ln2 / std::log(std::cos(semi_angle_deg * kDeg));
}

double concentrator_gain(const RoomConfig& room) {
  const double s = std::sin(room.fov_deg * kDeg);
  return room.refractive_index * room.refractive_index / (s * s);
}

double lambertian_gain(const Vec3& chip, const Vec3& pd, const RoomConfig& room) {
  const double dx = chip[0] - pd[0];
  const double dy = chip[1] - pd[1];
  const double dz = chip[2] - pd[2];
  if (!(dz > 0.0)) return 0.0;
  const double d2 = dx * dx + dy * dy + dz * dz;
  const double d = std::sqrt(d2);
  // Both normals are vertical, so the emission and incidence angles coincide.
  const double cos_phi = dz / d;
  const double cos_psi = dz / d;
  if (cos_psi < std::cos(room.fov_deg * kDeg)) return 0.0;
  const double m = lambertian_order(room.semi_angle_deg);
  return (m + 1.0) * room.pd_area / (2.0 * std::numbers::pi * d2) * std::pow(cos_phi, m) * room.filter_gain *
         concentrator_gain(room) * cos_psi;
}

std::vector<Vec3> chip_positions(const RoomConfig& room) {
  std::vector<Vec3> chips;
  const int k = room.point_source_lamps ? 1 : room.leds_per_side;
  const double mid = 0.5 * (k - 1);
  for (const auto& lamp : room.lamp_positions) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        chips.push_back({lamp[0] + (i - mid) * room.led_pitch, lamp[1] + (j - mid) * room.led_pitch, lamp[2]});
      }
    }
  }
  return chips;
}

LinkBudget link_budget(const RoomConfig& room, double x, double y, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("dimming factor must lie in (0, 1)");
  const Vec3 pd{x, y, room.pd_height};
  const auto chips = chip_positions(room);
  const double scale = room.point_source_lamps ? static_cast<double>(room.leds_per_side * room.leds_per_side) : 1.0;
  LinkBudget b;
  for (const auto& c : chips) b.gain_sum += scale * lambertian_gain(c, pd, room);
  const double mean_current = room.i_min + alpha * (room.i_max - room.i_min);
  const double var = 2.0 * room.q_e * room.bandwidth *
                     (room.responsivity * b.gain_sum * room.gamma * mean_current + room.i_bg * room.i2);
  b.sigma = std::sqrt(var);
  b.eff_gain = (room.i_max - room.i_min) * room.responsivity * room.gamma * b.gain_sum;
  b.osnr_db = b.gain_sum > 0.0 ? 20.0 * std::log10(b.eff_gain / b.sigma) : -std::numeric_limits<double>::infinity();
  return b;
}

double OsnrMap::min() const { return *std::min_element(osnr_db.begin(), osnr_db.end()); }
double OsnrMap::max() const { return *std::max_element(osnr_db.begin(), osnr_db.end()); }

OsnrMap osnr_map(const RoomConfig& room, double grid_step, double alpha) {
  if (!(grid_step > 0.0)) throw ConfigError("grid step must be positive");
  OsnrMap map;
  const double w = room.room_half_width;
  const auto steps = static_cast<long>(std::floor(2.0 * w / grid_step + 1e-9));
  for (long i = 0; i <= steps; ++i) map.xs.push_back(-w + static_cast<double>(i) * grid_step);
  map.ys = map.xs;
  for (const double y : map.ys) {
    for (const double x : map.xs) map.osnr_db.push_back(link_budget(room, x, y, alpha).osnr_db);
  }
  return map;
}

void write_osnr_csv(std::ostream& out, const OsnrMap& map) {
  out << "x,y,osnr_db\n";
  for (std::size_t iy = 0; iy < map.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < map.xs.size(); ++ix) {
      out << fmt(map.xs[ix]) << ',' << fmt(map.ys[iy]) << ',' << fmt(map.at(ix, iy)) << '\n';
    }
  }
}

AverageSer average_ser(const RoomConfig& room, const constellation::ConstellationSpec& spec,
                       std::uint64_t n_positions, const sim::StopRule& per_position, std::uint64_t seed,
                       Sampling sampling, unsigned threads) {
  if (n_positions == 0) throw ConfigError("need at least one receiver position");
  const double half = sampling == Sampling::Floor ? room.room_half_width : kLiteralHalfWidth;
  const double guess_error = -std::expm1(-static_cast<double>(spec.bits()) * std::numbers::ln2);
  AverageSer out;
  out.min_osnr_db = std::numeric_limits<double>::infinity();
  out.max_osnr_db = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::uint64_t p = 0; p < n_positions; ++p) {
    sim::TrialRng rng(seed, p);
    const double x = -half + 2.0 * half * rng.uniform();
    const double y = -half + 2.0 * half * rng.uniform();
    const bool on_floor = std::fabs(x) <= room.room_half_width && std::fabs(y) <= room.room_half_width;
    const LinkBudget b = on_floor ? link_budget(room, x, y, spec.alpha) : LinkBudget{};
    ++out.positions;
    if (!(b.gain_sum > 0.0)) {
      ++out.zero_gain_positions;
      sum += guess_error;
      continue;
    }
    out.min_osnr_db = std::min(out.min_osnr_db, b.osnr_db);
    out.max_osnr_db = std::max(out.max_osnr_db, b.osnr_db);
    const auto rec = sim::simulate_ser(spec, b.osnr_db, per_position, sim::derive_seed(seed, p), threads);
    out.trials += rec.trials;
    out.errors += rec.errors;
    sum += rec.ser;
  }
  out.average = sum / static_cast<double>(n_positions);
  return out;
}

}  // namespace vlcshape::indoor
