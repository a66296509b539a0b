#pragma once

// Subcommands behind the `vlcshape` executable. Each writes its artifact to
// `out` (stdout when empty) and, for file outputs, `<out>.manifest.json`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace vlcshape::commands {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPropertyFailure = 3;

std::string library_version();

/// "a:b" -> {a, b}; a single integer gives {a, a}. ConfigError on bad input.
std::pair<int, int> parse_int_range(const std::string& s);
/// Comma-separated doubles.
std::vector<double> parse_double_list(const std::string& s);
/// "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(const std::string& s);

struct GlobalOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
  std::string config;  // JSON file with optional "room" and "stop_rule" objects
  std::vector<std::string> argv;
};

/// Parsed --config file, or an empty object.
nlohmann::json load_config(const GlobalOptions& g);

struct ShapingOptions {
  std::string n_range = "2:32";
  std::string alphas = "0.2,0.3";
};
/// Columns n, alpha, t_star, t_star_approx, sg_db, sg_db_approx, mu_star.
int cmd_shaping(const GlobalOptions& g, const ShapingOptions& o);

struct SerOptions {
  std::string scheme = "oslc";
  int beta = 4;
  double alpha = 0.2;
  std::string osnr_grid;
  std::uint64_t max_trials = 20'000'000;
  std::uint64_t target_errors = 100;
  std::string cache_dir;
};
int cmd_ser(const GlobalOptions& g, const SerOptions& o);

struct IndoorOptions {
  std::string scheme = "oslc";
  int beta = 5;
  double alpha = 0.2;
  double grid_step = 0.05;
  std::uint64_t positions = 200;
  std::uint64_t trials_per_position = 20000;
  std::uint64_t target_errors = 0;
  std::string sampling = "floor";
  std::string cache_dir;
};
/// Heatmap CSV to out; one-line JSON summary to stdout (and <out>.summary.json).
int cmd_indoor(const GlobalOptions& g, const IndoorOptions& o);

struct VerifyOptions {
  std::string inject_fault;  // "" or "golay"
};
/// JSON report; exit 3 when any property fails.
int cmd_verify(const GlobalOptions& g, const VerifyOptions& o);

}  // namespace vlcshape::commands
