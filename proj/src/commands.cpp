#include "vlcshape/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vlcshape/constellation.hpp"
#include "vlcshape/errors.hpp"
#include "vlcshape/indoor_scenario.hpp"
#include "vlcshape/link_simulator.hpp"
#include "vlcshape/shaping_geometry.hpp"
#include "vlcshape/verify.hpp"

#ifndef VLCSHAPE_VERSION
#define VLCSHAPE_VERSION "0.0.0"
#endif

namespace vlcshape::commands {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v) || std::fabs(v) > 1e9) throw ConfigError("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::string joined_argv(const GlobalOptions& g) {
  std::string s;
  for (const auto& a : g.argv) s += (s.empty() ? "" : " ") + a;
  return s;
}

// Writes content to g.out (or stdout) and the manifest next to it.
void emit(const GlobalOptions& g, const std::string& content, nlohmann::json snapshot,
          Clock::time_point started, std::vector<std::string> extra_outputs = {}) {
  if (g.out.empty()) {
    std::cout << content;
    return;
  }
  {
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + g.out);
    f << content;
  }
  std::vector<std::string> outputs{g.out};
  outputs.insert(outputs.end(), extra_outputs.begin(), extra_outputs.end());
  const nlohmann::json manifest{
      {"command", joined_argv(g)},
      {"config", std::move(snapshot)},
      {"seed", g.seed},
      {"threads", g.threads},
      {"library_version", library_version()},
      {"wall_time_s", std::chrono::duration<double>(Clock::now() - started).count()},
      {"outputs", outputs}};
  std::ofstream m(g.out + ".manifest.json", std::ios::binary);
  if (!m) throw ConfigError("cannot write manifest for " + g.out);
  m << manifest.dump(2) << '\n';
}

sim::StopRule stop_rule_from(const nlohmann::json& cfg, sim::StopRule stop) {
  if (!cfg.contains("stop_rule")) return stop;
  const auto& s = cfg.at("stop_rule");
  try {
    if (s.contains("max_trials")) stop.max_trials = s.at("max_trials").get<std::uint64_t>();
    if (s.contains("target_errors")) stop.target_errors = s.at("target_errors").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad stop_rule: ") + e.what());
  }
  return stop;
}

std::optional<std::filesystem::path> cache_path(const std::string& dir) {
  if (dir.empty()) return std::nullopt;
  return std::filesystem::path(dir);
}

}  // namespace

std::string library_version() { return VLCSHAPE_VERSION; }

std::pair<int, int> parse_int_range(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) {
    const int v = parse_int(parts[0]);
    return {v, v};
  }
  if (parts.size() != 2) throw ConfigError("range must look like a:b, got '" + s + "'");
  const int a = parse_int(parts[0]);
  const int b = parse_int(parts[1]);
  if (a > b) throw ConfigError("empty range '" + s + "'");
  return {a, b};
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_double(p));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  if (s.find(':') == std::string::npos) return parse_double_list(s);
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw ConfigError("grid must look like start:stop:step, got '" + s + "'");
  const double a = parse_double(parts[0]);
  const double b = parse_double(parts[1]);
  const double step = parse_double(parts[2]);
  if (!(step > 0.0) || b < a) throw ConfigError("bad grid '" + s + "'");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

nlohmann::json load_config(const GlobalOptions& g) {
  if (g.config.empty()) return nlohmann::json::object();
  std::ifstream f(g.config);
  if (!f) throw ConfigError("cannot read config " + g.config);
  try {
    auto j = nlohmann::json::parse(f);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
}

int cmd_shaping(const GlobalOptions& g, const ShapingOptions& o) {
  const auto started = Clock::now();
  const auto [n_lo, n_hi] = parse_int_range(o.n_range);
  if (n_lo < 1) throw ConfigError("n must be at least 1");
  const auto alphas = parse_double_list(o.alphas);
  for (const double a : alphas) {
    if (!(a > 0.0 && a < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
  }
  std::ostringstream csv;
  csv << "n,alpha,t_star,t_star_approx,sg_db,sg_db_approx,mu_star\n";
  for (const double a : alphas) {
    for (int n = n_lo; n <= n_hi; ++n) {
      const auto s = shaping::solve_t_star(n, a);
      csv << n << ',' << fmt(a) << ',' << fmt(s.t_star) << ',' << fmt(s.t_star_approx) << ',' << fmt(s.sg_db)
          << ',' << fmt(s.sg_db_approx) << ',' << fmt(s.mu_star) << '\n';
    }
  }
  emit(g, csv.str(), {{"command", "shaping"}, {"n", o.n_range}, {"alpha", o.alphas}}, started);
  return kExitOk;
}

int cmd_ser(const GlobalOptions& g, const SerOptions& o) {
  const auto started = Clock::now();
  const auto cfg = load_config(g);
  if (o.osnr_grid.empty()) throw ConfigError("--osnr is required");
  const auto grid = parse_grid(o.osnr_grid);
  const auto kind = constellation::kind_from_string(o.scheme);
  const auto stop = stop_rule_from(cfg, {o.max_trials, o.target_errors});
  const auto spec = constellation::build_spec(kind, o.beta, o.alpha, cache_path(o.cache_dir));
  const auto recs = sim::ser_sweep(spec, grid, stop, g.seed, g.threads);
  if (!sim::is_nonincreasing(recs)) std::cerr << "warning: SER is not monotone over the OSNR grid\n";
  std::ostringstream csv;
  sim::write_csv(csv, spec, recs, kind == constellation::Kind::OSLC);
  emit(g, csv.str(),
       {{"command", "ser"},
        {"osnr_grid", grid},
        {"max_trials", stop.max_trials},
        {"target_errors", stop.target_errors},
        {"spec", constellation::to_json(spec)}},
       started);
  return kExitOk;
}

int cmd_indoor(const GlobalOptions& g, const IndoorOptions& o) {
  const auto started = Clock::now();
  const auto cfg = load_config(g);
  const auto room = cfg.contains("room") ? indoor::room_from_json(cfg.at("room")) : indoor::RoomConfig{};
  indoor::Sampling sampling;
  if (o.sampling == "floor") {
    sampling = indoor::Sampling::Floor;
  } else if (o.sampling == "literal") {
    sampling = indoor::Sampling::Literal;
  } else {
    throw ConfigError("sampling must be floor or literal");
  }
  const auto kind = constellation::kind_from_string(o.scheme);
  const auto spec = constellation::build_spec(kind, o.beta, o.alpha, cache_path(o.cache_dir));
  const auto map = indoor::osnr_map(room, o.grid_step, o.alpha);
  const auto stop = stop_rule_from(cfg, {o.trials_per_position, o.target_errors});
  const auto avg = indoor::average_ser(room, spec, o.positions, stop, g.seed, sampling, g.threads);

  std::ostringstream csv;
  indoor::write_osnr_csv(csv, map);
  const nlohmann::json summary{{"scheme", o.scheme},
                               {"beta", o.beta},
                               {"alpha", o.alpha},
                               {"sampling", o.sampling},
                               {"average_ser", avg.average},
                               {"positions", avg.positions},
                               {"trials", avg.trials},
                               {"errors", avg.errors},
                               {"zero_gain_positions", avg.zero_gain_positions},
                               {"osnr_center_db", indoor::link_budget(room, 0.0, 0.0, o.alpha).osnr_db},
                               {"osnr_map_min_db", map.min()},
                               {"osnr_map_max_db", map.max()}};
  std::vector<std::string> extra;
  if (!g.out.empty()) {
    const std::string path = g.out + ".summary.json";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << summary.dump() << '\n';
    extra.push_back(path);
  }
  emit(g, csv.str(),
       {{"command", "indoor"},
        {"room", indoor::to_json(room)},
        {"grid_step", o.grid_step},
        {"positions", o.positions},
        {"trials_per_position", stop.max_trials},
        {"target_errors", stop.target_errors},
        {"spec", constellation::to_json(spec)}},
       started, extra);
  if (!g.out.empty()) std::cout << summary.dump() << '\n';
  return kExitOk;
}

int cmd_verify(const GlobalOptions& g, const VerifyOptions& o) {
  const auto started = Clock::now();
  verify::Options opts;
  opts.seed = g.seed;
  opts.threads = g.threads;
  if (o.inject_fault == "golay") {
    opts.fault = verify::Fault::Golay;
  } else if (!o.inject_fault.empty()) {
    throw ConfigError("unknown fault '" + o.inject_fault + "' (expected golay)");
  }
  const auto results = verify::run_all(opts);
  for (const auto& r : results) {
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.checks << " checks";
    if (!r.passed) std::cerr << ", " << r.failures << " failed: " << r.detail;
    std::cerr << ")\n";
  }
  emit(g, verify::to_json(results).dump(2) + "\n", {{"command", "verify"}, {"inject_fault", o.inject_fault}},
       started);
  return verify::all_passed(results) ? kExitOk : kExitPropertyFailure;
}

}  // namespace vlcshape::commands
