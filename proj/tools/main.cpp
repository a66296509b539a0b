#include <CLI11.hpp>

#include <iostream>

#include "vlcshape/commands.hpp"
#include "vlcshape/errors.hpp"

using namespace vlcshape::commands;

int main(int argc, char** argv) {
  CLI::App app{"Shaped lattice constellations for the optical intensity channel"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  g.argv.assign(argv, argv + argc);
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", g.out, "Output file (stdout when omitted); a manifest is written next to it");
  app.add_option("--config", g.config, "JSON overrides: {\"room\": {...}, \"stop_rule\": {...}}");

  ShapingOptions sh;
  auto* shaping = app.add_subcommand("shaping", "Optimal truncated cube and shaping gain table");
  shaping->add_option("--n", sh.n_range, "Dimension range a:b")->capture_default_str();
  shaping->add_option("--alpha", sh.alphas, "Comma-separated dimming factors")->capture_default_str();

  SerOptions se;
  auto* ser = app.add_subcommand("ser", "Monte-Carlo SER sweep");
  ser->add_option("--scheme", se.scheme, "oslc, cubic or tcc")->capture_default_str();
  ser->add_option("--beta", se.beta, "Normalized rate (bpcu)")->capture_default_str();
  ser->add_option("--alpha", se.alpha, "Dimming factor")->capture_default_str();
  ser->add_option("--osnr", se.osnr_grid, "OSNR grid in dB: start:stop:step or a,b,c")->required();
  ser->add_option("--max-trials", se.max_trials, "Trials per point")->capture_default_str();
  ser->add_option("--target-errors", se.target_errors, "Stop after this many errors (0 = never)")
      ->capture_default_str();
  ser->add_option("--cache-dir", se.cache_dir, "Directory for shell count tables");

  IndoorOptions in;
  auto* indoor = app.add_subcommand("indoor", "Room OSNR map and average SER");
  indoor->add_option("--scheme", in.scheme, "oslc, cubic or tcc")->capture_default_str();
  indoor->add_option("--beta", in.beta, "Normalized rate (bpcu)")->capture_default_str();
  indoor->add_option("--alpha", in.alpha, "Dimming factor")->capture_default_str();
  indoor->add_option("--grid-step", in.grid_step, "Heatmap grid step in m")->capture_default_str();
  indoor->add_option("--positions", in.positions, "Random receiver positions")->capture_default_str();
  indoor->add_option("--trials-per-position", in.trials_per_position, "Trials per position")
      ->capture_default_str();
  indoor->add_option("--target-errors", in.target_errors, "Per-position early stop (0 = never)")
      ->capture_default_str();
  indoor->add_option("--sampling", in.sampling, "floor ([-2, 2]) or literal ([-4, 4])")->capture_default_str();
  indoor->add_option("--cache-dir", in.cache_dir, "Directory for shell count tables");

  VerifyOptions ve;
  auto* verify = app.add_subcommand("verify", "Run the property suite");
  verify->add_option("--inject-fault", ve.inject_fault, "Deliberate fault to exercise the suite (golay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*shaping) return cmd_shaping(g, sh);
    if (*ser) return cmd_ser(g, se);
    if (*indoor) return cmd_indoor(g, in);
    if (*verify) return cmd_verify(g, ve);
  } catch (const vlcshape::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
