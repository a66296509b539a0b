#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vlcshape/commands.hpp"
#include "vlcshape/errors.hpp"

using namespace vlcshape;
using namespace vlcshape::commands;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("vlcshape_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VLCSHAPE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Parsing, RangesListsGrids) {
  EXPECT_EQ(parse_int_range("2:32"), std::make_pair(2, 32));
  EXPECT_EQ(parse_int_range("7"), std::make_pair(7, 7));
  EXPECT_THROW(parse_int_range("5:2"), ConfigError);
  EXPECT_THROW(parse_int_range("a:b"), ConfigError);
  EXPECT_EQ(parse_double_list("0.2,0.3").size(), 2U);
  EXPECT_THROW(parse_double_list("0.2,,0.3"), ConfigError);
  const auto g = parse_grid("40:42:0.5");
  ASSERT_EQ(g.size(), 5U);
  EXPECT_DOUBLE_EQ(g.back(), 42.0);
  EXPECT_EQ(parse_grid("1,3").size(), 2U);
  EXPECT_THROW(parse_grid("1:2:0"), ConfigError);
}

TEST(Shaping, RowCountAndConsistency) {
  GlobalOptions g;
  g.out = scratch("shaping.csv").string();
  ASSERT_EQ(cmd_shaping(g, {"2:32", "0.2,0.3"}), kExitOk);
  std::istringstream in(slurp(g.out));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,alpha,t_star,t_star_approx,sg_db,sg_db_approx,mu_star");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 7U);
    EXPECT_NEAR(v[3], v[0] * v[1] + 1.0 / v[6], 1e-8);
    if (v[0] >= 16) {
      EXPECT_LE(std::fabs(v[4] - v[5]), 0.1);
    }
  }
  EXPECT_EQ(rows, 62);
  EXPECT_TRUE(fs::exists(g.out + ".manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(g.out + ".manifest.json"));
  EXPECT_EQ(manifest["library_version"], library_version());
}

TEST(Ser, RerunIsByteIdenticalAndHasUnionBound) {
  GlobalOptions g;
  g.seed = 5;
  g.out = scratch("ser_a.csv").string();
  SerOptions o;
  o.scheme = "oslc";
  o.beta = 2;
  o.alpha = 0.3;
  o.osnr_grid = "20:24:2";
  o.max_trials = 3000;
  ASSERT_EQ(cmd_ser(g, o), kExitOk);
  const auto first = slurp(g.out);
  g.out = scratch("ser_b.csv").string();
  ASSERT_EQ(cmd_ser(g, o), kExitOk);
  EXPECT_EQ(first, slurp(g.out));
  EXPECT_NE(first.find(",union_bound\n"), std::string::npos);
}

TEST(Indoor, SummaryAndHeatmap) {
  GlobalOptions g;
  g.out = scratch("room.csv").string();
  IndoorOptions o;
  o.scheme = "cubic";
  o.grid_step = 0.5;
  o.positions = 4;
  o.trials_per_position = 500;
  ASSERT_EQ(cmd_indoor(g, o), kExitOk);
  const auto summary = nlohmann::json::parse(slurp(g.out + ".summary.json"));
  EXPECT_EQ(summary["positions"], 4);
  EXPECT_TRUE(summary.contains("average_ser"));
  const auto csv = slurp(g.out);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 9 * 9);
  o.sampling = "moon";
  EXPECT_THROW(cmd_indoor(g, o), ConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("shaping --n 2:3 --alpha 0.2"), 0);
  EXPECT_EQ(run_cli("shaping --n 3:2"), 2);
  EXPECT_EQ(run_cli("nonsense"), 2);
  EXPECT_EQ(run_cli("ser --scheme qam --osnr 10"), 2);
  EXPECT_EQ(run_cli("verify"), 0);
  EXPECT_EQ(run_cli("verify --inject-fault golay"), 3);
}

TEST(Cli, VerifyReportCoversProperties) {
  const auto out = scratch("verify.json");
  ASSERT_EQ(run_cli("verify --out " + out.string()), 0);
  const auto report = nlohmann::json::parse(slurp(out));
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_GE(report["properties"].size(), 12U);
  const auto bad = scratch("verify_bad.json");
  ASSERT_EQ(run_cli("verify --inject-fault golay --out " + bad.string()), 3);
  const auto failed = nlohmann::json::parse(slurp(bad));
  bool weights_failed = false;
  for (const auto& p : failed["properties"]) {
    if (p["name"] == "golay_weight_enumerator") weights_failed = !p["passed"].get<bool>();
  }
  EXPECT_TRUE(weights_failed);
}

TEST(Cli, ConfigOverridesRoom) {
  const auto cfg = scratch("room.json");
  std::ofstream(cfg) << R"({"room": {"bandwidth": 1e8, "i_bg": 1.0}})";
  const auto out = scratch("room_cfg.csv");
  ASSERT_EQ(run_cli("--config " + cfg.string() + " indoor --scheme cubic --positions 2 --trials-per-position 100 "
                    "--grid-step 1 --out " + out.string()),
            0);
  const auto summary = nlohmann::json::parse(slurp(out.string() + ".summary.json"));
  EXPECT_LT(summary["osnr_center_db"].get<double>(), 30.0);
  std::ofstream(cfg) << R"({"room": {"bandwith": 1e8}})";
  EXPECT_EQ(run_cli("--config " + cfg.string() + " indoor --positions 1"), 2);
}
