#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "qrelay/model.hpp"
#include "testutil.hpp"

using namespace qrelay;
using cli::Config;
using testutil::rel_diff;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file.good());
  std::ostringstream contents;
  contents << file.rdbuf();
  return contents.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  REQUIRE(file.good());
  file << text;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("qrelay_cli_test_" + name);
}

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path golden(const std::string& name) {
  return fs::path(QRELAY_GOLDEN_DIR) / name;
}

}  // namespace

TEST_CASE("config text parsing") {
  const Config empty = cli::parse_config_text("");
  CHECK_FALSE(empty.eta.has_value());
  const LinkParams defaults = cli::to_link_params(empty);
  CHECK(defaults.detector_efficiency == 0.15);
  CHECK(defaults.dark_count_prob == 1.1e-4);
  CHECK(defaults.visibility == 0.95);
  CHECK(defaults.polarizer_transmission == 0.5);
  CHECK(defaults.pair_rate_hz == 2.4e4);
  CHECK(defaults.rep_rate_hz == 7.6e7);
  CHECK(defaults.alpha_db_per_km == 0.25);

  const Config parsed = cli::parse_config_text(
      "# reference run\n"
      "eta = 0.2\n"
      "visibility=0.9   # trailing comment\n"
      "\n"
      "pair_rate = 2.2e4\n");
  CHECK(parsed.eta == 0.2);
  CHECK(parsed.visibility == 0.9);
  CHECK(parsed.pair_rate == 2.2e4);
  CHECK_FALSE(parsed.dark_count.has_value());
}

TEST_CASE("config rejects unknown keys, bad numbers and bad shapes") {
  CHECK_THROWS_WITH_AS(cli::parse_config_text("bogus = 1\n"),
                       "unknown config key 'bogus'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(cli::parse_config_text("eta = fast\n"),
                       "malformed number for config key 'eta'",
                       std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_config_text("eta 0.2\n"), std::invalid_argument);
}

TEST_CASE("config merge precedence") {
  Config file;
  file.eta = 0.2;
  file.alpha = 0.3;
  Config flags;
  flags.eta = 0.3;
  const Config merged = cli::merge(file, flags);
  CHECK(merged.eta == 0.3);   // flag wins
  CHECK(merged.alpha == 0.3); // file survives where no flag given
}

TEST_CASE("out-of-range config values name the key") {
  Config config;
  config.eta = 1.5;
  CHECK_THROWS_WITH_AS(cli::to_link_params(config),
                       "config key 'eta' out of range: must be in (0, 1]",
                       std::invalid_argument);
  config = Config{};
  config.dark_count = 1.0;
  CHECK_THROWS_AS(cli::to_link_params(config), std::invalid_argument);
}

TEST_CASE("float rendering uses nine significant digits") {
  CHECK(cli::format_double(0.050991845351829546) == "0.0509918454");
  CHECK(cli::format_double(150.0) == "150");
  CHECK(cli::format_double(0.2) == "0.2");
  CHECK(cli::format_double(1e-8) == "1e-08");
  CHECK(cli::format_double(858701.953738346) == "858701.954");
}

TEST_CASE("qber subcommand prints one point") {
  const auto result = run_cli({"qber", "--scheme", "direct", "--atten-db", "37.5"});
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("scheme: direct\n") != std::string::npos);
  CHECK(result.out.find("attenuation_db: 37.5\n") != std::string::npos);
  CHECK(result.out.find("distance_km: 150\n") != std::string::npos);
  CHECK(result.out.find("qber: 0.196587846\n") != std::string::npos);
}

TEST_CASE("qber composes plate and source transmissions") {
  // 0.27 plates with the source folded in: t = t_s * 0.27^2.
  const auto composed = run_cli({"qber", "--scheme", "direct",
                                 "--plate-transmission", "0.27",
                                 "--include-source"});
  CHECK(composed.exit_code == 0);
  CHECK(composed.out.find("attenuation_db: 29.9005734\n") != std::string::npos);

  // Plates alone: t = 0.27^2, i.e. 11.37 dB.
  const auto plates_only = run_cli({"qber", "--scheme", "direct",
                                    "--plate-transmission", "0.27"});
  CHECK(plates_only.exit_code == 0);
  CHECK(plates_only.out.find("attenuation_db: 11.3727247\n") != std::string::npos);

  const auto both = run_cli({"qber", "--scheme", "direct", "--atten-db", "10",
                             "--plate-transmission", "0.27"});
  CHECK(both.exit_code == 1);

  const auto neither = run_cli({"qber", "--scheme", "direct"});
  CHECK(neither.exit_code == 1);
}

TEST_CASE("flag overrides beat config file values") {
  const fs::path config_path = temp_path("precedence.cfg");
  spit(config_path, "eta = 0.2\n");

  const auto file_only = run_cli({"--config", config_path.string(), "qber",
                                  "--scheme", "direct", "--atten-db", "0"});
  const auto flag_wins = run_cli({"--config", config_path.string(), "--eta", "0.3",
                                  "qber", "--scheme", "direct", "--atten-db", "0"});
  CHECK(file_only.exit_code == 0);
  CHECK(flag_wins.exit_code == 0);

  LinkParams eta02;
  eta02.detector_efficiency = 0.2;
  LinkParams eta03;
  eta03.detector_efficiency = 0.3;
  CHECK(file_only.out.find("p_sift: " + cli::format_double(sift_probability(
                               Scheme::Direct, 1.0, eta02))) != std::string::npos);
  CHECK(flag_wins.out.find("p_sift: " + cli::format_double(sift_probability(
                               Scheme::Direct, 1.0, eta03))) != std::string::npos);
  fs::remove(config_path);
}

TEST_CASE("parameter flags can follow the subcommand") {
  const auto result = run_cli({"qber", "--scheme", "direct", "--atten-db", "0",
                               "--visibility", "1", "--dark-count", "0"});
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("qber: 0\n") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli({}).exit_code == 1);
  CHECK(run_cli({"frobnicate"}).exit_code == 1);
  CHECK(run_cli({"qber", "--scheme", "sideways", "--atten-db", "1"}).exit_code == 1);
  CHECK(run_cli({"qber", "--scheme", "direct", "--atten-db", "1", "--bogus", "2"})
            .exit_code == 1);
  CHECK(run_cli({"--eta", "1.5", "qber", "--scheme", "direct", "--atten-db", "1"})
            .exit_code == 1);
  const fs::path config_path = temp_path("bad.cfg");
  spit(config_path, "bogus = 1\n");
  const auto bad_key = run_cli({"--config", config_path.string(), "qber",
                                "--scheme", "direct", "--atten-db", "1"});
  CHECK(bad_key.exit_code == 1);
  CHECK(bad_key.err.find("bogus") != std::string::npos);
  fs::remove(config_path);
  CHECK(run_cli({"--config", "/nonexistent/qrelay.cfg", "qber", "--scheme",
                 "direct", "--atten-db", "1"})
            .exit_code == 1);
}

TEST_CASE("numeric errors exit 2") {
  const auto no_crossing =
      run_cli({"threshold", "--scheme", "direct", "--target", "0.01"});
  CHECK(no_crossing.exit_code == 2);
  CHECK(no_crossing.err.find("no crossing") != std::string::npos);
  CHECK(run_cli({"mc", "--scheme", "direct", "--atten-db", "0", "--pulses", "0"})
            .exit_code == 2);
}

TEST_CASE("threshold subcommand prints both schemes") {
  const auto result = run_cli({"threshold", "--scheme", "both", "--target", "0.20"});
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("scheme: direct\n") != std::string::npos);
  CHECK(result.out.find("scheme: relay\n") != std::string::npos);
  CHECK(result.out.find("crossing_db: 37.7689") != std::string::npos);
  CHECK(result.out.find("crossing_db: 57.534") != std::string::npos);
  CHECK(result.out.find("\n\n") != std::string::npos);  // blank line between blocks
}

TEST_CASE("sweep output matches the checked-in golden file") {
  const fs::path out_path = temp_path("sweep_golden.csv");
  const auto result =
      run_cli({"sweep", "--scheme", "both", "--from-db", "0", "--to-db", "80",
               "--step-db", "0.5", "--out", out_path.string()});
  REQUIRE(result.exit_code == 0);
  CHECK(slurp(out_path) == slurp(golden("sweep_both_0_80_0p5.csv")));
  fs::remove(out_path);
}

TEST_CASE("seeded mc sweep matches the checked-in golden file") {
  const fs::path out_path = temp_path("sweep_mc_golden.csv");
  const auto result =
      run_cli({"sweep", "--scheme", "both", "--from-db", "0", "--to-db", "30",
               "--step-db", "5", "--mc-pulses", "100000", "--seed", "7",
               "--out", out_path.string()});
  REQUIRE(result.exit_code == 0);
  const std::string produced = slurp(out_path);
  CHECK(produced == slurp(golden("sweep_mc_both_0_30_5_seed7.csv")));
  // Starved relay rows keep the MC columns empty rather than zero.
  CHECK(produced.find("\n") != std::string::npos);
  CHECK(produced.find(",,,") != std::string::npos);
  fs::remove(out_path);
}

TEST_CASE("repeated seeded runs are byte-identical") {
  const fs::path first = temp_path("sweep_rep_1.csv");
  const fs::path second = temp_path("sweep_rep_2.csv");
  const std::vector<std::string> base{"sweep",      "--scheme", "both",
                                      "--from-db",  "0",        "--to-db",
                                      "20",         "--step-db", "5",
                                      "--mc-pulses", "20000",    "--seed",
                                      "123"};
  auto with_out = [&](const fs::path& path) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(path.string());
    return args;
  };
  REQUIRE(run_cli(with_out(first)).exit_code == 0);
  REQUIRE(run_cli(with_out(second)).exit_code == 0);
  CHECK(slurp(first) == slurp(second));
  fs::remove(first);
  fs::remove(second);

  const auto mc_args = std::vector<std::string>{
      "mc", "--scheme", "direct", "--atten-db", "10", "--pulses", "100000",
      "--seed", "42"};
  CHECK(run_cli(mc_args).out == run_cli(mc_args).out);
}

TEST_CASE("mc subcommand output matches the checked-in golden file") {
  const auto result = run_cli({"mc", "--scheme", "direct", "--atten-db", "10",
                               "--pulses", "1000000", "--seed", "42"});
  CHECK(result.exit_code == 0);
  CHECK(result.out == slurp(golden("mc_direct_10db_1e6_seed42.txt")));
}

TEST_CASE("mc reports undefined estimates when starved") {
  const auto result = run_cli({"mc", "--scheme", "relay", "--atten-db", "60",
                               "--pulses", "1000", "--seed", "1"});
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("qber_hat: undefined\n") != std::string::npos);
  CHECK(result.out.find("stderr: undefined\n") != std::string::npos);
}

TEST_CASE("sweep rejects an unwritable output path") {
  const auto result =
      run_cli({"sweep", "--scheme", "direct", "--from-db", "0", "--to-db", "1",
               "--step-db", "1", "--out", "/nonexistent/dir/out.csv"});
  CHECK(result.exit_code == 1);
}
