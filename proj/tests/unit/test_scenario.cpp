#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ldacs/harness.hpp"

using namespace ldacs;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

}  // namespace

TEST_CASE("full scenario file") {
  const auto sc = parse(
      "# AWGN at large CFO\n"
      "name = awgn15\n"
      "channel = AWGN\n"
      "epsilon = 1.5   # subcarriers\n"
      "snr_grid_db = 0, 5, 10, inf\n"
      "n_trials = 250\n"
      "master_seed = 99\n"
      "lead_gap_min = 300\n"
      "lead_gap_max = 400\n"
      "fine_threshold = 3\n"
      "threads = 2\n"
      "\n"
      "d_template = 256\n");
  CHECK(sc.name == "awgn15");
  CHECK(sc.channel == ChannelKind::AWGN);
  CHECK(sc.epsilon == 1.5);
  REQUIRE(sc.snr_grid_db.size() == 4);
  CHECK(sc.snr_grid_db[1] == 5.0);
  CHECK(std::isinf(sc.snr_grid_db[3]));
  CHECK(sc.n_trials == 250);
  CHECK(sc.master_seed == 99);
  CHECK(sc.lead_gap_min == 300);
  CHECK(sc.fine_threshold == 3);
  CHECK(sc.threads == 2);
  CHECK(sc.numerology.at("d_template") == 256.0);
  CHECK(make_link_setup(sc).num.d_template == 256);
}

TEST_CASE("empty file gives defaults") {
  const auto sc = parse("");
  CHECK(sc.n_trials == Scenario{}.n_trials);
  CHECK(sc.channel == ChannelKind::AWGN);
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_WITH_AS(parse("epsilonn = 1\n"), doctest::Contains("epsilonn"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("epsilon = 1\nepsilon = 2\n"), doctest::Contains("duplicate"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("n_trials = ten\n"), doctest::Contains("n_trials"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("n_trials = 1.5\n"), doctest::Contains("n_trials"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("channel = XYZ\n"), doctest::Contains("channel"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("\n\nepsilon 3\n"), doctest::Contains("line 3"), ConfigError);
  CHECK_THROWS_AS(parse("epsilon =\n"), ConfigError);
  CHECK_THROWS_AS(parse("n_trials = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse("snr_grid_db = 1, x\n"), ConfigError);
}

TEST_CASE("numerology keys are checked when the link is built") {
  const auto sc = parse("n_cp = 0\n");
  CHECK_THROWS_WITH_AS(make_link_setup(sc), "n_cp must be ≥ 1", ConfigError);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.txt"), ConfigError);
}
