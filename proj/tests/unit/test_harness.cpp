#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ldacs/harness.hpp"

using namespace ldacs;

namespace {

bool same(const TrialRecord& a, const TrialRecord& b) {
  return a.seed == b.seed && a.true_sto == b.true_sto && a.true_epsilon == b.true_epsilon &&
         a.detected == b.detected && a.sto_est == b.sto_est && a.cfo_est == b.cfo_est &&
         a.sto_error == b.sto_error && a.cfo_error == b.cfo_error && a.timing_ok == b.timing_ok;
}

bool same(const SnrPointStats& a, const SnrPointStats& b) {
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.snr_db == b.snr_db && a.n_trials == b.n_trials && a.n_detected == b.n_detected &&
         a.n_fine_success == b.n_fine_success && a.n_cfo == b.n_cfo && eq(a.fail_rate, b.fail_rate) &&
         eq(a.cfo_mse, b.cfo_mse) && eq(a.cfo_mse_stderr, b.cfo_mse_stderr);
}

constexpr double kInfSnr = std::numeric_limits<double>::infinity();

Scenario awgn(double eps, std::vector<double> grid, int trials) {
  Scenario sc;
  sc.name = "t";
  sc.epsilon = eps;
  sc.snr_grid_db = std::move(grid);
  sc.n_trials = trials;
  sc.master_seed = 5;
  return sc;
}

}  // namespace

TEST_CASE("channel names") {
  for (auto k : {ChannelKind::AWGN, ChannelKind::ENR, ChannelKind::ENR_DME, ChannelKind::TMA}) {
    CHECK(parse_channel_kind(to_string(k)) == k);
  }
  CHECK_THROWS_WITH_AS(parse_channel_kind("awgnn"), doctest::Contains("channel"), ConfigError);
}

TEST_CASE("scenario validation") {
  Scenario sc;
  CHECK_NOTHROW(validate(sc));
  sc.n_trials = 0;
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc = Scenario{};
  sc.snr_grid_db = {};
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc = Scenario{};
  sc.lead_gap_min = 900;
  CHECK_THROWS_AS(validate(sc), ConfigError);
  sc = Scenario{};
  sc.snr_grid_db = {std::nan("")};
  CHECK_THROWS_AS(validate(sc), ConfigError);
}

TEST_CASE("noiseless trial is exact") {
  for (double eps : {0.0, 1.5, -1.2}) {
    const auto rec = run_trial(awgn(eps, {kInfSnr}, 1), std::numeric_limits<double>::infinity(), 3);
    CHECK(rec.detected);
    CHECK(rec.timing_ok);
    REQUIRE(rec.sto_error);
    CHECK(*rec.sto_error == 0);
    REQUIRE(rec.cfo_error);
    CHECK(std::abs(*rec.cfo_error) < 1e-6);
    CHECK(rec.true_sto >= 200);
    CHECK(rec.true_sto <= 800);
  }
}

TEST_CASE("trials are deterministic and seeds depend on the index") {
  const auto sc = awgn(1.5, {10.0}, 1);
  const auto a = run_trial(sc, 10.0, 7);
  const auto b = run_trial(sc, 10.0, 7);
  CHECK(same(a, b));
  CHECK(run_trial(sc, 10.0, 8).seed != a.seed);
  CHECK(trial_seed(5, 10.0, 7) != trial_seed(5, 12.0, 7));
  CHECK(trial_seed(5, 10.0, 7) != trial_seed(6, 10.0, 7));
}

TEST_CASE("aeronautical trials carry the LOS Doppler in the true offset") {
  Scenario sc = awgn(1.5, {20.0}, 1);
  sc.channel = ChannelKind::ENR;
  const auto rec = run_trial(sc, 20.0, 0);
  const auto num = make_numerology();
  CHECK(rec.true_epsilon == doctest::Approx(1.5 + make_enr_profile().los_cfo(num)));
}

TEST_CASE("single-trial campaign equals the trial") {
  const auto sc = awgn(0.5, {8.0}, 1);
  const auto stats = run_campaign(sc, true);
  const auto rec = run_trial(sc, 8.0, 0);
  REQUIRE(stats.points.size() == 1);
  const auto& p = stats.points[0];
  CHECK(p.n_trials == 1);
  CHECK(p.n_detected == (rec.detected ? 1 : 0));
  CHECK(p.fail_rate == (rec.timing_ok ? 0.0 : 1.0));
  REQUIRE(rec.cfo_error);
  CHECK(p.cfo_mse == *rec.cfo_error * *rec.cfo_error);
  CHECK(same(stats.records[0][0], rec));
}

TEST_CASE("parallel campaign equals sequential") {
  Scenario sc = awgn(1.5, {0.0, 6.0}, 60);
  sc.channel = ChannelKind::ENR_DME;
  const auto seq = run_campaign(sc, true);
  sc.threads = 4;
  const auto par = run_campaign(sc, true);
  REQUIRE(seq.points.size() == par.points.size());
  for (std::size_t i = 0; i < seq.points.size(); ++i) {
    CHECK(same(seq.points[i], par.points[i]));
    for (std::size_t j = 0; j < seq.records[i].size(); ++j) {
      CHECK(same(seq.records[i][j], par.records[i][j]));
    }
  }
}

TEST_CASE("counting invariants") {
  Scenario sc = awgn(1.5, {-4.0, 2.0}, 100);
  const auto stats = run_campaign(sc, true);
  for (std::size_t i = 0; i < stats.points.size(); ++i) {
    const auto& p = stats.points[i];
    CHECK(p.n_detected <= p.n_trials);
    CHECK(p.n_fine_success <= p.n_detected);
    CHECK(p.fail_rate == static_cast<double>(p.n_trials - p.n_fine_success) / p.n_trials);
    CHECK(p.fail_rate >= 0.0);
    CHECK(p.fail_rate <= 1.0);
    int with_cfo = 0;
    for (const auto& r : stats.records[i]) {
      if (r.cfo_error) {
        ++with_cfo;
        CHECK(r.detected);
      }
      if (r.detected && r.sto_est) CHECK(*r.sto_error == *r.sto_est - r.true_sto);
      if (!r.detected) CHECK_FALSE(r.timing_ok);
    }
    CHECK(p.n_cfo == with_cfo);
    if (p.n_cfo > 0) CHECK(p.cfo_mse >= 0.0);
  }
}

TEST_CASE("low SNR failures are registered") {
  const auto stats = run_campaign(awgn(1.5, {-10.0}, 200));
  CHECK(stats.points[0].fail_rate > 0.1);
}

TEST_CASE("stats writers") {
  const auto stats = run_campaign(awgn(0.0, {std::numeric_limits<double>::infinity(), 10.0}, 3), true);

  std::ostringstream csv;
  write_stats_csv(csv, stats);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "scenario,snr_db,fail_rate,cfo_mse,n_trials,n_detected");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);

  std::ostringstream js;
  write_stats_json(js, {stats});
  const auto j = nlohmann::json::parse(js.str());
  REQUIRE(j.is_array());
  CHECK(j[0]["scenario"] == "t");
  CHECK(j[0]["points"].size() == 2);
  CHECK(j[0]["points"][0]["snr_db"].is_null());
  CHECK(j[0]["points"][1]["n_trials"] == 3);

  std::ostringstream trials;
  write_trials_csv(trials, stats);
  CHECK(trials.str().rfind("seed,snr_db,true_sto,true_epsilon,detected,sto_est,cfo_est,sto_error,cfo_error", 0) == 0);
}

TEST_CASE("timing trace") {
  Scenario sc;
  const auto rows = timing_trace(sc, 10.0);
  const auto num = make_numerology();
  REQUIRE(rows.size() == static_cast<std::size_t>(4 * num.l_quarter + 1));
  CHECK(rows.front().tau == -2 * num.l_quarter);
  CHECK(rows.back().tau == 2 * num.l_quarter);
  auto best = rows.begin();
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    if (it->xcr > best->xcr) best = it;
    CHECK(it->xcr <= 1.0);
    CHECK(it->xsig <= 1.0);
    CHECK(it->xene <= 1.0);
  }
  CHECK(best->tau == 0);

  const auto clean = timing_trace(sc, std::numeric_limits<double>::infinity());
  for (const auto& r : clean) {
    if (r.tau == 0) {
      CHECK(r.xcr == 1.0);
      CHECK(r.xsig == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  std::ostringstream out;
  write_trace_csv(out, rows);
  CHECK(out.str().rfind("tau,xcr,xsig,xene\n", 0) == 0);
}
