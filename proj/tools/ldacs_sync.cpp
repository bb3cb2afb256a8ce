// ldacs_sync: trace, campaign and sweep front end.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ldacs/harness.hpp"
#include "ldacs/sync.hpp"

namespace fs = std::filesystem;
using namespace ldacs;

namespace {

struct Overrides {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<double> snr;
  std::optional<double> epsilon;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> channel;
  std::optional<int> threads;
  bool noiseless = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario_path, "scenario file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--snr", o.snr, "SNR in dB (replaces the scenario grid)");
  cmd->add_option("--epsilon", o.epsilon, "CFO in subcarrier spacings");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--channel", o.channel, "AWGN, ENR, ENR_DME or TMA");
  cmd->add_flag("--noiseless", o.noiseless, "no AWGN");
}

Scenario resolve(const Overrides& o) {
  Scenario sc = o.scenario_path.empty() ? Scenario{} : load_scenario(o.scenario_path);
  if (o.channel) sc.channel = parse_channel_kind(*o.channel);
  if (o.epsilon) sc.epsilon = *o.epsilon;
  if (o.trials) sc.n_trials = *o.trials;
  if (o.seed) sc.master_seed = *o.seed;
  if (o.threads) sc.threads = *o.threads;
  if (o.noiseless) {
    sc.snr_grid_db = {std::numeric_limits<double>::infinity()};
  } else if (o.snr) {
    sc.snr_grid_db = {*o.snr};
  }
  validate(sc);
  return sc;
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int cmd_trace(const Overrides& o, bool dump_metrics) {
  Scenario sc = resolve(o);
  const double snr = sc.snr_grid_db.front();
  prepare_dir(o.out_dir);

  const fs::path path = fs::path(o.out_dir) / "trace.csv";
  auto out = open_out(path);
  write_trace_csv(out, timing_trace(sc, snr));
  close_out(out, path);
  std::cout << path.string() << '\n';

  if (dump_metrics) {
    const LinkSetup setup = make_link_setup(sc);
    const TrialSignal sig = make_trial_signal(setup, sc, snr, 0);
    const auto res = synchronize<double>(sig.rx, setup.num, setup.tmpl, {.keep_trace = true});
    const auto xsig = baseline_xsig<double>(sig.rx, setup.preamble, setup.tmpl);
    const auto xene = baseline_xene<double>(sig.rx, setup.tmpl);
    const fs::path mpath = fs::path(o.out_dir) / "metrics.csv";
    auto m = open_out(mpath);
    m << "n,ac1,ac2,ene,xcr,xsig,xene\n";
    char buf[160];
    for (const auto& s : res.metrics_trace) {
      std::snprintf(buf, sizeof buf, "%lld,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                    static_cast<long long>(s.n), std::abs(s.ac1), std::abs(s.ac2), s.ene, s.xcr,
                    xsig[s.n], xene[s.n]);
      m << buf;
    }
    close_out(m, mpath);
    std::cout << mpath.string() << '\n';
  }
  return 0;
}

int cmd_campaign(const Overrides& o, bool per_trial) {
  const Scenario sc = resolve(o);
  prepare_dir(o.out_dir);
  const CampaignStats stats = run_campaign(sc, per_trial);

  const fs::path csv = fs::path(o.out_dir) / (sc.name + ".csv");
  auto out = open_out(csv);
  write_stats_csv(out, stats);
  close_out(out, csv);

  const fs::path json = fs::path(o.out_dir) / (sc.name + ".json");
  auto jout = open_out(json);
  write_stats_json(jout, {stats});
  close_out(jout, json);

  if (per_trial) {
    const fs::path tpath = fs::path(o.out_dir) / (sc.name + "_trials.csv");
    auto tout = open_out(tpath);
    write_trials_csv(tout, stats);
    close_out(tout, tpath);
  }
  write_stats_csv(std::cout, stats);
  return 0;
}

int cmd_sweep(const Overrides& o) {
  prepare_dir(o.out_dir);
  auto set = standard_scenarios(o.trials.value_or(1000), o.seed.value_or(1));
  for (auto& sc : set) sc.threads = o.threads.value_or(1);
  for (const auto& path : run_sweep(set, o.out_dir)) std::cout << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDM preamble synchronization: metric traces and Monte Carlo campaigns"};
  app.require_subcommand(1);

  Overrides trace_o, camp_o, sweep_o;
  bool dump_metrics = false;
  bool per_trial = false;

  auto* trace = app.add_subcommand("trace", "one trial; XCR/XSig/XEne versus timing offset");
  add_common(trace, trace_o);
  trace->add_flag("--metrics", dump_metrics, "also write the per-sample metric trace");

  auto* campaign = app.add_subcommand("campaign", "Monte Carlo campaign for one scenario");
  add_common(campaign, camp_o);
  campaign->add_option("--trials", camp_o.trials, "trials per SNR point")->check(CLI::PositiveNumber);
  campaign->add_option("--threads", camp_o.threads, "worker threads")->check(CLI::PositiveNumber);
  campaign->add_flag("--per-trial", per_trial, "also write <name>_trials.csv");

  auto* sweep = app.add_subcommand("sweep", "standard scenarios: AWGN eps 0/1.5, ENR, ENR_DME, TMA");
  sweep->add_option("--out", sweep_o.out_dir, "output directory");
  sweep->add_option("--trials", sweep_o.trials, "trials per SNR point")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sweep_o.seed, "master seed");
  sweep->add_option("--threads", sweep_o.threads, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*trace) return cmd_trace(trace_o, dump_metrics);
    if (*campaign) return cmd_campaign(camp_o, per_trial);
    if (*sweep) return cmd_sweep(sweep_o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
