#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ldacs/channel.hpp"
#include "ldacs/numerology.hpp"
#include "ldacs/preamble.hpp"

namespace ldacs {

enum class ChannelKind { AWGN, ENR, ENR_DME, TMA };

std::string to_string(ChannelKind kind);
/// Throws ConfigError naming the field for unknown names.
ChannelKind parse_channel_kind(const std::string& name);

/// One Monte Carlo configuration. An infinite entry in snr_grid_db means noiseless.
struct Scenario {
  std::string name = "awgn";
  ChannelKind channel = ChannelKind::AWGN;
  double epsilon = 0.0;
  std::vector<double> snr_grid_db = {10.0};
  int n_trials = 1000;
  std::uint64_t master_seed = 1;
  Index lead_gap_min = 200;
  Index lead_gap_max = 800;
  int fine_threshold = -1;  // < 0: n_cp / 11
  int payload_symbols = 2;
  std::uint64_t preamble_seed = 1;
  double phase_noise_linewidth_hz = 0.0;
  double signal_power_dbm = -80.0;
  NumerologyOverrides numerology;
  int threads = 1;
};

void validate(const Scenario& sc);

/// Everything that is fixed across the trials of a scenario.
struct LinkSetup {
  Numerology num;
  PreambleWaveform preamble;
  EnergyTemplate tmpl;
  std::optional<ChannelProfile> profile;
  std::optional<DmeScenario> dme;
  int fine_threshold = 0;
};

LinkSetup make_link_setup(const Scenario& sc);

struct TrialRecord {
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  Index true_sto = 0;
  double true_epsilon = 0.0;  // carrier offset plus LOS Doppler, in subcarriers
  bool detected = false;
  std::optional<Index> sto_est;
  std::optional<double> cfo_est;
  std::optional<Index> sto_error;
  std::optional<double> cfo_error;
  std::optional<double> cfo_error_ac1;
  std::optional<double> cfo_error_ac2_single;
  bool timing_ok = false;  // detected and |sto_error| <= fine_threshold
};

struct SnrPointStats {
  double snr_db = 0.0;
  int n_trials = 0;
  int n_detected = 0;
  int n_fine_success = 0;
  int n_cfo = 0;
  double fail_rate = 0.0;
  double cfo_mse = 0.0;         // NaN when no trial produced a CFO estimate
  double cfo_mse_stderr = 0.0;
  double cfo_mse_ac1 = 0.0;
  double cfo_mse_ac2_single = 0.0;
};

struct CampaignStats {
  std::string scenario;
  std::vector<SnrPointStats> points;
  std::vector<std::vector<TrialRecord>> records;  // per SNR point, when kept
};

/// Per-trial seed from (master_seed, snr, trial_index); independent of
/// evaluation order.
std::uint64_t trial_seed(std::uint64_t master_seed, double snr_db, int trial_index);

/// Received stream of one trial before synchronization.
struct TrialSignal {
  std::uint64_t seed = 0;
  SignalXd rx;
  Index n0 = 0;
  double true_epsilon = 0.0;
};

TrialSignal make_trial_signal(const LinkSetup& setup, const Scenario& sc, double snr_db,
                              int trial_index);

TrialRecord run_trial(const LinkSetup& setup, const Scenario& sc, double snr_db, int trial_index);
TrialRecord run_trial(const Scenario& sc, double snr_db, int trial_index);

SnrPointStats aggregate(double snr_db, const std::vector<TrialRecord>& records);

CampaignStats run_campaign(const Scenario& sc, bool keep_records = false);

/// scenario,snr_db,fail_rate,cfo_mse,n_trials,n_detected
void write_stats_csv(std::ostream& out, const CampaignStats& stats, bool header = true);
void write_stats_json(std::ostream& out, const std::vector<CampaignStats>& campaigns);
/// seed,snr_db,true_sto,true_epsilon,detected,sto_est,cfo_est,sto_error,cfo_error
void write_trials_csv(std::ostream& out, const CampaignStats& stats);

/// Timing metrics around the true match point of one trial, each normalised
/// by its own maximum over the dumped span. tau = 0 is the correct STO.
struct TraceRow {
  Index tau = 0;
  double xcr = 0.0;
  double xsig = 0.0;
  double xene = 0.0;
};

std::vector<TraceRow> timing_trace(const Scenario& sc, double snr_db, int trial_index = 0);
/// tau,xcr,xsig,xene
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

/// Strict key = value scenario text. Unknown or duplicate keys and malformed
/// values throw ConfigError naming the field and line.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

/// The five standard scenarios: AWGN eps 0, AWGN eps 1.5, ENR, ENR_DME, TMA.
std::vector<Scenario> standard_scenarios(int n_trials, std::uint64_t master_seed);

/// Runs a scenario set and writes <out_dir>/<name>.csv for each scenario
/// plus sweep.json. Returns the paths written.
std::vector<std::string> run_sweep(const std::vector<Scenario>& set, const std::string& out_dir);

}  // namespace ldacs
