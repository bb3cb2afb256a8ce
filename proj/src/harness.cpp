#include "ldacs/harness.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "ldacs/sync.hpp"

namespace ldacs {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
std::string fmt_opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return fmt_double(*v);
  } else {
    return std::to_string(*v);
  }
}

struct MeanSq {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;

  void add(double err) {
    const double e2 = err * err;
    sum += e2;
    sum_sq += e2 * e2;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : std::nan(""); }
  double stderr_of_mean() const {
    if (n < 2) return std::nan("");
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::AWGN: return "AWGN";
    case ChannelKind::ENR: return "ENR";
    case ChannelKind::ENR_DME: return "ENR_DME";
    case ChannelKind::TMA: return "TMA";
  }
  return "?";
}

ChannelKind parse_channel_kind(const std::string& name) {
  for (auto kind : {ChannelKind::AWGN, ChannelKind::ENR, ChannelKind::ENR_DME, ChannelKind::TMA}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("channel: unknown channel '" + name + "' (expected AWGN, ENR, ENR_DME or TMA)");
}

void validate(const Scenario& sc) {
  if (sc.n_trials < 1) throw ConfigError("n_trials must be ≥ 1");
  if (sc.snr_grid_db.empty()) throw ConfigError("snr_grid_db must not be empty");
  for (double s : sc.snr_grid_db) {
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("snr_grid_db entries must be finite or inf");
    }
  }
  if (sc.lead_gap_min < 0 || sc.lead_gap_max < sc.lead_gap_min) {
    throw ConfigError("lead_gap range must satisfy 0 ≤ lead_gap_min ≤ lead_gap_max");
  }
  if (sc.payload_symbols < 0) throw ConfigError("payload_symbols must be ≥ 0");
  if (sc.threads < 1) throw ConfigError("threads must be ≥ 1");
  if (!std::isfinite(sc.epsilon)) throw ConfigError("epsilon must be finite");
  if (sc.phase_noise_linewidth_hz < 0.0) {
    throw ConfigError("phase_noise_linewidth_hz must be ≥ 0");
  }
}

LinkSetup make_link_setup(const Scenario& sc) {
  validate(sc);
  LinkSetup setup;
  setup.num = make_numerology(sc.numerology);
  setup.preamble = generate_preamble(setup.num, sc.preamble_seed);
  setup.tmpl = energy_template(setup.preamble, setup.num);
  setup.fine_threshold = sc.fine_threshold >= 0 ? sc.fine_threshold : setup.num.fine_threshold();
  switch (sc.channel) {
    case ChannelKind::AWGN: break;
    case ChannelKind::ENR: setup.profile = make_enr_profile(); break;
    case ChannelKind::ENR_DME:
      setup.profile = make_enr_profile();
      setup.dme = make_paris_dme_scenario();
      setup.dme->signal_power_dbm = sc.signal_power_dbm;
      break;
    case ChannelKind::TMA: setup.profile = make_tma_profile(); break;
  }
  return setup;
}

std::uint64_t trial_seed(std::uint64_t master_seed, double snr_db, int trial_index) {
  const auto snr_bits = std::bit_cast<std::uint64_t>(snr_db);
  return derive_seed(derive_seed(master_seed, snr_bits), static_cast<std::uint64_t>(trial_index));
}

TrialSignal make_trial_signal(const LinkSetup& setup, const Scenario& sc, double snr_db,
                              int trial_index) {
  const Numerology& num = setup.num;
  TrialSignal sig;
  sig.seed = trial_seed(sc.master_seed, snr_db, trial_index);

  Rng rng(derive_seed(sig.seed, 0));
  const auto span = static_cast<std::uint64_t>(sc.lead_gap_max - sc.lead_gap_min + 1);
  const Index gap = sc.lead_gap_min + static_cast<Index>(rng() % span);
  const Frame frame = build_frame(num, setup.preamble, sc.payload_symbols, gap,
                                  derive_seed(sig.seed, 1));

  ImpairmentConfig cfg;
  cfg.epsilon = sc.epsilon;
  if (std::isfinite(snr_db)) cfg.snr_db = snr_db;
  cfg.profile = setup.profile;
  cfg.dme = setup.dme;
  cfg.phase_noise_linewidth_hz = sc.phase_noise_linewidth_hz;
  cfg.seed = derive_seed(sig.seed, 2);
  sig.rx = run_pipeline(frame.samples, cfg, num);
  sig.n0 = frame.n0;
  sig.true_epsilon = sc.epsilon + (setup.profile ? setup.profile->los_cfo(num) : 0.0);
  return sig;
}

TrialRecord run_trial(const LinkSetup& setup, const Scenario& sc, double snr_db, int trial_index) {
  const TrialSignal sig = make_trial_signal(setup, sc, snr_db, trial_index);
  TrialRecord rec;
  rec.seed = sig.seed;
  rec.snr_db = snr_db;
  rec.true_sto = sig.n0;
  rec.true_epsilon = sig.true_epsilon;

  const auto res = synchronize<double>(sig.rx, setup.num, setup.tmpl);
  rec.detected = res.detected;
  rec.sto_est = res.sto_estimate;
  rec.cfo_est = res.cfo_estimate;
  if (res.sto_estimate) {
    rec.sto_error = *res.sto_estimate - rec.true_sto;
    rec.timing_ok = std::abs(*rec.sto_error) <= setup.fine_threshold;
  }
  if (res.cfo_estimate) rec.cfo_error = *res.cfo_estimate - rec.true_epsilon;
  if (res.cfo_ac1) rec.cfo_error_ac1 = *res.cfo_ac1 - rec.true_epsilon;
  if (res.cfo_ac2_single) rec.cfo_error_ac2_single = *res.cfo_ac2_single - rec.true_epsilon;
  return rec;
}

TrialRecord run_trial(const Scenario& sc, double snr_db, int trial_index) {
  return run_trial(make_link_setup(sc), sc, snr_db, trial_index);
}

SnrPointStats aggregate(double snr_db, const std::vector<TrialRecord>& records) {
  SnrPointStats st;
  st.snr_db = snr_db;
  st.n_trials = static_cast<int>(records.size());
  MeanSq all, ac1, ac2;
  for (const auto& r : records) {
    if (r.detected) ++st.n_detected;
    if (r.timing_ok) ++st.n_fine_success;
    if (r.cfo_error) all.add(*r.cfo_error);
    if (r.cfo_error_ac1) ac1.add(*r.cfo_error_ac1);
    if (r.cfo_error_ac2_single) ac2.add(*r.cfo_error_ac2_single);
  }
  st.n_cfo = all.n;
  st.fail_rate = st.n_trials > 0
                     ? static_cast<double>(st.n_trials - st.n_fine_success) / st.n_trials
                     : 0.0;
  st.cfo_mse = all.mean();
  st.cfo_mse_stderr = all.stderr_of_mean();
  st.cfo_mse_ac1 = ac1.mean();
  st.cfo_mse_ac2_single = ac2.mean();
  return st;
}

CampaignStats run_campaign(const Scenario& sc, bool keep_records) {
  const LinkSetup setup = make_link_setup(sc);
  CampaignStats stats;
  stats.scenario = sc.name;
  for (double snr : sc.snr_grid_db) {
    std::vector<TrialRecord> records(static_cast<std::size_t>(sc.n_trials));
    auto worker = [&](int first, int stride) {
      for (int i = first; i < sc.n_trials; i += stride) {
        records[static_cast<std::size_t>(i)] = run_trial(setup, sc, snr, i);
      }
    };
    if (sc.threads == 1) {
      worker(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < sc.threads; ++t) pool.emplace_back(worker, t, sc.threads);
    }
    stats.points.push_back(aggregate(snr, records));
    if (keep_records) stats.records.push_back(std::move(records));
  }
  return stats;
}

void write_stats_csv(std::ostream& out, const CampaignStats& stats, bool header) {
  if (header) out << "scenario,snr_db,fail_rate,cfo_mse,n_trials,n_detected\n";
  for (const auto& p : stats.points) {
    out << stats.scenario << ',' << fmt_double(p.snr_db) << ',' << fmt_double(p.fail_rate) << ','
        << fmt_double(p.cfo_mse) << ',' << p.n_trials << ',' << p.n_detected << '\n';
  }
}

void write_stats_json(std::ostream& out, const std::vector<CampaignStats>& campaigns) {
  using nlohmann::json;
  json doc = json::array();
  for (const auto& c : campaigns) {
    json points = json::array();
    for (const auto& p : c.points) {
      json jp;
      jp["snr_db"] = std::isfinite(p.snr_db) ? json(p.snr_db) : json(nullptr);
      jp["noiseless"] = !std::isfinite(p.snr_db);
      jp["fail_rate"] = p.fail_rate;
      jp["cfo_mse"] = p.cfo_mse;
      jp["cfo_mse_stderr"] = p.cfo_mse_stderr;
      jp["cfo_mse_ac1"] = p.cfo_mse_ac1;
      jp["cfo_mse_ac2_single"] = p.cfo_mse_ac2_single;
      jp["n_trials"] = p.n_trials;
      jp["n_detected"] = p.n_detected;
      jp["n_fine_success"] = p.n_fine_success;
      jp["n_cfo"] = p.n_cfo;
      points.push_back(std::move(jp));
    }
    doc.push_back({{"scenario", c.scenario}, {"points", std::move(points)}});
  }
  out << doc.dump(2) << '\n';
}

void write_trials_csv(std::ostream& out, const CampaignStats& stats) {
  out << "seed,snr_db,true_sto,true_epsilon,detected,sto_est,cfo_est,sto_error,cfo_error\n";
  for (const auto& point : stats.records) {
    for (const auto& r : point) {
      out << r.seed << ',' << fmt_double(r.snr_db) << ',' << r.true_sto << ','
          << fmt_double(r.true_epsilon) << ',' << (r.detected ? 1 : 0) << ',' << fmt_opt(r.sto_est)
          << ',' << fmt_opt(r.cfo_est) << ',' << fmt_opt(r.sto_error) << ','
          << fmt_opt(r.cfo_error) << '\n';
    }
  }
}

std::vector<TraceRow> timing_trace(const Scenario& sc, double snr_db, int trial_index) {
  const LinkSetup setup = make_link_setup(sc);
  const TrialSignal sig = make_trial_signal(setup, sc, snr_db, trial_index);
  const RealSignal<double> xcr = xcr_series<double>(sig.rx, setup.num, setup.tmpl);
  const RealSignal<double> xsig = baseline_xsig<double>(sig.rx, setup.preamble, setup.tmpl);
  const RealSignal<double> xene = baseline_xene<double>(sig.rx, setup.tmpl);

  const Index match = sig.n0 + setup.tmpl.alignment_offset;
  const Index half = 2 * setup.num.l_quarter;
  const Index first = std::max<Index>(0, match - half);
  const Index last = std::min<Index>(sig.rx.size() - 1, match + half);
  const Index count = last - first + 1;
  const double max_xcr = xcr.segment(first, count).maxCoeff();
  const double max_xsig = xsig.segment(first, count).maxCoeff();
  const double max_xene = xene.segment(first, count).maxCoeff();
  auto norm = [](double v, double m) { return m > 0.0 ? v / m : 0.0; };

  std::vector<TraceRow> rows;
  for (Index n = first; n <= last; ++n) {
    rows.push_back({n - match, norm(xcr[n], max_xcr), norm(xsig[n], max_xsig),
                    norm(xene[n], max_xene)});
  }
  return rows;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "tau,xcr,xsig,xene\n";
  for (const auto& r : rows) {
    out << r.tau << ',' << fmt_double(r.xcr) << ',' << fmt_double(r.xsig) << ','
        << fmt_double(r.xene) << '\n';
  }
}

std::vector<Scenario> standard_scenarios(int n_trials, std::uint64_t master_seed) {
  std::vector<double> grid;
  for (int s = 0; s <= 30; s += 2) grid.push_back(s);

  auto make = [&](std::string name, ChannelKind kind, double eps) {
    Scenario sc;
    sc.name = std::move(name);
    sc.channel = kind;
    sc.epsilon = eps;
    sc.snr_grid_db = grid;
    sc.n_trials = n_trials;
    sc.master_seed = master_seed;
    return sc;
  };
  return {make("awgn_eps0", ChannelKind::AWGN, 0.0), make("awgn_eps1p5", ChannelKind::AWGN, 1.5),
          make("enr", ChannelKind::ENR, 1.5), make("enr_dme", ChannelKind::ENR_DME, 1.5),
          make("tma", ChannelKind::TMA, 1.5)};
}

std::vector<std::string> run_sweep(const std::vector<Scenario>& set, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());

  std::vector<std::string> written;
  std::vector<CampaignStats> all;
  for (const auto& sc : set) {
    all.push_back(run_campaign(sc));
    const std::string path = (fs::path(out_dir) / (sc.name + ".csv")).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_stats_csv(out, all.back());
    if (!out) throw std::runtime_error("write failed: " + path);
    written.push_back(path);
  }
  const std::string json_path = (fs::path(out_dir) / "sweep.json").string();
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot open " + json_path + " for writing");
  write_stats_json(out, all);
  if (!out) throw std::runtime_error("write failed: " + json_path);
  written.push_back(json_path);
  return written;
}

}  // namespace ldacs
