#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "ldacs/harness.hpp"

namespace ldacs {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& field, const std::string& text) {
  if (text == "inf" || text == "noiseless") return std::numeric_limits<double>::infinity();
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || std::isnan(v)) {
    throw ConfigError(field + ": expected a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& field, const std::string& text) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(field + ": expected an integer, got '" + text + "'");
  }
  return v;
}

const std::set<std::string> kNumerologyKeys = {"n_ov",       "n_used",   "n_cp",
                                               "n_win",      "d_template", "m_consec",
                                               "delta_search", "subcarrier_spacing_hz"};

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"name", [&](const std::string& v) { sc.name = v; }},
      {"channel", [&](const std::string& v) { sc.channel = parse_channel_kind(v); }},
      {"epsilon", [&](const std::string& v) { sc.epsilon = parse_real("epsilon", v); }},
      {"snr_grid_db",
       [&](const std::string& v) {
         sc.snr_grid_db.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           sc.snr_grid_db.push_back(parse_real("snr_grid_db", trim(item)));
         }
       }},
      {"n_trials", [&](const std::string& v) { sc.n_trials = parse_int<int>("n_trials", v); }},
      {"master_seed",
       [&](const std::string& v) { sc.master_seed = parse_int<std::uint64_t>("master_seed", v); }},
      {"lead_gap_min",
       [&](const std::string& v) { sc.lead_gap_min = parse_int<Index>("lead_gap_min", v); }},
      {"lead_gap_max",
       [&](const std::string& v) { sc.lead_gap_max = parse_int<Index>("lead_gap_max", v); }},
      {"fine_threshold",
       [&](const std::string& v) { sc.fine_threshold = parse_int<int>("fine_threshold", v); }},
      {"payload_symbols",
       [&](const std::string& v) { sc.payload_symbols = parse_int<int>("payload_symbols", v); }},
      {"preamble_seed",
       [&](const std::string& v) {
         sc.preamble_seed = parse_int<std::uint64_t>("preamble_seed", v);
       }},
      {"phase_noise_linewidth_hz",
       [&](const std::string& v) {
         sc.phase_noise_linewidth_hz = parse_real("phase_noise_linewidth_hz", v);
       }},
      {"signal_power_dbm",
       [&](const std::string& v) { sc.signal_power_dbm = parse_real("signal_power_dbm", v); }},
      {"threads", [&](const std::string& v) { sc.threads = parse_int<int>("threads", v); }},
  };

  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'" + where);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'" + where);
    if (value.empty()) throw ConfigError(key + ": missing value" + where);
    try {
      if (auto it = setters.find(key); it != setters.end()) {
        it->second(value);
      } else if (kNumerologyKeys.contains(key)) {
        sc.numerology[key] = parse_real(key, value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(e.what() + where);
    }
  }
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  return parse_scenario(in);
}

}  // namespace ldacs
