#include "ldacs/numerology.hpp"

#include <cmath>
#include <set>

namespace ldacs {

namespace {

const std::set<std::string> kIntegerKeys = {"n_ov",     "n_used",   "n_cp",        "n_win",
                                            "d_template", "m_consec", "delta_search"};

int as_int(const std::string& key, double value) {
  if (!std::isfinite(value) || std::floor(value) != value) {
    throw ConfigError(key + " must be an integer");
  }
  if (std::abs(value) > 1e7) {
    throw ConfigError(key + " is out of range");
  }
  return static_cast<int>(value);
}

}  // namespace

void validate(const Numerology& num) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(num.n_ov >= 1, "n_ov must be ≥ 1");
  require(num.n_fft_base == 64, "n_fft_base must be 64");
  require(num.l_quarter == 16 * num.n_ov, "l_quarter must equal 16 × n_ov");
  require(num.n_total == 4 * num.l_quarter, "n_total must equal 4 × l_quarter");
  require(num.n_used >= 8 && num.n_used <= num.n_fft_base - 2 && num.n_used % 2 == 0,
          "n_used must be even and within [8, 62]");
  require(std::isfinite(num.subcarrier_spacing_hz) && num.subcarrier_spacing_hz > 0.0,
          "subcarrier_spacing_hz must be > 0");
  require(num.n_cp >= 1, "n_cp must be ≥ 1");
  require(num.n_cp <= num.n_total, "n_cp must be ≤ n_total");
  require(num.n_win >= 0, "n_win must be ≥ 0");
  require(num.n_win <= num.n_cp, "n_win must be ≤ n_cp");
  require(num.d_template >= 1, "d_template must be ≥ 1");
  require(num.d_template <= 8 * num.l_quarter, "d_template must be ≤ 8 × l_quarter");
  require(num.m_consec >= 1, "m_consec must be ≥ 1");
  require(num.delta_search >= 1, "delta_search must be ≥ 1");
}

Numerology make_numerology(const NumerologyOverrides& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key != "subcarrier_spacing_hz" && !kIntegerKeys.contains(key)) {
      throw ConfigError("unknown numerology key '" + key + "'");
    }
    if (!std::isfinite(value)) throw ConfigError(key + " must be finite");
  }
  auto get = [&](const std::string& key, int fallback) {
    auto it = overrides.find(key);
    return it == overrides.end() ? fallback : as_int(key, it->second);
  };

  Numerology num;
  num.n_ov = get("n_ov", 4);
  if (num.n_ov < 1) throw ConfigError("n_ov must be ≥ 1");
  num.n_fft_base = 64;
  num.l_quarter = 16 * num.n_ov;
  num.n_total = num.n_fft_base * num.n_ov;
  num.n_used = get("n_used", 50);
  if (auto it = overrides.find("subcarrier_spacing_hz"); it != overrides.end()) {
    num.subcarrier_spacing_hz = it->second;
  }
  num.sample_rate_hz = num.n_total * num.subcarrier_spacing_hz;
  num.n_cp = get("n_cp", 11 * num.n_ov);
  num.n_win = get("n_win", std::min(8 * num.n_ov, num.n_cp));
  num.d_template = get("d_template", 2 * num.l_quarter);
  num.m_consec = get("m_consec", 4 * num.n_ov);
  num.delta_search = get("delta_search", 56 * num.n_ov);
  validate(num);
  return num;
}

}  // namespace ldacs
