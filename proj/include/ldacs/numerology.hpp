#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace ldacs {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Static waveform and synchronizer parameters. All lengths are in
/// oversampled samples unless noted.
struct Numerology {
  int n_ov = 4;
  int n_fft_base = 64;
  int n_total = 256;       // useful symbol length N
  int l_quarter = 64;      // repetition length L
  int n_used = 50;
  double subcarrier_spacing_hz = 9765.625;
  double sample_rate_hz = 2.5e6;
  int n_cp = 44;
  int n_win = 32;
  int d_template = 128;    // energy template length D
  int m_consec = 16;       // consecutive samples required by the detector
  int delta_search = 224;  // STO search window length

  int symbol_length() const { return n_cp + n_total; }
  int preamble_length() const { return 2 * symbol_length(); }
  /// Samples of history the metric windows need before a snapshot is complete.
  int warmup_length() const { return std::max(4 * l_quarter, d_template + 2 * l_quarter); }
  /// STO fine-accuracy threshold: 1/11 of the cyclic prefix.
  int fine_threshold() const { return n_cp / 11; }
};

using NumerologyOverrides = std::map<std::string, double>;

/// Builds a validated numerology. Unknown keys, non-integral values for
/// integer fields and invariant violations throw ConfigError.
Numerology make_numerology(const NumerologyOverrides& overrides = {});

/// Throws ConfigError naming the first violated invariant.
void validate(const Numerology& num);

}  // namespace ldacs
