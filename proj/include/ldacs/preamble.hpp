#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ldacs/numerology.hpp"
#include "ldacs/types.hpp"

namespace ldacs {

/// Two-symbol synchronization preamble. Symbol 1 repeats with period L
/// (four identical parts), symbol 2 with period 2L (two identical parts).
struct PreambleWaveform {
  SignalXd samples;
  Index start_useful_1 = 0;
  Index start_useful_2 = 0;
  Index frame_start = 0;
  Index useful_length = 0;

  Index size() const { return samples.size(); }
  /// Last useful sample of symbol 1 / symbol 2.
  Index end_useful_1() const { return start_useful_1 + useful_length - 1; }
  Index end_useful_2() const { return start_useful_2 + useful_length - 1; }
};

/// Energy weights a_m = |p_{anchor - m}|^2 for the XCR timing metric, plus the
/// calibration the synchronizer needs to turn an XCR peak into a frame start.
struct EnergyTemplate {
  Eigen::VectorXd a;
  Index anchor = 0;                  // k0, relative to frame_start
  Index alignment_offset = 0;        // noiseless XCR argmax, relative to frame_start
  Index nominal_trigger_offset = 0;  // noiseless detector trigger, relative to frame_start

  Index length() const { return a.size(); }
  /// Offset from a trigger index to the first sample of the STO search window.
  Index search_lead(const Numerology& num) const {
    return alignment_offset - nominal_trigger_offset - num.delta_search / 2;
  }
};

struct Frame {
  SignalXd samples;
  Index n0 = 0;  // ground-truth STO: index of the first preamble sample
};

PreambleWaveform generate_preamble(const Numerology& num, std::uint64_t seed);

/// Anchor defaults to the last useful sample of symbol 2. Throws ConfigError
/// if the template window [anchor - D + 1, anchor] leaves the preamble or the
/// noiseless preamble never triggers the detector.
EnergyTemplate energy_template(const PreambleWaveform& pre, const Numerology& num,
                               std::optional<Index> anchor = std::nullopt);

/// One OFDM data symbol (cyclic prefix + useful part) with random QPSK on all
/// used subcarriers, scaled to unit average power.
SignalXd random_data_symbol(const Numerology& num, Rng& rng);

Frame build_frame(const Numerology& num, const PreambleWaveform& pre, int n_payload_symbols,
                  Index lead_gap, std::uint64_t seed);

/// Interleaved little-endian float32 I/Q pairs.
void write_iq(std::ostream& out, const SignalXd& x);
void write_iq_file(const std::string& path, const SignalXd& x);

}  // namespace ldacs
