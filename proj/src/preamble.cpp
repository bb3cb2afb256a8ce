#include "ldacs/preamble.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ldacs/sync.hpp"

namespace ldacs {

namespace {

std::complex<double> qpsk(Rng& rng) {
  const auto q = static_cast<double>(rng() >> 62);
  return std::polar(1.0, std::numbers::pi / 4 + std::numbers::pi / 2 * q);
}

// Useful part of one OFDM symbol: QPSK on every `step`-th used subcarrier
// (DC excluded), zero-padded to n_total bins.
SignalXd useful_part(const Numerology& num, int step, Rng& rng) {
  SignalXd spectrum = SignalXd::Zero(num.n_total);
  const int half = num.n_used / 2;
  for (int k = -half; k <= half; ++k) {
    if (k == 0 || k % step != 0) continue;
    spectrum[(k + num.n_total) % num.n_total] = qpsk(rng);
  }
  Eigen::FFT<double> fft;
  SignalXd time(num.n_total);
  fft.inv(time, spectrum);
  return time;
}

SignalXd with_guard(const Numerology& num, const SignalXd& useful) {
  SignalXd sym(num.n_cp + num.n_total);
  sym << useful.tail(num.n_cp), useful;
  for (int i = 0; i < num.n_win; ++i) {
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * (i + 0.5) / num.n_win));
    sym[i] *= w;
  }
  return sym;
}

}  // namespace

PreambleWaveform generate_preamble(const Numerology& num, std::uint64_t seed) {
  validate(num);
  Rng rng(derive_seed(seed, 0x5052));
  const SignalXd u1 = useful_part(num, 4, rng);
  const SignalXd u2 = useful_part(num, 2, rng);

  PreambleWaveform pre;
  pre.useful_length = num.n_total;
  pre.frame_start = 0;
  pre.start_useful_1 = num.n_cp;
  pre.start_useful_2 = num.symbol_length() + num.n_cp;
  pre.samples.resize(num.preamble_length());
  pre.samples << with_guard(num, u1), with_guard(num, u2);

  const double power = (u1.squaredNorm() + u2.squaredNorm()) / (2.0 * num.n_total);
  pre.samples /= std::sqrt(power);
  return pre;
}

EnergyTemplate energy_template(const PreambleWaveform& pre, const Numerology& num,
                               std::optional<Index> anchor) {
  const Index d = num.d_template;
  EnergyTemplate tmpl;
  tmpl.anchor = anchor.value_or(pre.end_useful_2());
  if (tmpl.anchor >= pre.size() || tmpl.anchor - d + 1 < 0) {
    throw ConfigError("energy template window [" + std::to_string(tmpl.anchor - d + 1) + ", " +
                      std::to_string(tmpl.anchor) + "] exceeds the preamble");
  }
  tmpl.a = pre.samples.segment(tmpl.anchor - d + 1, d).cwiseAbs2().reverse();

  // Noiseless loopback of the isolated preamble: where the detector fires and
  // where XCR peaks, both relative to the first preamble sample.
  const Index lead = num.warmup_length();
  SignalXd probe = SignalXd::Zero(lead + pre.size() + d + 2 * num.l_quarter);
  probe.segment(lead, pre.size()) = pre.samples;

  SyncEngine<double> engine(num, tmpl);
  Index trigger = -1;
  Index best = -1;
  double best_xcr = -1.0;
  for (Index i = 0; i < probe.size(); ++i) {
    const auto snap = engine.push_sample(probe[i]);
    if (engine.detect()) trigger = i;
    if (snap.xcr > best_xcr) {
      best_xcr = snap.xcr;
      best = i;
    }
  }
  if (trigger < 0) throw ConfigError("noiseless preamble never satisfies the detection rule");
  tmpl.nominal_trigger_offset = trigger - lead;
  tmpl.alignment_offset = best - lead;
  return tmpl;
}

SignalXd random_data_symbol(const Numerology& num, Rng& rng) {
  SignalXd spectrum = SignalXd::Zero(num.n_total);
  const int half = num.n_used / 2;
  for (int k = -half; k <= half; ++k) {
    if (k != 0) spectrum[(k + num.n_total) % num.n_total] = qpsk(rng);
  }
  Eigen::FFT<double> fft;
  SignalXd useful(num.n_total);
  fft.inv(useful, spectrum);
  // inverse FFT scales by 1/N, so mean |x|^2 = n_used / N^2
  useful *= num.n_total / std::sqrt(static_cast<double>(num.n_used));
  SignalXd sym(num.symbol_length());
  sym << useful.tail(num.n_cp), useful;
  return sym;
}

Frame build_frame(const Numerology& num, const PreambleWaveform& pre, int n_payload_symbols,
                  Index lead_gap, std::uint64_t seed) {
  if (n_payload_symbols < 0) throw ConfigError("n_payload_symbols must be ≥ 0");
  if (lead_gap < 0) throw ConfigError("lead_gap must be ≥ 0");
  Rng rng(derive_seed(seed, 0x5041));
  Frame frame;
  frame.n0 = lead_gap + pre.frame_start;
  frame.samples = SignalXd::Zero(lead_gap + pre.size() +
                                 Index{n_payload_symbols} * num.symbol_length());
  frame.samples.segment(lead_gap, pre.size()) = pre.samples;
  Index at = lead_gap + pre.size();
  for (int s = 0; s < n_payload_symbols; ++s, at += num.symbol_length()) {
    frame.samples.segment(at, num.symbol_length()) = random_data_symbol(num, rng);
  }
  return frame;
}

void write_iq(std::ostream& out, const SignalXd& x) {
  for (Index i = 0; i < x.size(); ++i) {
    const float iq[2] = {static_cast<float>(x[i].real()), static_cast<float>(x[i].imag())};
    for (float v : iq) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                             static_cast<char>((bits >> 16) & 0xff),
                             static_cast<char>((bits >> 24) & 0xff)};
      out.write(bytes, 4);
    }
  }
}

void write_iq_file(const std::string& path, const SignalXd& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_iq(out, x);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ldacs
