#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ldacs/numerology.hpp"
#include "ldacs/types.hpp"

namespace ldacs {

enum class TapKind { LineOfSight, Scattered };

struct Tap {
  double delay_s = 0.0;
  double power_db = 0.0;  // after normalisation, relative to total power 1
  TapKind kind = TapKind::Scattered;
};

/// Tapped-delay-line description of an aeronautical channel. Build with
/// make_channel_profile so the tap powers carry the Rician K split and sum to 1.
struct ChannelProfile {
  std::vector<Tap> taps;
  double rician_k_db = 0.0;
  double max_doppler_hz = 0.0;
  double los_doppler_fraction = 0.0;

  /// LOS Doppler shift in subcarrier spacings.
  double los_cfo(const Numerology& num) const {
    return los_doppler_fraction * max_doppler_hz / num.subcarrier_spacing_hz;
  }
};

struct ScatterTap {
  double delay_s = 0.0;
  double relative_db = 0.0;  // relative weight within the scattered budget
};

/// LOS tap plus scattered taps; the scattered weights are rescaled to a total
/// of 1/(K+1) and the LOS tap gets K/(K+1). K = +inf gives a pure LOS channel.
ChannelProfile make_channel_profile(double los_delay_s, const std::vector<ScatterTap>& scatter,
                                    double rician_k_db, double max_doppler_hz,
                                    double los_doppler_fraction);

/// En-route: LOS + echoes at 0.3 us and 15 us, K = 15 dB, 1250 Hz max Doppler.
ChannelProfile make_enr_profile();
/// Terminal manoeuvring area: exponential profile up to 10 us, K = 10 dB, 624 Hz.
ChannelProfile make_tma_profile();

/// Throws ConfigError on a malformed profile (LOS count, delay order, power sum).
void validate(const ChannelProfile& profile);

struct DmeInterferer {
  double offset_hz = 0.0;
  double power_dbm = 0.0;  // peak power at the receiver input
  double rate_pps = 3600.0;
};

struct DmeScenario {
  std::vector<DmeInterferer> interferers;
  double pulse_half_width_s = 3.5e-6;
  double pair_spacing_s = 12e-6;
  double signal_power_dbm = -80.0;
};

/// Three interferers around Paris: -0.5 MHz at -67.9 dBm, +0.5 MHz at -74 dBm
/// and -90.3 dBm, 3600 pulse pairs per second each.
DmeScenario make_paris_dme_scenario();

void validate(const DmeScenario& dme, const Numerology& num);

struct ImpairmentConfig {
  double epsilon = 0.0;
  std::optional<double> snr_db;  // nullopt = noiseless
  std::optional<ChannelProfile> profile;
  std::optional<DmeScenario> dme;
  double phase_noise_linewidth_hz = 0.0;
  std::uint64_t seed = 0;
};

/// y_n = x_n exp(j 2 pi eps (start + n) / N).
SignalXd apply_cfo(const SignalXd& x, double epsilon, const Numerology& num, Index start = 0);

/// Circular complex Gaussian noise of variance 10^(-snr/10) per sample
/// (unit signal power). nullopt leaves the input untouched.
SignalXd apply_awgn(const SignalXd& x, std::optional<double> snr_db, Rng& rng);

/// Delays are rounded to the sample grid; delays beyond n_total samples are rejected.
SignalXd apply_multipath(const SignalXd& x, const ChannelProfile& profile, const Numerology& num,
                         Rng& rng);

/// Pulse-pair start times per interferer over [-lead, duration_s), where lead
/// covers pairs that straddle t = 0. Poisson arrivals at each rate.
std::vector<std::vector<double>> dme_schedule(const DmeScenario& dme, double duration_s, Rng& rng);

/// Interference-only stream of `length` samples.
SignalXd dme_interference(Index length, const DmeScenario& dme, const Numerology& num, Rng& rng);

SignalXd apply_dme(const SignalXd& x, const DmeScenario& dme, const Numerology& num, Rng& rng);

/// Wiener phase noise, increment variance 2 pi linewidth / sample_rate.
SignalXd apply_phase_noise(const SignalXd& x, double linewidth_hz, const Numerology& num,
                           Rng& rng);

/// multipath -> phase noise -> CFO -> DME -> AWGN. Each stage draws from its own
/// stream derived from cfg.seed.
SignalXd run_pipeline(const SignalXd& x, const ImpairmentConfig& cfg, const Numerology& num);

}  // namespace ldacs
