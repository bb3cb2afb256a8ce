#include "ldacs/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ldacs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSinusoidsPerTap = 16;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Rayleigh fading tap: sum of sinusoids with random arrival angles and
// phases, unit mean power, Jakes Doppler spectrum. Evaluated sample by sample
// with per-sinusoid phasor rotation.
class JakesTap {
 public:
  JakesTap(double max_doppler_hz, double sample_rate_hz, Rng& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double theta = kTwoPi * uni(rng);
    const double scale = 1.0 / std::sqrt(static_cast<double>(kSinusoidsPerTap));
    for (int i = 0; i < kSinusoidsPerTap; ++i) {
      const double alpha = (kTwoPi * i + theta) / kSinusoidsPerTap;
      rotation_[i] = std::polar(1.0, kTwoPi * max_doppler_hz * std::cos(alpha) / sample_rate_hz);
      phasor_[i] = std::polar(scale, kTwoPi * uni(rng));
    }
  }

  /// Gain at the current sample, then advance one sample.
  std::complex<double> next() {
    std::complex<double> g{};
    for (int i = 0; i < kSinusoidsPerTap; ++i) {
      g += phasor_[i];
      phasor_[i] *= rotation_[i];
    }
    return g;
  }

 private:
  std::complex<double> rotation_[kSinusoidsPerTap]{};
  std::complex<double> phasor_[kSinusoidsPerTap]{};
};

}  // namespace

ChannelProfile make_channel_profile(double los_delay_s, const std::vector<ScatterTap>& scatter,
                                    double rician_k_db, double max_doppler_hz,
                                    double los_doppler_fraction) {
  ChannelProfile p;
  p.rician_k_db = rician_k_db;
  p.max_doppler_hz = max_doppler_hz;
  p.los_doppler_fraction = los_doppler_fraction;

  const double k = std::isinf(rician_k_db) && rician_k_db > 0 ? std::numeric_limits<double>::infinity()
                                                              : db_to_linear(rician_k_db);
  const double los_power = std::isinf(k) ? 1.0 : k / (k + 1.0);
  double scatter_sum = 0.0;
  for (const auto& s : scatter) scatter_sum += db_to_linear(s.relative_db);

  p.taps.push_back({los_delay_s, 10.0 * std::log10(los_power), TapKind::LineOfSight});
  if (!std::isinf(k) && scatter_sum > 0.0) {
    for (const auto& s : scatter) {
      const double power = db_to_linear(s.relative_db) / scatter_sum * (1.0 - los_power);
      p.taps.push_back({s.delay_s, 10.0 * std::log10(power), TapKind::Scattered});
    }
  } else if (!std::isinf(k)) {
    throw ConfigError("finite Rician K needs at least one scattered tap");
  }
  std::sort(p.taps.begin(), p.taps.end(),
            [](const Tap& a, const Tap& b) { return a.delay_s < b.delay_s; });
  validate(p);
  return p;
}

ChannelProfile make_enr_profile() {
  return make_channel_profile(0.0, {{0.3e-6, 0.0}, {15e-6, 0.0}}, 15.0, 1250.0, 1.0);
}

ChannelProfile make_tma_profile() {
  constexpr int kTaps = 12;
  constexpr double kMaxDelay = 10e-6;
  constexpr double kDecay = 2e-6;
  std::vector<ScatterTap> scatter;
  for (int i = 1; i <= kTaps; ++i) {
    const double tau = kMaxDelay * i / kTaps;
    scatter.push_back({tau, 10.0 * std::log10(std::exp(-tau / kDecay))});
  }
  return make_channel_profile(0.0, scatter, 10.0, 624.0, 1.0);
}

void validate(const ChannelProfile& profile) {
  int los = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < profile.taps.size(); ++i) {
    const auto& t = profile.taps[i];
    if (t.kind == TapKind::LineOfSight) ++los;
    if (!(t.delay_s >= 0.0)) throw ConfigError("tap delays must be ≥ 0");
    if (i > 0 && !(t.delay_s > profile.taps[i - 1].delay_s)) {
      throw ConfigError("tap delays must be strictly increasing");
    }
    total += db_to_linear(t.power_db);
  }
  if (los != 1) throw ConfigError("channel profile needs exactly one LOS tap");
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("tap powers must sum to 1");
  if (!(std::abs(profile.los_doppler_fraction) <= 1.0)) {
    throw ConfigError("los_doppler_fraction must lie in [-1, 1]");
  }
  if (!(profile.max_doppler_hz >= 0.0)) throw ConfigError("max_doppler_hz must be ≥ 0");
}

DmeScenario make_paris_dme_scenario() {
  DmeScenario dme;
  dme.interferers = {{-0.5e6, -67.9, 3600.0}, {0.5e6, -74.0, 3600.0}, {0.5e6, -90.3, 3600.0}};
  return dme;
}

void validate(const DmeScenario& dme, const Numerology& num) {
  for (const auto& i : dme.interferers) {
    if (!(i.rate_pps > 0.0)) throw ConfigError("DME rate_pps must be > 0");
    if (!(std::abs(i.offset_hz) < num.sample_rate_hz / 2)) {
      throw ConfigError("DME offset_hz must lie within ±sample_rate/2");
    }
  }
  if (!(dme.pulse_half_width_s > 0.0)) throw ConfigError("pulse_half_width_s must be > 0");
  if (!(dme.pair_spacing_s >= 0.0)) throw ConfigError("pair_spacing_s must be ≥ 0");
}

SignalXd apply_cfo(const SignalXd& x, double epsilon, const Numerology& num, Index start) {
  if (epsilon == 0.0) return x;
  SignalXd y(x.size());
  const double w = kTwoPi * epsilon / num.n_total;
  for (Index n = 0; n < x.size(); ++n) y[n] = x[n] * std::polar(1.0, w * static_cast<double>(start + n));
  return y;
}

SignalXd apply_awgn(const SignalXd& x, std::optional<double> snr_db, Rng& rng) {
  if (!snr_db) return x;
  const double sigma = std::sqrt(std::pow(10.0, -*snr_db / 10.0) / 2.0);
  std::normal_distribution<double> gauss(0.0, sigma);
  SignalXd y = x;
  for (Index n = 0; n < y.size(); ++n) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    y[n] += std::complex<double>(re, im);
  }
  return y;
}

SignalXd apply_multipath(const SignalXd& x, const ChannelProfile& profile, const Numerology& num,
                         Rng& rng) {
  validate(profile);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SignalXd y = SignalXd::Zero(x.size());
  for (const auto& tap : profile.taps) {
    const auto delay = static_cast<Index>(std::lround(tap.delay_s * num.sample_rate_hz));
    if (delay > num.n_total) {
      throw ConfigError("tap delay " + std::to_string(tap.delay_s) + " s exceeds " +
                        std::to_string(num.n_total) + " samples");
    }
    const double amp = std::sqrt(db_to_linear(tap.power_db));
    if (tap.kind == TapKind::LineOfSight) {
      const double w = kTwoPi * profile.los_doppler_fraction * profile.max_doppler_hz /
                       num.sample_rate_hz;
      const double phi0 = kTwoPi * uni(rng);
      for (Index n = delay; n < x.size(); ++n) {
        y[n] += amp * std::polar(1.0, w * n + phi0) * x[n - delay];
      }
    } else {
      JakesTap fading(profile.max_doppler_hz, num.sample_rate_hz, rng);
      for (Index n = 0; n < x.size(); ++n) {
        const auto g = fading.next();
        if (n >= delay) y[n] += amp * g * x[n - delay];
      }
    }
  }
  return y;
}

std::vector<std::vector<double>> dme_schedule(const DmeScenario& dme, double duration_s,
                                              Rng& rng) {
  const double alpha = dme.pulse_half_width_s / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double lead = dme.pair_spacing_s + 6.0 * alpha;
  std::vector<std::vector<double>> out;
  for (const auto& src : dme.interferers) {
    std::exponential_distribution<double> gap(src.rate_pps);
    std::vector<double> starts;
    for (double t = -lead + gap(rng); t < duration_s; t += gap(rng)) starts.push_back(t);
    out.push_back(std::move(starts));
  }
  return out;
}

SignalXd dme_interference(Index length, const DmeScenario& dme, const Numerology& num, Rng& rng) {
  validate(dme, num);
  const double fs = num.sample_rate_hz;
  const double alpha = dme.pulse_half_width_s / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double reach = 6.0 * alpha;
  const auto schedule = dme_schedule(dme, static_cast<double>(length) / fs, rng);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);

  SignalXd out = SignalXd::Zero(length);
  for (std::size_t s = 0; s < dme.interferers.size(); ++s) {
    const auto& src = dme.interferers[s];
    const double amp = std::sqrt(db_to_linear(src.power_dbm - dme.signal_power_dbm));
    for (double t0 : schedule[s]) {
      const double phase = uni(rng);
      for (double centre : {t0, t0 + dme.pair_spacing_s}) {
        const auto first = std::max<Index>(0, static_cast<Index>(std::ceil((centre - reach) * fs)));
        const auto last =
            std::min<Index>(length - 1, static_cast<Index>(std::floor((centre + reach) * fs)));
        for (Index n = first; n <= last; ++n) {
          const double t = static_cast<double>(n) / fs;
          const double env = std::exp(-(t - centre) * (t - centre) / (2.0 * alpha * alpha));
          out[n] += amp * env * std::polar(1.0, kTwoPi * src.offset_hz * t + phase);
        }
      }
    }
  }
  return out;
}

SignalXd apply_dme(const SignalXd& x, const DmeScenario& dme, const Numerology& num, Rng& rng) {
  if (dme.interferers.empty()) return x;
  return x + dme_interference(x.size(), dme, num, rng);
}

SignalXd apply_phase_noise(const SignalXd& x, double linewidth_hz, const Numerology& num,
                           Rng& rng) {
  if (linewidth_hz < 0.0) throw ConfigError("phase noise linewidth must be ≥ 0");
  if (linewidth_hz == 0.0) return x;
  std::normal_distribution<double> step(0.0, std::sqrt(kTwoPi * linewidth_hz / num.sample_rate_hz));
  SignalXd y(x.size());
  double theta = 0.0;
  for (Index n = 0; n < x.size(); ++n) {
    theta += step(rng);
    y[n] = x[n] * std::polar(1.0, theta);
  }
  return y;
}

SignalXd run_pipeline(const SignalXd& x, const ImpairmentConfig& cfg, const Numerology& num) {
  if (cfg.snr_db && !std::isfinite(*cfg.snr_db)) throw ConfigError("snr_db must be finite");
  SignalXd y = x;
  if (cfg.profile) {
    Rng rng(derive_seed(cfg.seed, 1));
    y = apply_multipath(y, *cfg.profile, num, rng);
  }
  if (cfg.phase_noise_linewidth_hz != 0.0) {
    Rng rng(derive_seed(cfg.seed, 2));
    y = apply_phase_noise(y, cfg.phase_noise_linewidth_hz, num, rng);
  }
  y = apply_cfo(y, cfg.epsilon, num);
  if (cfg.dme) {
    Rng rng(derive_seed(cfg.seed, 3));
    y = apply_dme(y, *cfg.dme, num, rng);
  }
  Rng rng(derive_seed(cfg.seed, 4));
  return apply_awgn(y, cfg.snr_db, rng);
}

}  // namespace ldacs
