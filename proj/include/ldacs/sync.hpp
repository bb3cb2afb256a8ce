#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ldacs/numerology.hpp"
#include "ldacs/preamble.hpp"
#include "ldacs/types.hpp"

namespace ldacs {

template <typename Scalar>
struct MetricSnapshot {
  Index n = -1;
  std::complex<Scalar> ac1{};
  std::complex<Scalar> ac2{};
  Scalar ene = 0;
  Scalar xcr = 0;
  bool partial = true;  // some window still reaches before the first sample

  /// Detection statistic |AC1| + |AC2|.
  Scalar ac() const { return std::abs(ac1) + std::abs(ac2); }
};

enum class SyncPhase { Searching, Triggered, Done };

/// Sliding-window timing metrics and the consecutive-sample preamble detector.
///
/// AC1, AC2 and ENE are O(1) running sums over a 2L window; the product terms
/// are kept in rings so the value leaving the window is subtracted exactly, and
/// the sums are rebuilt from the rings once per 2L samples to bound drift.
/// XCR is an O(D) weighted sum over a ring of |c2| values stored twice so the
/// last D entries are always contiguous.
template <typename Scalar>
class SyncEngine {
 public:
  using Complex = std::complex<Scalar>;
  using RealVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  SyncEngine(const Numerology& num, const EnergyTemplate& tmpl)
      : lag_(num.l_quarter),
        win_(2 * num.l_quarter),
        d_(tmpl.length()),
        m_consec_(num.m_consec),
        warmup_(std::max<Index>(4 * num.l_quarter, tmpl.length() + 2 * num.l_quarter)),
        samples_(win_, Complex{}),
        c1_(win_, Complex{}),
        c2_(win_, Complex{}),
        energy_(win_, Scalar{0}),
        mag_c2_(RealVec::Zero(2 * d_)),
        weights_(tmpl.a.reverse().template cast<Scalar>()) {
    if (d_ < 1) throw std::invalid_argument("energy template is empty");
  }

  MetricSnapshot<Scalar> push_sample(Complex r) {
    ++n_;
    const Index slot = n_ % win_;
    // slot still holds r_{n-2L}; r_{n-L} sits half a ring behind.
    const Complex r_2l = samples_[slot];
    const Complex r_l = samples_[(n_ + win_ - lag_) % win_];
    const Complex t1 = std::conj(r) * r_l;
    const Complex t2 = std::conj(r) * r_2l;
    const Scalar te = std::norm(r);

    ac1_ += t1 - c1_[slot];
    ac2_ += t2 - c2_[slot];
    ene_ += te - energy_[slot];
    c1_[slot] = t1;
    c2_[slot] = t2;
    energy_[slot] = te;
    samples_[slot] = r;
    if (slot == win_ - 1) resum();

    const Index pos = n_ % d_;
    mag_c2_[pos] = mag_c2_[pos + d_] = std::abs(t2);

    MetricSnapshot<Scalar> snap;
    snap.n = n_;
    snap.ac1 = ac1_;
    snap.ac2 = ac2_;
    snap.ene = std::max(ene_, Scalar{0});
    snap.xcr = mag_c2_.segment(pos + 1, d_).dot(weights_);
    snap.partial = n_ + 1 < warmup_;

    fired_ = false;
    if (phase_ == SyncPhase::Searching && !snap.partial) {
      consec_ = snap.ac() > snap.ene ? consec_ + 1 : 0;
      if (consec_ >= m_consec_) {
        fired_ = true;
        trigger_index_ = n_;
        phase_ = SyncPhase::Triggered;
      }
    }
    return snap;
  }

  /// True iff the detector fired on the most recently pushed sample.
  bool detect() const { return fired_; }
  void finish() { phase_ = SyncPhase::Done; }

  SyncPhase phase() const { return phase_; }
  int consec_count() const { return consec_; }
  Index sample_index() const { return n_; }
  Index trigger_index() const { return trigger_index_; }

 private:
  void resum() {
    ac1_ = ac2_ = Complex{};
    ene_ = 0;
    for (Index i = 0; i < win_; ++i) {
      ac1_ += c1_[i];
      ac2_ += c2_[i];
      ene_ += energy_[i];
    }
  }

  Index lag_;
  Index win_;
  Index d_;
  int m_consec_;
  Index warmup_;

  std::vector<Complex> samples_;
  std::vector<Complex> c1_;
  std::vector<Complex> c2_;
  std::vector<Scalar> energy_;
  RealVec mag_c2_;
  RealVec weights_;

  Complex ac1_{};
  Complex ac2_{};
  Scalar ene_ = 0;

  Index n_ = -1;
  int consec_ = 0;
  bool fired_ = false;
  Index trigger_index_ = -1;
  SyncPhase phase_ = SyncPhase::Searching;
};

/// Literal evaluation of AC1, AC2, ENE and XCR at the last sample of `window`.
/// Accumulates in double; used as the reference for SyncEngine.
template <typename Scalar>
MetricSnapshot<Scalar> metrics_direct(std::span<const std::complex<Scalar>> window,
                                      const Numerology& num, const EnergyTemplate& tmpl) {
  const Index len = static_cast<Index>(window.size());
  const Index L = num.l_quarter;
  const Index D = tmpl.length();
  if (len < std::max<Index>(4 * L, D + 2 * L)) {
    throw std::invalid_argument("metrics_direct: window shorter than max(4L, D + 2L)");
  }
  auto r = [&](Index k) { return std::complex<double>(window[static_cast<std::size_t>(k)]); };
  const Index n = len - 1;

  std::complex<double> ac1{}, ac2{};
  double ene = 0.0;
  for (Index m = 0; m < 2 * L; ++m) {
    ac1 += std::conj(r(n - m)) * r(n - m - L);
    ac2 += std::conj(r(n - m)) * r(n - m - 2 * L);
    ene += std::norm(r(n - m));
  }
  double xcr = 0.0;
  for (Index m = 0; m < D; ++m) {
    xcr += std::abs(std::conj(r(n - m)) * r(n - m - 2 * L)) * tmpl.a[m];
  }

  MetricSnapshot<Scalar> snap;
  snap.n = n;
  snap.ac1 = std::complex<Scalar>(ac1);
  snap.ac2 = std::complex<Scalar>(ac2);
  snap.ene = static_cast<Scalar>(ene);
  snap.xcr = static_cast<Scalar>(xcr);
  snap.partial = false;
  return snap;
}

template <typename Scalar>
struct XcrSample {
  Index n = 0;
  Scalar xcr = 0;
};

/// Arg-max of XCR over the search window mapped back to the first preamble
/// sample. Ties resolve to the earliest index.
template <typename Scalar>
Index estimate_sto(std::span<const XcrSample<Scalar>> window, const EnergyTemplate& tmpl) {
  if (window.empty()) throw std::invalid_argument("estimate_sto: empty search window");
  auto best = window.begin();
  for (auto it = window.begin() + 1; it != window.end(); ++it) {
    if (it->xcr > best->xcr) best = it;
  }
  return best->n - tmpl.alignment_offset;
}

namespace detail {

inline double wrap_symmetric(double x, double period) {
  // into (-period/2, period/2]
  double w = std::fmod(x + period / 2, period);
  if (w <= 0.0) w += period;
  return w - period / 2;
}

}  // namespace detail

enum class CfoBranch { Centre, Plus, Minus };

/// Branch of the three-way CFO combination selected by the lag-L phase.
inline CfoBranch cfo_branch(double phi1) {
  constexpr double half_pi = std::numbers::pi / 2;
  if (-half_pi < phi1 && phi1 < half_pi) return CfoBranch::Centre;
  if (phi1 > half_pi) return CfoBranch::Plus;
  return CfoBranch::Minus;
}

/// Combines phi1 = -arg(AC1) and phi2 = -arg(AC2) into a fractional CFO in
/// subcarrier spacings: the lag-2L phase gives the fine value, the lag-L
/// phase picks the branch (0, +2 or -2). If the branch result lies more than
/// one subcarrier from the lag-L estimate (only possible at branch edges or in
/// heavy noise) the nearest lag-2L candidate is used instead. Result is in
/// (-2, 2].
inline double combine_cfo_phases(double phi1, double phi2, const Numerology& num) {
  const double span = static_cast<double>(num.n_total) / (2.0 * num.l_quarter);
  const double fine = phi2 / (2 * std::numbers::pi) * span;
  const double coarse = phi1 / (2 * std::numbers::pi) * (2.0 * span);
  double est = fine;
  switch (cfo_branch(phi1)) {
    case CfoBranch::Centre: break;
    case CfoBranch::Plus: est += span; break;
    case CfoBranch::Minus: est -= span; break;
  }
  if (std::abs(est - coarse) > span / 2) {
    est = fine + span * std::round((coarse - fine) / span);
  }
  return detail::wrap_symmetric(est, 2.0 * span);
}

/// Fractional CFO from accumulator readings. Readings of each metric are
/// summed coherently before the angle is taken. Returns nullopt when either
/// sum has zero magnitude.
inline std::optional<double> estimate_cfo(std::span<const std::complex<double>> ac1_vals,
                                          std::span<const std::complex<double>> ac2_vals,
                                          const Numerology& num) {
  std::complex<double> s1{}, s2{};
  for (const auto& v : ac1_vals) s1 += v;
  for (const auto& v : ac2_vals) s2 += v;
  if (!(std::abs(s1) > 0.0) || !(std::abs(s2) > 0.0)) return std::nullopt;
  return combine_cfo_phases(-std::arg(s1), -std::arg(s2), num);
}

/// Lag-L-only estimate phi1 / 2pi * N / L, range (-2, 2].
inline std::optional<double> estimate_cfo_ac1(std::complex<double> ac1, const Numerology& num) {
  if (!(std::abs(ac1) > 0.0)) return std::nullopt;
  const double est = -std::arg(ac1) / (2 * std::numbers::pi) * num.n_total / num.l_quarter;
  return detail::wrap_symmetric(est, 4.0);
}

/// Stream offsets (relative to the frame start) at which AC1/AC2 are read for
/// CFO estimation: last useful sample of symbol 1 and of symbol 2.
struct CfoReadout {
  Index symbol1 = 0;
  Index symbol2 = 0;
};

inline CfoReadout cfo_readout(const Numerology& num) {
  return {num.n_cp + num.n_total - 1, 2 * (num.n_cp + num.n_total) - 1};
}

template <typename Scalar>
struct SyncResult {
  bool detected = false;
  Index trigger_index = -1;
  std::optional<Index> sto_estimate;
  std::optional<double> cfo_estimate;     // AC1 branch + both AC2 readings
  std::optional<double> cfo_ac1;          // lag-L phase only
  std::optional<double> cfo_ac2_single;   // AC1 branch + symbol-1 AC2 reading only
  std::vector<MetricSnapshot<Scalar>> metrics_trace;
};

struct SyncOptions {
  bool keep_trace = false;  // record every snapshot and run to the end of the stream
};

/// Detection, STO and CFO estimation over a stream holding at most one frame.
template <typename Scalar>
SyncResult<Scalar> synchronize(const Signal<Scalar>& stream, const Numerology& num,
                               const EnergyTemplate& tmpl, const SyncOptions& opts = {}) {
  SyncEngine<Scalar> engine(num, tmpl);
  SyncResult<Scalar> res;
  const Index delta = num.delta_search;
  const Index lead = tmpl.search_lead(num);
  const CfoReadout readout = cfo_readout(num);
  const std::size_t history_cap =
      static_cast<std::size_t>(delta + std::abs(lead) + num.preamble_length() + 1);
  std::deque<MetricSnapshot<Scalar>> history;

  Index window_start = 0;
  Index window_end = 0;  // exclusive
  bool sto_done = false;

  auto lookup = [&](Index n) -> const MetricSnapshot<Scalar>* {
    if (history.empty() || n < history.front().n || n > history.back().n) return nullptr;
    return &history[static_cast<std::size_t>(n - history.front().n)];
  };

  auto finish_sto = [&]() {
    std::vector<XcrSample<Scalar>> window;
    for (Index n = std::max<Index>(window_start, 0); n < window_end; ++n) {
      if (const auto* s = lookup(n)) window.push_back({n, s->xcr});
    }
    if (!window.empty()) {
      res.sto_estimate = estimate_sto<Scalar>(std::span<const XcrSample<Scalar>>(window), tmpl);
    }
    sto_done = true;
  };

  auto finish_cfo = [&]() {
    engine.finish();
    if (!res.sto_estimate) return;
    const auto* s1 = lookup(*res.sto_estimate + readout.symbol1);
    const auto* s2 = lookup(*res.sto_estimate + readout.symbol2);
    if (!s1 || !s2) return;
    const std::complex<double> a1(s1->ac1), a2a(s1->ac2), a2b(s2->ac2);
    const std::array<std::complex<double>, 2> both{a2a, a2b};
    res.cfo_estimate = estimate_cfo(std::span(&a1, 1), std::span(both), num);
    res.cfo_ac2_single = estimate_cfo(std::span(&a1, 1), std::span(&a2a, 1), num);
    res.cfo_ac1 = estimate_cfo_ac1(a1, num);
  };

  for (Index i = 0; i < stream.size(); ++i) {
    const auto snap = engine.push_sample(stream[i]);
    if (opts.keep_trace) res.metrics_trace.push_back(snap);
    if (engine.phase() == SyncPhase::Done) continue;

    history.push_back(snap);
    if (history.size() > history_cap) history.pop_front();

    if (engine.detect()) {
      res.detected = true;
      res.trigger_index = snap.n;
      window_start = snap.n + lead;
      window_end = window_start + delta;
    }
    if (engine.phase() != SyncPhase::Triggered) continue;
    if (!sto_done && snap.n >= window_end - 1) finish_sto();
    if (sto_done) {
      if (!res.sto_estimate || snap.n >= *res.sto_estimate + readout.symbol2) {
        finish_cfo();
        if (!opts.keep_trace) break;
      }
    }
  }

  if (res.detected && engine.phase() != SyncPhase::Done) {
    // stream ended inside the search window or before the readout indices
    if (!sto_done) finish_sto();
    finish_cfo();
  }
  return res;
}

/// XCR for every index of `r`, samples before the stream taken as zero.
template <typename Scalar>
RealSignal<Scalar> xcr_series(const Signal<Scalar>& r, const Numerology& num,
                              const EnergyTemplate& tmpl) {
  const Index D = tmpl.length();
  const Index lag = 2 * num.l_quarter;
  RealSignal<Scalar> mag = RealSignal<Scalar>::Zero(r.size() + D - 1);
  for (Index k = lag; k < r.size(); ++k) {
    mag[k + D - 1] = std::abs(std::conj(r[k]) * r[k - lag]);
  }
  const RealSignal<Scalar> w = tmpl.a.reverse().template cast<Scalar>();
  RealSignal<Scalar> out(r.size());
  for (Index n = 0; n < r.size(); ++n) out[n] = mag.segment(n, D).dot(w);
  return out;
}

/// Signal cross-correlation baseline |sum_m conj(p_{k0-m}) r_{n-m}|.
template <typename Scalar>
RealSignal<Scalar> baseline_xsig(const Signal<Scalar>& r, const PreambleWaveform& pre,
                                 const EnergyTemplate& tmpl) {
  const Index D = tmpl.length();
  const Signal<Scalar> ref =
      pre.samples.segment(tmpl.anchor - D + 1, D).template cast<std::complex<Scalar>>();
  Signal<Scalar> padded = Signal<Scalar>::Zero(r.size() + D - 1);
  padded.tail(r.size()) = r;
  RealSignal<Scalar> out(r.size());
  for (Index n = 0; n < r.size(); ++n) out[n] = std::abs(ref.dot(padded.segment(n, D)));
  return out;
}

/// Instant-energy correlation baseline sum_m |r_{n-m}|^2 a_m.
template <typename Scalar>
RealSignal<Scalar> baseline_xene(const Signal<Scalar>& r, const EnergyTemplate& tmpl) {
  const Index D = tmpl.length();
  RealSignal<Scalar> energy = RealSignal<Scalar>::Zero(r.size() + D - 1);
  energy.tail(r.size()) = r.cwiseAbs2();
  const RealSignal<Scalar> w = tmpl.a.reverse().template cast<Scalar>();
  RealSignal<Scalar> out(r.size());
  for (Index n = 0; n < r.size(); ++n) out[n] = energy.segment(n, D).dot(w);
  return out;
}

}  // namespace ldacs
