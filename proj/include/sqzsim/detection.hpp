// Photodetection, lock-in demodulation and the two quadrature-control error
// signals.
//
//  * pump-phase error: direct detection of the outgoing control field,
//    demodulated at 2*Omega.
//  * LO-phase error: balanced homodyne difference current, demodulated at Omega.
//
// Closed forms and the sampled pipeline share one sign convention: the
// demodulation reference is cos(2 pi f t + phase) with t measured from t = 0,
// and the "appropriate" demodulation phase for both signals is +pi/2.
#pragma once

#include "opo.hpp"
#include "sideband_core.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace sqzsim::detection {

using sideband::CarrierFrame;
using sideband::FieldSeries;
using sideband::SidebandPair;
using sideband::Timebase;
using sideband::TimeSeries;

struct DemodulatorConfig {
    double frequency = 0.0;      // Hz
    double phase = 0.0;          // rad
    double lowpass_cutoff = 0.0; // Hz, first-order IIR corner

    void validate() const
    {
        if (!(lowpass_cutoff > 0.0) || !(lowpass_cutoff < frequency)) {
            throw std::invalid_argument("DemodulatorConfig: need 0 < lowpass_cutoff < frequency");
        }
    }
};

/// Settling criterion: the signal must span at least this many cutoff periods.
inline constexpr double kSettlingCutoffPeriods = 10.0;

/// Mixes with cos(2 pi f t + phase), low-pass filters with a first-order IIR,
/// and returns the mean filter output over the settled second half, trimmed to
/// a whole number of reference periods.
inline double demodulate(const TimeSeries& sig, const DemodulatorConfig& cfg)
{
    cfg.validate();
    if (sig.samples.empty() || !(sig.sample_rate > 0.0)) {
        throw std::invalid_argument("demodulate: empty signal");
    }
    if (sig.duration() < kSettlingCutoffPeriods / cfg.lowpass_cutoff) {
        throw std::invalid_argument("demodulate: signal shorter than settling time " +
                                    std::to_string(kSettlingCutoffPeriods / cfg.lowpass_cutoff) + " s");
    }
    const std::size_t n = sig.samples.size();
    const double a = -std::expm1(-kTwoPi * cfg.lowpass_cutoff / sig.sample_rate);
    const double samples_per_period = sig.sample_rate / cfg.frequency;
    std::size_t tail = n - n / 2;
    if (samples_per_period <= static_cast<double>(tail)) {
        const double cycles = std::floor(static_cast<double>(tail) / samples_per_period);
        tail = static_cast<std::size_t>(std::llround(cycles * samples_per_period));
    }
    const std::size_t start = n - tail;

    double y = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ref = std::cos(kTwoPi * cfg.frequency * sig.time_at(k) + cfg.phase);
        y += a * (sig.samples[k] * ref - y);
        if (k >= start) {
            acc += y;
        }
    }
    return acc / static_cast<double>(tail);
}

/// Demodulation phase that maximizes the error-signal slope at `lock_point`.
/// `signal_at(p)` produces the detector signal for control parameter p.
inline double auto_demod_phase(const std::function<TimeSeries(double)>& signal_at, double lock_point,
                               double step, double frequency, double lowpass_cutoff)
{
    const DemodulatorConfig in_phase{frequency, 0.0, lowpass_cutoff};
    const DemodulatorConfig quadrature{frequency, -0.5 * std::numbers::pi, lowpass_cutoff};
    const TimeSeries hi = signal_at(lock_point + step);
    const TimeSeries lo = signal_at(lock_point - step);
    const double dx = demodulate(hi, in_phase) - demodulate(lo, in_phase);
    const double dy = demodulate(hi, quadrature) - demodulate(lo, quadrature);
    return std::atan2(-dy, dx);
}

/// Photocurrent of the outgoing control field on a single photodiode.
inline TimeSeries qcf_monitor_current(const SidebandPair& qcf, const CarrierFrame& frame, const Timebase& tb)
{
    return sideband::square_law(sideband::synthesize_field(qcf, frame, tb));
}

/// (g^2 - 1) alpha^2 sin(2 phi) / (4 g)
inline double pump_phase_error(double alpha, const opo::SqueezerSetting& s) noexcept
{
    const double g = s.gain();
    return (g * g - 1.0) * alpha * alpha * std::sin(2.0 * s.phi()) / (4.0 * g);
}

struct HomodyneSetup {
    double lo_amplitude = 1.0; // real, >= 0
    double lo_phase = 0.0;     // Phi, rad
    double splitter_ratio = 0.5;
    double mode_matching = 1.0; // visibility of the interference term

    void validate() const
    {
        if (!(lo_amplitude >= 0.0)) {
            throw std::invalid_argument("HomodyneSetup: LO amplitude must be >= 0");
        }
        if (!(splitter_ratio > 0.0 && splitter_ratio < 1.0)) {
            throw std::invalid_argument("HomodyneSetup: splitter ratio must lie in (0, 1)");
        }
        if (!(mode_matching >= 0.0 && mode_matching <= 1.0)) {
            throw std::invalid_argument("HomodyneSetup: mode matching outside [0, 1]");
        }
    }
};

inline FieldSeries local_oscillator(const HomodyneSetup& setup, const CarrierFrame& frame, const Timebase& tb)
{
    return sideband::carrier_field(setup.lo_amplitude, setup.lo_phase, frame, tb);
}

/// Beam-splitter outputs sqrt(R) E_LO + sqrt(T) E_QCF and sqrt(T) E_LO - sqrt(R) E_QCF.
/// Mode matching does not enter here; it only scales the interference term of
/// the photocurrents.
inline std::pair<FieldSeries, FieldSeries> homodyne_fields(const HomodyneSetup& setup, const SidebandPair& qcf,
                                                           const CarrierFrame& frame, const Timebase& tb)
{
    setup.validate();
    const FieldSeries lo = local_oscillator(setup, frame, tb);
    const FieldSeries sig = sideband::synthesize_field(qcf, frame, tb);
    const double r = std::sqrt(setup.splitter_ratio);
    const double t = std::sqrt(1.0 - setup.splitter_ratio);
    FieldSeries out1 = lo;
    FieldSeries out2 = lo;
    for (std::size_t k = 0; k < lo.samples.size(); ++k) {
        out1.samples[k] = r * lo.samples[k] + t * sig.samples[k];
        out2.samples[k] = t * lo.samples[k] - r * sig.samples[k];
    }
    return {std::move(out1), std::move(out2)};
}

/// Photocurrents of the two homodyne diodes with partial mode matching.
inline std::pair<TimeSeries, TimeSeries> homodyne_currents(const HomodyneSetup& setup, const SidebandPair& qcf,
                                                           const CarrierFrame& frame, const Timebase& tb)
{
    setup.validate();
    const FieldSeries lo = local_oscillator(setup, frame, tb);
    const FieldSeries sig = sideband::synthesize_field(qcf, frame, tb);
    const TimeSeries p_lo = sideband::square_law(lo);
    const TimeSeries p_sig = sideband::square_law(sig);
    const TimeSeries cross = sideband::beat(lo, sig);
    const double refl = setup.splitter_ratio;
    const double trans = 1.0 - refl;
    const double interference = 2.0 * std::sqrt(refl * trans) * setup.mode_matching;
    TimeSeries i1 = p_lo;
    TimeSeries i2 = p_lo;
    for (std::size_t k = 0; k < p_lo.samples.size(); ++k) {
        i1.samples[k] = refl * p_lo.samples[k] + trans * p_sig.samples[k] + interference * cross.samples[k];
        i2.samples[k] = trans * p_lo.samples[k] + refl * p_sig.samples[k] - interference * cross.samples[k];
    }
    return {std::move(i1), std::move(i2)};
}

/// I_HD1 - I_HD2. In baseband mode the optical-frequency terms are already
/// removed by the detector bandwidth.
inline TimeSeries homodyne_difference_current(const HomodyneSetup& setup, const SidebandPair& qcf,
                                              const CarrierFrame& frame, const Timebase& tb)
{
    auto [i1, i2] = homodyne_currents(setup, qcf, frame, tb);
    for (std::size_t k = 0; k < i1.samples.size(); ++k) {
        i1.samples[k] -= i2.samples[k];
    }
    return i1;
}

/// sqrt(2) alpha_LO alpha (g - 1) / sqrt(g) sin(2 phi + Phi)
///
/// This is the beat of the LO with the parametrically generated lower sideband
/// only.
inline double lo_phase_error(double alpha_lo, double alpha, const opo::SqueezerSetting& s, double lo_phase) noexcept
{
    const double g = s.gain();
    return std::numbers::sqrt2 * alpha_lo * alpha * (g - 1.0) / std::sqrt(g) *
           std::sin(2.0 * s.phi() + lo_phase);
}

/// LO-phase error including the beat of the LO with the amplified upper
/// (seed) sideband, which the balanced detector also sees:
/// sqrt(2) alpha_LO alpha / sqrt(g) [(g - 1) sin(2 phi + Phi) - (1 + g) sin(Phi)].
/// Same normalization as lo_phase_error().
inline double lo_phase_error_with_seed_beat(double alpha_lo, double alpha, const opo::SqueezerSetting& s,
                                            double lo_phase) noexcept
{
    const double g = s.gain();
    return std::numbers::sqrt2 * alpha_lo * alpha / std::sqrt(g) *
           ((g - 1.0) * std::sin(2.0 * s.phi() + lo_phase) - (1.0 + g) * std::sin(lo_phase));
}

/// Sampling plan for the simulated error-signal pipeline. The signal spans
/// `settle_factor` x the settling time of the low-pass, sampled at
/// `samples_per_period` points per period of the QCF offset.
struct PipelineTiming {
    double offset_hz = 40.0e6;
    double samples_per_period = 16.0;
    double cutoff_fraction = 0.05; // low-pass corner relative to offset_hz
    double settle_factor = 1.2;

    [[nodiscard]] double cutoff() const noexcept { return cutoff_fraction * offset_hz; }
    [[nodiscard]] Timebase timebase() const
    {
        return {settle_factor * kSettlingCutoffPeriods / cutoff(), samples_per_period * offset_hz,
                sideband::SynthesisMode::Baseband, 0.0};
    }
};

/// Pump-phase error from the sampled monitor photocurrent demodulated at
/// 2*Omega with phase +pi/2. Equals 2 x pump_phase_error().
inline double pump_error_pipeline(double alpha, const opo::SqueezerSetting& s, const CarrierFrame& frame,
                                  const PipelineTiming& timing = {})
{
    const auto qcf = opo::amplified_qcf(alpha, s, kTwoPi * timing.offset_hz);
    const TimeSeries current = qcf_monitor_current(qcf, frame, timing.timebase());
    return demodulate(current, {2.0 * timing.offset_hz, 0.5 * std::numbers::pi, timing.cutoff()});
}

/// LO-phase error from the sampled homodyne difference current demodulated at
/// Omega with phase +pi/2. For R = 1/2 and unit mode matching this equals
/// lo_phase_error_with_seed_beat() / sqrt(2).
inline double lo_error_pipeline(const HomodyneSetup& setup, double alpha, const opo::SqueezerSetting& s,
                                const CarrierFrame& frame, const PipelineTiming& timing = {})
{
    const auto qcf = opo::amplified_qcf(alpha, s, kTwoPi * timing.offset_hz);
    const TimeSeries current = homodyne_difference_current(setup, qcf, frame, timing.timebase());
    return demodulate(current, {timing.offset_hz, 0.5 * std::numbers::pi, timing.cutoff()});
}

/// First-order IIR low-pass of a sampled signal.
inline TimeSeries lowpass(const TimeSeries& sig, double cutoff)
{
    if (!(cutoff > 0.0)) {
        throw std::invalid_argument("lowpass: cutoff must be positive");
    }
    const double a = -std::expm1(-kTwoPi * cutoff / sig.sample_rate);
    TimeSeries out = sig;
    double y = 0.0;
    for (double& v : out.samples) {
        y += a * (v - y);
        v = y;
    }
    return out;
}

} // namespace sqzsim::detection
