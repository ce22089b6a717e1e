// Sideband and quadrature representation of optical fields around a carrier.
//
// A field component at offset Omega from the carrier omega0 is described by the
// expectation values of the upper (omega0 + Omega) and lower (omega0 - Omega)
// annihilation operators. The two-photon quadratures are
//
//   q1 = (upper + conj(lower)) / sqrt(2)          amplitude quadrature
//   q2 = (upper - conj(lower)) / (i sqrt(2))      phase quadrature
//
// Time-domain fields follow the positive-frequency convention
//
//   E(t) = b1(t) cos(w0 t) + b2(t) sin(w0 t) = Re{ A(t) e^{-i w0 t} }
//   A(t) = b1(t) + i b2(t) = sqrt(2) (upper e^{-i W t} + lower e^{+i W t})
//
// The absolute field scale is arbitrary; only ratios and phases are used
// downstream.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqzsim {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace sideband {

/// Optical carrier. Quadrature 1 is the amplitude quadrature (theta = 0),
/// quadrature 2 the phase quadrature (theta = 90 deg); this is fixed.
class CarrierFrame {
public:
    explicit CarrierFrame(double omega0) : omega0_(omega0)
    {
        if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
            throw std::invalid_argument("CarrierFrame: omega0 must be positive and finite");
        }
    }

    static CarrierFrame from_wavelength(double wavelength_m)
    {
        constexpr double c = 299792458.0;
        if (!(wavelength_m > 0.0)) {
            throw std::invalid_argument("CarrierFrame: wavelength must be positive");
        }
        return CarrierFrame(kTwoPi * c / wavelength_m);
    }

    [[nodiscard]] double omega0() const noexcept { return omega0_; }
    [[nodiscard]] double frequency_hz() const noexcept { return omega0_ / kTwoPi; }

    bool operator==(const CarrierFrame&) const = default;

private:
    double omega0_;
};

/// Upper/lower sideband amplitudes at omega0 +- offset (offset in rad/s).
struct SidebandPair {
    double offset = 0.0;
    Complex upper{};
    Complex lower{};

    bool operator==(const SidebandPair&) const = default;
};

/// Quadrature amplitudes at offset (rad/s).
struct QuadratureVector {
    double offset = 0.0;
    Complex q1{};
    Complex q2{};

    bool operator==(const QuadratureVector&) const = default;
};

struct TimeSeries {
    double sample_rate = 1.0; // Hz
    double t0 = 0.0;          // s
    std::vector<double> samples;

    [[nodiscard]] double time_at(std::size_t n) const noexcept
    {
        return t0 + static_cast<double>(n) / sample_rate;
    }
    [[nodiscard]] double duration() const noexcept
    {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

/// Literal mode samples the optical carrier itself; baseband mode removes it
/// analytically and keeps the complex envelope A(t).
enum class SynthesisMode { Literal, Baseband };

/// Sampled optical field. In literal mode `samples` holds the real field E(t)
/// in the real part; in baseband mode it holds the envelope A(t).
struct FieldSeries {
    double sample_rate = 1.0;
    double t0 = 0.0;
    double omega0 = 1.0;
    SynthesisMode mode = SynthesisMode::Baseband;
    std::vector<Complex> samples;
};

struct Timebase {
    double duration = 0.0;    // s
    double sample_rate = 0.0; // Hz
    SynthesisMode mode = SynthesisMode::Baseband;
    double t0 = 0.0;
};

inline QuadratureVector quads_from_sidebands(const SidebandPair& sb) noexcept
{
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const Complex lower_dag = std::conj(sb.lower);
    const Complex i{0.0, 1.0};
    return {sb.offset, (sb.upper + lower_dag) * inv_sqrt2, (sb.upper - lower_dag) / i * inv_sqrt2};
}

inline SidebandPair sidebands_from_quads(const QuadratureVector& qv) noexcept
{
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const Complex i{0.0, 1.0};
    return {qv.offset, (qv.q1 + i * qv.q2) * inv_sqrt2, std::conj((qv.q1 - i * qv.q2) * inv_sqrt2)};
}

namespace detail {

inline void check_timebase(const Timebase& tb, double omega0, double offset)
{
    if (!(tb.duration > 0.0) || !std::isfinite(tb.duration)) {
        throw std::invalid_argument("synthesis: duration must be positive");
    }
    if (!(tb.sample_rate > 0.0) || !std::isfinite(tb.sample_rate)) {
        throw std::invalid_argument("synthesis: sample rate must be positive");
    }
    if (tb.mode == SynthesisMode::Literal) {
        const double highest_hz = (omega0 + std::abs(offset)) / kTwoPi;
        if (!(tb.sample_rate > 2.0 * highest_hz)) {
            throw std::invalid_argument("synthesis: literal-carrier mode below Nyquist (need rate > " +
                                        std::to_string(2.0 * highest_hz) + " Hz)");
        }
    }
}

inline std::size_t sample_count(const Timebase& tb)
{
    const auto n = static_cast<std::size_t>(std::llround(tb.duration * tb.sample_rate));
    if (n == 0) {
        throw std::invalid_argument("synthesis: duration shorter than one sample");
    }
    return n;
}

} // namespace detail

/// Envelope A(t) or literal field E(t) for the sideband content of `sb`.
inline FieldSeries synthesize_field(const SidebandPair& sb, const CarrierFrame& frame, const Timebase& tb)
{
    detail::check_timebase(tb, frame.omega0(), sb.offset);
    const std::size_t n = detail::sample_count(tb);
    FieldSeries out{tb.sample_rate, tb.t0, frame.omega0(), tb.mode, std::vector<Complex>(n)};
    const Complex up = std::numbers::sqrt2 * sb.upper;
    const Complex lo = std::numbers::sqrt2 * sb.lower;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = tb.t0 + static_cast<double>(k) / tb.sample_rate;
        const Complex rot = std::polar(1.0, -sb.offset * t);
        const Complex envelope = up * rot + lo * std::conj(rot);
        if (tb.mode == SynthesisMode::Baseband) {
            out.samples[k] = envelope;
        } else {
            out.samples[k] = std::real(envelope * std::polar(1.0, -frame.omega0() * t));
        }
    }
    return out;
}

/// Real-valued field series for a quadrature vector. Literal mode returns E(t);
/// baseband mode returns the carrier-phase quadrature b1(t) = Re A(t).
inline TimeSeries synthesize_time_series(const QuadratureVector& qv, const CarrierFrame& frame,
                                         double duration, double sample_rate,
                                         SynthesisMode mode = SynthesisMode::Baseband)
{
    const FieldSeries field =
        synthesize_field(sidebands_from_quads(qv), frame, Timebase{duration, sample_rate, mode});
    TimeSeries out{field.sample_rate, field.t0, std::vector<double>(field.samples.size())};
    for (std::size_t k = 0; k < field.samples.size(); ++k) {
        out.samples[k] = field.samples[k].real();
    }
    return out;
}

/// Photocurrent |E|^2 of a field. Baseband mode drops the 2*omega0 terms, as a
/// detector of finite bandwidth would.
inline TimeSeries square_law(const FieldSeries& field)
{
    TimeSeries out{field.sample_rate, field.t0, std::vector<double>(field.samples.size())};
    for (std::size_t k = 0; k < field.samples.size(); ++k) {
        const Complex e = field.samples[k];
        out.samples[k] = field.mode == SynthesisMode::Baseband ? 0.5 * std::norm(e) : e.real() * e.real();
    }
    return out;
}

/// Cross term E_a(t) * E_b(t), detector-bandwidth limited in baseband mode.
inline TimeSeries beat(const FieldSeries& a, const FieldSeries& b)
{
    if (a.samples.size() != b.samples.size() || a.mode != b.mode) {
        throw std::invalid_argument("beat: field series are not on the same timebase");
    }
    TimeSeries out{a.sample_rate, a.t0, std::vector<double>(a.samples.size())};
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        out.samples[k] = a.mode == SynthesisMode::Baseband
                             ? 0.5 * std::real(a.samples[k] * std::conj(b.samples[k]))
                             : a.samples[k].real() * b.samples[k].real();
    }
    return out;
}

/// Continuous-wave field at the carrier with real amplitude and phase:
/// E(t) = 2 amplitude cos(w0 t + phase).
inline FieldSeries carrier_field(double amplitude, double phase, const CarrierFrame& frame, const Timebase& tb)
{
    detail::check_timebase(tb, frame.omega0(), 0.0);
    const std::size_t n = detail::sample_count(tb);
    FieldSeries out{tb.sample_rate, tb.t0, frame.omega0(), tb.mode, std::vector<Complex>(n)};
    const Complex envelope = std::polar(2.0 * amplitude, -phase);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = tb.t0 + static_cast<double>(k) / tb.sample_rate;
        out.samples[k] = tb.mode == SynthesisMode::Baseband
                             ? envelope
                             : Complex{std::real(envelope * std::polar(1.0, -frame.omega0() * t)), 0.0};
    }
    return out;
}

} // namespace sideband
} // namespace sqzsim
