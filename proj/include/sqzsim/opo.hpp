// The squeezer: quadrature transformation, parametrically amplified control
// field, and the below-threshold OPO cavity model.
//
// Two gain conventions are kept apart on purpose:
//  * SqueezerSetting::gain() is the single-pass gain g = exp(2r) used in the
//    error-signal algebra.
//  * ClassicalGain is the cavity-enhanced seed amplification 1/(1-x)^2 quoted
//    for spectra. gain_conventions() maps it to the pump ratio x.
// Nothing converts between the two implicitly.
#pragma once

#include "sideband_core.hpp"

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace sqzsim::opo {

class SqueezerSetting {
public:
    SqueezerSetting() = default;
    SqueezerSetting(double r, double phi) : r_(r), phi_(phi)
    {
        if (!(r >= 0.0) || !std::isfinite(r) || !std::isfinite(phi)) {
            throw std::invalid_argument("SqueezerSetting: r must be finite and >= 0");
        }
    }

    /// exp(r) = sqrt(g)
    static SqueezerSetting from_gain(double g, double phi)
    {
        if (!(g >= 1.0) || !std::isfinite(g)) {
            throw std::invalid_argument("SqueezerSetting: single-pass gain must be >= 1");
        }
        return {0.5 * std::log(g), phi};
    }

    [[nodiscard]] double r() const noexcept { return r_; }
    [[nodiscard]] double phi() const noexcept { return phi_; }
    [[nodiscard]] double gain() const noexcept { return std::exp(2.0 * r_); }

    [[nodiscard]] SqueezerSetting with_phi(double phi) const { return {r_, phi}; }

    bool operator==(const SqueezerSetting&) const = default;

private:
    double r_ = 0.0;
    double phi_ = 0.0;
};

struct CavityParams {
    double fwhm = 28.9e6;              // Hz
    double fsr = 4.0e9;                // Hz
    double escape_efficiency = 1.0;

    [[nodiscard]] double half_width() const noexcept { return 0.5 * fwhm; }

    void validate() const
    {
        if (!(fwhm > 0.0) || !(fwhm < fsr)) {
            throw std::invalid_argument("CavityParams: need 0 < fwhm < fsr");
        }
        if (!(escape_efficiency >= 0.0 && escape_efficiency <= 1.0)) {
            throw std::invalid_argument("CavityParams: escape efficiency outside [0, 1]");
        }
    }

    bool operator==(const CavityParams&) const = default;
};

/// Below-threshold pump: x = sqrt(P / P_threshold) in [0, 1).
struct PumpSetting {
    double pump_ratio = 0.0;
    double pump_power = 0.0; // W, informational

    void validate() const
    {
        if (!(pump_ratio >= 0.0)) {
            throw std::invalid_argument("PumpSetting: pump ratio must be >= 0");
        }
        if (!(pump_ratio < 1.0)) {
            throw std::invalid_argument("PumpSetting: pump ratio >= 1 is above threshold (not modeled)");
        }
    }

    bool operator==(const PumpSetting&) const = default;
};

/// Squeezing matrix M(r, phi); det M = 1.
inline std::array<std::array<double, 2>, 2> squeeze_matrix(const SqueezerSetting& s) noexcept
{
    const double ch = std::cosh(s.r());
    const double sh = std::sinh(s.r());
    const double c2 = std::cos(2.0 * s.phi());
    const double s2 = std::sin(2.0 * s.phi());
    return {{{ch + sh * c2, sh * s2}, {sh * s2, ch - sh * c2}}};
}

inline sideband::QuadratureVector squeeze_quadratures(const sideband::QuadratureVector& qv,
                                                      const SqueezerSetting& s) noexcept
{
    const auto m = squeeze_matrix(s);
    return {qv.offset, m[0][0] * qv.q1 + m[0][1] * qv.q2, m[1][0] * qv.q1 + m[1][1] * qv.q2};
}

/// Outgoing control field after parametric amplification of a single upper
/// sideband of real amplitude alpha. Amplitudes are the cosine coefficients of
/// the amplified field:
///   upper = (1 + g) / sqrt(2g) * alpha
///   lower = (g - 1) / sqrt(2g) * alpha * exp(+2i phi)
/// i.e. sqrt(2) times the squeezed sideband expectation values.
inline sideband::SidebandPair amplified_qcf(double alpha, const SqueezerSetting& s, double offset = 0.0)
{
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("amplified_qcf: alpha must be >= 0");
    }
    const double g = s.gain();
    const double norm = 1.0 / std::sqrt(2.0 * g);
    return {offset, Complex{(1.0 + g) * norm * alpha, 0.0},
            (g - 1.0) * norm * alpha * std::polar(1.0, 2.0 * s.phi())};
}

/// Peak-normalized Lorentzian power transmission at a detuning (Hz).
inline double cavity_power_transmission(double detuning, const CavityParams& cav)
{
    cav.validate();
    if (!(std::abs(detuning) < 0.5 * cav.fsr)) {
        throw std::invalid_argument("cavity_power_transmission: detuning outside +-fsr/2");
    }
    const double u = 2.0 * detuning / cav.fwhm;
    return 1.0 / (1.0 + u * u);
}

/// Classical cavity gain 1/(1-x)^2 -> pump ratio.
inline PumpSetting gain_conventions(double g_classical)
{
    if (!(g_classical >= 1.0) || !std::isfinite(g_classical)) {
        throw std::invalid_argument("gain_conventions: classical gain must be >= 1");
    }
    return {1.0 - 1.0 / std::sqrt(g_classical), 0.0};
}

/// V-(f) for pump ratio x, detection efficiency eta and cavity half-width gamma.
/// f and gamma in Hz.
inline double squeezed_variance(double x, double eta, double f, double gamma) noexcept
{
    const double w = f / gamma;
    return 1.0 - eta * 4.0 * x / ((1.0 + x) * (1.0 + x) + w * w);
}

inline double antisqueezed_variance(double x, double eta, double f, double gamma) noexcept
{
    const double w = f / gamma;
    return 1.0 + eta * 4.0 * x / ((1.0 - x) * (1.0 - x) + w * w);
}

/// Model variances relative to shot noise (linear) on a frequency grid.
struct SqueezingSpectrum {
    std::vector<double> frequencies; // Hz
    std::vector<double> squeezed;    // V-
    std::vector<double> antisqueezed; // V+
};

inline SqueezingSpectrum squeezing_spectrum(const PumpSetting& pump, const CavityParams& cav,
                                            double total_efficiency, std::span<const double> frequencies)
{
    pump.validate();
    cav.validate();
    if (!(total_efficiency >= 0.0 && total_efficiency <= 1.0)) {
        throw std::invalid_argument("squeezing_spectrum: total efficiency outside [0, 1]");
    }
    const double eta = total_efficiency * cav.escape_efficiency;
    const double gamma = cav.half_width();
    SqueezingSpectrum out;
    out.frequencies.assign(frequencies.begin(), frequencies.end());
    out.squeezed.reserve(frequencies.size());
    out.antisqueezed.reserve(frequencies.size());
    for (double f : frequencies) {
        out.squeezed.push_back(squeezed_variance(pump.pump_ratio, eta, f, gamma));
        out.antisqueezed.push_back(antisqueezed_variance(pump.pump_ratio, eta, f, gamma));
    }
    return out;
}

} // namespace sqzsim::opo
