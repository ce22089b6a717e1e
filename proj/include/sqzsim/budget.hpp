// Loss accounting for squeezed states and injection planning for a
// heterodyne-readout interferometer with a Schnupp-asymmetric Michelson.
#pragma once

#include "noise_spectrum.hpp"
#include "table.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sqzsim::budget {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Beam-splitter admixture of vacuum: V' = eta V + (1 - eta).
inline double apply_loss(double variance, double efficiency)
{
    if (!(variance > 0.0)) {
        throw std::invalid_argument("apply_loss: variance must be > 0");
    }
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("apply_loss: efficiency outside [0, 1]");
    }
    return efficiency * variance + (1.0 - efficiency);
}

struct EfficiencyStage {
    std::string name;
    double efficiency = 1.0;

    bool operator==(const EfficiencyStage&) const = default;
};

struct EfficiencyChain {
    std::vector<EfficiencyStage> stages;

    void validate() const
    {
        for (const auto& s : stages) {
            if (!(s.efficiency >= 0.0 && s.efficiency <= 1.0)) {
                throw std::invalid_argument("EfficiencyChain: stage '" + s.name + "' outside [0, 1]");
            }
        }
    }

    bool operator==(const EfficiencyChain&) const = default;
};

inline double chain_total(const EfficiencyChain& chain)
{
    chain.validate();
    double total = 1.0;
    for (const auto& s : chain.stages) {
        total *= s.efficiency;
    }
    return total;
}

struct ReflectivityOverride {
    double frequency = 0.0;     // Hz
    double r_power = 1.0;
    double half_width = 0.0;    // Hz; the override applies within +-half_width

    bool operator==(const ReflectivityOverride&) const = default;
};

struct InterferometerModel {
    double heterodyne_freq = 14.9e6; // omega_m / 2 pi, Hz; 0 for homodyne readout
    double schnupp_asymmetry = 0.0;  // Delta L, m
    std::vector<ReflectivityOverride> overrides;

    void validate() const
    {
        if (!(heterodyne_freq >= 0.0)) {
            throw std::invalid_argument("InterferometerModel: heterodyne frequency must be >= 0");
        }
        for (const auto& o : overrides) {
            if (!(o.r_power >= 0.0 && o.r_power <= 1.0) || !(o.half_width >= 0.0)) {
                throw std::invalid_argument("InterferometerModel: override reflectivity outside [0, 1]");
            }
        }
    }

    bool operator==(const InterferometerModel&) const = default;
};

/// Dark-port power reflectivity at a sideband frequency: an explicit override
/// when one covers `freq`, else cos^2(2 pi freq Delta L / c).
inline double dark_port_reflectivity(const InterferometerModel& model, double freq)
{
    model.validate();
    if (!(freq >= 0.0)) {
        throw std::invalid_argument("dark_port_reflectivity: frequency must be >= 0");
    }
    for (const auto& o : model.overrides) {
        const double tol = std::max(o.half_width, 1e-9 * std::max(1.0, o.frequency));
        if (std::abs(freq - o.frequency) <= tol) {
            return o.r_power;
        }
    }
    const double c = std::cos(kTwoPi * freq * model.schnupp_asymmetry / kSpeedOfLight);
    return c * c;
}

struct Band {
    double lo = 0.0; // Hz
    double hi = 0.0; // Hz

    [[nodiscard]] double center() const noexcept { return 0.5 * (lo + hi); }
    bool operator==(const Band&) const = default;
};

/// Bands that need squeezing: the signal band and, for heterodyne readout,
/// 2 omega_m +- the top of the signal band.
inline std::vector<Band> heterodyne_requirements(const InterferometerModel& model, const Band& signal_band)
{
    model.validate();
    if (!(signal_band.lo > 0.0) || !(signal_band.hi > signal_band.lo)) {
        throw std::invalid_argument("heterodyne_requirements: signal band must satisfy 0 < lo < hi");
    }
    if (model.heterodyne_freq == 0.0) {
        return {signal_band};
    }
    if (!(signal_band.hi < model.heterodyne_freq)) {
        throw std::invalid_argument("heterodyne_requirements: signal band must lie below the heterodyne frequency");
    }
    const double twice = 2.0 * model.heterodyne_freq;
    return {signal_band, {twice - signal_band.hi, twice + signal_band.hi}};
}

enum class InjectionCase { DarkPortOnly, FilterSplit, PartialTap };

inline std::string to_string(InjectionCase c)
{
    switch (c) {
    case InjectionCase::DarkPortOnly: return "dark_port_only";
    case InjectionCase::FilterSplit: return "filter_split";
    case InjectionCase::PartialTap: return "partial_tap";
    }
    return "unknown";
}

struct CaseThresholds {
    double high = 0.9; // r_power above: treated as ~1
    double low = 0.1;  // r_power below: treated as ~0

    bool operator==(const CaseThresholds&) const = default;
};

struct BandPlan {
    std::string name;
    Band band;
    double r_power = 1.0;
    double dark_port_fraction = 1.0;
    double bright_port_fraction = 0.0;
    double eta_total = 1.0;
    double sqz_in_db = 0.0;  // relative variance, dB (negative when squeezed)
    double sqz_out_db = 0.0; // relative variance, dB

    [[nodiscard]] std::string route() const
    {
        if (bright_port_fraction == 0.0) {
            return "dark";
        }
        if (dark_port_fraction == 0.0) {
            return "bright";
        }
        return "split";
    }
};

struct InjectionPlan {
    InjectionCase injection_case = InjectionCase::DarkPortOnly;
    std::vector<BandPlan> bands;

    /// Columns band, r_power, route, eta_total, sqz_in_db, sqz_out_db.
    [[nodiscard]] OutputTable to_table() const
    {
        OutputTable table({"band", "r_power", "route", "eta_total", "sqz_in_db", "sqz_out_db"});
        for (const auto& b : bands) {
            table.add_row({b.name, format_number(b.r_power), b.route(), format_number(b.eta_total),
                           format_number(b.sqz_in_db), format_number(b.sqz_out_db)});
        }
        return table;
    }
};

struct PlanOptions {
    CaseThresholds thresholds{};
    double filter_insertion_efficiency = 1.0; // band splitter / tap path
    double extra_efficiency = 1.0;            // common loss ahead of the interferometer
};

/// Chooses the injection case from r(signal band) and r(2 omega_m +- Omega_s),
/// both evaluated at the band centers, and computes the squeezing left in each
/// band. `squeezing_db` is the broadband suppression below shot noise (> 0).
inline InjectionPlan plan_injection(const InterferometerModel& model, const Band& signal_band, double squeezing_db,
                                    const PlanOptions& opts = {})
{
    if (!(squeezing_db > 0.0)) {
        throw std::invalid_argument("plan_injection: squeezing level must be > 0 dB");
    }
    if (!(opts.filter_insertion_efficiency >= 0.0 && opts.filter_insertion_efficiency <= 1.0) ||
        !(opts.extra_efficiency >= 0.0 && opts.extra_efficiency <= 1.0)) {
        throw std::invalid_argument("plan_injection: efficiencies outside [0, 1]");
    }
    const auto bands = heterodyne_requirements(model, signal_band);
    const double v_in = detection::from_db(-squeezing_db);
    const double r_signal = dark_port_reflectivity(model, signal_band.center());
    if (!(r_signal > opts.thresholds.high)) {
        throw std::invalid_argument("plan_injection: unsupported scenario, dark-port reflectivity " +
                                    format_number(r_signal) + " in the signal band is not close to 1");
    }

    InjectionPlan plan;
    BandPlan low{"signal", bands[0], r_signal, 1.0, 0.0, r_signal * opts.extra_efficiency, -squeezing_db, 0.0};
    low.sqz_out_db = detection::to_db(apply_loss(v_in, low.eta_total));
    plan.bands.push_back(low);

    if (bands.size() == 1) {
        plan.injection_case = InjectionCase::DarkPortOnly;
        return plan;
    }

    const double r_high = dark_port_reflectivity(model, bands[1].center());
    BandPlan high{"twice_heterodyne", bands[1], r_high, 1.0, 0.0, 1.0, -squeezing_db, 0.0};
    if (r_high > opts.thresholds.high) {
        plan.injection_case = InjectionCase::DarkPortOnly;
        high.eta_total = r_high;
    } else if (r_high < opts.thresholds.low) {
        plan.injection_case = InjectionCase::FilterSplit;
        high.dark_port_fraction = 0.0;
        high.bright_port_fraction = 1.0;
        high.eta_total = opts.filter_insertion_efficiency;
    } else {
        // r^2 of the power goes in through the bright port, the rest through the
        // dark port; both paths interfere constructively at the signal port.
        plan.injection_case = InjectionCase::PartialTap;
        high.bright_port_fraction = r_high;
        high.dark_port_fraction = 1.0 - r_high;
        high.eta_total = opts.filter_insertion_efficiency;
    }
    high.eta_total *= opts.extra_efficiency;
    high.sqz_out_db = detection::to_db(apply_loss(v_in, high.eta_total));
    plan.bands.push_back(high);
    return plan;
}

} // namespace sqzsim::budget
