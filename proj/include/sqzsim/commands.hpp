// The four subcommands behind the sqzsim executable. Each takes a validated
// ScenarioConfig, returns its tables, and writes them with write_outputs().
#pragma once

#include "budget.hpp"
#include "config.hpp"
#include "control.hpp"
#include "detection.hpp"
#include "noise_spectrum.hpp"
#include "opo.hpp"
#include "table.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace sqzsim::cli {

/// Named output files of one subcommand.
struct CommandOutput {
    std::vector<std::pair<std::string, OutputTable>> tables;
    std::vector<std::pair<std::string, std::string>> texts;
};

inline void write_outputs(const CommandOutput& out, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    for (const auto& [name, table] : out.tables) {
        table.write(dir / name);
    }
    for (const auto& [name, text] : out.texts) {
        std::ofstream file(dir / name, std::ios::binary | std::ios::trunc);
        file << text;
        file.flush();
        if (!file) {
            throw std::runtime_error("write to " + (dir / name).string() + " failed");
        }
    }
}

inline opo::CavityParams cavity_of(const ScenarioConfig& c)
{
    return {c.fwhm, c.fsr, c.escape_efficiency};
}

inline opo::PumpSetting pump_of(const ScenarioConfig& c)
{
    opo::PumpSetting p = c.pump_ratio ? opo::PumpSetting{*c.pump_ratio, 0.0} : opo::gain_conventions(c.pump_gain->value);
    p.pump_power = c.pump_power;
    return p;
}

/// Control-field amplitude inside the OPO: the injected power scaled by the
/// cavity transmission at the QCF offset. Amplitudes are in sqrt(W).
inline double qcf_amplitude(const ScenarioConfig& c)
{
    return std::sqrt(c.qcf_power * opo::cavity_power_transmission(c.qcf_offset, cavity_of(c)));
}

inline std::vector<double> log_grid(double f_start, double f_stop, std::size_t points)
{
    std::vector<double> f(points);
    const double ratio = std::log(f_stop / f_start);
    for (std::size_t k = 0; k < points; ++k) {
        f[k] = f_start * std::exp(ratio * static_cast<double>(k) / static_cast<double>(points - 1));
    }
    f.back() = f_stop;
    return f;
}

struct SpectrumResult {
    detection::NoiseSpectrum squeezed;
    detection::NoiseSpectrum antisqueezed;
};

/// Model squeezing/antisqueezing spectra. With window_preset = low_frequency
/// the bins follow the five analyzer windows (RBW-averaged model); otherwise a
/// log grid from f_start to f_stop whose bins carry the local grid spacing as
/// their width.
inline SpectrumResult cmd_spectrum(const ScenarioConfig& c)
{
    const auto cav = cavity_of(c);
    const auto pump = pump_of(c);
    const double eta = c.total_efficiency * cav.escape_efficiency;
    const double gamma = cav.half_width();
    SpectrumResult out;
    if (c.window_preset == "low_frequency") {
        const auto windows = detection::low_frequency_windows();
        out.squeezed = detection::estimate_noise_spectrum(
            [&](double f) { return opo::squeezed_variance(pump.pump_ratio, eta, f, gamma); }, windows);
        out.antisqueezed = detection::estimate_noise_spectrum(
            [&](double f) { return opo::antisqueezed_variance(pump.pump_ratio, eta, f, gamma); }, windows);
        return out;
    }
    const auto grid = log_grid(c.f_start, c.f_stop, static_cast<std::size_t>(c.points));
    const auto spec = opo::squeezing_spectrum(pump, cav, c.total_efficiency, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double width = k + 1 < grid.size() ? grid[k + 1] - grid[k] : grid[k] - grid[k - 1];
        out.squeezed.bins.push_back({grid[k], spec.squeezed[k], width, 1});
        out.antisqueezed.bins.push_back({grid[k], spec.antisqueezed[k], width, 1});
    }
    out.squeezed.validate();
    out.antisqueezed.validate();
    return out;
}

inline CommandOutput spectrum_output(const SpectrumResult& r)
{
    OutputTable both({"freq_hz", "squeezed_db", "antisqueezed_db"});
    for (std::size_t k = 0; k < r.squeezed.bins.size(); ++k) {
        both.add_row({r.squeezed.bins[k].frequency, detection::to_db(r.squeezed.bins[k].variance),
                      detection::to_db(r.antisqueezed.bins[k].variance)});
    }
    return {{{"spectrum.csv", both},
             {"squeezed.csv", r.squeezed.to_table()},
             {"antisqueezed.csv", r.antisqueezed.to_table()}},
            {}};
}

/// Sweeps of both error signals over phi (at the configured LO phase) and over
/// Phi (at the configured squeezing angle), with the sampled detection
/// pipeline alongside the closed forms.
///
/// Pipeline columns are divided by their known normalization: 2 for the pump
/// signal, 2 sqrt(R T) mode_matching / sqrt(2) for the LO signal. The LO
/// pipeline then matches err_lo_seed_beat, which includes the beat of the LO
/// with the amplified seed sideband; err_lo keeps only the generated sideband.
inline OutputTable cmd_error_signals(const ScenarioConfig& c)
{
    const double alpha = qcf_amplitude(c);
    const double alpha_lo = std::sqrt(c.lo_power);
    const auto frame = sideband::CarrierFrame::from_wavelength(c.wavelength);
    detection::PipelineTiming timing;
    timing.offset_hz = c.qcf_offset;
    const double lo_scale =
        2.0 * std::sqrt(c.splitter_ratio * (1.0 - c.splitter_ratio)) * c.mode_matching / std::numbers::sqrt2;

    OutputTable table({"sweep", "phi_rad", "Phi_rad", "err_pump", "err_pump_pipeline", "err_lo", "err_lo_seed_beat",
                       "err_lo_pipeline"});
    const auto n = static_cast<std::size_t>(c.sweep_points);
    for (const std::string sweep : {"phi", "Phi"}) {
        for (std::size_t k = 0; k < n; ++k) {
            const double x = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            const double phi = sweep == "phi" ? x : c.squeezing_angle;
            const double Phi = sweep == "Phi" ? x : c.lo_phase;
            const auto s = opo::SqueezerSetting::from_gain(c.qcf_gain.value, phi);
            const detection::HomodyneSetup hs{alpha_lo, Phi, c.splitter_ratio, c.mode_matching};
            const double pump_pipe = detection::pump_error_pipeline(alpha, s, frame, timing) / 2.0;
            const double lo_raw = detection::lo_error_pipeline(hs, alpha, s, frame, timing);
            const double lo_pipe = lo_scale > 0.0 ? lo_raw / lo_scale : lo_raw;
            table.add_row({sweep, format_number(phi), format_number(Phi),
                           format_number(detection::pump_phase_error(alpha, s)), format_number(pump_pipe),
                           format_number(detection::lo_phase_error(alpha_lo, alpha, s, Phi)),
                           format_number(detection::lo_phase_error_with_seed_beat(alpha_lo, alpha, s, Phi)),
                           format_number(lo_pipe)});
        }
    }
    return table;
}

inline control::Scenario lock_scenario(const ScenarioConfig& c, std::uint64_t seed)
{
    control::Scenario sc;
    sc.cavity = cavity_of(c);
    sc.pdh_modulation = c.pdh_modulation;
    sc.single_pass_gain = c.qcf_gain.value;
    sc.alpha = qcf_amplitude(c);
    sc.alpha_lo = std::sqrt(c.lo_power);
    sc.co_resonance_error = c.co_resonance_error;
    const auto servo = [&](double limit, double set_point, std::int64_t polarity, bool enabled) {
        return control::ServoConfig{c.p_gain, c.i_corner, limit, set_point, static_cast<int>(polarity), enabled};
    };
    sc.servos.pump = servo(c.phase_actuator_limit, c.pump_set_point, c.pump_polarity, c.pump_loop);
    sc.servos.lo = servo(c.phase_actuator_limit, c.lo_set_point, c.lo_polarity, c.lo_loop);
    sc.servos.cavity = servo(c.cavity_actuator_limit, c.cavity_set_point, c.cavity_polarity, c.cavity_loop);
    sc.disturbance.pump = {c.pump_random_walk, c.pump_drift, 0.0, {}};
    sc.disturbance.lo = {c.lo_random_walk, c.lo_drift, 0.0, {}};
    sc.disturbance.cavity = {c.cavity_random_walk, 0.0, 0.0, {}};
    sc.disturbance.seed = seed;
    sc.dt = c.dt;
    sc.duration = c.duration;
    sc.lock_threshold = c.lock_threshold;
    sc.trace_decimation = static_cast<std::size_t>(c.trace_decimation);
    return sc;
}

/// Lock acquisition from a seeded random initial state.
inline control::LockRun cmd_lock(const ScenarioConfig& c, std::uint64_t seed)
{
    const auto sc = lock_scenario(c, seed);
    return control::simulate_lock(control::random_initial_state(seed, sc.cavity), sc);
}

inline CommandOutput lock_output(const control::LockRun& run)
{
    return {{{"lock_trace.csv", control::trace_table(run.trace)}}, {{"lock_report.txt", run.report.to_text()}}};
}

struct BudgetResult {
    OutputTable chain;
    budget::InjectionPlan plan;
};

/// Efficiency chain applied to the input squeezing, and the injection plan
/// for the configured interferometer.
inline BudgetResult cmd_budget(const ScenarioConfig& c)
{
    const budget::EfficiencyChain chain{c.stages};
    const double v_in = detection::from_db(-c.input_squeezing);
    OutputTable table({"stage", "efficiency", "cumulative_efficiency", "sqz_db"});
    double cumulative = 1.0;
    table.add_row({"input", "1", "1", format_number(-c.input_squeezing)});
    for (const auto& s : chain.stages) {
        cumulative *= s.efficiency;
        table.add_row({s.name, format_number(s.efficiency), format_number(cumulative),
                       format_number(detection::to_db(budget::apply_loss(v_in, cumulative)))});
    }
    const double total = budget::chain_total(chain);
    table.add_row({"total", format_number(total), format_number(total),
                   format_number(detection::to_db(budget::apply_loss(v_in, total)))});

    const budget::InterferometerModel model{c.heterodyne_freq, c.schnupp_asymmetry, c.overrides};
    budget::PlanOptions opts;
    opts.filter_insertion_efficiency = c.filter_insertion;
    return {table, budget::plan_injection(model, {c.signal_band_lo, c.signal_band_hi}, c.input_squeezing, opts)};
}

inline CommandOutput budget_output(const BudgetResult& r)
{
    return {{{"efficiency_chain.csv", r.chain}, {"injection_plan.csv", r.plan.to_table()}},
            {{"injection_case.txt", to_string(r.plan.injection_case) + "\n"}}};
}

} // namespace sqzsim::cli
