#include "oracles.hpp"

#include "sqzsim/commands.hpp"
#include "sqzsim/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace sqzsim;
using namespace sqzsim::cli;

namespace {

std::size_t error_line(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return static_cast<std::size_t>(-1);
}

double column(const OutputTable& t, std::size_t row, const std::string& name)
{
    const auto& h = t.header();
    const auto it = std::find(h.begin(), h.end(), name);
    return std::stod(t.rows().at(row).at(static_cast<std::size_t>(it - h.begin())));
}

} // namespace

TEST(Config, DefaultsDocumentedValues)
{
    const ScenarioConfig c = parse_config(std::string{});
    EXPECT_EQ(c, ScenarioConfig{});
    EXPECT_EQ(c.qcf_offset, 40e6);
    EXPECT_EQ(c.fwhm, 28.9e6);
    EXPECT_EQ(c.lo_power, 88e-6);
    EXPECT_EQ(c.qcf_power, 440e-6);
}

TEST(Config, UnitsAndConversions)
{
    const auto c = parse_config("[cavity]\nfwhm = 29.8 MHz\nfsr = 4 GHz\nescape_efficiency = 97 %\n"
                                "[homodyne]\nlo_power = 88 uW\nlo_phase = 90 deg\n"
                                "[loops]\ndt = 2 us\n\n# comment\n[carrier]\nwavelength = 1064 nm ; trailing\n");
    EXPECT_EQ(c.fwhm, 29.8e6);
    EXPECT_EQ(c.fsr, 4e9);
    EXPECT_DOUBLE_EQ(c.escape_efficiency, 0.97);
    EXPECT_DOUBLE_EQ(c.lo_power, 88e-6);
    EXPECT_DOUBLE_EQ(c.lo_phase, std::numbers::pi / 2.0);
    EXPECT_DOUBLE_EQ(c.dt, 2e-6);
    EXPECT_DOUBLE_EQ(c.wavelength, 1064e-9);
}

TEST(Config, BareNumberRejectedForDimensionalKey)
{
    EXPECT_EQ(error_line("[cavity]\nfwhm = 28.9\n"), 2u);
    EXPECT_EQ(error_line("[cavity]\n\nfwhm = 28.9 mW\n"), 3u);
    EXPECT_EQ(error_line("[homodyne]\nmode_matching = 0.9 Hz\n"), 2u);
}

TEST(Config, UnknownKeysAndSectionsRejected)
{
    EXPECT_EQ(error_line("[cavity]\nlinewidth = 28.9 MHz\n"), 2u);
    EXPECT_EQ(error_line("[opo]\n"), 1u);
    EXPECT_EQ(error_line("fwhm = 28.9 MHz\n"), 1u);
    EXPECT_EQ(error_line("[cavity]\nfwhm 28.9 MHz\n"), 2u);
    EXPECT_EQ(error_line("[cavity]\nfwhm = 28.9 MHz\nfwhm = 29.8 MHz\n"), 3u);
    try {
        parse_config("[cavity]\nlinewidth = 28.9 MHz\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("config:2:"), std::string::npos);
    }
}

TEST(Config, GainMustNameConvention)
{
    EXPECT_EQ(error_line("[pump]\ngain = 10\n"), 2u);
    EXPECT_EQ(parse_config("[pump]\ngain = 4 classical\n").pump_gain->value, 4.0);
    EXPECT_EQ(parse_config("[qcf]\ngain = 2 single-pass\n").qcf_gain.value, 2.0);
    // Conventions are never converted implicitly.
    EXPECT_THROW(parse_config("[pump]\ngain = 10 single-pass\n"), ConfigError);
    EXPECT_THROW(parse_config("[qcf]\ngain = 10 classical\n"), ConfigError);
    const auto x = parse_config("[pump]\npump_ratio = 0.684\n");
    EXPECT_FALSE(x.pump_gain.has_value());
    EXPECT_EQ(*x.pump_ratio, 0.684);
    EXPECT_THROW(parse_config("[pump]\npump_ratio = 0.5\ngain = 4 classical\n"), ConfigError);
}

TEST(Config, RangeChecks)
{
    EXPECT_THROW(parse_config("[cavity]\nfwhm = 5 GHz\n"), ConfigError);
    EXPECT_THROW(parse_config("[pump]\npump_ratio = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[homodyne]\ntotal_efficiency = 120 %\n"), ConfigError);
    EXPECT_THROW(parse_config("[loops]\np_gain = 1e6 1/s\n"), ConfigError);
    EXPECT_THROW(parse_config("[loops]\npump_polarity = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("[budget]\nstage.bad = 1.5\n"), ConfigError);
}

TEST(Config, BudgetLists)
{
    const auto c = parse_config("[budget]\nstage.faraday = 95 %\nstage.mode_matching = 94.3 %\nstage.diode = 0.9\n"
                                "reflectivity_override = 29.8 MHz, 96 %\n"
                                "reflectivity_override = 1 MHz, 0.5, 10 kHz\n");
    ASSERT_EQ(c.stages.size(), 3u);
    EXPECT_EQ(c.stages[2].name, "diode");
    ASSERT_EQ(c.overrides.size(), 2u);
    EXPECT_EQ(c.overrides[1].half_width, 10e3);
    const auto none = parse_config("[budget]\nstages = none\nreflectivity_override = none\n");
    EXPECT_TRUE(none.stages.empty());
    EXPECT_TRUE(none.overrides.empty());
    EXPECT_EQ(error_line("[budget]\nreflectivity_override = 29.8 MHz\n"), 2u);
}

TEST(Config, RoundTripDefaultsAndRandom)
{
    EXPECT_EQ(parse_config(serialize_config(ScenarioConfig{})), ScenarioConfig{});
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        ScenarioConfig c;
        c.fwhm = 1e6 + 1e8 * u(rng);
        c.escape_efficiency = u(rng);
        if (k % 2 == 0) {
            c.pump_gain.reset();
            c.pump_ratio = 0.99 * u(rng);
        } else {
            c.pump_gain->value = 1.0 + 50.0 * u(rng);
        }
        c.qcf_power = 1e-3 * u(rng);
        c.qcf_gain.value = 1.0 + 20.0 * u(rng);
        c.squeezing_angle = 6.0 * u(rng) - 3.0;
        c.lo_phase = 6.0 * u(rng) - 3.0;
        c.total_efficiency = u(rng);
        c.window_preset = k % 3 == 0 ? "low_frequency" : "none";
        c.pump_drift = u(rng);
        c.cavity_random_walk = 1e3 * u(rng);
        c.lo_loop = k % 5 != 0;
        c.stages.clear();
        for (int s = 0; s < k % 4; ++s) {
            c.stages.push_back({"stage_" + std::to_string(s), u(rng)});
        }
        c.overrides = {{3e7 * u(rng), u(rng), 1e3 * u(rng)}};
        if (k % 7 == 0) {
            c.overrides.clear();
        }
        c.input_squeezing = 0.1 + 10.0 * u(rng);
        const std::string text = serialize_config(c);
        EXPECT_EQ(parse_config(text), c) << text;
        EXPECT_EQ(serialize_config(parse_config(text)), text);
    }
}

TEST(SpectrumCommand, DefaultsNear35MHz)
{
    ScenarioConfig c;
    c.f_start = 30e6;
    c.f_stop = 40e6;
    c.points = 11;
    const auto r = cmd_spectrum(c);
    const double x = oracle::pump_ratio_from_classical_gain(10.0);
    for (const auto& b : r.squeezed.bins) {
        EXPECT_NEAR(b.variance, oracle::v_minus(x, 0.71, b.frequency, 14.45e6), 1e-12);
        if (std::abs(b.frequency - 35e6) < 1.0) {
            EXPECT_NEAR(detection::to_db(b.variance), -1.09699, 1e-4);
        }
    }
}

TEST(SpectrumCommand, NoPumpIsFlat)
{
    const auto c = parse_config("[pump]\npump_ratio = 0\n");
    const auto out = spectrum_output(cmd_spectrum(c));
    const auto& table = out.tables.front().second;
    for (std::size_t k = 0; k < table.rows().size(); ++k) {
        EXPECT_EQ(column(table, k, "squeezed_db"), 0.0);
        EXPECT_EQ(column(table, k, "antisqueezed_db"), 0.0);
    }
}

TEST(SpectrumCommand, WindowPreset)
{
    const auto c = parse_config("[homodyne]\nwindow_preset = low_frequency\n");
    const auto r = cmd_spectrum(c);
    EXPECT_EQ(r.squeezed.bins.front().rbw, 0.25);
    EXPECT_EQ(r.squeezed.bins.back().rbw, 16.0);
    EXPECT_EQ(r.squeezed.bins.back().average_count, 800);
    const double x = oracle::pump_ratio_from_classical_gain(10.0);
    EXPECT_NEAR(detection::to_db(r.squeezed.bins.front().variance), oracle::db(oracle::v_minus(x, 0.71, 10.0, 14.45e6)),
                1e-9);
}

TEST(ErrorSignalsCommand, SweepAmplitudeAndPipeline)
{
    ScenarioConfig c;
    c.sweep_points = 16;
    const auto t = cmd_error_signals(c);
    ASSERT_EQ(t.rows().size(), 32u);
    const double alpha = std::sqrt(c.qcf_power * oracle::lorentzian(c.qcf_offset, c.fwhm));
    double peak = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
        EXPECT_EQ(t.rows()[k][0], "phi");
        peak = std::max(peak, std::abs(column(t, k, "err_pump")));
    }
    EXPECT_NEAR(peak, 99.0 / 40.0 * alpha * alpha, 1e-12); // phi = pi/4 is on the grid
    for (std::size_t k = 0; k < t.rows().size(); ++k) {
        const double pump = column(t, k, "err_pump");
        const double seed = column(t, k, "err_lo_seed_beat");
        EXPECT_NEAR(column(t, k, "err_pump_pipeline"), pump, 1e-6 * peak);
        EXPECT_NEAR(column(t, k, "err_lo_pipeline"), seed, 1e-6 * std::sqrt(c.lo_power) * alpha * 10.0);
        const double phi = column(t, k, "phi_rad");
        const double Phi = column(t, k, "Phi_rad");
        EXPECT_NEAR(column(t, k, "err_lo"), oracle::lo_error(std::sqrt(c.lo_power), alpha, 10.0, phi, Phi), 1e-15);
    }
}

TEST(ErrorSignalsCommand, NoGainGivesZeroPumpColumn)
{
    const auto c = parse_config("[qcf]\ngain = 1 single-pass\nsweep_points = 8\n");
    const auto t = cmd_error_signals(c);
    for (std::size_t k = 0; k < t.rows().size(); ++k) {
        EXPECT_EQ(column(t, k, "err_pump"), 0.0);
        EXPECT_EQ(column(t, k, "err_lo"), 0.0);
        EXPECT_NEAR(column(t, k, "err_pump_pipeline"), 0.0, 1e-15);
    }
}

TEST(LockCommand, DefaultSeed42Acquires)
{
    const auto run = cmd_lock(ScenarioConfig{}, 42);
    EXPECT_TRUE(run.report.acquired) << run.report.diagnostics;
    EXPECT_LT(run.report.residual_rms, 1e-3);
    EXPECT_FALSE(run.trace.empty());
}

TEST(LockCommand, PumpLoopOffFails)
{
    const auto c = parse_config("[loops]\npump_loop = off\n");
    EXPECT_FALSE(cmd_lock(c, 42).report.acquired);
}

TEST(LockCommand, RepeatedSeedIdentical)
{
    const auto c = parse_config("[loops]\npump_random_walk = 0.01 rad/sqrt(s)\nduration = 5 ms\n");
    const auto a = cmd_lock(c, 7);
    const auto b = cmd_lock(c, 7);
    EXPECT_EQ(lock_output(a).tables.front().second.to_csv(), lock_output(b).tables.front().second.to_csv());
    EXPECT_EQ(a.report, b.report);
}

TEST(BudgetCommand, GeoPreset)
{
    const auto r = cmd_budget(ScenarioConfig{});
    EXPECT_EQ(r.plan.injection_case, budget::InjectionCase::DarkPortOnly);
    EXPECT_NEAR(r.plan.bands[1].sqz_out_db, -5.51, 0.005);
    const auto& chain = r.chain;
    EXPECT_EQ(chain.rows().back()[0], "total");
    EXPECT_NEAR(column(chain, chain.rows().size() - 1, "efficiency"), 0.89585, 1e-12);
}

TEST(BudgetCommand, EmptyChainIsUnity)
{
    const auto r = cmd_budget(parse_config("[budget]\nstages = none\n"));
    EXPECT_EQ(r.chain.rows().size(), 2u);
    EXPECT_EQ(column(r.chain, 1, "efficiency"), 1.0);
    EXPECT_EQ(column(r.chain, 1, "sqz_db"), -6.0);
}

TEST(Outputs, WrittenToDirectory)
{
    const auto dir = std::filesystem::temp_directory_path() / "sqzsim_cli_test";
    std::filesystem::remove_all(dir);
    write_outputs(budget_output(cmd_budget(ScenarioConfig{})), dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "efficiency_chain.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "injection_plan.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "injection_case.txt"));
    std::filesystem::remove_all(dir);
}

TEST(OutputTable, ColumnCountEnforced)
{
    OutputTable t({"a", "b"});
    EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
    t.add_row({1.5, -2.0});
    EXPECT_EQ(t.to_csv(), "a,b\n1.5,-2\n");
}
