// Scenario configuration: an INI-style key = value document with mandatory
// units on every dimensional quantity.
//
//   [cavity]
//   fwhm = 28.9 MHz
//   escape_efficiency = 1
//
// Dimensionless fractions accept a bare number or a `%` suffix; counts and
// polarities are bare integers. Unknown sections and keys are errors. The
// serializer writes every key in SI base units with shortest round-trip
// formatting, so parse(serialize(c)) == c.
#pragma once

#include "budget.hpp"
#include "control.hpp"
#include "table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqzsim::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& msg)
        : std::runtime_error(line > 0 ? "config:" + std::to_string(line) + ": " + msg : "config: " + msg),
          line_(line)
    {
    }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class GainConvention { Classical, SinglePass };

/// A gain number together with the convention it is quoted in.
struct GainSpec {
    double value = 1.0;
    GainConvention convention = GainConvention::Classical;

    bool operator==(const GainSpec&) const = default;
};

struct ScenarioConfig {
    // [carrier]
    double wavelength = 1064e-9; // m

    // [cavity]
    double fwhm = 28.9e6;
    double fsr = 4.0e9;
    double escape_efficiency = 1.0;
    double pdh_modulation = 153.8e6;
    double co_resonance_error = 0.0; // Hz

    // [pump]: exactly one of gain / pump_ratio
    std::optional<GainSpec> pump_gain = GainSpec{10.0, GainConvention::Classical};
    std::optional<double> pump_ratio;
    double pump_power = 60e-3; // W

    // [qcf]
    double qcf_offset = 40.0e6; // Hz
    double qcf_power = 440e-6;  // W
    GainSpec qcf_gain{10.0, GainConvention::SinglePass};
    double squeezing_angle = 0.0; // rad
    std::int64_t sweep_points = 64;

    // [homodyne]
    double lo_power = 88e-6; // W
    double lo_phase = 0.0;   // rad
    double splitter_ratio = 0.5;
    double mode_matching = 0.943;
    double total_efficiency = 0.71;
    double f_start = 10.0;   // Hz
    double f_stop = 50.0e6;  // Hz
    std::int64_t points = 200;
    std::string window_preset = "none";

    // [loops]
    double p_gain = 2.0e4;    // 1/s
    double i_corner = 500.0;  // Hz
    double phase_actuator_limit = 10.0; // rad
    double cavity_actuator_limit = 100.0e6; // Hz
    std::int64_t pump_polarity = 1;
    std::int64_t lo_polarity = 1;
    std::int64_t cavity_polarity = 1;
    double pump_set_point = 0.0;   // rad
    double lo_set_point = 0.0;     // rad
    double cavity_set_point = 0.0; // Hz
    double dt = 1.0e-6;
    double duration = 20.0e-3;
    double lock_threshold = 1.0e-3;
    double pump_random_walk = 0.0;   // rad/sqrt(s)
    double lo_random_walk = 0.0;     // rad/sqrt(s)
    double cavity_random_walk = 0.0; // Hz/sqrt(s)
    double pump_drift = 0.0;         // rad/s
    double lo_drift = 0.0;           // rad/s
    std::int64_t trace_decimation = 100;
    bool pump_loop = true;
    bool lo_loop = true;
    bool cavity_loop = true;

    // [budget]
    std::vector<budget::EfficiencyStage> stages{{"faraday_rotator", 0.95}, {"mode_matching", 0.943}};
    double heterodyne_freq = 14.9e6;
    double schnupp_asymmetry = 0.0;
    std::vector<budget::ReflectivityOverride> overrides{{29.8e6, 0.96, 0.0}};
    double signal_band_lo = 10.0;
    double signal_band_hi = 10.0e3;
    double input_squeezing = 6.0; // dB below shot noise
    double filter_insertion = 1.0;

    bool operator==(const ScenarioConfig&) const = default;
};

namespace detail {

enum class Kind { Frequency, Power, Angle, Time, Length, Rate, PhaseRandomWalk, FreqRandomWalk, PhaseDrift, Decibel,
                  Fraction, Count, Text, Gain };

struct UnitScale {
    std::string_view unit;
    double scale;
};

inline const std::vector<UnitScale>& units_for(Kind kind)
{
    static const std::map<Kind, std::vector<UnitScale>> table{
        {Kind::Frequency, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
        {Kind::Power, {{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"nW", 1e-9}}},
        {Kind::Angle, {{"rad", 1.0}, {"mrad", 1e-3}, {"urad", 1e-6}, {"deg", std::numbers::pi / 180.0}}},
        {Kind::Time, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}},
        {Kind::Length, {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
        {Kind::Rate, {{"1/s", 1.0}}},
        {Kind::PhaseRandomWalk, {{"rad/sqrt(s)", 1.0}, {"mrad/sqrt(s)", 1e-3}}},
        {Kind::FreqRandomWalk, {{"Hz/sqrt(s)", 1.0}, {"kHz/sqrt(s)", 1e3}}},
        {Kind::PhaseDrift, {{"rad/s", 1.0}, {"mrad/s", 1e-3}}},
        {Kind::Decibel, {{"dB", 1.0}}},
    };
    static const std::vector<UnitScale> none;
    const auto it = table.find(kind);
    return it == table.end() ? none : it->second;
}

inline std::string_view base_unit(Kind kind) { return units_for(kind).front().unit; }

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Leading number and the trimmed remainder.
inline std::pair<double, std::string> split_number(const std::string& text, std::size_t line)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || !std::isfinite(v)) {
        throw ConfigError(line, "expected a number, got '" + text + "'");
    }
    return {v, trim(std::string_view(res.ptr, static_cast<std::size_t>(last - res.ptr)))};
}

inline double parse_quantity(const std::string& text, Kind kind, std::size_t line)
{
    auto [v, unit] = split_number(text, line);
    if (kind == Kind::Fraction) {
        if (unit.empty()) {
            return v;
        }
        if (unit == "%") {
            return v / 100.0;
        }
        throw ConfigError(line, "dimensionless value takes no unit other than %, got '" + unit + "'");
    }
    const auto& units = units_for(kind);
    if (unit.empty()) {
        std::string allowed;
        for (const auto& u : units) {
            allowed += (allowed.empty() ? "" : ", ") + std::string(u.unit);
        }
        throw ConfigError(line, "missing unit in '" + text + "' (expected one of: " + allowed + ")");
    }
    for (const auto& u : units) {
        if (unit == u.unit) {
            return v * u.scale;
        }
    }
    throw ConfigError(line, "unit '" + unit + "' does not fit this key");
}

inline std::int64_t parse_count(const std::string& text, std::size_t line)
{
    std::int64_t v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ConfigError(line, "expected an integer, got '" + text + "'");
    }
    return v;
}

inline GainSpec parse_gain(const std::string& text, std::size_t line)
{
    auto [v, conv] = split_number(text, line);
    if (conv == "classical") {
        return {v, GainConvention::Classical};
    }
    if (conv == "single-pass") {
        return {v, GainConvention::SinglePass};
    }
    throw ConfigError(line, "gain must name its convention: '<g> classical' or '<g> single-pass'");
}

inline std::string format_gain(const GainSpec& g)
{
    return format_number(g.value) + (g.convention == GainConvention::Classical ? " classical" : " single-pass");
}

struct KeySpec {
    std::string_view key;
    Kind kind;
    std::function<void(ScenarioConfig&, const std::string&, std::size_t)> set;
    std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

template <class T>
KeySpec quantity(std::string_view key, Kind kind, T ScenarioConfig::*member)
{
    return {key, kind,
            [member, kind](ScenarioConfig& c, const std::string& v, std::size_t line) {
                c.*member = parse_quantity(v, kind, line);
            },
            [member, kind](const ScenarioConfig& c) -> std::optional<std::string> {
                if (kind == Kind::Fraction) {
                    return format_number(c.*member);
                }
                return format_number(c.*member) + " " + std::string(base_unit(kind));
            }};
}

inline KeySpec switch_key(std::string_view key, bool ScenarioConfig::*member)
{
    return {key, Kind::Text,
            [member, key](ScenarioConfig& c, const std::string& v, std::size_t line) {
                if (v != "on" && v != "off") {
                    throw ConfigError(line, std::string(key) + " must be 'on' or 'off'");
                }
                c.*member = v == "on";
            },
            [member](const ScenarioConfig& c) -> std::optional<std::string> { return c.*member ? "on" : "off"; }};
}

inline KeySpec count(std::string_view key, std::int64_t ScenarioConfig::*member)
{
    return {key, Kind::Count,
            [member](ScenarioConfig& c, const std::string& v, std::size_t line) { c.*member = parse_count(v, line); },
            [member](const ScenarioConfig& c) -> std::optional<std::string> { return std::to_string(c.*member); }};
}

using SectionTable = std::vector<std::pair<std::string_view, std::vector<KeySpec>>>;

inline const SectionTable& sections()
{
    using C = ScenarioConfig;
    static const SectionTable table{
        {"carrier", {quantity("wavelength", Kind::Length, &C::wavelength)}},
        {"cavity",
         {quantity("fwhm", Kind::Frequency, &C::fwhm), quantity("fsr", Kind::Frequency, &C::fsr),
          quantity("escape_efficiency", Kind::Fraction, &C::escape_efficiency),
          quantity("pdh_modulation", Kind::Frequency, &C::pdh_modulation),
          quantity("co_resonance_error", Kind::Frequency, &C::co_resonance_error)}},
        {"pump",
         {{"gain", Kind::Gain,
           [](C& c, const std::string& v, std::size_t line) { c.pump_gain = parse_gain(v, line); },
           [](const C& c) -> std::optional<std::string> {
               if (!c.pump_gain) {
                   return std::nullopt;
               }
               return format_gain(*c.pump_gain);
           }},
          {"pump_ratio", Kind::Fraction,
           [](C& c, const std::string& v, std::size_t line) { c.pump_ratio = parse_quantity(v, Kind::Fraction, line); },
           [](const C& c) -> std::optional<std::string> {
               if (!c.pump_ratio) {
                   return std::nullopt;
               }
               return format_number(*c.pump_ratio);
           }},
          quantity("pump_power", Kind::Power, &C::pump_power)}},
        {"qcf",
         {quantity("offset", Kind::Frequency, &C::qcf_offset), quantity("power", Kind::Power, &C::qcf_power),
          {"gain", Kind::Gain,
           [](C& c, const std::string& v, std::size_t line) { c.qcf_gain = parse_gain(v, line); },
           [](const C& c) -> std::optional<std::string> { return format_gain(c.qcf_gain); }},
          quantity("squeezing_angle", Kind::Angle, &C::squeezing_angle), count("sweep_points", &C::sweep_points)}},
        {"homodyne",
         {quantity("lo_power", Kind::Power, &C::lo_power), quantity("lo_phase", Kind::Angle, &C::lo_phase),
          quantity("splitter_ratio", Kind::Fraction, &C::splitter_ratio),
          quantity("mode_matching", Kind::Fraction, &C::mode_matching),
          quantity("total_efficiency", Kind::Fraction, &C::total_efficiency),
          quantity("f_start", Kind::Frequency, &C::f_start), quantity("f_stop", Kind::Frequency, &C::f_stop),
          count("points", &C::points),
          {"window_preset", Kind::Text,
           [](C& c, const std::string& v, std::size_t line) {
               if (v != "none" && v != "low_frequency") {
                   throw ConfigError(line, "window_preset must be 'none' or 'low_frequency'");
               }
               c.window_preset = v;
           },
           [](const C& c) -> std::optional<std::string> { return c.window_preset; }}}},
        {"loops",
         {quantity("p_gain", Kind::Rate, &C::p_gain), quantity("i_corner", Kind::Frequency, &C::i_corner),
          quantity("phase_actuator_limit", Kind::Angle, &C::phase_actuator_limit),
          quantity("cavity_actuator_limit", Kind::Frequency, &C::cavity_actuator_limit),
          count("pump_polarity", &C::pump_polarity), count("lo_polarity", &C::lo_polarity),
          count("cavity_polarity", &C::cavity_polarity),
          quantity("pump_set_point", Kind::Angle, &C::pump_set_point),
          quantity("lo_set_point", Kind::Angle, &C::lo_set_point),
          quantity("cavity_set_point", Kind::Frequency, &C::cavity_set_point),
          quantity("dt", Kind::Time, &C::dt), quantity("duration", Kind::Time, &C::duration),
          quantity("lock_threshold", Kind::Angle, &C::lock_threshold),
          quantity("pump_random_walk", Kind::PhaseRandomWalk, &C::pump_random_walk),
          quantity("lo_random_walk", Kind::PhaseRandomWalk, &C::lo_random_walk),
          quantity("cavity_random_walk", Kind::FreqRandomWalk, &C::cavity_random_walk),
          quantity("pump_drift", Kind::PhaseDrift, &C::pump_drift),
          quantity("lo_drift", Kind::PhaseDrift, &C::lo_drift), count("trace_decimation", &C::trace_decimation),
          switch_key("pump_loop", &C::pump_loop), switch_key("lo_loop", &C::lo_loop),
          switch_key("cavity_loop", &C::cavity_loop)}},
        {"budget",
         {quantity("heterodyne_freq", Kind::Frequency, &C::heterodyne_freq),
          quantity("schnupp_asymmetry", Kind::Length, &C::schnupp_asymmetry),
          quantity("signal_band_lo", Kind::Frequency, &C::signal_band_lo),
          quantity("signal_band_hi", Kind::Frequency, &C::signal_band_hi),
          quantity("input_squeezing", Kind::Decibel, &C::input_squeezing),
          quantity("filter_insertion", Kind::Fraction, &C::filter_insertion)}},
    };
    return table;
}

inline bool valid_stage_name(std::string_view name)
{
    return !name.empty() && std::all_of(name.begin(), name.end(), [](char ch) {
        return std::isalnum(static_cast<unsigned char>(ch)) != 0 || ch == '_' || ch == '-';
    });
}

/// "29.8 MHz, 96 %[, 10 kHz]"
inline budget::ReflectivityOverride parse_override(const std::string& text, std::size_t line)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        parts.push_back(trim(item));
    }
    if (parts.size() != 2 && parts.size() != 3) {
        throw ConfigError(line, "reflectivity_override expects '<freq>, <power reflectivity>[, <half width>]'");
    }
    budget::ReflectivityOverride o;
    o.frequency = parse_quantity(parts[0], Kind::Frequency, line);
    o.r_power = parse_quantity(parts[1], Kind::Fraction, line);
    if (parts.size() == 3) {
        o.half_width = parse_quantity(parts[2], Kind::Frequency, line);
    }
    return o;
}

} // namespace detail

/// Range checks that do not depend on which subcommand runs.
inline void validate(const ScenarioConfig& c)
{
    const auto fail = [](const std::string& msg) { throw ConfigError(0, msg); };
    if (!(c.wavelength > 0.0)) fail("[carrier] wavelength must be > 0");
    if (!(c.fwhm > 0.0 && c.fwhm < c.fsr)) fail("[cavity] need 0 < fwhm < fsr");
    if (!(c.escape_efficiency >= 0.0 && c.escape_efficiency <= 1.0)) fail("[cavity] escape_efficiency outside [0, 1]");
    if (c.pump_gain.has_value() == c.pump_ratio.has_value()) fail("[pump] give exactly one of gain, pump_ratio");
    if (c.pump_gain) {
        if (c.pump_gain->convention != GainConvention::Classical) {
            fail("[pump] spectra use the classical cavity gain; '" + detail::format_gain(*c.pump_gain) +
                 "' is not convertible");
        }
        if (!(c.pump_gain->value >= 1.0)) fail("[pump] gain must be >= 1");
    }
    if (c.pump_ratio && !(*c.pump_ratio >= 0.0 && *c.pump_ratio < 1.0)) fail("[pump] pump_ratio must lie in [0, 1)");
    if (c.qcf_gain.convention != GainConvention::SinglePass) {
        fail("[qcf] error-signal algebra uses the single-pass gain; write '<g> single-pass'");
    }
    if (!(c.qcf_gain.value >= 1.0)) fail("[qcf] gain must be >= 1");
    if (!(c.qcf_offset > 0.0)) fail("[qcf] offset must be > 0");
    if (!(c.qcf_power >= 0.0)) fail("[qcf] power must be >= 0");
    if (c.sweep_points < 2) fail("[qcf] sweep_points must be >= 2");
    if (!(c.lo_power > 0.0)) fail("[homodyne] lo_power must be > 0");
    if (!(c.splitter_ratio > 0.0 && c.splitter_ratio < 1.0)) fail("[homodyne] splitter_ratio must lie in (0, 1)");
    if (!(c.mode_matching >= 0.0 && c.mode_matching <= 1.0)) fail("[homodyne] mode_matching outside [0, 1]");
    if (!(c.total_efficiency >= 0.0 && c.total_efficiency <= 1.0)) fail("[homodyne] total_efficiency outside [0, 1]");
    if (!(c.f_start > 0.0 && c.f_stop > c.f_start)) fail("[homodyne] need 0 < f_start < f_stop");
    if (c.points < 2) fail("[homodyne] points must be >= 2");
    if (!(c.p_gain > 0.0)) fail("[loops] p_gain must be > 0");
    if (!(c.i_corner >= 0.0)) fail("[loops] i_corner must be >= 0");
    if (!(c.phase_actuator_limit > 0.0 && c.cavity_actuator_limit > 0.0)) fail("[loops] actuator limits must be > 0");
    for (auto p : {c.pump_polarity, c.lo_polarity, c.cavity_polarity}) {
        if (p != 1 && p != -1) fail("[loops] polarities must be +1 or -1");
    }
    if (!(c.dt > 0.0 && c.duration >= c.dt)) fail("[loops] need 0 < dt <= duration");
    if (!(c.p_gain * c.dt < 0.5)) fail("[loops] p_gain * dt must be < 0.5");
    if (!(c.lock_threshold > 0.0)) fail("[loops] lock_threshold must be > 0");
    if (!(c.pump_random_walk >= 0.0 && c.lo_random_walk >= 0.0 && c.cavity_random_walk >= 0.0)) {
        fail("[loops] random-walk strengths must be >= 0");
    }
    if (c.trace_decimation < 1) fail("[loops] trace_decimation must be >= 1");
    for (const auto& s : c.stages) {
        if (!(s.efficiency >= 0.0 && s.efficiency <= 1.0)) fail("[budget] stage '" + s.name + "' outside [0, 1]");
    }
    for (const auto& o : c.overrides) {
        if (!(o.r_power >= 0.0 && o.r_power <= 1.0)) fail("[budget] override reflectivity outside [0, 1]");
    }
    if (!(c.heterodyne_freq >= 0.0)) fail("[budget] heterodyne_freq must be >= 0");
    if (!(c.signal_band_lo > 0.0 && c.signal_band_hi > c.signal_band_lo)) fail("[budget] need 0 < signal_band_lo < signal_band_hi");
    if (!(c.input_squeezing > 0.0)) fail("[budget] input_squeezing must be > 0 dB");
    if (!(c.filter_insertion >= 0.0 && c.filter_insertion <= 1.0)) fail("[budget] filter_insertion outside [0, 1]");
}

/// Parses a document. Keys not given keep their defaults; `stage.*` and
/// `reflectivity_override` entries, when present, replace the default lists.
inline ScenarioConfig parse_config(std::istream& in)
{
    ScenarioConfig c;
    const std::vector<detail::KeySpec>* current = nullptr;
    std::string section;
    std::map<std::string, std::size_t> seen;
    bool stages_given = false;
    bool overrides_given = false;
    bool pump_gain_given = false;
    bool pump_ratio_given = false;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(line_no, "malformed section header '" + line + "'");
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            current = nullptr;
            for (const auto& [name, keys] : detail::sections()) {
                if (name == section) {
                    current = &keys;
                }
            }
            if (current == nullptr) {
                throw ConfigError(line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line_no, "expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (current == nullptr) {
            throw ConfigError(line_no, "key '" + key + "' outside any section");
        }
        if (value.empty()) {
            throw ConfigError(line_no, "key '" + key + "' has no value");
        }
        const std::string full = section + "." + key;
        if (seen.contains(full) && key != "reflectivity_override") {
            throw ConfigError(line_no, "duplicate key '" + key + "' (first set on line " +
                                           std::to_string(seen[full]) + ")");
        }
        seen.emplace(full, line_no);

        if (section == "budget" && key.starts_with("stage.")) {
            const std::string name = key.substr(6);
            if (!detail::valid_stage_name(name)) {
                throw ConfigError(line_no, "invalid stage name '" + name + "'");
            }
            if (!stages_given) {
                c.stages.clear();
                stages_given = true;
            }
            c.stages.push_back({name, detail::parse_quantity(value, detail::Kind::Fraction, line_no)});
            continue;
        }
        if (section == "budget" && key == "stages" && value == "none") {
            c.stages.clear();
            stages_given = true;
            continue;
        }
        if (section == "budget" && key == "reflectivity_override") {
            if (!overrides_given) {
                c.overrides.clear();
                overrides_given = true;
            }
            if (value != "none") {
                c.overrides.push_back(detail::parse_override(value, line_no));
            }
            continue;
        }
        const auto it = std::find_if(current->begin(), current->end(), [&](const auto& k) { return k.key == key; });
        if (it == current->end()) {
            throw ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]");
        }
        it->set(c, value, line_no);
        if (section == "pump" && key == "gain") {
            pump_gain_given = true;
        }
        if (section == "pump" && key == "pump_ratio") {
            pump_ratio_given = true;
        }
    }
    if (pump_gain_given && pump_ratio_given) {
        throw ConfigError(seen["pump.pump_ratio"], "[pump] give exactly one of gain, pump_ratio");
    }
    if (pump_ratio_given) {
        c.pump_gain.reset();
    }
    validate(c);
    return c;
}

inline ScenarioConfig parse_config(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

inline ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(0, "cannot open " + path.string());
    }
    return parse_config(in);
}

inline std::string serialize_config(const ScenarioConfig& c)
{
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, keys] : detail::sections()) {
        out << (first ? "" : "\n") << '[' << name << "]\n";
        first = false;
        for (const auto& k : keys) {
            if (auto v = k.get(c)) {
                out << k.key << " = " << *v << '\n';
            }
        }
        if (name == "budget") {
            if (c.stages.empty()) {
                out << "stages = none\n";
            }
            for (const auto& s : c.stages) {
                out << "stage." << s.name << " = " << format_number(s.efficiency) << '\n';
            }
            if (c.overrides.empty()) {
                out << "reflectivity_override = none\n";
            }
            for (const auto& o : c.overrides) {
                out << "reflectivity_override = " << format_number(o.frequency) << " Hz, " << format_number(o.r_power)
                    << ", " << format_number(o.half_width) << " Hz\n";
            }
        }
    }
    return out.str();
}

} // namespace sqzsim::cli
