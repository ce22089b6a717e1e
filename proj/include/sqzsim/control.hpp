// Closed-loop simulation of the three servo loops of the squeezer:
//
//   cavity length  <- PDH error of the co-resonant locking beam
//   pump phase phi <- control-field error demodulated at 2*Omega
//   LO phase Phi   <- homodyne difference current demodulated at Omega
//
// The LO error depends on 2*phi + Phi, so the LO loop alone cannot hold the
// detected quadrature while phi wanders.
//
// Each loop is a PI servo driving an integrating actuator:
//   integrator += e dt
//   actuator   -= polarity * p_gain * (e + 2 pi i_corner * integrator) dt
// with the actuator clamped to +-actuator_limit. Errors are normalized to unit
// slope at the lock point, so p_gain is the loop bandwidth in 1/s.
#pragma once

#include "detection.hpp"
#include "opo.hpp"
#include "table.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqzsim::control {

inline constexpr double kPi = std::numbers::pi;

/// Wraps to (-pi, pi].
inline double wrap_pi(double x) noexcept
{
    double y = std::remainder(x, 2.0 * kPi);
    if (y <= -kPi) {
        y += 2.0 * kPi;
    }
    return y;
}

/// Wraps to (-pi/2, pi/2].
inline double wrap_half_pi(double x) noexcept
{
    double y = std::remainder(x, kPi);
    if (y <= -0.5 * kPi) {
        y += kPi;
    }
    return y;
}

struct ServoConfig {
    double p_gain = 2.0e4;       // 1/s
    double i_corner = 500.0;     // Hz, 0 disables the integrator
    double actuator_limit = 10.0; // rad (Hz for the cavity loop)
    double set_point = 0.0;      // rad (Hz for the cavity loop)
    int polarity = 1;
    bool enabled = true;

    void validate() const
    {
        if (!(p_gain > 0.0)) {
            throw std::invalid_argument("ServoConfig: p_gain must be > 0");
        }
        if (!(i_corner >= 0.0)) {
            throw std::invalid_argument("ServoConfig: i_corner must be >= 0");
        }
        if (!(actuator_limit > 0.0)) {
            throw std::invalid_argument("ServoConfig: actuator_limit must be > 0");
        }
        if (polarity != 1 && polarity != -1) {
            throw std::invalid_argument("ServoConfig: polarity must be +1 or -1");
        }
    }

    bool operator==(const ServoConfig&) const = default;
};

enum Loop : std::size_t { kPump = 0, kLo = 1, kCavity = 2 };

struct ServoSet {
    ServoConfig pump{};
    ServoConfig lo{};
    ServoConfig cavity{2.0e4, 500.0, 100.0e6, 0.0, 1, true};

    [[nodiscard]] const ServoConfig& operator[](std::size_t i) const
    {
        return i == kPump ? pump : (i == kLo ? lo : cavity);
    }

    bool operator==(const ServoSet&) const = default;
};

struct LoopState {
    double phi = 0.0;             // pump phase (squeezing angle), rad
    double Phi = 0.0;             // LO phase, rad
    double cavity_detuning = 0.0; // Hz
    double t = 0.0;               // s
    std::array<double, 3> integrator{};
    std::array<double, 3> actuator{};

    bool operator==(const LoopState&) const = default;
};

/// Error values normalized to unit slope (rad, rad, Hz).
struct LoopErrors {
    double pump = 0.0;
    double lo = 0.0;
    double cavity = 0.0;

    [[nodiscard]] double operator[](std::size_t i) const { return i == kPump ? pump : (i == kLo ? lo : cavity); }
};

struct SinusoidalLine {
    double frequency = 0.0; // Hz
    double amplitude = 0.0; // rad (Hz for the cavity loop)

    bool operator==(const SinusoidalLine&) const = default;
};

struct LoopDisturbance {
    double random_walk_strength = 0.0; // rad/sqrt(s)
    double drift_rate = 0.0;           // rad/s
    double step = 0.0;                 // applied once at t = 0
    std::vector<SinusoidalLine> lines;

    bool operator==(const LoopDisturbance&) const = default;
};

struct DisturbanceModel {
    LoopDisturbance pump;
    LoopDisturbance lo;
    LoopDisturbance cavity;
    std::uint64_t seed = 0;

    [[nodiscard]] const LoopDisturbance& operator[](std::size_t i) const
    {
        return i == kPump ? pump : (i == kLo ? lo : cavity);
    }

    void validate() const
    {
        for (std::size_t i = 0; i < 3; ++i) {
            if (!((*this)[i].random_walk_strength >= 0.0)) {
                throw std::invalid_argument("DisturbanceModel: random-walk strength must be >= 0");
            }
        }
    }

    bool operator==(const DisturbanceModel&) const = default;
};

/// Free-running increments of (phi, Phi, detuning) over one step.
struct DisturbanceStep {
    std::array<double, 3> increment{};
};

/// Seeded source of disturbance increments; identical seeds give bit-identical
/// sequences.
class DisturbanceGenerator {
public:
    explicit DisturbanceGenerator(const DisturbanceModel& model) : model_(model), rng_(model.seed)
    {
        model_.validate();
    }

    DisturbanceStep next(double t, double dt)
    {
        DisturbanceStep step;
        for (std::size_t i = 0; i < 3; ++i) {
            const LoopDisturbance& d = model_[i];
            double inc = d.drift_rate * dt;
            if (d.random_walk_strength > 0.0) {
                inc += d.random_walk_strength * std::sqrt(dt) * normal_(rng_);
            }
            for (const auto& line : d.lines) {
                inc += line.amplitude * (std::sin(kTwoPi * line.frequency * (t + dt)) -
                                         std::sin(kTwoPi * line.frequency * t));
            }
            if (first_) {
                inc += d.step;
            }
            step.increment[i] = inc;
        }
        first_ = false;
        return step;
    }

private:
    DisturbanceModel model_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    bool first_ = true;
};

struct StepResult {
    LoopState state;
    std::array<bool, 3> saturated{};
};

/// One PI update per enabled loop from errors measured at `state`, then the
/// disturbance increment. Rejects p_gain * dt >= 0.5.
inline StepResult step_closed_loop(const LoopState& state, const LoopErrors& errors, const ServoSet& servos,
                                   const DisturbanceStep& disturbance, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step_closed_loop: dt must be > 0");
    }
    StepResult out{state, {}};
    std::array<double, 3> moved{};
    for (std::size_t i = 0; i < 3; ++i) {
        const ServoConfig& cfg = servos[i];
        cfg.validate();
        if (!cfg.enabled) {
            continue;
        }
        if (!(cfg.p_gain * dt < 0.5)) {
            throw std::invalid_argument("step_closed_loop: unstable step, p_gain * dt = " +
                                        std::to_string(cfg.p_gain * dt) + " (need < 0.5)");
        }
        const double e = errors[i];
        const double integ = state.integrator[i] + e * dt;
        const double drive = cfg.p_gain * (e + kTwoPi * cfg.i_corner * integ);
        double act = state.actuator[i] - cfg.polarity * drive * dt;
        if (std::abs(act) > cfg.actuator_limit) {
            act = std::copysign(cfg.actuator_limit, act);
            out.saturated[i] = true;
        } else {
            out.state.integrator[i] = integ; // no integration while saturated
        }
        moved[i] = act - state.actuator[i];
        out.state.actuator[i] = act;
    }
    out.state.phi = wrap_pi(state.phi + moved[kPump] + disturbance.increment[kPump]);
    out.state.Phi = wrap_pi(state.Phi + moved[kLo] + disturbance.increment[kLo]);
    out.state.cavity_detuning = state.cavity_detuning + moved[kCavity] + disturbance.increment[kCavity];
    out.state.t = state.t + dt;
    return out;
}

/// PDH error for a cavity with impedance-matched single-pole reflection
/// F(d) = i d/gamma / (1 + i d/gamma):
///   eps(d) = polarity * Im[F(d) F*(d + fm) - F*(d) F(d - fm)]
/// Odd in detuning, slope 2/gamma at resonance for fm >> gamma.
inline double pdh_error(double detuning, const opo::CavityParams& cav, double mod_freq, int polarity = 1)
{
    cav.validate();
    if (!(mod_freq > cav.fwhm)) {
        throw std::invalid_argument("pdh_error: modulation frequency must exceed the cavity linewidth");
    }
    const double gamma = cav.half_width();
    const auto reflect = [gamma](double d) {
        const Complex u{0.0, d / gamma};
        return u / (1.0 + u);
    };
    const Complex f0 = reflect(detuning);
    const Complex term = f0 * std::conj(reflect(detuning + mod_freq)) - std::conj(f0) * reflect(detuning - mod_freq);
    return polarity * term.imag();
}

inline double pdh_slope(const opo::CavityParams& cav, double mod_freq)
{
    const double h = 1e-6 * cav.fwhm;
    return (pdh_error(h, cav, mod_freq) - pdh_error(-h, cav, mod_freq)) / (2.0 * h);
}

struct LockReport {
    bool acquired = false;
    double acquisition_time = 0.0; // s
    double residual_rms = 0.0;     // rad
    int out_of_lock_events = 0;
    int saturation_events = 0;
    std::string diagnostics;

    /// Flat key = value block.
    [[nodiscard]] std::string to_text() const
    {
        std::ostringstream out;
        out << "acquired = " << (acquired ? "true" : "false") << '\n'
            << "acquisition_time_s = " << format_number(acquisition_time) << '\n'
            << "residual_rms_rad = " << format_number(residual_rms) << '\n'
            << "out_of_lock_events = " << out_of_lock_events << '\n'
            << "saturation_events = " << saturation_events << '\n'
            << "diagnostics = " << diagnostics << '\n';
        return out.str();
    }

    bool operator==(const LockReport&) const = default;
};

struct TraceSample {
    double t = 0.0;
    double phi = 0.0;
    double Phi = 0.0;
    double detuning = 0.0;
    double err_pump = 0.0;
    double err_lo = 0.0;
    double err_pdh = 0.0;

    bool operator==(const TraceSample&) const = default;
};

/// Columns t_s, phi_rad, Phi_rad, detuning_hz, err_pump, err_lo, err_pdh.
inline OutputTable trace_table(const std::vector<TraceSample>& trace)
{
    OutputTable table({"t_s", "phi_rad", "Phi_rad", "detuning_hz", "err_pump", "err_lo", "err_pdh"});
    for (const auto& s : trace) {
        table.add_row({s.t, s.phi, s.Phi, s.detuning, s.err_pump, s.err_lo, s.err_pdh});
    }
    return table;
}

struct Scenario {
    opo::CavityParams cavity{};
    double pdh_modulation = 153.8e6; // Hz
    double single_pass_gain = 10.0;  // g = exp(2r)
    double alpha = 1.0;              // control-field amplitude
    double alpha_lo = 1.0;           // LO amplitude
    double co_resonance_error = 0.0; // Hz, extra detuning seen by the squeezed mode
    ServoSet servos{};
    DisturbanceModel disturbance{};
    double dt = 1.0e-6;              // s
    double duration = 20.0e-3;       // s
    double lock_threshold = 1.0e-3;  // rad
    std::size_t trace_decimation = 0; // 0: no trace

    bool operator==(const Scenario&) const = default;
};

/// Raw (unnormalized) error signals for a state.
inline TraceSample raw_errors(const LoopState& s, const Scenario& sc)
{
    const auto sq = opo::SqueezerSetting::from_gain(sc.single_pass_gain, s.phi - sc.servos.pump.set_point);
    const auto sq_lo = opo::SqueezerSetting::from_gain(sc.single_pass_gain, s.phi);
    TraceSample out;
    out.t = s.t;
    out.phi = s.phi;
    out.Phi = s.Phi;
    out.detuning = s.cavity_detuning;
    out.err_pump = detection::pump_phase_error(sc.alpha, sq);
    out.err_lo = detection::lo_phase_error(sc.alpha_lo, sc.alpha, sq_lo, s.Phi - sc.servos.lo.set_point);
    out.err_pdh = pdh_error(s.cavity_detuning + sc.co_resonance_error - sc.servos.cavity.set_point, sc.cavity,
                            sc.pdh_modulation);
    return out;
}

/// Slopes of the raw error signals at their lock points.
struct ErrorSlopes {
    double pump = 0.0;
    double lo = 0.0;
    double cavity = 0.0;
};

inline ErrorSlopes error_slopes(const Scenario& sc)
{
    const double g = sc.single_pass_gain;
    return {(g * g - 1.0) * sc.alpha * sc.alpha / (2.0 * g),
            std::numbers::sqrt2 * sc.alpha_lo * sc.alpha * (g - 1.0) / std::sqrt(g),
            pdh_slope(sc.cavity, sc.pdh_modulation)};
}

inline LoopErrors normalized_errors(const TraceSample& raw, const ErrorSlopes& slopes)
{
    const auto norm = [](double v, double slope) { return slope != 0.0 ? v / slope : 0.0; };
    return {norm(raw.err_pump, slopes.pump), norm(raw.err_lo, slopes.lo), norm(raw.err_pdh, slopes.cavity)};
}

/// Distance of each loop from its stable lock point: pump angle (mod pi), LO
/// quadrature angle 2 phi + Phi (mod 2 pi), and cavity round-trip phase
/// atan(2 detuning / fwhm).
inline std::array<double, 3> lock_residuals(const LoopState& s, const Scenario& sc)
{
    const auto& sv = sc.servos;
    const double pump_target = sv.pump.set_point + (sv.pump.polarity > 0 ? 0.0 : 0.5 * kPi);
    const double lo_target = sv.lo.set_point + (sv.lo.polarity > 0 ? 0.0 : kPi);
    const double det = s.cavity_detuning + sc.co_resonance_error - sv.cavity.set_point;
    return {wrap_half_pi(s.phi - pump_target), wrap_pi(2.0 * s.phi + s.Phi - lo_target),
            std::atan(2.0 * det / sc.cavity.fwhm)};
}

struct LockRun {
    LockReport report;
    std::vector<TraceSample> trace;
    LoopState final_state;
};

/// Runs the scenario from `initial` and reports acquisition. Acquired iff every
/// loop has a nonzero error slope and the residual RMS over the final 20 % of
/// the run is below the lock threshold.
inline LockRun simulate_lock(const LoopState& initial, const Scenario& sc)
{
    if (!(sc.dt > 0.0) || !(sc.duration >= sc.dt)) {
        throw std::invalid_argument("simulate_lock: need 0 < dt <= duration");
    }
    if (!(sc.lock_threshold > 0.0)) {
        throw std::invalid_argument("simulate_lock: lock threshold must be > 0");
    }
    if (!(sc.single_pass_gain >= 1.0)) {
        throw std::invalid_argument("simulate_lock: single-pass gain must be >= 1");
    }
    const ErrorSlopes slopes = error_slopes(sc);
    DisturbanceGenerator disturbance(sc.disturbance);

    const auto steps = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));
    const std::size_t tail_start = steps - steps / 5;

    LockRun run;
    LoopState state = initial;
    double tail_sq = 0.0;
    std::size_t tail_n = 0;
    std::size_t last_unlocked = 0; // index of the first sample after the last out-of-lock sample
    bool in_lock = false;
    bool ever_locked = false;

    for (std::size_t k = 0; k <= steps; ++k) {
        const TraceSample raw = raw_errors(state, sc);
        if (sc.trace_decimation > 0 && k % sc.trace_decimation == 0) {
            run.trace.push_back(raw);
        }
        const auto res = lock_residuals(state, sc);
        const double r2 = res[0] * res[0] + res[1] * res[1] + res[2] * res[2];
        const bool locked_now = std::sqrt(r2) < sc.lock_threshold;
        if (!locked_now) {
            last_unlocked = k + 1;
            if (in_lock) {
                ++run.report.out_of_lock_events;
            }
        }
        in_lock = locked_now;
        ever_locked = ever_locked || locked_now;
        if (k >= tail_start) {
            tail_sq += r2;
            ++tail_n;
        }
        if (k == steps) {
            break;
        }
        const StepResult next = step_closed_loop(state, normalized_errors(raw, slopes), sc.servos,
                                                 disturbance.next(state.t, sc.dt), sc.dt);
        for (bool sat : next.saturated) {
            run.report.saturation_events += sat ? 1 : 0;
        }
        state = next.state;
    }

    LockReport& rep = run.report;
    rep.residual_rms = std::sqrt(tail_sq / static_cast<double>(tail_n));
    std::string diag;
    if (slopes.pump == 0.0) {
        diag += "pump loop has no error signal (zero slope); ";
    }
    if (slopes.lo == 0.0) {
        diag += "LO loop has no error signal (zero slope); ";
    }
    const bool lockable = slopes.pump != 0.0 && slopes.lo != 0.0 && slopes.cavity != 0.0;
    const bool all_enabled = sc.servos.pump.enabled && sc.servos.lo.enabled && sc.servos.cavity.enabled;
    if (!all_enabled) {
        diag += "a loop is open; ";
    }
    rep.acquired = lockable && all_enabled && rep.residual_rms < sc.lock_threshold;
    if (rep.acquired) {
        rep.acquisition_time = static_cast<double>(last_unlocked) * sc.dt;
    } else {
        rep.acquisition_time = sc.duration;
        if (rep.residual_rms >= sc.lock_threshold) {
            diag += "timeout: residual " + format_number(rep.residual_rms) + " rad >= threshold; ";
        }
    }
    if (!ever_locked) {
        rep.out_of_lock_events = 0;
    }
    if (diag.empty()) {
        diag = "ok";
    } else {
        diag.resize(diag.size() - 2);
    }
    rep.diagnostics = diag;
    run.final_state = state;
    return run;
}

inline LockReport acquire_lock(const LoopState& initial, const Scenario& sc)
{
    Scenario quiet = sc;
    quiet.trace_decimation = 0;
    return simulate_lock(initial, quiet).report;
}

/// Uniform random phases in (-pi, pi] and detuning within +-fwhm/2.
inline LoopState random_initial_state(std::uint64_t seed, const opo::CavityParams& cav)
{
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    std::uniform_real_distribution<double> det(-0.5 * cav.fwhm, 0.5 * cav.fwhm);
    LoopState s;
    s.phi = wrap_pi(phase(rng));
    s.Phi = wrap_pi(phase(rng));
    s.cavity_detuning = det(rng);
    return s;
}

/// The state every loop locks to, with zero servo memory.
inline LoopState lock_point(const Scenario& sc)
{
    const auto& sv = sc.servos;
    LoopState s;
    s.phi = wrap_pi(sv.pump.set_point + (sv.pump.polarity > 0 ? 0.0 : 0.5 * kPi));
    s.Phi = wrap_pi(sv.lo.set_point + (sv.lo.polarity > 0 ? 0.0 : kPi) - 2.0 * s.phi);
    s.cavity_detuning = sv.cavity.set_point - sc.co_resonance_error;
    return s;
}

struct CouplingSample {
    double t = 0.0;
    double phi = 0.0;
    double Phi = 0.0;
    double quadrature_angle_error = 0.0; // rad, detected quadrature vs squeezed quadrature
    double homodyne_variance = 1.0;      // relative to shot noise

    bool operator==(const CouplingSample&) const = default;
};

/// Detected quadrature angle relative to the squeezed quadrature selected at
/// the lock point. The homodyne measures the quadrature at angle -Phi while the
/// squeezed axis sits at phi + pi/2, so the detection depends on phi + Phi.
inline double quadrature_angle_error(const LoopState& s, const LoopState& reference)
{
    return wrap_half_pi(-(s.phi - reference.phi) - (s.Phi - reference.Phi));
}

/// Homodyne variance for a squeezed state (V-, V+) read at angle error delta.
inline double detected_variance(double v_minus, double v_plus, double delta) noexcept
{
    const double c = std::cos(delta);
    const double s = std::sin(delta);
    return v_minus * c * c + v_plus * s * s;
}

/// Runs the scenario with the pump loop open or closed and records the detected
/// quadrature. The cavity and LO loops stay as configured; the run starts at
/// the lock point.
inline std::vector<CouplingSample> loop_coupling_demo(const Scenario& sc, bool pump_loop_closed, double v_minus,
                                                      double v_plus, std::size_t decimation = 100)
{
    Scenario run_sc = sc;
    run_sc.servos.pump.enabled = pump_loop_closed;
    run_sc.trace_decimation = decimation == 0 ? 1 : decimation;
    const LoopState start = lock_point(run_sc);
    const LockRun run = simulate_lock(start, run_sc);
    std::vector<CouplingSample> out;
    out.reserve(run.trace.size());
    for (const auto& row : run.trace) {
        LoopState s;
        s.phi = row.phi;
        s.Phi = row.Phi;
        const double delta = quadrature_angle_error(s, start);
        out.push_back({row.t, row.phi, row.Phi, delta, detected_variance(v_minus, v_plus, delta)});
    }
    return out;
}

} // namespace sqzsim::control
