// RBW-windowed noise spectra relative to shot noise.
//
// The estimator is a Welch average of Hann-windowed, non-overlapping
// periodograms. Each analysis window has its own span, resolution bandwidth
// and average count; the segment length follows from the RBW through the Hann
// equivalent noise bandwidth (1.5 bins). Spectra pieced together from several
// windows keep each bin's RBW and average count.
//
// FFTW plan creation is not thread-safe; run estimators from one thread.
#pragma once

#include "sideband_core.hpp"
#include "table.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqzsim::detection {

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

struct SpectrumBin {
    double frequency = 0.0; // Hz
    double variance = 1.0;  // relative to shot noise, linear
    double rbw = 1.0;       // Hz
    int average_count = 1;

    bool operator==(const SpectrumBin&) const = default;
};

struct NoiseSpectrum {
    std::vector<SpectrumBin> bins;

    bool operator==(const NoiseSpectrum&) const = default;

    void validate() const
    {
        for (std::size_t i = 0; i < bins.size(); ++i) {
            const auto& b = bins[i];
            if (!(b.variance > 0.0) || !(b.rbw > 0.0) || b.average_count < 1) {
                throw std::invalid_argument("NoiseSpectrum: bin " + std::to_string(i) +
                                            " needs variance > 0, rbw > 0, average_count >= 1");
            }
            if (i > 0 && !(b.frequency > bins[i - 1].frequency)) {
                throw std::invalid_argument("NoiseSpectrum: frequencies not strictly increasing at bin " +
                                            std::to_string(i));
            }
        }
    }

    /// Columns freq_hz, rel_variance_db, rbw_hz, n_avg.
    [[nodiscard]] OutputTable to_table() const
    {
        OutputTable table({"freq_hz", "rel_variance_db", "rbw_hz", "n_avg"});
        for (const auto& b : bins) {
            table.add_row({format_number(b.frequency), format_number(to_db(b.variance)), format_number(b.rbw),
                           format_number(static_cast<std::int64_t>(b.average_count))});
        }
        return table;
    }
};

struct AnalysisWindow {
    double f_lo = 0.0; // Hz
    double f_hi = 0.0; // Hz
    double rbw = 1.0;  // Hz
    int n_avg = 1;

    void validate() const
    {
        if (!(f_lo >= 0.0) || !(f_hi > f_lo)) {
            throw std::invalid_argument("AnalysisWindow: need 0 <= f_lo < f_hi");
        }
        if (!(rbw > 0.0) || rbw > f_hi - f_lo) {
            throw std::invalid_argument("AnalysisWindow: rbw " + format_number(rbw) + " Hz exceeds span " +
                                        format_number(f_hi - f_lo) + " Hz");
        }
        if (n_avg < 1) {
            throw std::invalid_argument("AnalysisWindow: n_avg must be >= 1");
        }
    }

    bool operator==(const AnalysisWindow&) const = default;
};

/// The five-window low-frequency preset: 10 Hz - 10 kHz.
inline std::vector<AnalysisWindow> low_frequency_windows()
{
    return {
        {10.0, 50.0, 0.25, 100},
        {50.0, 200.0, 1.0, 100},
        {200.0, 800.0, 2.0, 400},
        {800.0, 3200.0, 4.0, 400},
        {3200.0, 10000.0, 16.0, 800},
    };
}

/// Equivalent noise bandwidth of the Hann window in bins.
inline constexpr double kHannEnbwBins = 1.5;

/// Sample rate an analyzer uses for a window: 2.56 x the top of the span.
inline double analyzer_sample_rate(const AnalysisWindow& w) { return 2.56 * w.f_hi; }

inline std::size_t segment_length(const AnalysisWindow& w, double sample_rate)
{
    return static_cast<std::size_t>(std::llround(kHannEnbwBins * sample_rate / w.rbw));
}

/// One-sided shot-noise power spectral density for a given LO power. The
/// absolute scale (`psd_per_watt`) is arbitrary; only the linear dependence on
/// LO power matters.
inline double shot_noise_reference(double lo_power, double psd_per_watt = 1.0)
{
    if (!(lo_power > 0.0) || !(psd_per_watt > 0.0)) {
        throw std::invalid_argument("shot_noise_reference: LO power and scale must be positive");
    }
    return lo_power * psd_per_watt;
}

namespace detail {

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

/// Averaged one-sided Hann periodogram of `n_avg` consecutive segments.
class WelchAccumulator {
public:
    explicit WelchAccumulator(std::size_t n)
        : n_(n),
          in_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
          out_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))),
          window_(n),
          psd_(n / 2 + 1, 0.0)
    {
        if (n < 4) {
            throw std::invalid_argument("Welch: segment too short");
        }
        if (!in_ || !out_) {
            throw std::bad_alloc();
        }
        plan_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE));
        for (std::size_t k = 0; k < n; ++k) {
            window_[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
            window_power_ += window_[k] * window_[k];
        }
    }

    void add_segment(const double* samples)
    {
        for (std::size_t k = 0; k < n_; ++k) {
            in_.get()[k] = samples[k] * window_[k];
        }
        fftw_execute(plan_.get());
        for (std::size_t k = 0; k < psd_.size(); ++k) {
            const double re = out_.get()[k][0];
            const double im = out_.get()[k][1];
            psd_[k] += re * re + im * im;
        }
        ++segments_;
    }

    /// One-sided PSD (units^2/Hz) at bin k.
    [[nodiscard]] double psd(std::size_t k, double sample_rate) const
    {
        return 2.0 * psd_[k] / (static_cast<double>(segments_) * sample_rate * window_power_);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_;
    std::unique_ptr<double, FftwFree> in_;
    std::unique_ptr<fftw_complex, FftwFree> out_;
    std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan_;
    std::vector<double> window_;
    std::vector<double> psd_;
    double window_power_ = 0.0;
    std::size_t segments_ = 0;
};

inline void check_window_order(const std::vector<AnalysisWindow>& windows)
{
    if (windows.empty()) {
        throw std::invalid_argument("estimate_noise_spectrum: no analysis windows");
    }
    for (std::size_t i = 0; i < windows.size(); ++i) {
        windows[i].validate();
        if (i > 0 && windows[i].f_lo < windows[i - 1].f_hi) {
            throw std::invalid_argument("estimate_noise_spectrum: analysis windows overlap or are unordered");
        }
    }
}

inline void append_window_bins(NoiseSpectrum& out, const WelchAccumulator& acc, const AnalysisWindow& w,
                               double sample_rate, double shot_psd, bool last)
{
    const double df = sample_rate / static_cast<double>(acc.size());
    for (std::size_t k = 1; k < acc.size() / 2; ++k) {
        const double f = df * static_cast<double>(k);
        const bool inside = f >= w.f_lo && (f < w.f_hi || (last && f <= w.f_hi));
        if (inside) {
            out.bins.push_back({f, acc.psd(k, sample_rate) / shot_psd, w.rbw, w.n_avg});
        }
    }
}

} // namespace detail

/// Supplies `n` samples at `sample_rate` for one analysis window.
using SampleSource = std::function<sideband::TimeSeries(double sample_rate, std::size_t n)>;

/// Each window is measured separately at its analyzer sample rate.
inline NoiseSpectrum estimate_noise_spectrum(const SampleSource& source, const std::vector<AnalysisWindow>& windows,
                                             double shot_psd)
{
    detail::check_window_order(windows);
    if (!(shot_psd > 0.0)) {
        throw std::invalid_argument("estimate_noise_spectrum: shot-noise reference must be positive");
    }
    NoiseSpectrum out;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& w = windows[wi];
        const double fs = analyzer_sample_rate(w);
        const std::size_t n = segment_length(w, fs);
        const auto needed = n * static_cast<std::size_t>(w.n_avg);
        const sideband::TimeSeries data = source(fs, needed);
        if (data.samples.size() < needed || data.sample_rate != fs) {
            throw std::invalid_argument("estimate_noise_spectrum: sample source returned too little data");
        }
        detail::WelchAccumulator acc(n);
        for (int s = 0; s < w.n_avg; ++s) {
            acc.add_segment(data.samples.data() + static_cast<std::size_t>(s) * n);
        }
        detail::append_window_bins(out, acc, w, fs, shot_psd, wi + 1 == windows.size());
    }
    out.validate();
    return out;
}

/// All windows are taken from one recorded series, each from its start.
inline NoiseSpectrum estimate_noise_spectrum(const sideband::TimeSeries& samples,
                                             const std::vector<AnalysisWindow>& windows, double shot_psd)
{
    detail::check_window_order(windows);
    if (!(shot_psd > 0.0)) {
        throw std::invalid_argument("estimate_noise_spectrum: shot-noise reference must be positive");
    }
    const double fs = samples.sample_rate;
    NoiseSpectrum out;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& w = windows[wi];
        if (w.f_hi > 0.5 * fs) {
            throw std::invalid_argument("estimate_noise_spectrum: window above Nyquist");
        }
        const std::size_t n = segment_length(w, fs);
        if (n * static_cast<std::size_t>(w.n_avg) > samples.samples.size()) {
            throw std::invalid_argument("estimate_noise_spectrum: rbw " + format_number(w.rbw) + " Hz with " +
                                        std::to_string(w.n_avg) + " averages needs " +
                                        std::to_string(n * static_cast<std::size_t>(w.n_avg)) + " samples");
        }
        detail::WelchAccumulator acc(n);
        for (int s = 0; s < w.n_avg; ++s) {
            acc.add_segment(samples.samples.data() + static_cast<std::size_t>(s) * n);
        }
        detail::append_window_bins(out, acc, w, fs, shot_psd, wi + 1 == windows.size());
    }
    out.validate();
    return out;
}

/// Model-fed spectrum: variance(f) relative to shot noise averaged over each
/// RBW-wide bin (boxcar, 8 midpoint samples). Bins start at f_lo with spacing
/// rbw.
inline NoiseSpectrum estimate_noise_spectrum(const std::function<double(double)>& model_variance,
                                             const std::vector<AnalysisWindow>& windows)
{
    detail::check_window_order(windows);
    constexpr int kSub = 8;
    NoiseSpectrum out;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& w = windows[wi];
        const bool last = wi + 1 == windows.size();
        for (std::size_t k = 0;; ++k) {
            const double f = w.f_lo + w.rbw * static_cast<double>(k);
            if (f > w.f_hi || (!last && f >= w.f_hi)) {
                break;
            }
            double sum = 0.0;
            for (int j = 0; j < kSub; ++j) {
                sum += model_variance(f + w.rbw * ((j + 0.5) / kSub - 0.5));
            }
            out.bins.push_back({f, sum / kSub, w.rbw, w.n_avg});
        }
    }
    out.validate();
    return out;
}

struct DarkSubtraction {
    NoiseSpectrum spectrum;                // bins where dark < measured
    std::vector<double> flagged_frequencies; // bins dropped because dark >= measured
};

/// Per-bin linear subtraction of electronic (dark) noise. Both spectra must
/// share the frequency grid. Bins where dark >= measured are reported in
/// `flagged_frequencies` and left out of the result.
inline DarkSubtraction dark_noise_subtract(const NoiseSpectrum& measured, const NoiseSpectrum& dark)
{
    if (measured.bins.size() != dark.bins.size()) {
        throw std::invalid_argument("dark_noise_subtract: spectra have different bin counts");
    }
    DarkSubtraction out;
    for (std::size_t i = 0; i < measured.bins.size(); ++i) {
        const auto& m = measured.bins[i];
        const auto& d = dark.bins[i];
        if (std::abs(m.frequency - d.frequency) > 1e-9 * std::max(1.0, std::abs(m.frequency))) {
            throw std::invalid_argument("dark_noise_subtract: frequency grids differ at bin " + std::to_string(i));
        }
        if (d.variance >= m.variance) {
            out.flagged_frequencies.push_back(m.frequency);
            continue;
        }
        SpectrumBin b = m;
        b.variance = m.variance - d.variance;
        out.spectrum.bins.push_back(b);
    }
    return out;
}

} // namespace sqzsim::detection
