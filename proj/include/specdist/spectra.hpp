#ifndef SPECDIST_SPECTRA_HPP
#define SPECDIST_SPECTRA_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specdist/error.hpp"
#include "specdist/fft.hpp"
#include "specdist/panel.hpp"

namespace specdist {

/// Probabilities below this are treated as exact zeros by the entropy sums.
inline constexpr double probability_floor = 1e-300;

/// Symmetric Hanning taper w(k) = (1 - cos(2 pi k / (width - 1))) / 2.
inline std::vector<double> hanning_window(std::size_t width) {
    if (width < 2)
        throw InvalidWindowError("hanning window width must be >= 2, got " + std::to_string(width));
    std::vector<double> w(width);
    const double denom = static_cast<double>(width - 1);
    for (std::size_t k = 0; k < width; ++k) {
        // Mirror the upper half so the taper is exactly symmetric.
        const std::size_t j = std::min(k, width - 1 - k);
        w[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / denom));
    }
    return w;
}

/// Periodogram bins P(f_n), n = 0..N-1, with f_n = n / (N dt).
struct PowerSpectrum {
    std::vector<double> values;
    double dt = 1.0;

    std::size_t width() const noexcept { return values.size(); }
    double frequency(std::size_t n) const noexcept {
        return static_cast<double>(n) / (static_cast<double>(values.size()) * dt);
    }
};

/**
 * Periodogram bins n = 1..N-1 rescaled to a probability distribution.
 *
 * The DC bin is not stored: `prob(i)` is the mass of bin n = i + 1.
 */
class NormalizedSpectrum {
public:
    NormalizedSpectrum() = default;

    /// Wraps an existing distribution over bins 1..N-1 (N = probs.size() + 1).
    static NormalizedSpectrum from_probabilities(std::vector<double> probs, double dt = 1.0) {
        if (probs.empty())
            throw DimensionError("normalized spectrum needs at least one bin");
        double total = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw DimensionError("spectrum probabilities must be finite and non-negative");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw DimensionError("spectrum probabilities sum to " + std::to_string(total) + ", not 1");
        return NormalizedSpectrum(std::move(probs), dt);
    }

    std::size_t width() const noexcept { return probs_.size() + 1; }
    std::size_t bins() const noexcept { return probs_.size(); }
    double dt() const noexcept { return dt_; }
    std::span<const double> probs() const noexcept { return probs_; }
    double prob(std::size_t i) const { return probs_.at(i); }
    /// Frequency of stored bin i, i.e. of periodogram bin n = i + 1.
    double frequency(std::size_t i) const noexcept {
        return static_cast<double>(i + 1) / (static_cast<double>(width()) * dt_);
    }

    bool same_grid(const NormalizedSpectrum& other) const noexcept {
        return bins() == other.bins() && dt_ == other.dt_;
    }

    /// Weighted mixture sum_j w_j p_j of spectra on a common grid.
    static NormalizedSpectrum mixture(std::span<const NormalizedSpectrum> spectra, std::span<const double> weights) {
        if (spectra.empty() || spectra.size() != weights.size())
            throw DimensionError("mixture needs one weight per spectrum");
        std::vector<double> mix(spectra.front().bins(), 0.0);
        for (std::size_t j = 0; j < spectra.size(); ++j) {
            if (!spectra[j].same_grid(spectra.front()))
                throw DimensionError("mixture spectra are on different frequency grids");
            const auto probs = spectra[j].probs();
            for (std::size_t i = 0; i < mix.size(); ++i)
                mix[i] += weights[j] * probs[i];
        }
        return NormalizedSpectrum(std::move(mix), spectra.front().dt());
    }

private:
    friend NormalizedSpectrum normalize_spectrum(const PowerSpectrum&);

    NormalizedSpectrum(std::vector<double> probs, double dt) : probs_(std::move(probs)), dt_(dt) {}

    std::vector<double> probs_;
    double dt_ = 1.0;
};

/**
 * Reusable Hanning-windowed periodogram for a fixed width N.
 *
 * P(f_n) = |sum_k w(k) x(k) exp(-2 pi i k n / N)|^2 / N^2. For real input the
 * upper half is mirrored from the lower so that P(f_n) == P(f_{N-n}) exactly.
 */
class PeriodogramEstimator {
public:
    explicit PeriodogramEstimator(std::size_t width) : window_(hanning_window(width)), plan_(width) {}

    std::size_t width() const noexcept { return window_.size(); }
    std::span<const double> window() const noexcept { return window_; }

    PowerSpectrum operator()(std::span<const double> samples, double dt = 1.0) const {
        const std::size_t n = window_.size();
        if (samples.size() != n)
            throw DimensionError("periodogram input has " + std::to_string(samples.size()) +
                                 " samples, estimator width is " + std::to_string(n));
        std::vector<std::complex<double>> buf(n), spec(n);
        for (std::size_t k = 0; k < n; ++k)
            buf[k] = window_[k] * samples[k];
        plan_.forward(buf, spec);

        PowerSpectrum ps{std::vector<double>(n), dt};
        const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
        for (std::size_t m = 0; m <= n / 2; ++m) {
            ps.values[m] = std::norm(spec[m]) * scale;
            if (m != 0)
                ps.values[n - m] = ps.values[m];
        }
        return ps;
    }

private:
    std::vector<double> window_;
    FftPlan plan_;
};

/// Periodogram of `window.width` samples of one panel channel starting at `start`.
inline PowerSpectrum periodogram(const SignalPanel& panel, std::size_t channel, std::size_t start,
                                 const WindowSpec& window) {
    window.validate();
    if (channel >= panel.channel_count())
        throw OutOfRangeError("channel " + std::to_string(channel) + " out of range");
    if (start + window.width > panel.length())
        throw OutOfRangeError("window [" + std::to_string(start) + ", " + std::to_string(start + window.width) +
                              ") overruns series of length " + std::to_string(panel.length()));
    const PeriodogramEstimator estimate(window.width);
    return estimate(panel.channel(channel).subspan(start, window.width), panel.dt());
}

/// Drops the DC bin and rescales bins 1..N-1 to unit mass.
inline NormalizedSpectrum normalize_spectrum(const PowerSpectrum& ps) {
    if (ps.values.size() < 2)
        throw DimensionError("power spectrum needs at least two bins");
    double ac = 0.0;
    for (std::size_t n = 1; n < ps.values.size(); ++n)
        ac += ps.values[n];
    if (!(ac > 0.0) || !std::isfinite(ac))
        throw DegenerateSpectrumError("spectrum has no AC power");
    std::vector<double> probs(ps.values.size() - 1);
    for (std::size_t n = 1; n < ps.values.size(); ++n)
        probs[n - 1] = ps.values[n] / ac;
    return NormalizedSpectrum(std::move(probs), ps.dt);
}

/// Shannon entropy in nats with 0 log 0 = 0.
inline double shannon_entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs)
        if (p >= probability_floor)
            h -= p * std::log(p);
    return h;
}

inline double spectral_entropy(const NormalizedSpectrum& p) { return shannon_entropy(p.probs()); }

/// Periodogram bin index n (1-based, DC excluded) of maximal mass; ties go to the lowest bin.
inline std::size_t mode_bin(const NormalizedSpectrum& p) {
    const auto probs = p.probs();
    const auto it = std::max_element(probs.begin(), probs.end());
    return static_cast<std::size_t>(it - probs.begin()) + 1;
}

inline double mode_frequency(const NormalizedSpectrum& p) { return p.frequency(mode_bin(p) - 1); }

} // namespace specdist

#endif // SPECDIST_SPECTRA_HPP
