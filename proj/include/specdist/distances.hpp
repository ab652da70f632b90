#ifndef SPECDIST_DISTANCES_HPP
#define SPECDIST_DISTANCES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specdist/error.hpp"
#include "specdist/spectra.hpp"

namespace specdist {

/// Default lower clamp applied to spectra before taking KL ratios.
inline constexpr double default_kl_floor = 1e-12;

/// Mixture weights pi_j > 0 with sum 1.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
        if (weights_.empty())
            throw DimensionError("weight vector is empty");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw DimensionError("weights must be positive and finite");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw DimensionError("weights sum to " + std::to_string(total) + ", not 1");
    }

    static WeightVector uniform(std::size_t m) {
        if (m == 0)
            throw DimensionError("weight vector is empty");
        return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
    }

    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> values() const noexcept { return weights_; }
    double operator[](std::size_t j) const { return weights_.at(j); }

private:
    std::vector<double> weights_;
};

/// M >= 2 normalized spectra on one frequency grid.
class SpectrumEnsemble {
public:
    SpectrumEnsemble(std::vector<NormalizedSpectrum> spectra, std::vector<std::string> labels = {})
        : spectra_(std::move(spectra)), labels_(std::move(labels)) {
        if (spectra_.size() < 2)
            throw DimensionError("spectrum ensemble needs at least two members");
        for (const auto& s : spectra_)
            if (!s.same_grid(spectra_.front()))
                throw DimensionError("ensemble spectra are on different frequency grids");
        if (labels_.empty())
            for (std::size_t j = 0; j < spectra_.size(); ++j)
                labels_.push_back("ch" + std::to_string(j));
        if (labels_.size() != spectra_.size())
            throw DimensionError("ensemble label count does not match member count");
    }

    std::size_t size() const noexcept { return spectra_.size(); }
    const NormalizedSpectrum& operator[](std::size_t j) const { return spectra_.at(j); }
    std::span<const NormalizedSpectrum> spectra() const noexcept { return spectra_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    std::vector<NormalizedSpectrum> spectra_;
    std::vector<std::string> labels_;
};

/// Dense row-major square matrix.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
    SquareMatrix(std::size_t rows, std::size_t cols, std::vector<double> data) : n_(rows), data_(std::move(data)) {
        if (rows != cols)
            throw DimensionError("matrix is " + std::to_string(rows) + "x" + std::to_string(cols) + ", not square");
        if (data_.size() != rows * cols)
            throw DimensionError("matrix data size does not match its shape");
    }

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

namespace detail {
inline std::vector<double> floored(std::span<const double> p, double floor) {
    std::vector<double> out(p.begin(), p.end());
    if (floor <= 0.0)
        return out;
    double total = 0.0;
    for (auto& v : out) {
        v = std::max(v, floor);
        total += v;
    }
    for (auto& v : out)
        v /= total;
    return out;
}

inline double relative_entropy(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0)
            continue;
        if (q[i] == 0.0)
            return std::numeric_limits<double>::infinity();
        kl += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return std::max(kl, 0.0);
}
} // namespace detail

/**
 * Kullback-Leibler distance KL(p || q) in nats.
 *
 * Both arguments are clamped below at `floor` and renormalized first. With
 * floor = 0 the literal sum is used and disjoint support yields +infinity.
 */
inline double kl_spectral_distance(const NormalizedSpectrum& p, const NormalizedSpectrum& q,
                                   double floor = default_kl_floor) {
    if (!p.same_grid(q))
        throw DimensionError("KL distance between spectra on different grids");
    if (!(floor >= 0.0))
        throw DimensionError("KL floor must be non-negative");
    const auto pf = detail::floored(p.probs(), floor);
    const auto qf = detail::floored(q.probs(), floor);
    return detail::relative_entropy(pf, qf);
}

/// JS = H(sum_j pi_j p_j) - sum_j pi_j H(p_j), in nats.
inline double js_spectral_divergence(const SpectrumEnsemble& ens, const WeightVector& w) {
    if (ens.size() != w.size())
        throw DimensionError("ensemble has " + std::to_string(ens.size()) + " members but " +
                             std::to_string(w.size()) + " weights");
    const auto mix = NormalizedSpectrum::mixture(ens.spectra(), w.values());
    double mean_h = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j)
        mean_h += w[j] * spectral_entropy(ens[j]);
    // Non-negative in exact arithmetic; clip rounding residue.
    return std::max(spectral_entropy(mix) - mean_h, 0.0);
}

inline double js_spectral_divergence(const SpectrumEnsemble& ens) {
    return js_spectral_divergence(ens, WeightVector::uniform(ens.size()));
}

/// Pairwise KL(p_l || p_m); generally asymmetric, zero diagonal.
inline SquareMatrix kl_matrix(const SpectrumEnsemble& ens, double floor = default_kl_floor) {
    if (!(floor >= 0.0))
        throw DimensionError("KL floor must be non-negative");
    const std::size_t m = ens.size();
    std::vector<std::vector<double>> fl;
    fl.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
        fl.push_back(detail::floored(ens[j].probs(), floor));
    SquareMatrix out(m);
    for (std::size_t l = 0; l < m; ++l)
        for (std::size_t k = 0; k < m; ++k)
            out(l, k) = l == k ? 0.0 : detail::relative_entropy(fl[l], fl[k]);
    return out;
}

/// <KL> = sum of all M^2 entries / M^2, diagonal included.
inline double mean_kl(const SquareMatrix& kl) {
    if (kl.size() == 0)
        throw DimensionError("mean KL of an empty matrix");
    double total = 0.0;
    for (double v : kl.data())
        total += v;
    return total / static_cast<double>(kl.size() * kl.size());
}

/// A time-indexed scalar series, e.g. JS(t) over window starts.
struct MetricSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;

    MetricSeries() = default;
    MetricSeries(std::vector<std::int64_t> ts, std::vector<double> vs) : timestamps(std::move(ts)), values(std::move(vs)) {
        if (timestamps.empty())
            timestamps.resize(values.size());
        if (timestamps.size() != values.size())
            throw DimensionError("metric series timestamps and values differ in length");
        for (double v : values)
            if (!std::isfinite(v))
                throw DimensionError("metric series contains a non-finite value");
    }
    explicit MetricSeries(std::vector<double> vs) : MetricSeries({}, std::move(vs)) {}

    std::size_t size() const noexcept { return values.size(); }
};

namespace detail {
inline void require_paired(const MetricSeries& a, const MetricSeries& b) {
    if (a.size() != b.size())
        throw DimensionError("series lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    if (a.size() < 2)
        throw DimensionError("need at least two paired observations");
}
} // namespace detail

/// Pearson coefficient (<ab> - <a><b>) / (sigma_a sigma_b) from population moments.
inline double cross_correlation(const MetricSeries& a, const MetricSeries& b) {
    detail::require_paired(a, b);
    const auto n = static_cast<double>(a.size());
    double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.values[i], y = b.values[i];
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    const double ma = sa / n, mb = sb / n;
    const double var_a = saa / n - ma * ma;
    const double var_b = sbb / n - mb * mb;
    const auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (!(var_a > 0.0) || !(var_b > 0.0) || constant(a.values) || constant(b.values))
        throw UndefinedCorrelationError("correlation undefined for a zero-variance series");
    const double c = (sab / n - ma * mb) / (std::sqrt(var_a) * std::sqrt(var_b));
    return std::clamp(c, -1.0, 1.0);
}

/// Least-squares slope of y = slope * x through the origin.
inline double fit_proportionality(const MetricSeries& x, const MetricSeries& y) {
    detail::require_paired(x, y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x.values[i] * y.values[i];
        sxx += x.values[i] * x.values[i];
    }
    if (!(sxx > 0.0))
        throw DegenerateFitError("proportionality fit needs a nonzero regressor");
    return sxy / sxx;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least-squares line with free intercept (diagnostic only).
inline LineFit fit_line(const MetricSeries& x, const MetricSeries& y) {
    detail::require_paired(x, y);
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x.values[i];
        my += y.values[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x.values[i] - mx) * (y.values[i] - my);
        sxx += (x.values[i] - mx) * (x.values[i] - mx);
    }
    if (!(sxx > 0.0))
        throw DegenerateFitError("line fit needs a non-constant regressor");
    return {sxy / sxx, my - (sxy / sxx) * mx};
}

/// All spectral statistics of one analysis window.
struct DistanceReport {
    std::size_t window_start = 0;
    double js = 0.0;
    SquareMatrix kl_matrix;
    double mean_kl = 0.0;
    std::vector<double> entropies;
    std::vector<double> modes;
};

inline DistanceReport distance_report(const SpectrumEnsemble& ens, const WeightVector& w,
                                      double floor = default_kl_floor, std::size_t window_start = 0) {
    DistanceReport r;
    r.window_start = window_start;
    r.js = js_spectral_divergence(ens, w);
    r.kl_matrix = kl_matrix(ens, floor);
    r.mean_kl = mean_kl(r.kl_matrix);
    r.entropies.reserve(ens.size());
    r.modes.reserve(ens.size());
    for (const auto& p : ens.spectra()) {
        r.entropies.push_back(spectral_entropy(p));
        r.modes.push_back(mode_frequency(p));
    }
    return r;
}

} // namespace specdist

#endif // SPECDIST_DISTANCES_HPP
