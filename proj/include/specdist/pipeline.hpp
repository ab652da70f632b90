#ifndef SPECDIST_PIPELINE_HPP
#define SPECDIST_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "specdist/csv.hpp"
#include "specdist/distances.hpp"
#include "specdist/error.hpp"
#include "specdist/log.hpp"
#include "specdist/panel.hpp"
#include "specdist/simulator.hpp"
#include "specdist/spectra.hpp"
#include "specdist/timefmt.hpp"

namespace specdist {

struct AnalysisConfig {
    WindowSpec window{128, 64};
    std::vector<std::string> channels;  // empty selects every channel
    std::vector<double> weights;        // empty means uniform
    double kl_floor = default_kl_floor;
    unsigned threads = 1;               // 0 uses every hardware thread
    bool keep_spectra = false;

    void validate() const {
        if (window.width < 4)
            throw ConfigError("analysis window width must be >= 4");
        if (window.stride < 1)
            throw ConfigError("analysis stride must be >= 1");
        if (!(kl_floor >= 0.0))
            throw ConfigError("KL floor must be non-negative");
    }
};

/// Metrics of one analysis window; `start_time_ms` marks the window start.
struct WindowedMetricsRow {
    std::size_t window_start = 0;
    std::int64_t start_time_ms = 0;
    double js = 0.0;
    double mean_kl = 0.0;
    std::vector<double> entropies;
    std::vector<double> modes;
    SquareMatrix kl;
    std::vector<PowerSpectrum> spectra; // filled when AnalysisConfig::keep_spectra
};

struct AnalysisGap {
    std::size_t window_start = 0;
    std::int64_t start_time_ms = 0;
    std::string channel;
};

struct AnalysisResult {
    std::vector<std::string> labels;
    WindowSpec window;
    double dt = 1.0;
    std::vector<WindowedMetricsRow> rows;
    std::vector<AnalysisGap> gaps;

    MetricSeries js_series() const {
        MetricSeries s;
        for (const auto& r : rows) {
            s.timestamps.push_back(r.start_time_ms);
            s.values.push_back(r.js);
        }
        return s;
    }
    MetricSeries mean_kl_series() const {
        MetricSeries s;
        for (const auto& r : rows) {
            s.timestamps.push_back(r.start_time_ms);
            s.values.push_back(r.mean_kl);
        }
        return s;
    }
};

/// Number of window starts 0, stride, 2 stride, ... that fit in `length` samples.
inline std::size_t window_count(std::size_t length, const WindowSpec& w) {
    return length < w.width ? 0 : (length - w.width) / w.stride + 1;
}

namespace detail {
inline std::vector<std::size_t> resolve_channels(const SignalPanel& panel, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    if (names.empty()) {
        for (std::size_t j = 0; j < panel.channel_count(); ++j)
            idx.push_back(j);
        return idx;
    }
    for (const auto& name : names) {
        const auto it = std::find(panel.labels().begin(), panel.labels().end(), name);
        if (it == panel.labels().end())
            throw AnalysisError("panel has no channel named '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - panel.labels().begin()));
    }
    return idx;
}

struct WindowOutcome {
    std::optional<WindowedMetricsRow> row;
    std::string degenerate_channel;
};

inline WindowOutcome analyze_window(const SignalPanel& panel, std::span<const std::size_t> channels,
                                    const PeriodogramEstimator& estimate, const WeightVector& weights,
                                    const AnalysisConfig& cfg, std::size_t start) {
    const std::size_t n = cfg.window.width;
    std::vector<NormalizedSpectrum> spectra;
    std::vector<PowerSpectrum> powers;
    std::vector<std::string> labels;
    spectra.reserve(channels.size());
    for (auto j : channels) {
        const auto x = panel.channel(j).subspan(start, n);
        const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
        if (constant)
            return {std::nullopt, panel.label(j)};
        auto ps = estimate(x, panel.dt());
        try {
            spectra.push_back(normalize_spectrum(ps));
        } catch (const DegenerateSpectrumError&) {
            return {std::nullopt, panel.label(j)};
        }
        if (cfg.keep_spectra)
            powers.push_back(std::move(ps));
        labels.push_back(panel.label(j));
    }
    const SpectrumEnsemble ens(std::move(spectra), std::move(labels));
    auto report = distance_report(ens, weights, cfg.kl_floor, start);
    WindowedMetricsRow row;
    row.window_start = start;
    row.start_time_ms = panel.time_ms(start);
    row.js = report.js;
    row.mean_kl = report.mean_kl;
    row.entropies = std::move(report.entropies);
    row.modes = std::move(report.modes);
    row.kl = std::move(report.kl_matrix);
    row.spectra = std::move(powers);
    return {std::move(row), {}};
}
} // namespace detail

/**
 * Sliding-window spectral distance analysis of a panel.
 *
 * Each window start yields per-channel entropy and mode plus the ensemble JS
 * divergence, KL matrix and mean KL. Windows where a selected channel is
 * constant (no AC power beyond window leakage) are skipped and reported as
 * gaps. Rows come back in window order whatever the thread count.
 */
inline AnalysisResult analyze(const SignalPanel& panel, const AnalysisConfig& cfg) {
    cfg.validate();
    const auto channels = detail::resolve_channels(panel, cfg.channels);
    if (channels.size() < 2)
        throw AnalysisError("analysis needs at least two channels, got " + std::to_string(channels.size()));
    if (panel.length() < cfg.window.width)
        throw AnalysisError("panel length " + std::to_string(panel.length()) + " is shorter than window width " +
                            std::to_string(cfg.window.width));
    const WeightVector weights = cfg.weights.empty() ? WeightVector::uniform(channels.size()) : WeightVector(cfg.weights);
    if (weights.size() != channels.size())
        throw AnalysisError("got " + std::to_string(weights.size()) + " weights for " +
                            std::to_string(channels.size()) + " channels");

    AnalysisResult result;
    result.window = cfg.window;
    result.dt = panel.dt();
    for (auto j : channels)
        result.labels.push_back(panel.label(j));

    const std::size_t count = window_count(panel.length(), cfg.window);
    std::vector<detail::WindowOutcome> outcomes(count);
    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));

    const auto work = [&](std::size_t first, std::size_t last) {
        const PeriodogramEstimator estimate(cfg.window.width);
        for (std::size_t w = first; w < last; ++w)
            outcomes[w] = detail::analyze_window(panel, channels, estimate, weights, cfg, w * cfg.window.stride);
    };
    if (threads <= 1) {
        work(0, count);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (count + threads - 1) / threads;
        for (std::size_t first = 0; first < count; first += chunk)
            pool.emplace_back(work, first, std::min(count, first + chunk));
    }

    for (std::size_t w = 0; w < count; ++w) {
        auto& o = outcomes[w];
        if (o.row) {
            result.rows.push_back(std::move(*o.row));
        } else {
            const std::size_t start = w * cfg.window.stride;
            result.gaps.push_back({start, panel.time_ms(start), o.degenerate_channel});
            log::info("skipping window at " + format_rfc3339(panel.time_ms(start)) + ": channel " +
                      o.degenerate_channel + " has a degenerate spectrum");
        }
    }
    return result;
}

/// 64-bit FNV-1a, used to fingerprint analysis settings.
inline std::string fingerprint(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Provenance written ahead of a metrics CSV; `compare` checks these for alignment.
inline Provenance metrics_provenance(const AnalysisResult& r, const AnalysisConfig& cfg, std::string_view transform) {
    std::string canon = "window=" + std::to_string(cfg.window.width) + ";stride=" + std::to_string(cfg.window.stride) +
                        ";floor=" + format_number(cfg.kl_floor) + ";channels=";
    for (const auto& l : r.labels)
        canon += l + "|";
    canon += ";weights=";
    for (double w : cfg.weights)
        canon += format_number(w) + "|";
    canon += ";transform=" + std::string(transform);
    return {{"window", std::to_string(cfg.window.width)},
            {"stride", std::to_string(cfg.window.stride)},
            {"floor", format_number(cfg.kl_floor)},
            {"dt", format_number(r.dt)},
            {"channels", std::to_string(r.labels.size())},
            {"transform", std::string(transform)},
            {"time", "window-start"},
            {"config", fingerprint(canon)}};
}

inline void write_metrics_csv(std::ostream& out, const AnalysisResult& r, const Provenance& provenance) {
    out << format_provenance("specdist-metrics", provenance);
    out << "window_start_time,js,mean_kl";
    for (const auto& l : r.labels)
        out << ",H_" << l;
    for (const auto& l : r.labels)
        out << ",mode_" << l;
    out << '\n';
    for (const auto& row : r.rows) {
        out << format_rfc3339(row.start_time_ms) << ',' << format_number(row.js) << ',' << format_number(row.mean_kl);
        for (double h : row.entropies)
            out << ',' << format_number(h);
        for (double f : row.modes)
            out << ',' << format_number(f);
        out << '\n';
    }
}

/// Long-format KL matrices: one `window_start_time,l,m,kl` row per ordered pair.
inline void write_kl_csv(std::ostream& out, const AnalysisResult& r) {
    out << "window_start_time,l,m,kl\n";
    for (const auto& row : r.rows) {
        const auto t = format_rfc3339(row.start_time_ms);
        for (std::size_t l = 0; l < r.labels.size(); ++l)
            for (std::size_t m = 0; m < r.labels.size(); ++m)
                out << t << ',' << r.labels[l] << ',' << r.labels[m] << ',' << format_number(row.kl(l, m)) << '\n';
    }
}

/// Per-bin spectra of every retained window; probability is blank for the DC bin.
inline void write_spectra_csv(std::ostream& out, const AnalysisResult& r) {
    out << "window_start_time,channel,frequency,power,probability\n";
    for (const auto& row : r.rows) {
        const auto t = format_rfc3339(row.start_time_ms);
        for (std::size_t j = 0; j < row.spectra.size(); ++j) {
            const auto& ps = row.spectra[j];
            const auto p = normalize_spectrum(ps);
            for (std::size_t n = 0; n < ps.width(); ++n) {
                out << t << ',' << r.labels[j] << ',' << format_number(ps.frequency(n)) << ','
                    << format_number(ps.values[n]) << ',';
                if (n > 0)
                    out << format_number(p.prob(n - 1));
                out << '\n';
            }
        }
    }
}

/// A parsed metrics CSV.
struct MetricsTable {
    Provenance provenance;
    std::vector<std::string> columns; // excluding window_start_time
    std::vector<std::int64_t> timestamps;
    std::vector<std::vector<double>> values; // one vector per column

    MetricSeries series(std::string_view column) const {
        const auto it = std::find(columns.begin(), columns.end(), column);
        if (it == columns.end())
            throw FormatError("metrics table has no column '" + std::string(column) + "'");
        return MetricSeries(timestamps, values[static_cast<std::size_t>(it - columns.begin())]);
    }
};

inline MetricsTable read_metrics_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    MetricsTable t;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim_line(raw);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            if (!have_header) {
                const auto p = parse_provenance(line);
                t.provenance.insert(p.begin(), p.end());
            }
            continue;
        }
        const auto f = split_fields(line);
        if (!have_header) {
            if (f.size() < 3 || f[0] != "window_start_time" || f[1] != "js" || f[2] != "mean_kl")
                throw FormatError("metrics CSV header must start with 'window_start_time,js,mean_kl'");
            for (std::size_t i = 1; i < f.size(); ++i)
                t.columns.emplace_back(f[i]);
            t.values.resize(t.columns.size());
            have_header = true;
            continue;
        }
        if (f.size() != t.columns.size() + 1)
            throw FormatError("metrics CSV line " + std::to_string(line_no) + " has the wrong field count");
        const auto ts = parse_timestamp(f[0]);
        if (!ts)
            throw FormatError("metrics CSV line " + std::to_string(line_no) + ": bad timestamp");
        t.timestamps.push_back(*ts);
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            const auto v = parse_number(f[i + 1]);
            if (!v)
                throw FormatError("metrics CSV line " + std::to_string(line_no) + ": bad number");
            t.values[i].push_back(*v);
        }
    }
    if (!have_header)
        throw FormatError("metrics CSV has no header");
    return t;
}

/// Refuses metric files produced with different window grids.
inline void check_alignment(const MetricsTable& a, const MetricsTable& b) {
    for (const char* key : {"window", "stride", "dt"}) {
        const auto ia = a.provenance.find(key), ib = b.provenance.find(key);
        if (ia != a.provenance.end() && ib != b.provenance.end() && ia->second != ib->second)
            throw AlignmentError(std::string("metrics files disagree on ") + key + ": " + ia->second + " vs " +
                                 ib->second);
    }
}

struct SeriesComparison {
    double correlation = 0.0;
    double slope = 0.0;
    std::optional<LineFit> line; // unconstrained fit, when requested
    std::size_t pairs = 0;
};

/// Cross-correlation and origin-constrained slope of `b` against `a` on a shared window grid.
inline SeriesComparison compare_metric_series(const MetricSeries& a, const MetricSeries& b, bool with_intercept = false) {
    if (a.timestamps != b.timestamps)
        throw AlignmentError("metric series are on different window grids");
    SeriesComparison c;
    c.correlation = cross_correlation(a, b);
    c.slope = fit_proportionality(a, b);
    if (with_intercept)
        c.line = fit_line(a, b);
    c.pairs = a.size();
    return c;
}

struct SweepPoint {
    double parameter_entropy = 0.0;
    double a_low = 0.0;
    double a_high = 0.0;
    std::vector<double> seed_mean_js;
    double mean_js = 0.0;
};

/**
 * Maps H_a to the time-averaged JS of simulated activity panels.
 *
 * For each H_a the sensitivity range is centred on `center` with width
 * exp(H_a); seeds base.seed .. base.seed + seeds - 1 are averaged.
 */
inline std::vector<SweepPoint> sweep_parameter_entropy(const SimConfig& base, std::span<const double> entropies,
                                                       std::size_t seeds, double center,
                                                       const AnalysisConfig& analysis) {
    if (seeds < 1)
        throw ConfigError("sweep needs at least one seed");
    std::vector<SweepPoint> out;
    for (double ha : entropies) {
        const double width = std::exp(ha);
        SweepPoint pt{ha, center - 0.5 * width, center + 0.5 * width, {}, 0.0};
        if (!(pt.a_low > 0.0))
            throw ConfigError("sweep range for H_a=" + format_number(ha) + " reaches non-positive sensitivity");
        for (std::size_t s = 0; s < seeds; ++s) {
            SimConfig cfg = base;
            cfg.a_low = pt.a_low;
            cfg.a_high = pt.a_high;
            cfg.seed = base.seed + s;
            const auto sim = run_simulation(cfg);
            const auto res = analyze(sim.activity, analysis);
            if (res.rows.empty())
                throw AnalysisError("sweep point H_a=" + format_number(ha) + " produced no usable windows");
            double total = 0.0;
            for (const auto& r : res.rows)
                total += r.js;
            pt.seed_mean_js.push_back(total / static_cast<double>(res.rows.size()));
        }
        double total = 0.0;
        for (double v : pt.seed_mean_js)
            total += v;
        pt.mean_js = total / static_cast<double>(seeds);
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace specdist

#endif // SPECDIST_PIPELINE_HPP
