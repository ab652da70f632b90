#ifndef SPECDIST_INGEST_HPP
#define SPECDIST_INGEST_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "specdist/csv.hpp"
#include "specdist/error.hpp"
#include "specdist/panel.hpp"
#include "specdist/timefmt.hpp"

namespace specdist {

enum class Side { ask, bid };

inline std::string_view to_string(Side s) noexcept { return s == Side::ask ? "ask" : "bid"; }

inline std::optional<Side> parse_side(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "ask")
        return Side::ask;
    if (lower == "bid")
        return Side::bid;
    return std::nullopt;
}

/// One quote event.
struct TickRecord {
    std::int64_t timestamp_ms = 0;
    std::string instrument;
    Side side = Side::ask;
    double price = 0.0;

    friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct TickParseResult {
    std::vector<TickRecord> records;
    std::size_t rows = 0;
    std::size_t malformed = 0;
    std::vector<std::size_t> malformed_lines; // first few offending line numbers
};

/**
 * Reads tick CSV with header `timestamp,instrument,side,price`.
 *
 * Timestamps are RFC-3339 or integer epoch milliseconds. Malformed rows are
 * counted and excluded; more than `max_malformed_fraction` of them aborts
 * with a FormatError carrying the summary.
 */
inline TickParseResult parse_ticks(std::istream& in, double max_malformed_fraction = 0.01) {
    TickParseResult out;
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim_line(raw);
        if (line.empty())
            continue;
        const auto f = split_fields(line);
        if (!have_header) {
            if (f.size() != 4 || f[0] != "timestamp" || f[1] != "instrument" || f[2] != "side" || f[3] != "price")
                throw FormatError("tick CSV header must be 'timestamp,instrument,side,price'");
            have_header = true;
            continue;
        }
        ++out.rows;
        std::optional<std::int64_t> ts;
        std::optional<Side> side;
        std::optional<double> price;
        if (f.size() == 4) {
            ts = parse_timestamp(f[0]);
            side = parse_side(f[2]);
            price = parse_number(f[3]);
        }
        if (!ts || !side || !price || !(*price > 0.0) || !std::isfinite(*price) || f[1].empty()) {
            ++out.malformed;
            if (out.malformed_lines.size() < 10)
                out.malformed_lines.push_back(line_no);
            continue;
        }
        out.records.push_back({*ts, std::string(f[1]), *side, *price});
    }
    if (!have_header)
        throw FormatError("tick CSV is missing its header");
    if (out.rows > 0 &&
        static_cast<double>(out.malformed) > max_malformed_fraction * static_cast<double>(out.rows)) {
        std::string where;
        for (auto l : out.malformed_lines)
            where += (where.empty() ? "" : ",") + std::to_string(l);
        throw FormatError(std::to_string(out.malformed) + " of " + std::to_string(out.rows) +
                          " tick rows malformed (lines " + where + ")");
    }
    return out;
}

inline TickParseResult parse_ticks(std::string_view text, double max_malformed_fraction = 0.01) {
    std::istringstream in{std::string(text)};
    return parse_ticks(in, max_malformed_fraction);
}

/// Half-open buckets [origin + k dt, origin + (k+1) dt), k = 0..bucket_count-1.
struct ResampleGrid {
    std::int64_t origin_ms = 0;
    std::int64_t dt_ms = 60000;
    std::size_t bucket_count = 1;

    void validate() const {
        if (dt_ms <= 0)
            throw ConfigError("resample bucket width must be positive");
        if (bucket_count < 1)
            throw ConfigError("resample grid needs at least one bucket");
    }

    double dt_minutes() const noexcept { return static_cast<double>(dt_ms) / 60000.0; }

    std::optional<std::size_t> bucket_of(std::int64_t ts) const noexcept {
        if (ts < origin_ms)
            return std::nullopt;
        const auto k = static_cast<std::uint64_t>((ts - origin_ms) / dt_ms);
        if (k >= bucket_count)
            return std::nullopt;
        return static_cast<std::size_t>(k);
    }

    /// Smallest dt-aligned grid containing every tick.
    static ResampleGrid covering(const std::vector<TickRecord>& ticks, std::int64_t dt_ms = 60000) {
        if (dt_ms <= 0)
            throw ConfigError("resample bucket width must be positive");
        if (ticks.empty())
            throw ConfigError("cannot derive a grid from zero ticks");
        auto [lo, hi] = std::minmax_element(ticks.begin(), ticks.end(), [](const auto& a, const auto& b) {
            return a.timestamp_ms < b.timestamp_ms;
        });
        std::int64_t origin = (lo->timestamp_ms / dt_ms) * dt_ms;
        if (origin > lo->timestamp_ms)
            origin -= dt_ms;
        return {origin, dt_ms, static_cast<std::size_t>((hi->timestamp_ms - origin) / dt_ms) + 1};
    }
};

namespace detail {
inline std::set<std::string> instruments_of(const std::vector<TickRecord>& ticks) {
    std::set<std::string> out;
    for (const auto& t : ticks)
        out.insert(t.instrument);
    return out;
}
} // namespace detail

/// A_j(k) = (side-matching quotes of j in bucket k) / dt, in quotes per minute.
inline std::map<std::string, std::vector<double>> quotation_frequency(const std::vector<TickRecord>& ticks,
                                                                      const ResampleGrid& grid, Side side) {
    grid.validate();
    std::map<std::string, std::vector<double>> out;
    for (const auto& name : detail::instruments_of(ticks))
        out[name].assign(grid.bucket_count, 0.0);
    std::map<std::string, std::vector<std::uint64_t>> counts;
    for (const auto& [name, _] : out)
        counts[name].assign(grid.bucket_count, 0);
    for (const auto& t : ticks) {
        if (t.side != side)
            continue;
        if (const auto k = grid.bucket_of(t.timestamp_ms))
            ++counts[t.instrument][*k];
    }
    const double dt = grid.dt_minutes();
    for (auto& [name, series] : out)
        for (std::size_t k = 0; k < series.size(); ++k)
            series[k] = static_cast<double>(counts[name][k]) / dt;
    return out;
}

struct BestRates {
    /// Missing entries precede an instrument's first quote.
    std::map<std::string, std::vector<std::optional<double>>> rates;
    /// Instruments with no side-matching quote inside the grid.
    std::vector<std::string> excluded;
};

/// R_j(k): bucket minimum ask (maximum bid), forward-filled through empty buckets.
inline BestRates best_rates(const std::vector<TickRecord>& ticks, const ResampleGrid& grid, Side side) {
    grid.validate();
    std::map<std::string, std::vector<std::optional<double>>> extremum;
    for (const auto& name : detail::instruments_of(ticks))
        extremum[name].assign(grid.bucket_count, std::nullopt);
    for (const auto& t : ticks) {
        if (t.side != side)
            continue;
        const auto k = grid.bucket_of(t.timestamp_ms);
        if (!k)
            continue;
        auto& slot = extremum[t.instrument][*k];
        if (!slot)
            slot = t.price;
        else
            slot = side == Side::ask ? std::min(*slot, t.price) : std::max(*slot, t.price);
    }
    BestRates out;
    for (auto& [name, series] : extremum) {
        const bool any = std::any_of(series.begin(), series.end(), [](const auto& v) { return v.has_value(); });
        if (!any) {
            out.excluded.push_back(name);
            continue;
        }
        for (std::size_t k = 1; k < series.size(); ++k)
            if (!series[k] && series[k - 1])
                series[k] = series[k - 1];
        out.rates.emplace(name, std::move(series));
    }
    return out;
}

/// Activity and best-rate series of the instruments quoted on one side.
struct MarketSeries {
    ResampleGrid grid;
    Side side = Side::ask;
    std::vector<std::string> instruments;
    std::vector<std::vector<double>> activity;
    std::vector<std::vector<std::optional<double>>> best_rate;
    std::vector<std::string> excluded;
};

inline MarketSeries make_market_series(const std::vector<TickRecord>& ticks, const ResampleGrid& grid, Side side) {
    auto freq = quotation_frequency(ticks, grid, side);
    auto rates = best_rates(ticks, grid, side);
    MarketSeries out{grid, side, {}, {}, {}, rates.excluded};
    for (auto& [name, series] : rates.rates) {
        out.instruments.push_back(name);
        out.activity.push_back(std::move(freq.at(name)));
        out.best_rate.push_back(std::move(series));
    }
    return out;
}

enum class Quantity { activity, rate };
enum class Transform { raw, log_return };

inline std::string_view to_string(Transform t) noexcept { return t == Transform::raw ? "raw" : "log-return"; }

inline std::optional<Transform> parse_transform(std::string_view s) {
    if (s == "raw")
        return Transform::raw;
    if (s == "log-return" || s == "log_return")
        return Transform::log_return;
    return std::nullopt;
}

/// log x(k) - log x(k-1); the result starts one sample later and is one sample shorter.
inline SignalPanel log_return_panel(const SignalPanel& panel) {
    if (panel.length() < 3)
        throw TransformError("log-return needs at least three samples");
    std::vector<std::vector<double>> out(panel.channel_count());
    for (std::size_t j = 0; j < panel.channel_count(); ++j) {
        const auto x = panel.channel(j);
        out[j].reserve(x.size() - 1);
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (!(x[k] > 0.0))
                throw TransformError("log-return of non-positive value in channel " + panel.label(j));
            if (k > 0)
                out[j].push_back(std::log(x[k]) - std::log(x[k - 1]));
        }
    }
    return SignalPanel(panel.labels(), std::move(out), panel.dt(), panel.time_ms(1));
}

inline SignalPanel apply_transform(const SignalPanel& panel, Transform t) {
    return t == Transform::raw ? panel : log_return_panel(panel);
}

/**
 * Turns market series into an analysis panel.
 *
 * Activity is always passed through untransformed on the full grid. Rates are
 * trimmed to start at the first bucket where every instrument has a quote,
 * then optionally converted to log returns.
 */
inline SignalPanel build_panel(const MarketSeries& series, Quantity quantity, Transform transform = Transform::raw) {
    if (series.instruments.empty())
        throw AnalysisError("no instrument has quotes on the " + std::string(to_string(series.side)) + " side");
    const double dt = series.grid.dt_minutes();
    if (quantity == Quantity::activity)
        return SignalPanel(series.instruments, series.activity, dt, series.grid.origin_ms);

    std::size_t first = 0;
    for (const auto& r : series.best_rate) {
        std::size_t k = 0;
        while (k < r.size() && !r[k])
            ++k;
        first = std::max(first, k);
    }
    std::vector<std::vector<double>> cols(series.instruments.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t k = first; k < series.best_rate[j].size(); ++k)
            cols[j].push_back(*series.best_rate[j][k]);
    SignalPanel raw(series.instruments, std::move(cols), dt,
                    series.grid.origin_ms + static_cast<std::int64_t>(first) * series.grid.dt_ms);
    return apply_transform(raw, transform);
}

} // namespace specdist

#endif // SPECDIST_INGEST_HPP
