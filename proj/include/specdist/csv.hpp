#ifndef SPECDIST_CSV_HPP
#define SPECDIST_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "specdist/error.hpp"
#include "specdist/panel.hpp"
#include "specdist/timefmt.hpp"

namespace specdist {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    if (v == 0.0)
        v = 0.0; // drop the sign of negative zero
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return std::nullopt;
    if (s == "inf")
        return HUGE_VAL;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

/// Splits one CSV line on commas (no quoting; none of the schemas need it).
inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim_line(std::string_view s) {
    if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
        static_cast<unsigned char>(s[2]) == 0xBF)
        s.remove_prefix(3);
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' '))
        s.remove_suffix(1);
    return s;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Whole-file read; paths ending in `.gz` are inflated transparently.
inline std::string read_text_file(const std::string& path) {
    if (ends_with(path, ".gz")) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f)
            throw IoError("cannot open " + path);
        std::string out;
        char buf[1 << 16];
        int n = 0;
        while ((n = gzread(f, buf, sizeof buf)) > 0)
            out.append(buf, static_cast<std::size_t>(n));
        const bool failed = n < 0;
        gzclose(f);
        if (failed)
            throw IoError("corrupt gzip stream in " + path);
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path);
    out << text;
    if (!out)
        throw IoError("write failed for " + path);
}

/// Free-form `key=value` annotations carried on `#` lines ahead of a CSV header.
using Provenance = std::map<std::string, std::string>;

inline std::string format_provenance(std::string_view kind, const Provenance& p) {
    std::string line = "# ";
    line += kind;
    for (const auto& [k, v] : p)
        line += " " + k + "=" + v;
    return line + "\n";
}

inline Provenance parse_provenance(std::string_view line) {
    Provenance p;
    std::istringstream in{std::string(line.substr(1))};
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos)
            p[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return p;
}

/// Panel CSV: optional `#` provenance line, header `time,<label>...`, one row per sample.
inline void write_panel_csv(std::ostream& out, const SignalPanel& panel, const Provenance& provenance = {}) {
    if (!provenance.empty())
        out << format_provenance("specdist-panel", provenance);
    out << "time";
    for (const auto& l : panel.labels())
        out << ',' << l;
    out << '\n';
    for (std::size_t k = 0; k < panel.length(); ++k) {
        out << format_rfc3339(panel.time_ms(k));
        for (std::size_t j = 0; j < panel.channel_count(); ++j)
            out << ',' << format_number(panel.channel(j)[k]);
        out << '\n';
    }
}

inline std::string panel_csv(const SignalPanel& panel, const Provenance& provenance = {}) {
    std::ostringstream ss;
    write_panel_csv(ss, panel, provenance);
    return ss.str();
}

struct PanelFile {
    SignalPanel panel;
    Provenance provenance;
};

/// Reads a panel CSV. The sampling period is inferred from the time column and must be uniform.
inline PanelFile read_panel_csv(std::string_view text, double default_dt = 1.0) {
    std::istringstream in{std::string(text)};
    std::string raw;
    Provenance prov;
    std::vector<std::string> labels;
    bool have_header = false;
    std::vector<std::int64_t> times;
    std::vector<std::vector<double>> cols;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim_line(raw);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            if (!have_header) {
                const auto p = parse_provenance(line);
                prov.insert(p.begin(), p.end());
            }
            continue;
        }
        const auto fields = split_fields(line);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "time")
                throw FormatError("panel CSV header must be 'time,<channel>...'");
            for (std::size_t i = 1; i < fields.size(); ++i)
                labels.emplace_back(fields[i]);
            cols.resize(labels.size());
            have_header = true;
            continue;
        }
        if (fields.size() != labels.size() + 1)
            throw FormatError("panel CSV line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(labels.size() + 1));
        const auto t = parse_timestamp(fields[0]);
        if (!t)
            throw FormatError("panel CSV line " + std::to_string(line_no) + ": bad timestamp");
        times.push_back(*t);
        for (std::size_t j = 0; j < labels.size(); ++j) {
            const auto v = parse_number(fields[j + 1]);
            if (!v || !std::isfinite(*v))
                throw FormatError("panel CSV line " + std::to_string(line_no) + ": bad value in column " +
                                  labels[j]);
            cols[j].push_back(*v);
        }
    }
    if (!have_header)
        throw FormatError("panel CSV has no header");
    double dt = default_dt;
    if (times.size() >= 2) {
        const auto step = times[1] - times[0];
        if (step <= 0)
            throw FormatError("panel CSV time column is not increasing");
        for (std::size_t k = 2; k < times.size(); ++k)
            if (times[k] - times[k - 1] != step)
                throw FormatError("panel CSV is not uniformly sampled near line " + std::to_string(k + 2));
        dt = static_cast<double>(step) / 60000.0;
    }
    try {
        return {SignalPanel(labels, std::move(cols), dt, times.empty() ? 0 : times.front()), prov};
    } catch (const DimensionError& e) {
        throw FormatError(std::string("panel CSV: ") + e.what());
    }
}

} // namespace specdist

#endif // SPECDIST_CSV_HPP
