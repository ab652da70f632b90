#ifndef SPECDIST_CLI_HPP
#define SPECDIST_CLI_HPP

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specdist/csv.hpp"
#include "specdist/error.hpp"
#include "specdist/ingest.hpp"
#include "specdist/log.hpp"
#include "specdist/panel.hpp"
#include "specdist/pipeline.hpp"
#include "specdist/simulator.hpp"

namespace specdist::cli {

/// Exit status for command-line usage errors (unknown flag, missing argument).
inline constexpr int usage_exit = 2;
/// Exit status for failures that carry no library error code.
inline constexpr int internal_exit = 1;

namespace detail {

inline std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

/// Writes to `path`, or to `fallback` when the path is "-".
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path == "-")
        fallback << text;
    else
        write_text_file(path, text);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto f : split_fields(s))
        if (!f.empty())
            out.emplace_back(f);
    return out;
}

inline Transform transform_option(const std::string& s) {
    const auto t = parse_transform(s);
    if (!t)
        throw ConfigError("unknown transform '" + s + "' (expected raw or log-return)");
    return *t;
}

struct AnalyzeOptions {
    std::string panel;
    std::string out = "-";
    std::string dump_spectra;
    std::string dump_kl;
    std::string channels;
    std::vector<double> weights;
    std::size_t window = 128;
    std::optional<std::size_t> stride;
    double floor = default_kl_floor;
    unsigned threads = 1;
};

struct SimulateOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::string transform = "raw";
    std::string activity_out;
    std::string rates_out;
};

inline SimConfig load_sim_config(const std::string& path, const std::vector<std::string>& overrides,
                                 std::optional<std::uint64_t> seed, std::optional<std::size_t> steps) {
    SimConfig cfg;
    if (!path.empty())
        cfg = parse_sim_config(read_text_file(path));
    std::string extra;
    for (const auto& o : overrides)
        extra += o + "\n";
    cfg = parse_sim_config(extra, cfg);
    if (seed)
        cfg.seed = *seed;
    if (steps)
        cfg.steps = *steps;
    cfg.validate();
    return cfg;
}

inline void add_analysis_flags(CLI::App* app, AnalyzeOptions& o) {
    app->add_option("--window", o.window, "Window width N in samples")->capture_default_str();
    app->add_option("--stride", o.stride, "Window stride in samples (default N/2)");
    app->add_option("--floor", o.floor, "KL probability floor (0 disables flooring)")->capture_default_str();
    app->add_option("--channels", o.channels, "Comma-separated channel labels to analyze (default all)");
    app->add_option("--weights", o.weights, "Mixture weights for JS, one per channel (default uniform)")
        ->delimiter(',');
    app->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

inline AnalysisConfig analysis_config(const AnalyzeOptions& o) {
    AnalysisConfig cfg;
    cfg.window = {o.window, o.stride.value_or(std::max<std::size_t>(1, o.window / 2))};
    cfg.channels = split_list(o.channels);
    cfg.weights = o.weights;
    cfg.kl_floor = o.floor;
    cfg.threads = o.threads;
    cfg.keep_spectra = !o.dump_spectra.empty();
    return cfg;
}

inline void write_panel(const std::string& path, const SignalPanel& panel, const Provenance& prov, std::ostream& out) {
    std::ostringstream ss;
    write_panel_csv(ss, panel, prov);
    emit(path, ss.str(), out);
}

} // namespace detail

/**
 * Entry point of the `specdist` tool. Returns the process exit status.
 *
 * Failures print one line `error: code=<name> message="<text>"` to `err`;
 * the exit status is the numeric error code (see README).
 */
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Spectral entropy and spectral distance analysis of multichannel market series"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "specdist 1.0.0");

    // ingest
    std::string ticks_path, ing_activity = "activity.csv", ing_rates = "rates.csv", ing_side = "ask",
                ing_transform = "raw";
    double ing_dt = 1.0, ing_max_bad = 0.01;
    bool ing_align = false;
    auto* ingest = app.add_subcommand("ingest", "Resample tick CSV into activity and best-rate panel CSVs");
    ingest->add_option("ticks", ticks_path, "Tick CSV (timestamp,instrument,side,price); .gz accepted")->required();
    ingest->add_option("--side", ing_side, "Quote side: ask or bid")->capture_default_str();
    ingest->add_option("--dt", ing_dt, "Bucket width in minutes")->capture_default_str();
    ingest->add_option("--transform", ing_transform, "Rate transform: raw or log-return")->capture_default_str();
    ingest->add_option("--activity-out", ing_activity, "Activity panel output ('-' for stdout)")->capture_default_str();
    ingest->add_option("--rates-out", ing_rates, "Best-rate panel output ('-' for stdout)")->capture_default_str();
    ingest->add_option("--max-malformed", ing_max_bad, "Tolerated fraction of malformed rows")->capture_default_str();
    ingest->add_flag("--align", ing_align, "Trim the activity panel to the rate panel's time grid");

    // analyze
    detail::AnalyzeOptions an;
    auto* analyze_cmd = app.add_subcommand("analyze", "Sliding-window spectral distances of a panel CSV");
    analyze_cmd->add_option("panel", an.panel, "Panel CSV (time,<channel>...)")->required();
    detail::add_analysis_flags(analyze_cmd, an);
    analyze_cmd->add_option("--out,-o", an.out, "Metrics CSV output ('-' for stdout)")->capture_default_str();
    analyze_cmd->add_option("--dump-spectra", an.dump_spectra, "Also write per-window spectra CSV");
    analyze_cmd->add_option("--dump-kl", an.dump_kl, "Also write per-window KL matrices CSV");

    // simulate
    detail::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run the threshold agent market and write panel CSVs");
    simulate->add_option("--config,-c", sim.config, "Key=value configuration file");
    simulate->add_option("--set", sim.overrides, "Override one configuration key (key=value); repeatable");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--steps", sim.steps, "Recorded steps after warm-up");
    simulate->add_option("--transform", sim.transform, "Rate transform: raw or log-return")->capture_default_str();
    simulate->add_option("--activity-out", sim.activity_out, "Activity panel output ('-' for stdout)");
    simulate->add_option("--rates-out", sim.rates_out, "Rate panel output ('-' for stdout)");
    bool print_config = false;
    simulate->add_flag("--print-config", print_config, "Print the effective configuration and exit");

    // compare
    std::string cmp_a, cmp_b, cmp_col_a = "js", cmp_col_b = "js";
    bool cmp_intercept = false;
    auto* compare = app.add_subcommand("compare", "Correlation and proportionality of two metrics CSVs");
    compare->add_option("a", cmp_a, "First metrics CSV (x)")->required();
    compare->add_option("b", cmp_b, "Second metrics CSV (y)")->required();
    compare->add_option("--a-column", cmp_col_a, "Column of the first file")->capture_default_str();
    compare->add_option("--b-column", cmp_col_b, "Column of the second file")->capture_default_str();
    compare->add_flag("--intercept", cmp_intercept, "Also report an unconstrained least-squares line");

    // sweep
    detail::AnalyzeOptions sw;
    std::string sw_config, sw_out = "-";
    std::vector<std::string> sw_overrides;
    std::vector<double> sw_ha{-3.0, -2.25, -1.5, -0.75, 0.0};
    std::size_t sw_seeds = 3;
    std::optional<std::uint64_t> sw_seed;
    std::optional<std::size_t> sw_steps;
    double sw_center = 1.0;
    auto* sweep = app.add_subcommand("sweep", "Mean activity JS as a function of sensitivity entropy H_a");
    sweep->add_option("--config,-c", sw_config, "Base simulator configuration file");
    sweep->add_option("--set", sw_overrides, "Override one configuration key (key=value); repeatable");
    sweep->add_option("--ha", sw_ha, "Comma-separated H_a values in nats")->delimiter(',')->capture_default_str();
    sweep->add_option("--seeds", sw_seeds, "Seeds per H_a value")->capture_default_str();
    sweep->add_option("--seed", sw_seed, "First seed");
    sweep->add_option("--steps", sw_steps, "Recorded steps per run");
    sweep->add_option("--center", sw_center, "Centre of the sensitivity range")->capture_default_str();
    sweep->add_option("--out,-o", sw_out, "Table output ('-' for stdout)")->capture_default_str();
    detail::add_analysis_flags(sweep, sw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: code=usage message=" << detail::quote(e.what()) << '\n';
        return usage_exit;
    }

    try {
        if (*ingest) {
            const auto side = parse_side(ing_side);
            if (!side)
                throw ConfigError("unknown side '" + ing_side + "' (expected ask or bid)");
            const auto transform = detail::transform_option(ing_transform);
            if (!(ing_dt > 0.0))
                throw ConfigError("--dt must be positive");
            const auto parsed = parse_ticks(read_text_file(ticks_path), ing_max_bad);
            if (parsed.malformed > 0)
                log::warn("skipped " + std::to_string(parsed.malformed) + " malformed tick rows");
            if (parsed.records.empty())
                throw AnalysisError("tick file contains no usable rows");
            const auto grid = ResampleGrid::covering(parsed.records, std::llround(ing_dt * 60000.0));
            const auto series = make_market_series(parsed.records, grid, *side);
            for (const auto& name : series.excluded)
                log::warn("instrument " + name + " has no " + std::string(to_string(*side)) + " quotes; excluded");
            auto activity = build_panel(series, Quantity::activity);
            const auto rates = build_panel(series, Quantity::rate, transform);
            if (ing_align) {
                const auto offset = static_cast<std::size_t>((rates.origin_ms() - activity.origin_ms()) / grid.dt_ms);
                activity = activity.slice(offset, offset + rates.length());
            }
            const std::string side_name(to_string(*side));
            detail::write_panel(ing_activity, activity,
                                {{"source", "ingest"}, {"quantity", "activity"}, {"side", side_name}, {"transform", "raw"}},
                                out);
            detail::write_panel(ing_rates, rates,
                                {{"source", "ingest"},
                                 {"quantity", "rate"},
                                 {"side", side_name},
                                 {"transform", std::string(to_string(transform))}},
                                out);
            return 0;
        }

        if (*analyze_cmd) {
            const auto file = read_panel_csv(read_text_file(an.panel));
            const auto cfg = detail::analysis_config(an);
            const auto result = analyze(file.panel, cfg);
            const auto it = file.provenance.find("transform");
            const std::string transform = it == file.provenance.end() ? "raw" : it->second;
            std::ostringstream metrics;
            write_metrics_csv(metrics, result, metrics_provenance(result, cfg, transform));
            detail::emit(an.out, metrics.str(), out);
            if (!an.dump_kl.empty()) {
                std::ostringstream ss;
                write_kl_csv(ss, result);
                detail::emit(an.dump_kl, ss.str(), out);
            }
            if (!an.dump_spectra.empty()) {
                std::ostringstream ss;
                write_spectra_csv(ss, result);
                detail::emit(an.dump_spectra, ss.str(), out);
            }
            if (!result.gaps.empty())
                log::warn("skipped " + std::to_string(result.gaps.size()) + " degenerate windows");
            return 0;
        }

        if (*simulate) {
            const auto cfg = detail::load_sim_config(sim.config, sim.overrides, sim.seed, sim.steps);
            if (print_config) {
                out << format_sim_config(cfg);
                return 0;
            }
            if (sim.activity_out.empty() && sim.rates_out.empty())
                throw ConfigError("simulate needs --activity-out and/or --rates-out");
            const auto transform = detail::transform_option(sim.transform);
            auto result = run_simulation(cfg);
            auto rates = apply_transform(result.rates, transform);
            auto activity = std::move(result.activity);
            // Log returns start one sample later; keep both panels on one grid.
            if (transform == Transform::log_return)
                activity = activity.slice(1, activity.length());
            const std::string hash = fingerprint(format_sim_config(cfg));
            const std::string seed = std::to_string(cfg.seed);
            if (!sim.activity_out.empty())
                detail::write_panel(sim.activity_out, activity,
                                    {{"source", "simulate"}, {"quantity", "activity"}, {"seed", seed},
                                     {"config", hash}, {"transform", "raw"}},
                                    out);
            if (!sim.rates_out.empty())
                detail::write_panel(sim.rates_out, rates,
                                    {{"source", "simulate"}, {"quantity", "rate"}, {"seed", seed},
                                     {"config", hash}, {"transform", std::string(to_string(transform))}},
                                    out);
            return 0;
        }

        if (*compare) {
            const auto a = read_metrics_csv(read_text_file(cmp_a));
            const auto b = read_metrics_csv(read_text_file(cmp_b));
            check_alignment(a, b);
            const auto c = compare_metric_series(a.series(cmp_col_a), b.series(cmp_col_b), cmp_intercept);
            out << "pairs=" << c.pairs << '\n';
            out << "C=" << format_number(c.correlation) << '\n';
            out << "slope=" << format_number(c.slope) << '\n';
            if (c.line)
                out << "line_slope=" << format_number(c.line->slope) << '\n'
                    << "line_intercept=" << format_number(c.line->intercept) << '\n';
            return 0;
        }

        if (*sweep) {
            const auto base = detail::load_sim_config(sw_config, sw_overrides, sw_seed, sw_steps);
            const auto points = sweep_parameter_entropy(base, sw_ha, sw_seeds, sw_center, detail::analysis_config(sw));
            std::ostringstream ss;
            ss << "ha,a_low,a_high,mean_js";
            for (std::size_t s = 0; s < sw_seeds; ++s)
                ss << ",js_seed" << base.seed + s;
            ss << '\n';
            for (const auto& p : points) {
                ss << format_number(p.parameter_entropy) << ',' << format_number(p.a_low) << ','
                   << format_number(p.a_high) << ',' << format_number(p.mean_js);
                for (double v : p.seed_mean_js)
                    ss << ',' << format_number(v);
                ss << '\n';
            }
            detail::emit(sw_out, ss.str(), out);
            return 0;
        }
    } catch (const Error& e) {
        err << "error: code=" << to_string(e.code()) << " message=" << detail::quote(e.what()) << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        err << "error: code=internal message=" << detail::quote(e.what()) << '\n';
        return internal_exit;
    }
    return internal_exit;
}

} // namespace specdist::cli

#endif // SPECDIST_CLI_HPP
