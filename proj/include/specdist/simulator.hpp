#ifndef SPECDIST_SIMULATOR_HPP
#define SPECDIST_SIMULATOR_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "specdist/csv.hpp"
#include "specdist/error.hpp"
#include "specdist/panel.hpp"
#include "specdist/rng.hpp"

namespace specdist {

/// Threshold agent market configuration. Defaults reproduce the N=2000, M=20, T=1 setup.
struct SimConfig {
    std::size_t n_agents = 2000;
    std::size_t n_commodities = 20;
    std::size_t steps = 20000;  // recorded steps after warm-up
    std::size_t warmup = 512;   // discarded steps
    std::size_t ma_span = 1;    // T, moving-average span of past returns
    double gamma = 8e-7;        // return per unit net demand
    double noise_sigma_xi = 0.01;
    double noise_sigma_s = 0.01;
    double a_low = 0.5;
    double a_high = 1.5;
    double theta_buy_low = 0.01;
    double theta_buy_high = 0.02;
    double theta_sell_low = -0.02;
    double theta_sell_high = -0.01;
    std::uint64_t seed = 1;
    double dt = 1.0;            // minutes per model tick
    std::int64_t origin_ms = 0; // timestamp of model time 0
    bool resample_params = false;

    void validate() const {
        if (n_agents < 1 || n_commodities < 1)
            throw ConfigError("n_agents and n_commodities must be >= 1");
        if (ma_span < 1)
            throw ConfigError("ma_span must be >= 1");
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw ConfigError("gamma must be positive");
        if (!(noise_sigma_xi >= 0.0) || !(noise_sigma_s >= 0.0))
            throw ConfigError("noise sigmas must be non-negative");
        if (!(a_low < a_high))
            throw ConfigError("sensitivity range needs a_low < a_high");
        if (!(a_low > 0.0))
            throw ConfigError("sensitivity range must be positive");
        if (!(0.0 < theta_buy_low && theta_buy_low <= theta_buy_high))
            throw ConfigError("buy thresholds must satisfy 0 < low <= high");
        if (!(theta_sell_low <= theta_sell_high && theta_sell_high < 0.0))
            throw ConfigError("sell thresholds must satisfy low <= high < 0");
        if (!(dt > 0.0))
            throw ConfigError("dt must be positive");
        if (steps == 1)
            throw ConfigError("steps must be 0 or >= 2");
    }
};

namespace detail {
template <class T>
void parse_field(std::string_view key, std::string_view text, T& field) {
    std::istringstream in{std::string(text)};
    T v{};
    if constexpr (std::is_same_v<T, bool>) {
        std::string s;
        in >> s;
        if (s == "true" || s == "1")
            v = true;
        else if (s == "false" || s == "0")
            v = false;
        else
            throw ConfigError("bad boolean for " + std::string(key) + ": " + std::string(text));
    } else {
        if constexpr (std::is_unsigned_v<T>)
            if (text.find('-') != std::string_view::npos)
                throw ConfigError("negative value for " + std::string(key) + ": " + std::string(text));
        in >> v;
        if (!in || !(in >> std::ws).eof())
            throw ConfigError("bad value for " + std::string(key) + ": " + std::string(text));
    }
    field = v;
}

template <class Visitor>
void visit_sim_fields(SimConfig& c, Visitor&& visit) {
    visit("n_agents", c.n_agents);
    visit("n_commodities", c.n_commodities);
    visit("steps", c.steps);
    visit("warmup", c.warmup);
    visit("ma_span", c.ma_span);
    visit("gamma", c.gamma);
    visit("noise_sigma_xi", c.noise_sigma_xi);
    visit("noise_sigma_s", c.noise_sigma_s);
    visit("a_low", c.a_low);
    visit("a_high", c.a_high);
    visit("theta_buy_low", c.theta_buy_low);
    visit("theta_buy_high", c.theta_buy_high);
    visit("theta_sell_low", c.theta_sell_low);
    visit("theta_sell_high", c.theta_sell_high);
    visit("seed", c.seed);
    visit("dt", c.dt);
    visit("origin_ms", c.origin_ms);
    visit("resample_params", c.resample_params);
}
} // namespace detail

/// Applies `key = value` lines (with `#` comments) on top of `base`.
inline SimConfig parse_sim_config(std::istream& in, SimConfig base = {}) {
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim_line(line);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        auto key = trim_line(line.substr(0, eq));
        auto value = line.substr(eq + 1);
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
            value.remove_prefix(1);
        bool known = false;
        detail::visit_sim_fields(base, [&](std::string_view name, auto& field) {
            if (name == key) {
                detail::parse_field(name, value, field);
                known = true;
            }
        });
        if (!known)
            throw ConfigError("unknown config key '" + std::string(key) + "' on line " + std::to_string(line_no));
    }
    base.validate();
    return base;
}

inline SimConfig parse_sim_config(std::string_view text, SimConfig base = {}) {
    std::istringstream in{std::string(text)};
    return parse_sim_config(in, base);
}

/// Canonical `key = value` text; parse_sim_config(format_sim_config(c)) == c.
inline std::string format_sim_config(SimConfig c) {
    std::string out;
    detail::visit_sim_fields(c, [&](std::string_view name, auto& field) {
        out += std::string(name) + " = ";
        if constexpr (std::is_same_v<std::decay_t<decltype(field)>, double>)
            out += format_number(field);
        else if constexpr (std::is_same_v<std::decay_t<decltype(field)>, bool>)
            out += field ? "true" : "false";
        else
            out += std::to_string(field);
        out += "\n";
    });
    return out;
}

/// H_a = log(a2 - a1), the entropy of a uniform sensitivity distribution.
inline double parameter_entropy(double a_low, double a_high) {
    if (!(a_high > a_low))
        throw ConfigError("parameter entropy needs a_high > a_low");
    return std::log(a_high - a_low);
}

/// Per (agent, commodity) thresholds, sensitivities and attention weights, row-major by agent.
struct AgentParams {
    std::size_t n_agents = 0;
    std::size_t n_commodities = 0;
    std::vector<double> theta_buy;
    std::vector<double> theta_sell;
    std::vector<double> sensitivity;
    std::vector<double> attention; // c(|theta_sell|, |theta_buy|) = 1 / (theta_sell^2 + theta_buy^2)

    std::size_t index(std::size_t agent, std::size_t commodity) const noexcept {
        return agent * n_commodities + commodity;
    }
};

/// Attention an agent pays to a commodity given its threshold magnitudes.
inline double attention_weight(double sell_magnitude, double buy_magnitude) noexcept {
    return 1.0 / (sell_magnitude * sell_magnitude + buy_magnitude * buy_magnitude);
}

namespace rng_stream {
inline constexpr std::uint64_t theta_buy = 1;
inline constexpr std::uint64_t theta_sell = 2;
inline constexpr std::uint64_t sensitivity = 3;
inline constexpr std::uint64_t exogenous = 4;
inline constexpr std::uint64_t interpretation = 5;
} // namespace rng_stream

/// Draws a population; `epoch` 0 is the initial draw, later epochs are per-step redraws.
inline AgentParams sample_population(const SimConfig& cfg, std::uint64_t epoch = 0) {
    cfg.validate();
    const CounterRng rng(cfg.seed);
    AgentParams p{cfg.n_agents, cfg.n_commodities, {}, {}, {}, {}};
    const std::size_t total = cfg.n_agents * cfg.n_commodities;
    p.theta_buy.resize(total);
    p.theta_sell.resize(total);
    p.sensitivity.resize(total);
    p.attention.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        p.theta_buy[idx] = rng.uniform(rng_stream::theta_buy, idx, epoch, cfg.theta_buy_low, cfg.theta_buy_high);
        p.theta_sell[idx] = rng.uniform(rng_stream::theta_sell, idx, epoch, cfg.theta_sell_low, cfg.theta_sell_high);
        p.sensitivity[idx] = rng.uniform(rng_stream::sensitivity, idx, epoch, cfg.a_low, cfg.a_high);
        p.attention[idx] = attention_weight(std::abs(p.theta_sell[idx]), std::abs(p.theta_buy[idx]));
    }
    return p;
}

/// Initial population: i.i.d. uniform thresholds and sensitivities, fixed by the seed.
inline AgentParams init_population(const SimConfig& cfg) { return sample_population(cfg, 0); }

/// Rates, last attitudes and return history at model time t.
struct MarketState {
    std::size_t t = 0;
    std::size_t n_agents = 0;
    std::vector<double> rates;           // R_j(t)
    std::vector<std::int8_t> attitudes;  // y_ij(t-1), row-major by agent
    std::vector<double> activity;        // A_j(t-1)
    std::vector<double> returns;         // r_j(t-1)
    std::vector<double> return_history;  // ma_span rows of M returns, ring buffer
    std::size_t history_head = 0;        // row holding the newest return

    static MarketState initial(const SimConfig& cfg) {
        MarketState s;
        s.n_agents = cfg.n_agents;
        s.rates.assign(cfg.n_commodities, 1.0);
        s.attitudes.assign(cfg.n_agents * cfg.n_commodities, 0);
        s.activity.assign(cfg.n_commodities, 0.0);
        s.returns.assign(cfg.n_commodities, 0.0);
        s.return_history.assign(cfg.ma_span * cfg.n_commodities, 0.0);
        return s;
    }

    std::size_t commodities() const noexcept { return rates.size(); }
    std::size_t ma_span() const noexcept { return return_history.size() / rates.size(); }

    /// (1/T) sum_{tau=1..T} r_k(t - tau) for every commodity k.
    std::vector<double> mean_returns() const {
        const std::size_t m = commodities(), span = ma_span();
        std::vector<double> mean(m, 0.0);
        for (std::size_t row = 0; row < span; ++row)
            for (std::size_t k = 0; k < m; ++k)
                mean[k] += return_history[row * m + k];
        for (auto& v : mean)
            v /= static_cast<double>(span);
        return mean;
    }

    void push_returns(std::span<const double> r) {
        const std::size_t m = commodities(), span = ma_span();
        history_head = (history_head + span - 1) % span;
        for (std::size_t k = 0; k < m; ++k)
            return_history[history_head * m + k] = r[k];
    }
};

/// x_i = sum_k c_ik (1/T) sum_tau r_k(t - tau) + s_i for every agent.
inline std::vector<double> perceive(const MarketState& state, const AgentParams& params,
                                    std::span<const double> exogenous) {
    if (exogenous.size() != params.n_agents || state.commodities() != params.n_commodities)
        throw DimensionError("perception inputs do not match the population");
    const auto mean = state.mean_returns();
    std::vector<double> x(params.n_agents);
    for (std::size_t i = 0; i < params.n_agents; ++i) {
        const double* c = params.attention.data() + params.index(i, 0);
        double acc = 0.0;
        for (std::size_t k = 0; k < params.n_commodities; ++k)
            acc += c[k] * mean[k];
        x[i] = acc + exogenous[i];
    }
    return x;
}

/// y_ij = +1 if a_ij (x_i + xi_i) >= theta_buy, -1 if <= theta_sell, else 0.
inline void decide(double perception, double noise, const AgentParams& params, std::size_t agent,
                   std::span<std::int8_t> attitudes) {
    if (attitudes.size() != params.n_commodities)
        throw DimensionError("attitude buffer does not match commodity count");
    const double stimulus = perception + noise;
    const std::size_t base = params.index(agent, 0);
    for (std::size_t j = 0; j < params.n_commodities; ++j) {
        const double phi = params.sensitivity[base + j] * stimulus;
        attitudes[j] = phi >= params.theta_buy[base + j] ? 1 : (phi <= params.theta_sell[base + j] ? -1 : 0);
    }
}

inline std::vector<std::int8_t> decide(double perception, double noise, const AgentParams& params, std::size_t agent) {
    std::vector<std::int8_t> y(params.n_commodities);
    decide(perception, noise, params, agent, y);
    return y;
}

/// Exogenous draws s_i(t) and interpretation noise xi_i(t) for all agents at time t.
struct StepNoise {
    std::vector<double> exogenous;
    std::vector<double> interpretation;
};

inline StepNoise draw_step_noise(const SimConfig& cfg, std::size_t t) {
    const CounterRng rng(cfg.seed);
    StepNoise n{std::vector<double>(cfg.n_agents, 0.0), std::vector<double>(cfg.n_agents, 0.0)};
    for (std::size_t i = 0; i < cfg.n_agents; ++i) {
        if (cfg.noise_sigma_s > 0.0)
            n.exogenous[i] = cfg.noise_sigma_s * rng.normal(rng_stream::exogenous, t, i);
        if (cfg.noise_sigma_xi > 0.0)
            n.interpretation[i] = cfg.noise_sigma_xi * rng.normal(rng_stream::interpretation, t, i);
    }
    return n;
}

/// In-place form of step_market.
inline void advance_market(MarketState& state, const AgentParams& params, const SimConfig& cfg) {
    const auto noise = draw_step_noise(cfg, state.t);
    const auto x = perceive(state, params, noise.exogenous);
    const std::size_t m = params.n_commodities;
    std::vector<long long> net(m, 0), active(m, 0);
    for (std::size_t i = 0; i < params.n_agents; ++i) {
        std::span<std::int8_t> y(state.attitudes.data() + i * m, m);
        decide(x[i], noise.interpretation[i], params, i, y);
        for (std::size_t j = 0; j < m; ++j) {
            net[j] += y[j];
            active[j] += y[j] != 0;
        }
    }
    const double n = static_cast<double>(params.n_agents);
    for (std::size_t j = 0; j < m; ++j) {
        state.returns[j] = cfg.gamma * static_cast<double>(net[j]) / n;
        state.activity[j] = static_cast<double>(active[j]) / cfg.dt;
        state.rates[j] *= std::exp(state.returns[j]);
    }
    state.push_returns(state.returns);
    ++state.t;
}

/// One model tick: perceive, decide, then R_j(t + dt) = R_j(t) exp(r_j(t)).
inline MarketState step_market(MarketState state, const AgentParams& params, const SimConfig& cfg) {
    advance_market(state, params, cfg);
    return state;
}

struct SimulationResult {
    SignalPanel rates;    // R_j(t) at the start of each recorded tick
    SignalPanel activity; // A_j(t) of each recorded tick
};

inline std::vector<std::string> commodity_labels(std::size_t m) {
    std::vector<std::string> labels;
    for (std::size_t j = 0; j < m; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "c%02zu", j + 1);
        labels.emplace_back(buf);
    }
    return labels;
}

/// Runs warm-up plus `cfg.steps` recorded ticks from R_j(0) = 1 and zero return history.
inline SimulationResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    auto params = init_population(cfg);
    auto state = MarketState::initial(cfg);
    const std::size_t m = cfg.n_commodities;
    std::vector<std::vector<double>> rates(m), activity(m);
    for (std::size_t j = 0; j < m; ++j) {
        rates[j].reserve(cfg.steps);
        activity[j].reserve(cfg.steps);
    }
    const std::size_t total = cfg.warmup + cfg.steps;
    for (std::size_t t = 0; t < total; ++t) {
        if (cfg.resample_params && t > 0)
            params = sample_population(cfg, t);
        const bool record = t >= cfg.warmup;
        if (record)
            for (std::size_t j = 0; j < m; ++j)
                rates[j].push_back(state.rates[j]);
        advance_market(state, params, cfg);
        if (record)
            for (std::size_t j = 0; j < m; ++j)
                activity[j].push_back(state.activity[j]);
    }
    const auto labels = commodity_labels(m);
    const auto origin = cfg.origin_ms + static_cast<std::int64_t>(cfg.warmup) * std::llround(cfg.dt * 60000.0);
    return {SignalPanel(labels, std::move(rates), cfg.dt, origin),
            SignalPanel(labels, std::move(activity), cfg.dt, origin)};
}

} // namespace specdist

#endif // SPECDIST_SIMULATOR_HPP
