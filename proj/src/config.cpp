#include "discover/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace discover {

auto to_string(ReuseMode mode) -> std::string_view
{
    switch (mode) {
    case ReuseMode::PUCT: return "puct";
    case ReuseMode::EpsilonGreedy: return "epsilon_greedy";
    case ReuseMode::None: return "none";
    }
    return "unknown";
}

auto to_string(ObjectiveMode mode) -> std::string_view
{
    switch (mode) {
    case ObjectiveMode::EntropicAdaptive: return "entropic_adaptive";
    case ObjectiveMode::EntropicConstant: return "entropic_constant";
    case ObjectiveMode::ExpectedReward: return "expected_reward";
    case ObjectiveMode::NoTraining: return "no_training";
    }
    return "unknown";
}

namespace {

auto trim(std::string_view s) -> std::string_view
{
    auto const first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    auto const last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

auto bad(std::string_view key, std::string_view value) -> ConfigError
{
    return ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
}

auto to_double(std::string_view key, std::string_view value) -> double
{
    double out{};
    auto const [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw bad(key, value);
    }
    return out;
}

template <typename Int>
auto to_int(std::string_view key, std::string_view value) -> Int
{
    Int out{};
    auto const [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw bad(key, value);
    }
    return out;
}

auto to_bool(std::string_view key, std::string_view value) -> bool
{
    if (value == "true" || value == "1") { return true; }
    if (value == "false" || value == "0") { return false; }
    throw bad(key, value);
}

auto normalized(std::string_view value) -> std::string
{
    std::string s(value);
    std::replace(s.begin(), s.end(), '-', '_');
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s;
}

auto format_double(double v) -> std::string
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void RunConfig::validate() const
{
    if (steps < 1) { throw ConfigError("run.steps must be >= 1"); }
    if (groups_per_step < 1) { throw ConfigError("run.groups must be >= 1"); }
    if (rollouts_per_group < 2) { throw ConfigError("run.rollouts must be >= 2"); }
    if (env_size < 1) { throw ConfigError("env.size must be >= 1"); }
    if (env == EnvKind::ErdosMinOverlap && env_size > 1000) { throw ConfigError("env.size must be <= 1000 for erdos"); }
    if (!(beta_max > 0.0)) { throw ConfigError("objective.beta_max must be > 0"); }
    if (!(kl_budget_gamma > 0.0)) { throw ConfigError("objective.gamma must be > 0"); }
    if (!(kl_penalty_lambda >= 0.0)) { throw ConfigError("objective.lambda must be >= 0"); }
    if (!(constant_beta >= 0.0)) { throw ConfigError("objective.beta must be >= 0"); }
    if (!(epsilon_stabilizer >= 0.0)) { throw ConfigError("objective.epsilon must be >= 0"); }
    if (!(learning_rate_eta > 0.0)) { throw ConfigError("policy.learning_rate must be > 0"); }
    if (!(puct_c >= 0.0)) { throw ConfigError("puct.c must be >= 0"); }
    if (!(reuse_epsilon >= 0.0 && reuse_epsilon <= 1.0)) { throw ConfigError("reuse.epsilon must be in [0, 1]"); }
    if (archive_capacity < 1) { throw ConfigError("archive.capacity must be >= 1"); }
    if (magnitudes.empty()) { throw ConfigError("policy.magnitudes must not be empty"); }
    for (double m : magnitudes) {
        if (!(m >= 0.0) || !std::isfinite(m)) { throw ConfigError("policy.magnitudes must be finite and >= 0"); }
    }
    if (external_timeout_ms < 1) { throw ConfigError("policy.timeout_ms must be >= 1"); }
}

void apply_setting(RunConfig& c, std::string_view key_in, std::string_view value_in)
{
    auto const key = trim(key_in);
    auto const value = trim(value_in);
    if (key == "env.kind") {
        try {
            c.env = parse_env_kind(value);
        } catch (std::invalid_argument const& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "env.size") {
        c.env_size = to_int<std::size_t>(key, value);
    } else if (key == "env.random_seed") {
        c.random_initial_state = to_bool(key, value);
    } else if (key == "env.max_length") {
        c.max_sequence_length = to_int<std::size_t>(key, value);
    } else if (key == "run.steps") {
        c.steps = to_int<int>(key, value);
    } else if (key == "run.groups") {
        c.groups_per_step = to_int<int>(key, value);
    } else if (key == "run.rollouts") {
        c.rollouts_per_group = to_int<int>(key, value);
    } else if (key == "run.seed") {
        c.rng_seed = to_int<std::uint64_t>(key, value);
    } else if (key == "puct.c") {
        c.puct_c = to_double(key, value);
    } else if (key == "archive.capacity") {
        c.archive_capacity = to_int<std::size_t>(key, value);
    } else if (key == "reuse.mode") {
        auto const v = normalized(value);
        if (v == "puct") { c.reuse_mode = ReuseMode::PUCT; }
        else if (v == "epsilon_greedy") { c.reuse_mode = ReuseMode::EpsilonGreedy; }
        else if (v == "none") { c.reuse_mode = ReuseMode::None; }
        else { throw bad(key, value); }
    } else if (key == "reuse.epsilon") {
        c.reuse_epsilon = to_double(key, value);
    } else if (key == "objective.mode") {
        auto const v = normalized(value);
        if (v == "entropic_adaptive") { c.objective_mode = ObjectiveMode::EntropicAdaptive; }
        else if (v == "entropic_constant") { c.objective_mode = ObjectiveMode::EntropicConstant; }
        else if (v == "expected_reward") { c.objective_mode = ObjectiveMode::ExpectedReward; }
        else if (v == "no_training" || v == "none") { c.objective_mode = ObjectiveMode::NoTraining; }
        else { throw bad(key, value); }
    } else if (key == "objective.gamma") {
        c.kl_budget_gamma = to_double(key, value);
    } else if (key == "objective.lambda") {
        c.kl_penalty_lambda = to_double(key, value);
    } else if (key == "objective.beta") {
        c.constant_beta = to_double(key, value);
    } else if (key == "objective.beta_max") {
        c.beta_max = to_double(key, value);
    } else if (key == "objective.epsilon") {
        c.epsilon_stabilizer = to_double(key, value);
    } else if (key == "policy.learning_rate") {
        c.learning_rate_eta = to_double(key, value);
    } else if (key == "policy.magnitudes") {
        std::vector<double> mags;
        std::string_view rest = value;
        while (!rest.empty()) {
            auto const comma = rest.find(',');
            mags.push_back(to_double(key, trim(rest.substr(0, comma))));
            if (comma == std::string_view::npos) { break; }
            rest = rest.substr(comma + 1);
        }
        c.magnitudes = std::move(mags);
    } else if (key == "policy.command") {
        c.external_command = std::string(value);
    } else if (key == "policy.timeout_ms") {
        c.external_timeout_ms = to_int<int>(key, value);
    } else {
        throw ConfigError("unknown config key: " + std::string(key));
    }
}

auto parse_config(std::string_view text) -> RunConfig
{
    RunConfig config;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto const nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto const eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    }
    return config;
}

auto serialize_config(RunConfig const& c) -> std::string
{
    std::ostringstream out;
    out << "env.kind = " << to_string(c.env) << '\n'
        << "env.size = " << c.env_size << '\n'
        << "env.random_seed = " << (c.random_initial_state ? "true" : "false") << '\n'
        << "env.max_length = " << c.max_sequence_length << '\n'
        << "run.steps = " << c.steps << '\n'
        << "run.groups = " << c.groups_per_step << '\n'
        << "run.rollouts = " << c.rollouts_per_group << '\n'
        << "run.seed = " << c.rng_seed << '\n'
        << "puct.c = " << format_double(c.puct_c) << '\n'
        << "archive.capacity = " << c.archive_capacity << '\n'
        << "reuse.mode = " << to_string(c.reuse_mode) << '\n'
        << "reuse.epsilon = " << format_double(c.reuse_epsilon) << '\n'
        << "objective.mode = " << to_string(c.objective_mode) << '\n'
        << "objective.gamma = " << format_double(c.kl_budget_gamma) << '\n'
        << "objective.lambda = " << format_double(c.kl_penalty_lambda) << '\n'
        << "objective.beta = " << format_double(c.constant_beta) << '\n'
        << "objective.beta_max = " << format_double(c.beta_max) << '\n'
        << "objective.epsilon = " << format_double(c.epsilon_stabilizer) << '\n'
        << "policy.learning_rate = " << format_double(c.learning_rate_eta) << '\n'
        << "policy.magnitudes = ";
    for (std::size_t i = 0; i < c.magnitudes.size(); ++i) {
        out << (i ? "," : "") << format_double(c.magnitudes[i]);
    }
    out << '\n'
        << "policy.command = " << c.external_command << '\n'
        << "policy.timeout_ms = " << c.external_timeout_ms << '\n';
    return out.str();
}

} // namespace discover
