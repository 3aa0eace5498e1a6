#include "discover/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "discover/config.hpp"
#include "discover/engine.hpp"
#include "discover/external_policy.hpp"
#include "discover/verifiers.hpp"

namespace discover::cli {

namespace fs = std::filesystem;

namespace {

auto read_file(fs::path const& path) -> std::optional<std::string>
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        return std::nullopt;
    }
    return buf.str();
}

auto write_file(fs::path const& path, std::string const& content) -> bool
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return static_cast<bool>(out);
}

auto json_number(double v) -> nlohmann::json
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

auto worker_count() -> unsigned
{
    if (char const* env = std::getenv("DISCOVER_WORKERS")) {
        char* end = nullptr;
        long const v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

auto split_words(std::string const& s) -> std::vector<std::string>
{
    std::istringstream in(s);
    std::vector<std::string> words;
    for (std::string w; in >> w;) {
        words.push_back(w);
    }
    return words;
}

auto format_bound(double v) -> std::string
{
    if (!std::isfinite(v)) {
        return "inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10f", v);
    return buf;
}

struct RunArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string mode{"discover"};
    std::string out_dir{"discover_out"};
};

auto cmd_run(RunArgs const& args, std::ostream& out, std::ostream& err) -> int
{
    RunConfig config;
    if (!args.config_path.empty()) {
        auto text = read_file(args.config_path);
        if (!text) {
            err << "error: cannot read config " << args.config_path << '\n';
            return kIoError;
        }
        try {
            config = parse_config(*text);
        } catch (ConfigError const& e) {
            err << "error: " << e.what() << '\n';
            return kConfigError;
        }
    }
    std::optional<Ablation> ablation;
    bool best_of_n = false;
    try {
        for (auto const& kv : args.overrides) {
            auto const eq = kv.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got " + kv);
            }
            apply_setting(config, std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
        }
        if (args.mode == "best-of-n") {
            best_of_n = true;
        } else if (args.mode.rfind("ablation:", 0) == 0) {
            ablation = parse_ablation(args.mode.substr(9));
        } else if (args.mode != "discover") {
            throw ConfigError("unknown mode " + args.mode);
        }
        config.validate();
    } catch (ConfigError const& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    RunConfig const effective = ablation ? ablation_config(config, *ablation) : config;
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec) {
        err << "error: cannot create " << args.out_dir << ": " << ec.message() << '\n';
        return kIoError;
    }
    fs::path const dir(args.out_dir);
    std::ofstream log_out(dir / "run_log.jsonl", std::ios::trunc);
    std::ofstream archive_out(dir / "archive.jsonl", std::ios::trunc);
    if (!log_out || !archive_out || !write_file(dir / "config_echo.cfg", serialize_config(effective))) {
        err << "error: cannot write into " << args.out_dir << '\n';
        return kIoError;
    }

    out << "rng_seed = " << effective.rng_seed << '\n';
    out << "env = " << to_string(effective.env) << ", mode = " << args.mode << '\n';

    std::unique_ptr<ExternalPolicyHandle> handle;
    std::unique_ptr<ProposalPolicy> policy;
    try {
        if (!effective.external_command.empty()) {
            handle = std::make_unique<ExternalPolicyHandle>(split_words(effective.external_command),
                                                            std::chrono::milliseconds(effective.external_timeout_ms));
            policy = std::make_unique<ExternalProposalPolicy>(*handle);
        } else {
            policy = std::make_unique<MutationPolicy>(effective.magnitudes);
        }
    } catch (std::exception const& e) {
        err << "error: external policy: " << e.what() << '\n';
        return kIoError;
    }

    Environment const env = make_environment(effective);
    EngineOptions options;
    options.workers = worker_count();
    options.on_step = [&](StepLog const& log, Archive const& archive) {
        log_out << encode_step_log(log) << '\n';
        archive_out << encode_archive_snapshot(archive, log.step_index);
    };

    RunResult result = best_of_n ? run_best_of_n(effective, env, *policy, options)
                                 : run_discover(effective, env, *policy, options);
    log_out.flush();
    archive_out.flush();
    if (!log_out || !archive_out) {
        err << "error: failed writing run logs\n";
        return kIoError;
    }
    if (result.best_attempt.construction.check()) {
        err << "error: no valid construction to export\n";
    } else if (!write_file(dir / "best.json", encode_construction(result.best_attempt.construction))) {
        err << "error: cannot write best construction\n";
        return kIoError;
    }
    out << "rollouts = " << result.total_rollouts << '\n';
    out << "best bound = " << format_bound(result.best_attempt.bound) << " (reward "
        << result.best_attempt.reward << ")\n";
    return kOk;
}

auto cmd_verify(std::string const& env_name, std::string const& path, std::ostream& out, std::ostream& err) -> int
{
    std::string kind_name = env_name;
    std::optional<std::size_t> expected_count;
    if (auto colon = env_name.find(':'); colon != std::string::npos) {
        kind_name = env_name.substr(0, colon);
        try {
            expected_count = std::stoul(env_name.substr(colon + 1));
        } catch (std::exception const&) {
            err << "error: bad circle count in " << env_name << '\n';
            return kConfigError;
        }
    }
    EnvKind kind{};
    try {
        kind = parse_env_kind(kind_name);
    } catch (std::invalid_argument const& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    auto text = read_file(path);
    if (!text) {
        err << "error: cannot read " << path << '\n';
        return kIoError;
    }

    Direction const direction =
        (kind == EnvKind::AC2 || kind == EnvKind::CirclePacking) ? Direction::Maximize : Direction::Minimize;
    VerifierResult result;
    try {
        auto const c = decode_construction(*text);
        bool const wants_circles = kind == EnvKind::CirclePacking;
        if (wants_circles != (c.kind() == ConstructionKind::CirclePacking)) {
            throw InvariantViolation("construction kind does not match " + kind_name);
        }
        switch (kind) {
        case EnvKind::AC1: result = verify_ac1(c.heights()); break;
        case EnvKind::AC2: result = verify_ac2(c.heights()); break;
        case EnvKind::ErdosMinOverlap: result = verify_erdos(c.heights()); break;
        case EnvKind::CirclePacking:
            result = verify_circle_packing(c.circles(), expected_count.value_or(c.circles().size()));
            break;
        }
    } catch (std::runtime_error const& e) {
        result = VerifierResult{false, direction == Direction::Minimize ? std::numeric_limits<double>::infinity() : 0.0,
                                0.0, e.what()};
    }

    nlohmann::json j;
    j["env"] = to_string(kind);
    j["valid"] = result.valid;
    j["bound"] = json_number(result.bound);
    j["reward"] = result.reward;
    j["rejection_reason"] = result.rejection_reason ? nlohmann::json(*result.rejection_reason) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
    return result.valid ? kOk : kInvalidConstruction;
}

auto parse_steps(std::string const& text) -> std::vector<int>
{
    std::vector<int> steps;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        steps.push_back(std::stoi(item));
    }
    return steps;
}

auto cmd_report(std::string const& path, std::string const& steps_arg, std::string out_dir, std::size_t bins,
                std::ostream& out, std::ostream& err) -> int
{
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot read " << path << '\n';
        return kIoError;
    }
    std::vector<StepLog> logs;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            logs.push_back(decode_step_log(line));
        } catch (MalformedInput const& e) {
            err << "error: corrupt log at line " << line_no << ": " << e.what() << '\n';
            return kCorruptLog;
        }
    }
    if (logs.empty()) {
        err << "error: empty log " << path << '\n';
        return kCorruptLog;
    }
    for (std::size_t i = 1; i < logs.size(); ++i) {
        if (logs[i].best_reward_so_far < logs[i - 1].best_reward_so_far) {
            err << "error: best reward decreases at step " << logs[i].step_index << '\n';
            return kInvariantBreach;
        }
    }

    std::vector<int> steps;
    if (steps_arg.empty()) {
        int const first = logs.front().step_index;
        int const last = logs.back().step_index;
        steps = {first, first + (last - first) / 2, last};
        steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    } else {
        try {
            steps = parse_steps(steps_arg);
        } catch (std::exception const&) {
            err << "error: bad --steps " << steps_arg << '\n';
            return kConfigError;
        }
    }
    for (int s : steps) {
        if (std::none_of(logs.begin(), logs.end(), [s](auto const& l) { return l.step_index == s; })) {
            err << "error: step " << s << " not in log\n";
            return kConfigError;
        }
    }

    auto const bundle = build_report(logs, steps, bins);
    if (out_dir.empty()) {
        out_dir = fs::path(path).parent_path().string();
        if (out_dir.empty()) {
            out_dir = ".";
        }
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (auto const& h : bundle.per_step_histograms) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "bin_lo,bin_hi,count\n";
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            csv << h.bin_edges[b] << ',' << h.bin_edges[b + 1] << ',' << h.counts[b] << '\n';
        }
        auto const file = fs::path(out_dir) / ("histogram_step" + std::to_string(h.step_index) + ".csv");
        if (!write_file(file, csv.str())) {
            err << "error: cannot write " << file.string() << '\n';
            return kIoError;
        }
        out << "wrote " << file.string() << '\n';
    }
    std::ostringstream csv;
    csv.precision(17);
    csv << "step_index,best_bound,best_reward\n";
    for (auto const& p : bundle.best_trajectory) {
        csv << p.step_index << ',' << p.best_bound << ',' << p.best_reward << '\n';
    }
    auto const file = fs::path(out_dir) / "best_trajectory.csv";
    if (!write_file(file, csv.str())) {
        err << "error: cannot write " << file.string() << '\n';
        return kIoError;
    }
    out << "wrote " << file.string() << '\n';
    return kOk;
}

} // namespace

auto histogram(int step_index, std::vector<double> const& rewards, std::size_t bins) -> Histogram
{
    Histogram h;
    h.step_index = step_index;
    bins = std::max<std::size_t>(bins, 1);
    double lo = 0.0;
    double hi = 1.0;
    if (!rewards.empty()) {
        auto const [mn, mx] = std::minmax_element(rewards.begin(), rewards.end());
        lo = *mn;
        hi = *mx > *mn ? *mx : *mn + 1.0;
    }
    double const width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.bin_edges.push_back(b == bins ? hi : lo + width * static_cast<double>(b));
    }
    h.counts.assign(bins, 0);
    for (double r : rewards) {
        auto b = static_cast<std::size_t>((r - lo) / width);
        h.counts[std::min(b, bins - 1)] += 1;
    }
    return h;
}

auto build_report(std::vector<StepLog> const& logs, std::vector<int> const& steps, std::size_t bins) -> ReportBundle
{
    ReportBundle bundle;
    for (int s : steps) {
        for (auto const& log : logs) {
            if (log.step_index == s) {
                bundle.per_step_histograms.push_back(histogram(s, log.rewards, bins));
                break;
            }
        }
    }
    for (auto const& log : logs) {
        bundle.best_trajectory.push_back({log.step_index, log.best_bound_so_far, log.best_reward_so_far});
    }
    return bundle;
}

auto main(std::vector<std::string> const& args, std::ostream& out, std::ostream& err) -> int
{
    CLI::App app{"Test-time search and training over verifiable constructions"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run the discovery loop or a baseline");
    run->add_option("--config", run_args.config_path, "Config file (dotted key = value)");
    run->add_option("--set", run_args.overrides, "Override a config key: key=value")->take_all();
    run->add_option("--mode", run_args.mode, "discover | best-of-n | ablation:NAME");
    run->add_option("--out", run_args.out_dir, "Output directory");

    std::string verify_env;
    std::string verify_path;
    auto* verify = app.add_subcommand("verify", "Certify the bound of a construction file");
    verify->add_option("env", verify_env, "erdos | ac1 | ac2 | circle_packing[:N]")->required();
    verify->add_option("path", verify_path, "Construction file")->required();

    std::string report_path;
    std::string report_steps;
    std::string report_out;
    std::size_t report_bins = 20;
    auto* report = app.add_subcommand("report", "Reward histograms and best-bound trajectory from a run log");
    report->add_option("path", report_path, "run_log.jsonl")->required();
    report->add_option("--steps", report_steps, "Comma-separated step indices (default first, middle, last)");
    report->add_option("--out", report_out, "Output directory (default: next to the log)");
    report->add_option("--bins", report_bins, "Histogram bins");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kOk;
    } catch (CLI::CallForAllHelp const&) {
        out << app.help();
        return kOk;
    } catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    if (*run) {
        return cmd_run(run_args, out, err);
    }
    if (*verify) {
        return cmd_verify(verify_env, verify_path, out, err);
    }
    return cmd_report(report_path, report_steps, report_out, report_bins, out, err);
}

} // namespace discover::cli
