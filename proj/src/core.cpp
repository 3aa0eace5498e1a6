#include "discover/core.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace discover {

using nlohmann::json;

namespace {

void append_number(std::string& out, double v)
{
    char buf[32];
    int const len = std::snprintf(buf, sizeof(buf), "%.17g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

auto as_number(json const& j, char const* what) -> double
{
    if (!j.is_number()) {
        throw MalformedInput(std::string("expected a number in ") + what);
    }
    return j.get<double>();
}

auto parse_json(std::string_view text) -> json
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (json::parse_error const& e) {
        throw MalformedInput(std::string("malformed input: ") + e.what());
    }
}

auto circles_from(json const& arr) -> std::vector<Circle>
{
    std::vector<Circle> circles;
    circles.reserve(arr.size());
    for (auto const& c : arr) {
        if (!c.is_array() || c.size() != 3) {
            throw MalformedInput("circle entries must be [x, y, r] triples");
        }
        circles.push_back({as_number(c[0], "circle"), as_number(c[1], "circle"), as_number(c[2], "circle")});
    }
    return circles;
}

auto heights_from(json const& arr) -> std::vector<double>
{
    std::vector<double> heights;
    heights.reserve(arr.size());
    for (auto const& h : arr) {
        heights.push_back(as_number(h, "heights"));
    }
    return heights;
}

auto finite_or_null(double v) -> json
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

auto number_or_inf(json const& j) -> double
{
    if (j.is_null()) {
        return std::numeric_limits<double>::infinity();
    }
    return as_number(j, "log");
}

} // namespace

auto Construction::step_function(std::vector<double> heights) -> Construction
{
    auto c = unchecked_step_function(std::move(heights));
    if (auto err = c.check()) {
        throw InvariantViolation(*err);
    }
    return c;
}

auto Construction::circle_packing(std::vector<Circle> circles) -> Construction
{
    auto c = unchecked_circle_packing(std::move(circles));
    if (auto err = c.check()) {
        throw InvariantViolation(*err);
    }
    return c;
}

auto Construction::unchecked_step_function(std::vector<double> heights) -> Construction
{
    Construction c;
    c.kind_ = ConstructionKind::StepFunction;
    c.heights_ = std::move(heights);
    return c;
}

auto Construction::unchecked_circle_packing(std::vector<Circle> circles) -> Construction
{
    Construction c;
    c.kind_ = ConstructionKind::CirclePacking;
    c.circles_ = std::move(circles);
    return c;
}

auto Construction::check() const -> std::optional<std::string>
{
    if (kind_ == ConstructionKind::StepFunction) {
        if (heights_.empty()) {
            return "invariant violation: non-empty required";
        }
        for (double h : heights_) {
            if (!std::isfinite(h)) {
                return "invariant violation: non-finite height";
            }
            if (h < 0.0) {
                return "invariant violation: negative height";
            }
        }
        return std::nullopt;
    }
    for (auto const& c : circles_) {
        if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.r)) {
            return "invariant violation: non-finite circle coordinate";
        }
        if (c.r < 0.0) {
            return "invariant violation: negative radius";
        }
    }
    return std::nullopt;
}

auto to_string(ConstructionKind kind) -> std::string_view
{
    return kind == ConstructionKind::StepFunction ? "step_function" : "circle_packing";
}

auto encode_construction(Construction const& c) -> std::string
{
    if (auto err = c.check()) {
        throw InvariantViolation(*err);
    }
    std::string out = R"({"kind":")";
    out += to_string(c.kind());
    if (c.kind() == ConstructionKind::StepFunction) {
        out += R"(","heights":[)";
        bool first = true;
        for (double h : c.heights()) {
            if (!first) { out += ','; }
            first = false;
            append_number(out, h);
        }
    } else {
        out += R"(","circles":[)";
        bool first = true;
        for (auto const& circle : c.circles()) {
            if (!first) { out += ','; }
            first = false;
            out += '[';
            append_number(out, circle.x);
            out += ',';
            append_number(out, circle.y);
            out += ',';
            append_number(out, circle.r);
            out += ']';
        }
    }
    out += "]}\n";
    return out;
}

auto decode_construction(std::string_view text) -> Construction
{
    auto const j = parse_json(text);
    Construction c;
    if (j.is_array()) {
        if (!j.empty() && j.front().is_array()) {
            c = Construction::unchecked_circle_packing(circles_from(j));
        } else {
            c = Construction::unchecked_step_function(heights_from(j));
        }
    } else if (j.is_object()) {
        auto const kind = j.find("kind");
        if (kind == j.end() || !kind->is_string()) {
            throw MalformedInput("missing \"kind\"");
        }
        if (*kind == "step_function") {
            if (!j.contains("heights") || !j["heights"].is_array()) {
                throw MalformedInput("step_function requires a \"heights\" array");
            }
            c = Construction::unchecked_step_function(heights_from(j["heights"]));
        } else if (*kind == "circle_packing") {
            if (!j.contains("circles") || !j["circles"].is_array()) {
                throw MalformedInput("circle_packing requires a \"circles\" array");
            }
            c = Construction::unchecked_circle_packing(circles_from(j["circles"]));
        } else {
            throw MalformedInput("unknown construction kind " + kind->get<std::string>());
        }
    } else {
        throw MalformedInput("construction must be a JSON array or object");
    }
    if (auto err = c.check()) {
        throw InvariantViolation(*err);
    }
    return c;
}

auto encode_step_log(StepLog const& log) -> std::string
{
    json j;
    j["step_index"] = log.step_index;
    j["rewards"] = log.rewards;
    j["best_reward_so_far"] = log.best_reward_so_far;
    j["best_bound_so_far"] = finite_or_null(log.best_bound_so_far);
    j["betas"] = log.betas;
    j["selected_node_ids"] = log.selected_node_ids;
    j["blocking_relaxed"] = log.blocking_relaxed;
    return j.dump();
}

auto decode_step_log(std::string_view line) -> StepLog
{
    auto const j = parse_json(line);
    if (!j.is_object()) {
        throw MalformedInput("step log line must be a JSON object");
    }
    try {
        StepLog log;
        log.step_index = j.at("step_index").get<int>();
        log.rewards = j.at("rewards").get<std::vector<double>>();
        log.best_reward_so_far = j.at("best_reward_so_far").get<double>();
        log.best_bound_so_far = number_or_inf(j.at("best_bound_so_far"));
        log.betas = j.at("betas").get<std::vector<double>>();
        log.selected_node_ids = j.at("selected_node_ids").get<std::vector<NodeId>>();
        log.blocking_relaxed = j.value("blocking_relaxed", false);
        return log;
    } catch (json::exception const& e) {
        throw MalformedInput(std::string("bad step log: ") + e.what());
    }
}

} // namespace discover
