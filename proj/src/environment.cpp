#include "discover/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace discover {

auto parse_env_kind(std::string_view name) -> EnvKind
{
    std::string key(name);
    std::replace(key.begin(), key.end(), '-', '_');
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (key == "erdos" || key == "erdos_min_overlap") { return EnvKind::ErdosMinOverlap; }
    if (key == "ac1") { return EnvKind::AC1; }
    if (key == "ac2") { return EnvKind::AC2; }
    if (key == "circle_packing") { return EnvKind::CirclePacking; }
    throw std::invalid_argument("unknown environment: " + std::string(name));
}

auto to_string(EnvKind kind) -> std::string_view
{
    switch (kind) {
    case EnvKind::ErdosMinOverlap: return "erdos";
    case EnvKind::AC1: return "ac1";
    case EnvKind::AC2: return "ac2";
    case EnvKind::CirclePacking: return "circle_packing";
    }
    return "unknown";
}

Environment::Environment(EnvKind kind, std::size_t size, VerifierLimits limits)
    : kind_(kind), size_(size), limits_(limits)
{
    if (size_ == 0) {
        throw std::invalid_argument("environment size must be positive");
    }
    if (kind_ == EnvKind::ErdosMinOverlap && size_ > limits_.max_erdos_length) {
        throw std::invalid_argument("erdos sequences are capped at " + std::to_string(limits_.max_erdos_length));
    }
}

auto Environment::direction() const noexcept -> Direction
{
    return (kind_ == EnvKind::AC2 || kind_ == EnvKind::CirclePacking) ? Direction::Maximize : Direction::Minimize;
}

auto Environment::construction_kind() const noexcept -> ConstructionKind
{
    return kind_ == EnvKind::CirclePacking ? ConstructionKind::CirclePacking : ConstructionKind::StepFunction;
}

auto Environment::verify(Construction const& c) const -> VerifierResult
{
    if (c.kind() != construction_kind()) {
        return VerifierResult{false, direction() == Direction::Minimize ? std::numeric_limits<double>::infinity() : 0.0,
                              0.0, std::string("wrong construction kind for ") + std::string(name())};
    }
    switch (kind_) {
    case EnvKind::AC1: return verify_ac1(c.heights(), limits_);
    case EnvKind::AC2: return verify_ac2(c.heights(), limits_);
    case EnvKind::ErdosMinOverlap: return verify_erdos(c.heights(), limits_);
    case EnvKind::CirclePacking: return verify_circle_packing(c.circles(), size_, limits_);
    }
    return {};
}

auto project_to_box_with_sum(std::vector<double> heights, double target_sum) -> std::vector<double>
{
    if (heights.empty()) {
        return heights;
    }
    for (double& h : heights) {
        if (!std::isfinite(h)) { h = 0.5; }
    }
    auto const shifted_sum = [&](double shift) {
        double s = 0.0;
        for (double h : heights) { s += std::clamp(h + shift, 0.0, 1.0); }
        return s;
    };
    auto const [lo_it, hi_it] = std::minmax_element(heights.begin(), heights.end());
    double lo = -*hi_it - 1.0;
    double hi = 1.0 - *lo_it + 1.0;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        double const mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) { break; }
        (shifted_sum(mid) < target_sum ? lo : hi) = mid;
    }
    double const shift = 0.5 * (lo + hi);
    for (double& h : heights) { h = std::clamp(h + shift, 0.0, 1.0); }

    // spread the remaining round-off over entries that have room for it
    for (int pass = 0; pass < 4; ++pass) {
        double const residual = target_sum - std::accumulate(heights.begin(), heights.end(), 0.0);
        if (residual == 0.0) { break; }
        std::size_t room = 0;
        for (double h : heights) {
            if (residual > 0.0 ? h < 1.0 : h > 0.0) { ++room; }
        }
        if (room == 0) { break; }
        double const delta = residual / static_cast<double>(room);
        for (double& h : heights) {
            if (residual > 0.0 ? h < 1.0 : h > 0.0) { h = std::clamp(h + delta, 0.0, 1.0); }
        }
    }
    return heights;
}

namespace {

auto project_circles(std::vector<Circle> circles) -> std::vector<Circle>
{
    for (auto& c : circles) {
        if (!std::isfinite(c.x)) { c.x = 0.5; }
        if (!std::isfinite(c.y)) { c.y = 0.5; }
        if (!std::isfinite(c.r) || c.r < 0.0) { c.r = 0.0; }
        c.r = std::min(c.r, 0.5);
        c.x = std::clamp(c.x, c.r, 1.0 - c.r);
        c.y = std::clamp(c.y, c.r, 1.0 - c.r);
    }
    // radii only shrink, so one pass leaves every earlier pair disjoint
    for (std::size_t i = 0; i < circles.size(); ++i) {
        for (std::size_t j = i + 1; j < circles.size(); ++j) {
            double const d = std::hypot(circles[i].x - circles[j].x, circles[i].y - circles[j].y);
            double const sum = circles[i].r + circles[j].r;
            if (sum > d && sum > 0.0) {
                double const factor = d / sum * (1.0 - 1e-12);
                circles[i].r *= factor;
                circles[j].r *= factor;
            }
        }
    }
    return circles;
}

auto grid_circles(std::size_t count) -> std::vector<Circle>
{
    auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    double const r = 0.5 / static_cast<double>(side);
    std::vector<Circle> circles;
    circles.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double const x = (static_cast<double>(i % side) + 0.5) / static_cast<double>(side);
        double const y = (static_cast<double>(i / side) + 0.5) / static_cast<double>(side);
        circles.push_back({x, y, r * (1.0 - 1e-9)});
    }
    return circles;
}

} // namespace

auto Environment::project(Construction const& c) const -> Construction
{
    if (kind_ == EnvKind::CirclePacking) {
        return Construction::unchecked_circle_packing(project_circles(c.circles()));
    }
    auto heights = c.heights();
    if (heights.empty()) {
        heights.assign(size_, kind_ == EnvKind::ErdosMinOverlap ? 0.5 : 1.0);
    }
    if (kind_ == EnvKind::ErdosMinOverlap) {
        if (heights.size() > limits_.max_erdos_length) {
            heights.resize(limits_.max_erdos_length);
        }
        double const target = static_cast<double>(heights.size()) / 2.0;
        return Construction::unchecked_step_function(project_to_box_with_sum(std::move(heights), target));
    }
    double peak = 0.0;
    for (double& h : heights) {
        if (!std::isfinite(h) || h < 0.0) { h = 0.0; }
        peak = std::max(peak, h);
    }
    // both autoconvolution bounds are invariant under positive scaling
    if (peak > 0.0 && peak != 1.0) {
        for (double& h : heights) { h /= peak; }
    }
    return Construction::unchecked_step_function(std::move(heights));
}

auto Environment::seed() const -> Construction
{
    switch (kind_) {
    case EnvKind::AC1:
    case EnvKind::AC2: return Construction::step_function(std::vector<double>(size_, 1.0));
    case EnvKind::ErdosMinOverlap: return Construction::step_function(std::vector<double>(size_, 0.5));
    case EnvKind::CirclePacking: return Construction::circle_packing(grid_circles(size_));
    }
    return {};
}

auto Environment::random_seed(std::mt19937_64& rng) const -> Construction
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (kind_) {
    case EnvKind::AC1:
    case EnvKind::AC2: {
        double const v = 1.0 - unit(rng); // (0, 1]
        return Construction::step_function(std::vector<double>(size_, v));
    }
    case EnvKind::ErdosMinOverlap: {
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<double> h(size_);
        for (double& v : h) { v = 0.5 + noise(rng); }
        return project(Construction::unchecked_step_function(std::move(h)));
    }
    case EnvKind::CirclePacking: {
        auto circles = grid_circles(size_);
        std::normal_distribution<double> noise(0.0, 0.01);
        for (auto& c : circles) {
            c.x += noise(rng);
            c.y += noise(rng);
        }
        return project(Construction::unchecked_circle_packing(std::move(circles)));
    }
    }
    return {};
}

} // namespace discover
