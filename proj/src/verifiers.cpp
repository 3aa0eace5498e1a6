#include "discover/verifiers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numeric>

#include <fftw3.h>

namespace discover {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

auto rejected(Direction direction, std::string reason) -> VerifierResult
{
    return VerifierResult{false, direction == Direction::Minimize ? kInf : 0.0, 0.0, std::move(reason)};
}

auto accepted(double bound, Direction direction) -> VerifierResult
{
    auto reward = reward_from_bound(bound, direction);
    if (!reward || !(*reward > 0.0) || !std::isfinite(bound)) {
        return rejected(direction, "degenerate bound");
    }
    return VerifierResult{true, bound, *reward, std::nullopt};
}

// FFTW's planner is not re-entrant; execution with fresh arrays is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

// Shared validity gate for the autoconvolution problems: finite, non-negative,
// length cap, then clamp to [0, height_clamp_max].
auto clamp_heights(std::span<double const> heights, VerifierLimits const& limits,
                   std::vector<double>& out) -> std::optional<std::string>
{
    if (heights.empty()) {
        return "empty sequence";
    }
    if (heights.size() > limits.max_autoconvolution_length) {
        return "sequence longer than " + std::to_string(limits.max_autoconvolution_length);
    }
    out.resize(heights.size());
    for (std::size_t i = 0; i < heights.size(); ++i) {
        double const h = heights[i];
        if (!std::isfinite(h)) {
            return "non-finite height at index " + std::to_string(i);
        }
        if (h < 0.0) {
            return "negative height at index " + std::to_string(i);
        }
        out[i] = std::min(h, limits.height_clamp_max);
    }
    return std::nullopt;
}

} // namespace

auto reward_from_bound(double bound, Direction direction) -> std::optional<double>
{
    if (direction == Direction::Minimize) {
        if (!(bound > 0.0) || !std::isfinite(bound)) {
            return std::nullopt;
        }
        return 1.0 / bound;
    }
    if (!(bound >= 0.0) || !std::isfinite(bound)) {
        return std::nullopt;
    }
    return bound;
}

auto autoconvolution_direct(std::span<double const> f) -> std::vector<double>
{
    if (f.empty()) {
        return {};
    }
    std::vector<double> g(2 * f.size() - 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        double const fi = f[i];
        if (fi == 0.0) { continue; }
        for (std::size_t j = 0; j < f.size(); ++j) {
            g[i + j] += fi * f[j];
        }
    }
    return g;
}

auto autoconvolution_fft(std::span<double const> f) -> std::vector<double>
{
    if (f.empty()) {
        return {};
    }
    std::size_t const out_len = 2 * f.size() - 1;
    std::size_t len = 1;
    while (len < out_len) { len <<= 1; }
    std::size_t const bins = len / 2 + 1;

    auto* real = static_cast<double*>(fftw_malloc(sizeof(double) * len));
    auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
    fftw_plan forward{};
    fftw_plan backward{};
    {
        std::lock_guard lock(fftw_planner_mutex());
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(len), real, spec, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(len), spec, real, FFTW_ESTIMATE);
    }
    std::fill(real, real + len, 0.0);
    std::copy(f.begin(), f.end(), real);
    fftw_execute(forward);
    for (std::size_t k = 0; k < bins; ++k) {
        double const re = spec[k][0];
        double const im = spec[k][1];
        spec[k][0] = re * re - im * im;
        spec[k][1] = 2.0 * re * im;
    }
    fftw_execute(backward);

    std::vector<double> g(out_len);
    double const norm = 1.0 / static_cast<double>(len);
    for (std::size_t i = 0; i < out_len; ++i) {
        // non-negative inputs give a non-negative convolution; drop round-off below zero
        g[i] = std::max(real[i] * norm, 0.0);
    }
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    fftw_free(real);
    fftw_free(spec);
    return g;
}

auto autoconvolution(std::span<double const> f) -> std::vector<double>
{
    return f.size() < kFastConvolutionThreshold ? autoconvolution_direct(f) : autoconvolution_fft(f);
}

auto verify_ac1(std::span<double const> heights, VerifierLimits const& limits) -> VerifierResult
{
    std::vector<double> f;
    if (auto err = clamp_heights(heights, limits, f)) {
        return rejected(Direction::Minimize, *err);
    }
    double const sum = std::accumulate(f.begin(), f.end(), 0.0);
    if (!(sum >= limits.min_height_sum)) {
        return rejected(Direction::Minimize, "sum of heights below " + std::to_string(limits.min_height_sum));
    }
    auto const g = autoconvolution(f);
    double const peak = *std::max_element(g.begin(), g.end());
    double const n = static_cast<double>(f.size());
    return accepted(2.0 * n * peak / (sum * sum), Direction::Minimize);
}

auto verify_ac2(std::span<double const> heights, VerifierLimits const& limits) -> VerifierResult
{
    std::vector<double> f;
    if (auto err = clamp_heights(heights, limits, f)) {
        return rejected(Direction::Maximize, *err);
    }
    auto const g = autoconvolution(f);
    double const peak = *std::max_element(g.begin(), g.end());
    if (!(peak > 0.0)) {
        return rejected(Direction::Maximize, "degenerate autoconvolution");
    }
    // Grid over [-1/2, 1/2]: zero, g_0 .. g_{m-1}, zero; m + 1 equal intervals.
    double const dx = 1.0 / static_cast<double>(g.size() + 1);
    double l2_squared = 0.0;
    double l1 = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i <= g.size(); ++i) {
        double const next = i < g.size() ? g[i] : 0.0;
        l2_squared += (prev * prev + prev * next + next * next);
        l1 += 0.5 * (prev + next);
        prev = next;
    }
    l2_squared *= dx / 3.0;
    l1 *= dx;
    return accepted(l2_squared / (l1 * peak), Direction::Maximize);
}

auto verify_erdos(std::span<double const> heights, VerifierLimits const& limits) -> VerifierResult
{
    if (heights.empty()) {
        return rejected(Direction::Minimize, "empty sequence");
    }
    if (heights.size() > limits.max_erdos_length) {
        return rejected(Direction::Minimize,
                        "sequence longer than " + std::to_string(limits.max_erdos_length));
    }
    std::size_t const n = heights.size();
    std::vector<double> h(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const v = heights[i];
        if (!std::isfinite(v)) {
            return rejected(Direction::Minimize, "non-finite height at index " + std::to_string(i));
        }
        if (v < -limits.erdos_range_tolerance || v > 1.0 + limits.erdos_range_tolerance) {
            return rejected(Direction::Minimize, "height outside [0, 1] at index " + std::to_string(i));
        }
        h[i] = std::clamp(v, 0.0, 1.0);
        sum += h[i];
    }
    double const dx = 2.0 / static_cast<double>(n);
    if (std::abs(sum * dx - 1.0) > limits.erdos_normalization_tolerance) {
        return rejected(Direction::Minimize, "integral of h is not 1");
    }
    // max over lags k in (-n, n) of sum_i h[i + k] * (1 - h[i])
    double best = -kInf;
    auto const lag = [&](std::ptrdiff_t k) {
        double acc = 0.0;
        auto const nn = static_cast<std::ptrdiff_t>(n);
        std::ptrdiff_t const lo = std::max<std::ptrdiff_t>(0, -k);
        std::ptrdiff_t const hi = std::min<std::ptrdiff_t>(nn, nn - k);
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
            acc += h[static_cast<std::size_t>(i + k)] * (1.0 - h[static_cast<std::size_t>(i)]);
        }
        return acc;
    };
    for (auto k = -static_cast<std::ptrdiff_t>(n) + 1; k < static_cast<std::ptrdiff_t>(n); ++k) {
        best = std::max(best, lag(k));
    }
    return accepted(best * dx, Direction::Minimize);
}

auto verify_circle_packing(std::span<Circle const> circles, std::size_t expected_count,
                           VerifierLimits const& limits) -> VerifierResult
{
    if (circles.size() != expected_count) {
        return rejected(Direction::Maximize, "expected " + std::to_string(expected_count) + " circles, got "
                                                 + std::to_string(circles.size()));
    }
    double const tol = limits.circle_tolerance;
    double total = 0.0;
    for (std::size_t i = 0; i < circles.size(); ++i) {
        auto const& c = circles[i];
        if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.r)) {
            return rejected(Direction::Maximize, "non-finite circle " + std::to_string(i));
        }
        if (c.r < 0.0) {
            return rejected(Direction::Maximize, "negative radius for circle " + std::to_string(i));
        }
        if (c.x - c.r < -tol || c.x + c.r > 1.0 + tol || c.y - c.r < -tol || c.y + c.r > 1.0 + tol) {
            return rejected(Direction::Maximize, "circle " + std::to_string(i) + " leaves the unit square");
        }
        total += c.r;
    }
    for (std::size_t i = 0; i < circles.size(); ++i) {
        for (std::size_t j = i + 1; j < circles.size(); ++j) {
            double const d = std::hypot(circles[i].x - circles[j].x, circles[i].y - circles[j].y);
            if (d < circles[i].r + circles[j].r - tol) {
                return rejected(Direction::Maximize,
                                "circles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
            }
        }
    }
    return accepted(total, Direction::Maximize);
}

} // namespace discover
