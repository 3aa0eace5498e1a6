#ifndef DISCOVER_VERIFIERS_HPP
#define DISCOVER_VERIFIERS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "discover/core.hpp"

namespace discover {

enum class Direction { Minimize, Maximize };

struct VerifierResult {
    bool valid{false};
    double bound{};   // +inf (minimize) or 0 (maximize) when invalid
    double reward{};  // 0 when invalid
    std::optional<std::string> rejection_reason;
};

struct VerifierLimits {
    std::size_t max_autoconvolution_length{100'000};
    double height_clamp_max{1000.0};
    double min_height_sum{0.01};
    std::size_t max_erdos_length{1000};
    double erdos_normalization_tolerance{1e-9};
    double erdos_range_tolerance{1e-12};
    double circle_tolerance{1e-9};
};

// Minimize: 1/bound, or nullopt when bound is not positive and finite.
// Maximize: bound itself.
auto reward_from_bound(double bound, Direction direction) -> std::optional<double>;

// Full linear self-convolution (length 2n-1). Direct O(n^2) below
// kFastConvolutionThreshold, FFT above.
inline constexpr std::size_t kFastConvolutionThreshold = 2048;
auto autoconvolution(std::span<double const> f) -> std::vector<double>;
auto autoconvolution_direct(std::span<double const> f) -> std::vector<double>;
auto autoconvolution_fft(std::span<double const> f) -> std::vector<double>;

// Upper bound on C1: 2n * max(f*f) / (sum f)^2.
auto verify_ac1(std::span<double const> heights, VerifierLimits const& limits = {}) -> VerifierResult;

// Lower bound on C2: ||g||_2^2 / (||g||_1 ||g||_inf), g = f*f on [-1/2, 1/2]
// with zero endpoints, integrated as a piecewise-linear function.
auto verify_ac2(std::span<double const> heights, VerifierLimits const& limits = {}) -> VerifierResult;

// Erdos minimum overlap: max over lags of corr(h, 1-h) * dx, dx = 2/n.
auto verify_erdos(std::span<double const> heights, VerifierLimits const& limits = {}) -> VerifierResult;

// Sum of radii of exactly `expected_count` disjoint circles inside [0,1]^2.
auto verify_circle_packing(std::span<Circle const> circles, std::size_t expected_count,
                           VerifierLimits const& limits = {}) -> VerifierResult;

} // namespace discover

#endif
