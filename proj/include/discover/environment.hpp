#ifndef DISCOVER_ENVIRONMENT_HPP
#define DISCOVER_ENVIRONMENT_HPP

#include <cstddef>
#include <random>
#include <string>
#include <string_view>

#include "discover/core.hpp"
#include "discover/verifiers.hpp"

namespace discover {

enum class EnvKind { ErdosMinOverlap, AC1, AC2, CirclePacking };

// Accepts "erdos", "ac1", "ac2", "circle_packing" (hyphens allowed). Throws
// std::invalid_argument on anything else.
auto parse_env_kind(std::string_view name) -> EnvKind;
auto to_string(EnvKind kind) -> std::string_view;

// A verifiable problem: reward function, constraint projection, seed state.
class Environment {
public:
    // `size` is the seed length for step functions and the circle count for
    // circle packing.
    Environment(EnvKind kind, std::size_t size, VerifierLimits limits = {});

    [[nodiscard]] auto kind() const noexcept -> EnvKind { return kind_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return size_; }
    [[nodiscard]] auto name() const -> std::string_view { return to_string(kind_); }
    [[nodiscard]] auto direction() const noexcept -> Direction;
    [[nodiscard]] auto construction_kind() const noexcept -> ConstructionKind;
    [[nodiscard]] auto limits() const noexcept -> VerifierLimits const& { return limits_; }

    [[nodiscard]] auto verify(Construction const& c) const -> VerifierResult;

    // Maps an arbitrary construction of the right kind onto the feasible set:
    // step functions are made non-negative and rescaled (AC1/AC2, both
    // scale-invariant) or clipped to [0,1] and renormalized to sum n/2
    // (Erdos); circles are pulled inside the square and shrunk pairwise until
    // disjoint.
    [[nodiscard]] auto project(Construction const& c) const -> Construction;

    // Deterministic seed: constant sequence (AC1/AC2), constant 0.5 (Erdos),
    // equal circles on a square grid (circle packing).
    [[nodiscard]] auto seed() const -> Construction;
    // Randomized seed: a random constant in (0, 1] (AC1/AC2), 0.5 plus noise
    // (Erdos), jittered grid (circle packing); always feasible.
    [[nodiscard]] auto random_seed(std::mt19937_64& rng) const -> Construction;

private:
    EnvKind kind_;
    std::size_t size_;
    VerifierLimits limits_;
};

// Heights clipped to [0, 1] then shifted so that they sum to target_sum.
auto project_to_box_with_sum(std::vector<double> heights, double target_sum) -> std::vector<double>;

} // namespace discover

#endif
