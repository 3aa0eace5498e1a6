#ifndef DISCOVER_CORE_HPP
#define DISCOVER_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace discover {

using NodeId = std::int64_t;

struct Circle {
    double x{};
    double y{};
    double r{};

    friend bool operator==(Circle const&, Circle const&) = default;
};

enum class ConstructionKind { StepFunction, CirclePacking };

// Raised when a construction (or its serialized form) breaks a type invariant.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for syntactically malformed serialized input.
class MalformedInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A candidate solution state. Step functions carry non-negative heights;
// circle packings carry (x, y, r) triples in unit-square coordinates.
class Construction {
public:
    Construction() = default;

    // Validating factories; throw InvariantViolation.
    static auto step_function(std::vector<double> heights) -> Construction;
    static auto circle_packing(std::vector<Circle> circles) -> Construction;

    // No validation. For data that is checked later (encode, verifiers).
    static auto unchecked_step_function(std::vector<double> heights) -> Construction;
    static auto unchecked_circle_packing(std::vector<Circle> circles) -> Construction;

    [[nodiscard]] auto kind() const noexcept -> ConstructionKind { return kind_; }
    [[nodiscard]] auto heights() const noexcept -> std::vector<double> const& { return heights_; }
    [[nodiscard]] auto circles() const noexcept -> std::vector<Circle> const& { return circles_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t
    {
        return kind_ == ConstructionKind::StepFunction ? heights_.size() : circles_.size();
    }

    // Empty optional when valid, otherwise the violated invariant.
    [[nodiscard]] auto check() const -> std::optional<std::string>;

    friend bool operator==(Construction const&, Construction const&) = default;

private:
    ConstructionKind kind_{ConstructionKind::StepFunction};
    std::vector<double> heights_;
    std::vector<Circle> circles_;
};

struct Attempt {
    std::int64_t id{};
    std::optional<NodeId> parent_id;
    Construction construction;
    double reward{};
    double bound{};
    int step_index{};
    int group_index{};
};

struct StepLog {
    int step_index{};
    std::vector<double> rewards;
    double best_reward_so_far{};
    double best_bound_so_far{};
    std::vector<double> betas;
    std::vector<NodeId> selected_node_ids;
    // Set when lineage blocking had to be relaxed to fill the batch.
    bool blocking_relaxed{false};

    friend bool operator==(StepLog const&, StepLog const&) = default;
};

// Structured-text (JSON) encoding of constructions, numbers written with 17
// significant digits so decode(encode(c)) == c bit for bit.
//   {"kind":"step_function","heights":[...]}
//   {"kind":"circle_packing","circles":[[x,y,r],...]}
// Throws InvariantViolation for invalid constructions.
auto encode_construction(Construction const& c) -> std::string;

// Accepts the object form above, or a bare array: numbers are read as step
// heights, triples as circles. Throws MalformedInput or InvariantViolation.
auto decode_construction(std::string_view text) -> Construction;

auto to_string(ConstructionKind kind) -> std::string_view;

// One StepLog per line, keys named after the struct fields.
auto encode_step_log(StepLog const& log) -> std::string;
auto decode_step_log(std::string_view line) -> StepLog;

} // namespace discover

#endif
