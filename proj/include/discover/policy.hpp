#ifndef DISCOVER_POLICY_HPP
#define DISCOVER_POLICY_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "discover/core.hpp"
#include "discover/environment.hpp"

namespace discover {

// What a proposer may know about the search when generating an action.
struct ProposalContext {
    double best_reward{};
    int step{};
};

struct Proposal {
    // Empty when the proposer failed; `error` then says why.
    std::optional<Construction> construction;
    int cell{-1};
    double log_prob{0.0};
    double reference_log_prob{0.0};
    std::string error;
};

struct PolicySample {
    int cell{};
    double advantage{};
};

// Stand-in for the sampling policy of the discovery loop.
class ProposalPolicy {
public:
    virtual ~ProposalPolicy() = default;

    virtual auto propose(Environment const& env, Construction const& state, ProposalContext const& context,
                         std::mt19937_64& rng) -> Proposal = 0;

    // Called once when a run starts.
    virtual void begin_run() {}
    [[nodiscard]] virtual auto trainable() const -> bool { return false; }
    // Whether propose may be called from several threads at once.
    [[nodiscard]] virtual auto concurrent() const -> bool { return true; }
    // One gradient step on the batch.
    virtual void update(std::span<PolicySample const> /*samples*/, double /*eta*/) {}
};

enum class MutationOperator { GaussianPerturb, BlockResample, Smooth, SpliceSwap, RescaleProject };
inline constexpr std::size_t kOperatorCount = 5;
inline constexpr std::array<double, 4> kDefaultMagnitudes{1e-3, 1e-2, 1e-1, 3e-1};

auto to_string(MutationOperator op) -> std::string_view;

// Applies one operator at the given relative magnitude, then projects the
// result onto the environment's feasible set.
auto apply_mutation(MutationOperator op, double magnitude, Environment const& env, Construction const& state,
                    std::mt19937_64& rng) -> Construction;

// State-independent softmax policy over (operator, magnitude) cells. Cell
// index = operator * bins + bin.
class MutationPolicy final : public ProposalPolicy {
public:
    explicit MutationPolicy(std::vector<double> magnitudes = {kDefaultMagnitudes.begin(), kDefaultMagnitudes.end()});

    [[nodiscard]] auto cell_count() const noexcept -> std::size_t { return logits_.size(); }
    [[nodiscard]] auto magnitudes() const noexcept -> std::vector<double> const& { return magnitudes_; }
    [[nodiscard]] auto cell_operator(int cell) const -> MutationOperator;
    [[nodiscard]] auto cell_magnitude(int cell) const -> double;

    [[nodiscard]] auto logits() const noexcept -> std::vector<double> const& { return logits_; }
    [[nodiscard]] auto reference_logits() const noexcept -> std::vector<double> const& { return reference_; }
    [[nodiscard]] auto probabilities() const -> std::vector<double>;
    [[nodiscard]] auto log_prob(int cell) const -> double;
    [[nodiscard]] auto reference_log_prob(int cell) const -> double;

    void set_logits(std::vector<double> logits);

    [[nodiscard]] auto sample_cell(std::mt19937_64& rng) const -> int;

    auto propose(Environment const& env, Construction const& state, ProposalContext const& context,
                 std::mt19937_64& rng) -> Proposal override;

    // Freezes the current logits as the KL reference.
    void begin_run() override;
    [[nodiscard]] auto trainable() const -> bool override { return true; }

    // logits += eta * sum_n A_n * grad log softmax(logits)[cell_n]
    void update(std::span<PolicySample const> samples, double eta) override;

    // sum_n A_n * (e_{cell_n} - p): the score-function gradient of the batch.
    [[nodiscard]] static auto score_gradient(std::span<double const> logits, std::span<PolicySample const> samples)
        -> std::vector<double>;

private:
    std::vector<double> magnitudes_;
    std::vector<double> logits_;
    std::vector<double> reference_;
    std::vector<double> log_probs_;
    std::vector<double> reference_log_probs_;
    std::vector<double> cumulative_;

    void refresh();
};

} // namespace discover

#endif
