#ifndef DISCOVER_ENGINE_HPP
#define DISCOVER_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "discover/archive.hpp"
#include "discover/config.hpp"
#include "discover/core.hpp"
#include "discover/environment.hpp"
#include "discover/policy.hpp"

namespace discover {

struct RunResult {
    Attempt best_attempt;
    std::vector<StepLog> step_logs;
    std::int64_t total_rollouts{};
    RunConfig config_echo;
};

struct EngineOptions {
    // Size of the proposal/verification pool; results do not depend on it.
    unsigned workers{1};
    // Called after every step with that step's log and the updated archive.
    std::function<void(StepLog const&, Archive const&)> on_step;
};

// The discovery loop. Per step: pick one archive node per group (reuse
// mode), draw rollouts_per_group proposals from each node, verify them,
// turn each group's rewards into advantages (objective mode), take one
// policy step on the whole batch, and fold every group back into the
// archive as an expansion of its node.
auto run_discover(RunConfig const& config, Environment const& env, ProposalPolicy& policy,
                  EngineOptions const& options = {}) -> RunResult;

// steps x groups x rollouts i.i.d. proposals from the initial state, no
// training and no reuse.
auto run_best_of_n(RunConfig const& config, Environment const& env, ProposalPolicy& policy,
                   EngineOptions const& options = {}) -> RunResult;

enum class Ablation {
    ConstantBeta,   // entropic, beta = 2, PUCT
    ExpectedReward, // mean baseline, PUCT
    NoTTT,          // no training, PUCT
    EpsilonGreedy,  // adaptive entropic, epsilon-greedy (0.1) reuse
    NoReuse,        // adaptive entropic, no reuse
    NaiveRL,        // mean baseline, no reuse
};

inline constexpr Ablation kAllAblations[] = {Ablation::ConstantBeta,  Ablation::ExpectedReward, Ablation::NoTTT,
                                              Ablation::EpsilonGreedy, Ablation::NoReuse,        Ablation::NaiveRL};

// "constant-beta", "expected-reward", "no-ttt", "epsilon-greedy",
// "no-reuse", "naive-rl". Throws ConfigError for anything else.
auto parse_ablation(std::string_view name) -> Ablation;
auto to_string(Ablation ablation) -> std::string_view;
auto ablation_config(RunConfig config, Ablation ablation) -> RunConfig;

auto run_ablation(RunConfig const& config, Ablation ablation, Environment const& env, ProposalPolicy& policy,
                  EngineOptions const& options = {}) -> RunResult;

// The environment a config describes.
auto make_environment(RunConfig const& config) -> Environment;

} // namespace discover

#endif
