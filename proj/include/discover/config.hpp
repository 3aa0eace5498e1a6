#ifndef DISCOVER_CONFIG_HPP
#define DISCOVER_CONFIG_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "discover/environment.hpp"
#include "discover/policy.hpp"

namespace discover {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ReuseMode { PUCT, EpsilonGreedy, None };
enum class ObjectiveMode { EntropicAdaptive, EntropicConstant, ExpectedReward, NoTraining };

auto to_string(ReuseMode mode) -> std::string_view;
auto to_string(ObjectiveMode mode) -> std::string_view;

// Every hyperparameter of a run. Defaults follow the reference setup where it
// has one (50 steps, 8 x 64 rollouts, c = 1, gamma = ln 2, lambda = 0.1).
struct RunConfig {
    EnvKind env{EnvKind::AC1};
    std::size_t env_size{200};      // seed length, or circle count
    bool random_initial_state{false};
    std::size_t max_sequence_length{100'000};

    int steps{50};
    int groups_per_step{8};
    int rollouts_per_group{64};
    std::uint64_t rng_seed{0};

    double puct_c{1.0};
    std::size_t archive_capacity{1000};
    ReuseMode reuse_mode{ReuseMode::PUCT};
    double reuse_epsilon{0.1};

    ObjectiveMode objective_mode{ObjectiveMode::EntropicAdaptive};
    double kl_budget_gamma{std::log(2.0)};
    double kl_penalty_lambda{0.1};
    double constant_beta{2.0};
    double beta_max{1e4};
    double epsilon_stabilizer{1e-8};

    double learning_rate_eta{0.003};
    std::vector<double> magnitudes{kDefaultMagnitudes.begin(), kDefaultMagnitudes.end()};
    std::string external_command; // empty: built-in mutation policy
    int external_timeout_ms{30'000};

    // Throws ConfigError naming the first offending key.
    void validate() const;

    friend bool operator==(RunConfig const&, RunConfig const&) = default;
};

// Flat "dotted.key = value" text; '#' starts a comment.
//
//   env.kind, env.size, env.random_seed, env.max_length,
//   run.steps, run.groups, run.rollouts, run.seed,
//   puct.c, archive.capacity, reuse.mode, reuse.epsilon,
//   objective.mode, objective.gamma, objective.lambda, objective.beta,
//   objective.beta_max, objective.epsilon,
//   policy.learning_rate, policy.magnitudes, policy.command, policy.timeout_ms
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
auto parse_config(std::string_view text) -> RunConfig;
auto serialize_config(RunConfig const& config) -> std::string;

} // namespace discover

#endif
