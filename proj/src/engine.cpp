#include "discover/engine.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include "discover/entropic.hpp"

namespace discover {

namespace {

// Calls fn(i) for i in [0, count) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn)
{
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    auto const threads = std::min<std::size_t>(workers, count);
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                fn(i);
            }
        });
    }
}

// Independent stream per (seed, purpose, step, group, rollout).
auto stream(std::uint64_t seed, std::uint32_t purpose, int step, int group, int rollout) -> std::mt19937_64
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose,
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(group),
                      static_cast<std::uint32_t>(rollout)};
    return std::mt19937_64(seq);
}

constexpr std::uint32_t kInitStream = 1;
constexpr std::uint32_t kSelectStream = 2;
constexpr std::uint32_t kRolloutStream = 3;

struct Rollout {
    Proposal proposal;
    VerifierResult result;
};

auto select_nodes(RunConfig const& config, Archive const& archive, int step, bool& relaxed) -> std::vector<NodeId>
{
    std::vector<NodeId> selected;
    selected.reserve(static_cast<std::size_t>(config.groups_per_step));
    relaxed = false;
    switch (config.reuse_mode) {
    case ReuseMode::PUCT: {
        std::set<NodeId> blocked;
        for (int g = 0; g < config.groups_per_step; ++g) {
            auto const pick = archive.puct_select_relaxing(blocked, config.puct_c);
            relaxed = relaxed || pick.relaxation > 0;
            selected.push_back(pick.id);
            blocked.insert(pick.id);
        }
        break;
    }
    case ReuseMode::EpsilonGreedy: {
        auto rng = stream(config.rng_seed, kSelectStream, step, 0, 0);
        for (int g = 0; g < config.groups_per_step; ++g) {
            selected.push_back(archive.epsilon_greedy_select(config.reuse_epsilon, rng));
        }
        break;
    }
    case ReuseMode::None:
        selected.assign(static_cast<std::size_t>(config.groups_per_step), archive.no_reuse_select());
        break;
    }
    return selected;
}

} // namespace

auto make_environment(RunConfig const& config) -> Environment
{
    VerifierLimits limits;
    limits.max_autoconvolution_length = config.max_sequence_length;
    return Environment(config.env, config.env_size, limits);
}

auto run_discover(RunConfig const& config, Environment const& env, ProposalPolicy& policy,
                  EngineOptions const& options) -> RunResult
{
    config.validate();
    policy.begin_run();

    Archive archive(config.archive_capacity);
    Construction initial = env.seed();
    if (config.random_initial_state) {
        auto rng = stream(config.rng_seed, kInitStream, 0, 0, 0);
        initial = env.random_seed(rng);
    }
    double const initial_reward = env.verify(initial).reward;
    archive.add_seed(initial, initial_reward);

    bool const minimize = env.direction() == Direction::Minimize;
    auto const groups = static_cast<std::size_t>(config.groups_per_step);
    auto const per_group = static_cast<std::size_t>(config.rollouts_per_group);
    unsigned const workers = policy.concurrent() ? std::max(1U, options.workers) : 1U;

    RunResult result;
    result.config_echo = config;
    result.best_attempt.reward = 0.0;
    result.best_attempt.bound = minimize ? std::numeric_limits<double>::infinity() : 0.0;
    result.best_attempt.construction = initial;
    bool have_best = false;
    std::int64_t next_attempt_id = 0;

    for (int step = 0; step < config.steps; ++step) {
        StepLog log;
        log.step_index = step;
        log.selected_node_ids = select_nodes(config, archive, step, log.blocking_relaxed);

        std::vector<Construction const*> parents(groups);
        for (std::size_t g = 0; g < groups; ++g) {
            parents[g] = &archive.node(log.selected_node_ids[g]).construction;
        }
        ProposalContext const context{result.best_attempt.reward, step};

        std::vector<Rollout> rollouts(groups * per_group);
        parallel_for(rollouts.size(), workers, [&](std::size_t i) {
            auto const g = i / per_group;
            auto rng = stream(config.rng_seed, kRolloutStream, step, static_cast<int>(g), static_cast<int>(i % per_group));
            auto& slot = rollouts[i];
            slot.proposal = policy.propose(env, *parents[g], context, rng);
            if (slot.proposal.construction) {
                slot.result = env.verify(*slot.proposal.construction);
            } else {
                slot.result = VerifierResult{false, minimize ? std::numeric_limits<double>::infinity() : 0.0, 0.0,
                                             slot.proposal.error};
            }
        });

        // reduce in rollout order: rewards, best attempt, advantages
        std::vector<PolicySample> samples;
        samples.reserve(rollouts.size());
        log.rewards.reserve(rollouts.size());
        for (std::size_t g = 0; g < groups; ++g) {
            std::vector<double> rewards(per_group);
            for (std::size_t r = 0; r < per_group; ++r) {
                auto const& slot = rollouts[g * per_group + r];
                rewards[r] = slot.result.reward;
                log.rewards.push_back(slot.result.reward);
                std::int64_t const id = next_attempt_id++;
                if (slot.result.valid && (!have_best || slot.result.reward > result.best_attempt.reward)) {
                    have_best = true;
                    result.best_attempt = Attempt{id,
                                                  log.selected_node_ids[g],
                                                  *slot.proposal.construction,
                                                  slot.result.reward,
                                                  slot.result.bound,
                                                  step,
                                                  static_cast<int>(g)};
                }
            }

            std::vector<double> advantages;
            double beta = 0.0;
            switch (config.objective_mode) {
            case ObjectiveMode::EntropicAdaptive: {
                auto batch = entropic::adaptive_batch(rewards, config.kl_budget_gamma, config.beta_max,
                                                      config.epsilon_stabilizer);
                beta = batch.beta;
                advantages = std::move(batch.advantages);
                break;
            }
            case ObjectiveMode::EntropicConstant:
                beta = config.constant_beta;
                advantages = entropic::loo_advantages(rewards, beta, config.epsilon_stabilizer);
                break;
            case ObjectiveMode::ExpectedReward:
                advantages = entropic::mean_baseline_advantages(rewards);
                break;
            case ObjectiveMode::NoTraining:
                break;
            }
            log.betas.push_back(beta);

            if (config.objective_mode != ObjectiveMode::NoTraining && policy.trainable()) {
                std::vector<double> logp(per_group);
                std::vector<double> logp_ref(per_group);
                for (std::size_t r = 0; r < per_group; ++r) {
                    logp[r] = rollouts[g * per_group + r].proposal.log_prob;
                    logp_ref[r] = rollouts[g * per_group + r].proposal.reference_log_prob;
                }
                auto const shaped = entropic::kl_penalized_advantages(advantages, logp, logp_ref,
                                                                      config.kl_penalty_lambda);
                for (std::size_t r = 0; r < per_group; ++r) {
                    int const cell = rollouts[g * per_group + r].proposal.cell;
                    if (cell >= 0) {
                        samples.push_back({cell, shaped[r]});
                    }
                }
            }
        }

        if (!samples.empty()) {
            policy.update(samples, config.learning_rate_eta);
        }

        for (std::size_t g = 0; g < groups; ++g) {
            std::vector<ChildCandidate> children;
            children.reserve(per_group);
            for (std::size_t r = 0; r < per_group; ++r) {
                auto& slot = rollouts[g * per_group + r];
                if (slot.proposal.construction) {
                    children.push_back({std::move(*slot.proposal.construction), slot.result.reward});
                } else {
                    children.push_back({Construction{}, 0.0});
                }
            }
            archive.record_expansion(log.selected_node_ids[g], std::move(children), false);
        }
        archive.enforce_capacity();

        log.best_reward_so_far = result.best_attempt.reward;
        log.best_bound_so_far = result.best_attempt.bound;
        if (options.on_step) {
            options.on_step(log, archive);
        }
        result.step_logs.push_back(std::move(log));
    }

    result.total_rollouts = static_cast<std::int64_t>(config.steps) * config.groups_per_step * config.rollouts_per_group;
    return result;
}

auto run_best_of_n(RunConfig const& config, Environment const& env, ProposalPolicy& policy,
                   EngineOptions const& options) -> RunResult
{
    RunConfig baseline = config;
    baseline.objective_mode = ObjectiveMode::NoTraining;
    baseline.reuse_mode = ReuseMode::None;
    return run_discover(baseline, env, policy, options);
}

auto parse_ablation(std::string_view name) -> Ablation
{
    std::string key(name);
    std::replace(key.begin(), key.end(), '_', '-');
    for (Ablation a : kAllAblations) {
        if (key == to_string(a)) {
            return a;
        }
    }
    throw ConfigError("unknown ablation: " + std::string(name));
}

auto to_string(Ablation ablation) -> std::string_view
{
    switch (ablation) {
    case Ablation::ConstantBeta: return "constant-beta";
    case Ablation::ExpectedReward: return "expected-reward";
    case Ablation::NoTTT: return "no-ttt";
    case Ablation::EpsilonGreedy: return "epsilon-greedy";
    case Ablation::NoReuse: return "no-reuse";
    case Ablation::NaiveRL: return "naive-rl";
    }
    return "unknown";
}

auto ablation_config(RunConfig config, Ablation ablation) -> RunConfig
{
    switch (ablation) {
    case Ablation::ConstantBeta:
        config.objective_mode = ObjectiveMode::EntropicConstant;
        config.constant_beta = 2.0;
        config.reuse_mode = ReuseMode::PUCT;
        break;
    case Ablation::ExpectedReward:
        config.objective_mode = ObjectiveMode::ExpectedReward;
        config.reuse_mode = ReuseMode::PUCT;
        break;
    case Ablation::NoTTT:
        config.objective_mode = ObjectiveMode::NoTraining;
        config.reuse_mode = ReuseMode::PUCT;
        break;
    case Ablation::EpsilonGreedy:
        config.objective_mode = ObjectiveMode::EntropicAdaptive;
        config.reuse_mode = ReuseMode::EpsilonGreedy;
        config.reuse_epsilon = 0.1;
        break;
    case Ablation::NoReuse:
        config.objective_mode = ObjectiveMode::EntropicAdaptive;
        config.reuse_mode = ReuseMode::None;
        break;
    case Ablation::NaiveRL:
        config.objective_mode = ObjectiveMode::ExpectedReward;
        config.reuse_mode = ReuseMode::None;
        break;
    }
    return config;
}

auto run_ablation(RunConfig const& config, Ablation ablation, Environment const& env, ProposalPolicy& policy,
                  EngineOptions const& options) -> RunResult
{
    return run_discover(ablation_config(config, ablation), env, policy, options);
}

} // namespace discover
