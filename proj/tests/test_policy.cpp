#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "discover/entropic.hpp"
#include "discover/policy.hpp"

using namespace discover;

TEST_CASE("equal logits give uniform cell choice")
{
    MutationPolicy policy;
    REQUIRE(policy.cell_count() == 20);
    std::mt19937_64 rng(4);
    constexpr int kDraws = 10'000;
    std::vector<int> counts(policy.cell_count(), 0);
    for (int i = 0; i < kDraws; ++i) { counts[static_cast<std::size_t>(policy.sample_cell(rng))] += 1; }
    double const expected = kDraws / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (int c : counts) { chi2 += (c - expected) * (c - expected) / expected; }
    CHECK(chi2 < 43.82); // 19 dof, p = 0.001
}

TEST_CASE("cell layout")
{
    MutationPolicy policy({0.01, 0.2});
    CHECK(policy.cell_count() == 10);
    CHECK(policy.cell_operator(0) == MutationOperator::GaussianPerturb);
    CHECK(policy.cell_magnitude(1) == 0.2);
    CHECK(policy.cell_operator(9) == MutationOperator::RescaleProject);
    CHECK_THROWS((void)policy.cell_operator(10));
}

TEST_CASE("zero magnitude Gaussian perturbation is the projection")
{
    std::mt19937_64 rng(5);
    for (auto kind : {EnvKind::AC1, EnvKind::AC2, EnvKind::ErdosMinOverlap, EnvKind::CirclePacking}) {
        Environment env(kind, 12);
        auto const state = env.random_seed(rng);
        CHECK(apply_mutation(MutationOperator::GaussianPerturb, 0.0, env, state, rng) == env.project(state));
    }
}

TEST_CASE("every operator keeps states feasible")
{
    std::mt19937_64 rng(6);
    for (auto kind : {EnvKind::AC1, EnvKind::AC2, EnvKind::ErdosMinOverlap, EnvKind::CirclePacking}) {
        Environment env(kind, 30);
        auto state = env.seed();
        for (int i = 0; i < 400; ++i) {
            auto const op = static_cast<MutationOperator>(i % 5);
            double const magnitude = kDefaultMagnitudes[static_cast<std::size_t>(i / 5) % 4];
            state = apply_mutation(op, magnitude, env, state, rng);
            auto const r = env.verify(state);
            CAPTURE(to_string(op));
            REQUIRE(r.valid);
            if (kind == EnvKind::ErdosMinOverlap) {
                double sum = std::accumulate(state.heights().begin(), state.heights().end(), 0.0);
                REQUIRE(std::abs(sum * 2.0 / 30.0 - 1.0) <= 1e-12);
            }
        }
    }
}

TEST_CASE("update sign structure")
{
    MutationPolicy policy;
    auto const before = policy.logits();
    policy.update(std::vector<PolicySample>{{3, 0.0}, {7, 0.0}}, 0.5);
    CHECK(policy.logits() == before);

    policy.update(std::vector<PolicySample>{{3, 1.0}}, 0.5);
    for (std::size_t k = 0; k < before.size(); ++k) {
        if (k == 3) {
            CHECK(policy.logits()[k] > before[k]);
        } else {
            CHECK(policy.logits()[k] < before[k]);
        }
    }
}

TEST_CASE("expected score gradient equals the exact entropic gradient")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t const k = trial == 0 ? 2 : 2 + rng() % 18;
        std::vector<double> logits(k);
        std::vector<double> rewards(k);
        for (std::size_t i = 0; i < k; ++i) {
            logits[i] = normal(rng);
            rewards[i] = unit(rng);
        }
        double const beta = 0.1 + unit(rng) * 4.0;
        auto const p = entropic::softmax(logits);
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) { z += p[i] * std::exp(beta * rewards[i]); }
        // one pseudo-sample per cell weighted by its probability: A = p_k (w_k - 1)
        std::vector<PolicySample> samples;
        for (std::size_t i = 0; i < k; ++i) {
            double const w = std::exp(beta * rewards[i]) / z;
            samples.push_back({static_cast<int>(i), p[i] * (w - 1.0)});
        }
        auto const direction = MutationPolicy::score_gradient(logits, samples);
        auto const exact = entropic::entropic_gradient_exact(logits, rewards, beta);
        for (std::size_t i = 0; i < k; ++i) { REQUIRE(std::abs(direction[i] - exact[i]) <= 1e-10); }
    }
}

TEST_CASE("log probabilities are consistent and the reference is frozen")
{
    MutationPolicy policy({0.05});
    std::vector<double> const logits{0.3, -1.0, 2.0, 0.0, 0.5};
    policy.set_logits(logits);
    policy.begin_run();
    auto const p = policy.probabilities();
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int c = 0; c < 5; ++c) {
        CHECK(policy.log_prob(c) == doctest::Approx(std::log(p[static_cast<std::size_t>(c)])).epsilon(1e-14));
        CHECK(policy.reference_log_prob(c) == policy.log_prob(c));
    }

    Environment env(EnvKind::AC1, 8);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        auto const proposal = policy.propose(env, env.seed(), {}, rng);
        REQUIRE(proposal.construction.has_value());
        CHECK(proposal.log_prob == policy.log_prob(proposal.cell));
        policy.update(std::vector<PolicySample>{{proposal.cell, 1.0}}, 0.1);
    }
    CHECK(policy.reference_logits() == logits);
    CHECK(policy.logits() != logits);
}

TEST_CASE("entropic training solves a bandit")
{
    // Cell 2 pays 1, everything else pays 0. Groups of 16 samples, adaptive
    // beta, LOO advantages, no KL penalty.
    MutationPolicy policy({0.1});
    policy.begin_run();
    std::mt19937_64 rng(9);
    int steps = 0;
    for (; steps < 200 && policy.probabilities()[2] <= 0.99; ++steps) {
        std::vector<int> cells;
        std::vector<double> rewards;
        for (int n = 0; n < 16; ++n) {
            cells.push_back(policy.sample_cell(rng));
            rewards.push_back(cells.back() == 2 ? 1.0 : 0.0);
        }
        auto const batch = entropic::adaptive_batch(rewards, std::log(2.0));
        std::vector<PolicySample> samples;
        for (std::size_t n = 0; n < cells.size(); ++n) { samples.push_back({cells[n], batch.advantages[n]}); }
        policy.update(samples, 0.5 / 16.0);
    }
    CHECK(policy.probabilities()[2] > 0.99);
    CHECK(steps < 200);
}

TEST_CASE("two-cell bandit converges under the entropic update")
{
    // Cell A pays 1, cell B pays 0; the logits follow the policy's own
    // update rule, logits += eta * score_gradient.
    std::vector<double> logits{0.0, 0.0};
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int steps = 0;
    for (; steps < 200 && entropic::softmax(logits)[0] <= 0.99; ++steps) {
        double const p_a = entropic::softmax(logits)[0];
        std::vector<int> cells;
        std::vector<double> rewards;
        for (int n = 0; n < 8; ++n) {
            cells.push_back(unit(rng) < p_a ? 0 : 1);
            rewards.push_back(cells.back() == 0 ? 1.0 : 0.0);
        }
        auto const batch = entropic::adaptive_batch(rewards, std::log(2.0));
        std::vector<PolicySample> samples;
        for (std::size_t n = 0; n < cells.size(); ++n) { samples.push_back({cells[n], batch.advantages[n]}); }
        auto const g = MutationPolicy::score_gradient(logits, samples);
        for (std::size_t k = 0; k < 2; ++k) { logits[k] += 0.5 * g[k]; }
    }
    CHECK(entropic::softmax(logits)[0] > 0.99);
    CHECK(steps < 200);
}
