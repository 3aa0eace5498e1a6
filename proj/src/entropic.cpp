#include "discover/entropic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace discover::entropic {

namespace {

auto max_of(std::span<double const> v) -> double
{
    return *std::max_element(v.begin(), v.end());
}

void require_batch(std::span<double const> rewards)
{
    if (rewards.size() < 2) {
        throw std::invalid_argument("a batch needs at least two rewards");
    }
}

} // namespace

auto kl_tilted_uniform(std::span<double const> rewards, double beta) -> double
{
    require_batch(rewards);
    double const r_max = max_of(rewards);
    double sum = 0.0;
    double weighted_shift = 0.0;
    for (double r : rewards) {
        double const shifted = beta * (r - r_max);
        double const e = std::exp(shifted);
        sum += e;
        if (e > 0.0) {
            weighted_shift += e * shifted;
        }
    }
    // sum_n q_n log(N q_n) = log N + sum_n q_n beta (r_n - r_max) - log S
    double const kl = std::log(static_cast<double>(rewards.size())) + weighted_shift / sum - std::log(sum);
    return std::max(kl, 0.0);
}

auto solve_beta(std::span<double const> rewards, double gamma, double beta_max) -> BetaSolution
{
    require_batch(rewards);
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("KL budget must be positive");
    }
    // KL never exceeds ln N, and in floating point it can saturate at exactly
    // gamma, so equality counts as unattainable.
    double const kl_cap = kl_tilted_uniform(rewards, beta_max);
    if (kl_cap <= gamma) {
        return {beta_max, kl_cap};
    }
    double lo = 0.0;
    double hi = beta_max;
    double kl_lo = 0.0;
    for (int it = 0; it < kBisectionMaxIterations; ++it) {
        double const mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        double const kl = kl_tilted_uniform(rewards, mid);
        if (kl <= gamma) {
            lo = mid;
            kl_lo = kl;
            if (gamma - kl <= 0.01 * kBisectionTolerance) {
                break;
            }
        } else {
            hi = mid;
        }
    }
    return {lo, kl_lo};
}

auto tilted_weights(std::span<double const> rewards, double beta) -> std::vector<double>
{
    require_batch(rewards);
    double const r_max = max_of(rewards);
    std::vector<double> w(rewards.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        w[i] = std::exp(beta * (rewards[i] - r_max));
        sum += w[i];
    }
    double const n = static_cast<double>(rewards.size());
    for (double& x : w) {
        x = x * n / sum;
    }
    return w;
}

auto loo_advantages(std::span<double const> rewards, double beta, double epsilon) -> std::vector<double>
{
    require_batch(rewards);
    double const r_max = max_of(rewards);
    std::vector<double> e(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        e[i] = std::exp(beta * (rewards[i] - r_max));
    }
    double const total = std::accumulate(e.begin(), e.end(), 0.0);
    double const others = static_cast<double>(rewards.size() - 1);
    std::vector<double> a(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        // (total - e_i) can lose all digits when e_i dominates; re-sum then
        double rest = total - e[i];
        if (rest < 1e-8 * total) {
            rest = 0.0;
            for (std::size_t j = 0; j < rewards.size(); ++j) {
                if (j != i) { rest += e[j]; }
            }
        }
        a[i] = e[i] / (rest / others + epsilon) - 1.0;
    }
    return a;
}

auto kl_penalized_advantages(std::span<double const> advantages, std::span<double const> logp_current,
                             std::span<double const> logp_reference, double lambda) -> std::vector<double>
{
    if (advantages.size() != logp_current.size() || advantages.size() != logp_reference.size()) {
        throw std::invalid_argument("advantage and log-probability lengths differ");
    }
    std::vector<double> out(advantages.begin(), advantages.end());
    if (lambda == 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= lambda * (logp_current[i] - logp_reference[i]);
    }
    return out;
}

auto mean_baseline_advantages(std::span<double const> rewards) -> std::vector<double>
{
    require_batch(rewards);
    double const mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
    std::vector<double> a(rewards.size());
    std::transform(rewards.begin(), rewards.end(), a.begin(), [mean](double r) { return r - mean; });
    return a;
}

auto adaptive_batch(std::span<double const> rewards, double gamma, double beta_max, double epsilon) -> AdvantageBatch
{
    auto const solved = solve_beta(rewards, gamma, beta_max);
    return AdvantageBatch{{rewards.begin(), rewards.end()},
                          solved.beta,
                          tilted_weights(rewards, solved.beta),
                          loo_advantages(rewards, solved.beta, epsilon),
                          solved.kl};
}

auto constant_beta_batch(std::span<double const> rewards, double beta, double epsilon) -> AdvantageBatch
{
    return AdvantageBatch{{rewards.begin(), rewards.end()},
                          beta,
                          tilted_weights(rewards, beta),
                          loo_advantages(rewards, beta, epsilon),
                          kl_tilted_uniform(rewards, beta)};
}

auto entropic_objective_exact(std::span<double const> probabilities, std::span<double const> rewards, double beta)
    -> double
{
    if (probabilities.size() != rewards.size() || probabilities.empty()) {
        throw std::invalid_argument("probabilities and rewards must have the same non-zero length");
    }
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= -1e-9)) {
            throw SimplexViolation("negative probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw SimplexViolation("probabilities do not sum to 1");
    }
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rewards.size(); ++k) {
        if (probabilities[k] > 0.0) {
            shift = std::max(shift, beta * rewards[k]);
        }
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < rewards.size(); ++k) {
        if (probabilities[k] > 0.0) {
            acc += probabilities[k] * std::exp(beta * rewards[k] - shift);
        }
    }
    return shift + std::log(acc);
}

auto softmax(std::span<double const> logits) -> std::vector<double>
{
    double const m = max_of(logits);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& x : p) {
        x /= sum;
    }
    return p;
}

auto log_softmax(std::span<double const> logits) -> std::vector<double>
{
    double const m = max_of(logits);
    double sum = 0.0;
    for (double l : logits) {
        sum += std::exp(l - m);
    }
    double const log_z = m + std::log(sum);
    std::vector<double> out(logits.size());
    std::transform(logits.begin(), logits.end(), out.begin(), [log_z](double l) { return l - log_z; });
    return out;
}

auto entropic_gradient_exact(std::span<double const> logits, std::span<double const> rewards, double beta)
    -> std::vector<double>
{
    if (logits.size() != rewards.size() || logits.empty()) {
        throw std::invalid_argument("logits and rewards must have the same non-zero length");
    }
    // q_beta is the softmax of the tilted logits
    std::vector<double> tilted(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        tilted[k] = logits[k] + beta * rewards[k];
    }
    auto const p = softmax(logits);
    auto const q = softmax(tilted);
    std::vector<double> grad(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        grad[k] = q[k] - p[k];
    }
    return grad;
}

} // namespace discover::entropic
