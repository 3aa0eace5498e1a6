#ifndef DISCOVER_ENTROPIC_HPP
#define DISCOVER_ENTROPIC_HPP

#include <span>
#include <stdexcept>
#include <vector>

namespace discover::entropic {

inline constexpr double kDefaultBetaMax = 1e4;
inline constexpr double kDefaultEpsilon = 1e-8;
inline constexpr double kBisectionTolerance = 1e-8;
inline constexpr int kBisectionMaxIterations = 200;

struct BetaSolution {
    double beta{};
    double kl{};
};

struct AdvantageBatch {
    std::vector<double> rewards;
    double beta{};
    std::vector<double> weights;    // w_beta, batch mean 1
    std::vector<double> advantages; // A
    double kl_achieved{};
};

// KL(q_beta || uniform) in nats for q_beta(n) proportional to exp(beta r_n).
auto kl_tilted_uniform(std::span<double const> rewards, double beta) -> double;

// Largest beta in [0, beta_max] with KL(q_beta || u) <= gamma, found by
// bisection. Returns beta_max when the budget cannot be reached there.
auto solve_beta(std::span<double const> rewards, double gamma, double beta_max = kDefaultBetaMax) -> BetaSolution;

// w_n = exp(beta r_n) / mean_m exp(beta r_m).
auto tilted_weights(std::span<double const> rewards, double beta) -> std::vector<double>;

// Leave-one-out entropic advantages:
//   Z_{-n} = 1/(N-1) sum_{m != n} exp(beta (r_m - r_max))
//   A_n    = exp(beta (r_n - r_max)) / (Z_{-n} + eps) - 1
auto loo_advantages(std::span<double const> rewards, double beta, double epsilon = kDefaultEpsilon)
    -> std::vector<double>;

// A_n - lambda (logp_current_n - logp_reference_n).
auto kl_penalized_advantages(std::span<double const> advantages, std::span<double const> logp_current,
                             std::span<double const> logp_reference, double lambda) -> std::vector<double>;

// r_n - mean(r).
auto mean_baseline_advantages(std::span<double const> rewards) -> std::vector<double>;

// Adaptive beta + LOO advantages for one group.
auto adaptive_batch(std::span<double const> rewards, double gamma, double beta_max = kDefaultBetaMax,
                    double epsilon = kDefaultEpsilon) -> AdvantageBatch;
// Fixed beta + LOO advantages for one group.
auto constant_beta_batch(std::span<double const> rewards, double beta, double epsilon = kDefaultEpsilon)
    -> AdvantageBatch;

class SimplexViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// log sum_k p_k exp(beta r_k) for an explicit policy over a finite action set.
// Throws SimplexViolation when p is not a distribution (tolerance 1e-9).
auto entropic_objective_exact(std::span<double const> probabilities, std::span<double const> rewards, double beta)
    -> double;

auto softmax(std::span<double const> logits) -> std::vector<double>;
auto log_softmax(std::span<double const> logits) -> std::vector<double>;

// Gradient of entropic_objective_exact(softmax(logits), rewards, beta) with
// respect to the logits: q_beta - p.
auto entropic_gradient_exact(std::span<double const> logits, std::span<double const> rewards, double beta)
    -> std::vector<double>;

} // namespace discover::entropic

#endif
