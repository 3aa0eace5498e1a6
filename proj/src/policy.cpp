#include "discover/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "discover/entropic.hpp"

namespace discover {

auto to_string(MutationOperator op) -> std::string_view
{
    switch (op) {
    case MutationOperator::GaussianPerturb: return "gaussian_perturb";
    case MutationOperator::BlockResample: return "block_resample";
    case MutationOperator::Smooth: return "smooth";
    case MutationOperator::SpliceSwap: return "splice_swap";
    case MutationOperator::RescaleProject: return "rescale_project";
    }
    return "unknown";
}

namespace {

auto block_length(double magnitude, std::size_t n) -> std::size_t
{
    auto const len = static_cast<std::size_t>(std::lround(magnitude * static_cast<double>(n)));
    return std::clamp<std::size_t>(len, 1, n);
}

auto random_index(std::size_t n, std::mt19937_64& rng) -> std::size_t
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void mutate_heights(MutationOperator op, double m, std::vector<double>& h, std::mt19937_64& rng)
{
    std::size_t const n = h.size();
    double const scale = std::max(*std::max_element(h.begin(), h.end()), 1e-12);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    switch (op) {
    case MutationOperator::GaussianPerturb: {
        // smooth raised-cosine bump of random width and sign
        std::size_t const len = 1 + random_index(n, rng);
        std::size_t const start = random_index(n - len + 1, rng);
        double const amplitude = m * scale * normal(rng);
        for (std::size_t i = 0; i < len; ++i) {
            double const phase = (static_cast<double>(i) + 0.5) / static_cast<double>(len);
            h[start + i] += amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
        }
        break;
    }
    case MutationOperator::BlockResample: {
        std::size_t const len = block_length(m, n);
        std::size_t const start = random_index(n - len + 1, rng);
        for (std::size_t i = start; i < start + len; ++i) {
            h[i] = scale * unit(rng);
        }
        break;
    }
    case MutationOperator::Smooth: {
        double const alpha = std::min(1.0, 2.0 * m);
        auto const radius = static_cast<std::ptrdiff_t>(1 + std::lround(m * static_cast<double>(n) / 10.0));
        std::vector<double> prefix(n + 1, 0.0);
        std::partial_sum(h.begin(), h.end(), prefix.begin() + 1);
        auto const nn = static_cast<std::ptrdiff_t>(n);
        for (std::ptrdiff_t i = 0; i < nn; ++i) {
            auto const lo = std::max<std::ptrdiff_t>(0, i - radius);
            auto const hi = std::min<std::ptrdiff_t>(nn, i + radius + 1);
            double const avg = (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)])
                               / static_cast<double>(hi - lo);
            h[static_cast<std::size_t>(i)] = (1.0 - alpha) * h[static_cast<std::size_t>(i)] + alpha * avg;
        }
        break;
    }
    case MutationOperator::SpliceSwap: {
        std::size_t const len = block_length(m, n);
        if (2 * len > n) {
            std::reverse(h.begin(), h.end());
            break;
        }
        // two disjoint blocks [a, a+len) and [b, b+len), a < b, at most a few
        // block lengths apart so small swaps stay local
        std::size_t const a = random_index(n - 2 * len + 1, rng);
        std::size_t const room = std::min(n - a - 2 * len, 3 * len);
        std::size_t const b = a + len + random_index(room + 1, rng);
        std::swap_ranges(h.begin() + static_cast<std::ptrdiff_t>(a), h.begin() + static_cast<std::ptrdiff_t>(a + len),
                         h.begin() + static_cast<std::ptrdiff_t>(b));
        break;
    }
    case MutationOperator::RescaleProject: {
        std::size_t const len = 1 + random_index(n, rng);
        std::size_t const start = random_index(n - len + 1, rng);
        double const factor = std::exp(m * normal(rng));
        for (std::size_t i = start; i < start + len; ++i) {
            h[i] *= factor;
        }
        break;
    }
    }
}

void mutate_circles(MutationOperator op, double m, std::vector<Circle>& circles, std::mt19937_64& rng)
{
    std::size_t const n = circles.size();
    if (n == 0) {
        return;
    }
    double const spacing = 1.0 / std::sqrt(static_cast<double>(n));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double const mean_r = std::accumulate(circles.begin(), circles.end(), 0.0,
                                          [](double acc, Circle const& c) { return acc + c.r; })
                          / static_cast<double>(n);

    switch (op) {
    case MutationOperator::GaussianPerturb:
        for (auto& c : circles) {
            c.x += m * spacing * normal(rng);
            c.y += m * spacing * normal(rng);
            c.r += 0.5 * m * spacing * normal(rng);
        }
        break;
    case MutationOperator::BlockResample:
        for (std::size_t k = 0; k < block_length(m, n); ++k) {
            auto& c = circles[random_index(n, rng)];
            c = {unit(rng), unit(rng), mean_r};
        }
        break;
    case MutationOperator::Smooth: {
        double const alpha = std::min(1.0, 2.0 * m);
        for (auto& c : circles) {
            c.r = (1.0 - alpha) * c.r + alpha * mean_r;
        }
        break;
    }
    case MutationOperator::SpliceSwap:
        for (std::size_t k = 0; k < block_length(m, n); ++k) {
            auto& a = circles[random_index(n, rng)];
            auto& b = circles[random_index(n, rng)];
            std::swap(a.x, b.x);
            std::swap(a.y, b.y);
        }
        break;
    case MutationOperator::RescaleProject:
        for (auto& c : circles) {
            c.r *= 1.0 + m;
        }
        break;
    }
}

} // namespace

auto apply_mutation(MutationOperator op, double magnitude, Environment const& env, Construction const& state,
                    std::mt19937_64& rng) -> Construction
{
    if (state.kind() == ConstructionKind::StepFunction) {
        auto heights = state.heights();
        if (!heights.empty()) {
            mutate_heights(op, magnitude, heights, rng);
        }
        return env.project(Construction::unchecked_step_function(std::move(heights)));
    }
    auto circles = state.circles();
    mutate_circles(op, magnitude, circles, rng);
    return env.project(Construction::unchecked_circle_packing(std::move(circles)));
}

MutationPolicy::MutationPolicy(std::vector<double> magnitudes)
    : magnitudes_(std::move(magnitudes))
{
    if (magnitudes_.empty()) {
        throw std::invalid_argument("at least one magnitude bin is required");
    }
    logits_.assign(kOperatorCount * magnitudes_.size(), 0.0);
    reference_ = logits_;
    refresh();
}

void MutationPolicy::refresh()
{
    log_probs_ = entropic::log_softmax(logits_);
    reference_log_probs_ = entropic::log_softmax(reference_);
    auto const p = entropic::softmax(logits_);
    cumulative_.resize(p.size());
    std::partial_sum(p.begin(), p.end(), cumulative_.begin());
}

auto MutationPolicy::cell_operator(int cell) const -> MutationOperator
{
    if (cell < 0 || static_cast<std::size_t>(cell) >= logits_.size()) {
        throw std::out_of_range("cell " + std::to_string(cell) + " out of range");
    }
    return static_cast<MutationOperator>(static_cast<std::size_t>(cell) / magnitudes_.size());
}

auto MutationPolicy::cell_magnitude(int cell) const -> double
{
    if (cell < 0 || static_cast<std::size_t>(cell) >= logits_.size()) {
        throw std::out_of_range("cell " + std::to_string(cell) + " out of range");
    }
    return magnitudes_[static_cast<std::size_t>(cell) % magnitudes_.size()];
}

auto MutationPolicy::probabilities() const -> std::vector<double>
{
    return entropic::softmax(logits_);
}

auto MutationPolicy::log_prob(int cell) const -> double
{
    return log_probs_.at(static_cast<std::size_t>(cell));
}

auto MutationPolicy::reference_log_prob(int cell) const -> double
{
    return reference_log_probs_.at(static_cast<std::size_t>(cell));
}

void MutationPolicy::set_logits(std::vector<double> logits)
{
    if (logits.size() != logits_.size()) {
        throw std::invalid_argument("logit count mismatch");
    }
    if (!std::all_of(logits.begin(), logits.end(), [](double l) { return std::isfinite(l); })) {
        throw std::invalid_argument("logits must be finite");
    }
    logits_ = std::move(logits);
    refresh();
}

void MutationPolicy::begin_run()
{
    reference_ = logits_;
    refresh();
}

auto MutationPolicy::sample_cell(std::mt19937_64& rng) const -> int
{
    double const u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) {
        --it;
    }
    return static_cast<int>(it - cumulative_.begin());
}

auto MutationPolicy::propose(Environment const& env, Construction const& state, ProposalContext const& /*context*/,
                             std::mt19937_64& rng) -> Proposal
{
    int const cell = sample_cell(rng);
    Proposal out;
    out.cell = cell;
    out.log_prob = log_prob(cell);
    out.reference_log_prob = reference_log_prob(cell);
    out.construction = apply_mutation(cell_operator(cell), cell_magnitude(cell), env, state, rng);
    return out;
}

auto MutationPolicy::score_gradient(std::span<double const> logits, std::span<PolicySample const> samples)
    -> std::vector<double>
{
    auto const p = entropic::softmax(logits);
    std::vector<double> grad(logits.size(), 0.0);
    double total_advantage = 0.0;
    for (auto const& s : samples) {
        grad.at(static_cast<std::size_t>(s.cell)) += s.advantage;
        total_advantage += s.advantage;
    }
    for (std::size_t k = 0; k < grad.size(); ++k) {
        grad[k] -= total_advantage * p[k];
    }
    return grad;
}

void MutationPolicy::update(std::span<PolicySample const> samples, double eta)
{
    if (samples.empty()) {
        return;
    }
    auto const grad = score_gradient(logits_, samples);
    for (std::size_t k = 0; k < logits_.size(); ++k) {
        logits_[k] += eta * grad[k];
    }
    refresh();
}

} // namespace discover
