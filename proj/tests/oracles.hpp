// Independent re-evaluations shared by the unit tests and the acceptance run.
#ifndef DISCOVER_TEST_ORACLES_HPP
#define DISCOVER_TEST_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "discover/archive.hpp"
#include "discover/entropic.hpp"

namespace oracle {

using discover::NodeId;

// Bookkeeping of an archive that never prunes, kept apart from Archive.
struct ShadowNode {
    std::optional<NodeId> parent;
    double reward{};
    double m{};
    long visits{};
};

struct Shadow {
    std::map<NodeId, ShadowNode> nodes;
    long expansions{};

    auto lineage_of(NodeId id) const -> std::vector<NodeId>
    {
        std::vector<NodeId> chain{id};
        while (nodes.at(chain.back()).parent) { chain.push_back(*nodes.at(chain.back()).parent); }
        return chain;
    }

    auto related(NodeId a, NodeId b) const -> bool
    {
        auto const la = lineage_of(a);
        auto const lb = lineage_of(b);
        return std::find(la.begin(), la.end(), b) != la.end() || std::find(lb.begin(), lb.end(), a) != lb.end();
    }

    auto scores(double c) const -> std::map<NodeId, double>
    {
        std::vector<std::pair<double, NodeId>> ranked;
        double lo = INFINITY;
        double hi = -INFINITY;
        for (auto const& [id, n] : nodes) {
            ranked.emplace_back(-n.reward, id);
            lo = std::min(lo, n.reward);
            hi = std::max(hi, n.reward);
        }
        std::sort(ranked.begin(), ranked.end());
        double const size = static_cast<double>(ranked.size());
        double denominator = 0.0;
        for (std::size_t rank = 0; rank < ranked.size(); ++rank) { denominator += size - static_cast<double>(rank); }
        std::map<NodeId, double> out;
        for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
            auto const& n = nodes.at(ranked[rank].second);
            double const prior = (size - static_cast<double>(rank)) / denominator;
            double const q = n.visits > 0 ? n.m : n.reward;
            out[ranked[rank].second] =
                q + c * (hi - lo) * prior * std::sqrt(1.0 + static_cast<double>(expansions)) / (1.0 + n.visits);
        }
        return out;
    }
};

// Grows a random archive of up to `target` nodes alongside its shadow, then
// checks puct_select against an exhaustive scan. Returns false on mismatch.
inline auto puct_matches_exhaustive(std::mt19937_64& rng) -> bool
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> c_dist(0.0, 3.0);
    auto const dummy = discover::Construction::step_function({1.0});
    discover::Archive a(1000);
    Shadow shadow;
    std::size_t const target = 1 + rng() % 20;
    // coarse rewards so ties occur
    auto reward = [&] { return (rng() % 3 == 0) ? std::round(unit(rng) * 4.0) / 4.0 : unit(rng); };
    double const seed_reward = reward();
    auto const seed = a.add_seed(dummy, seed_reward);
    shadow.nodes[seed] = {std::nullopt, seed_reward, seed_reward, 0};
    while (a.size() < target) {
        auto const ids = a.nodes();
        NodeId const parent = ids[rng() % ids.size()]->id;
        std::vector<discover::ChildCandidate> kids;
        std::size_t const count = 1 + rng() % 3;
        for (std::size_t k = 0; k < count; ++k) { kids.push_back({dummy, rng() % 5 == 0 ? 0.0 : reward()}); }
        std::vector<double> rewards;
        for (auto const& k : kids) { rewards.push_back(k.reward); }
        auto const inserted = a.record_expansion(parent, kids);

        auto& p = shadow.nodes.at(parent);
        p.m = std::max(p.m, *std::max_element(rewards.begin(), rewards.end()));
        for (NodeId up : shadow.lineage_of(parent)) { shadow.nodes.at(up).visits += 1; }
        shadow.expansions += 1;
        std::stable_sort(rewards.begin(), rewards.end(), std::greater<>());
        std::size_t expected_inserted = 0;
        while (expected_inserted < std::min<std::size_t>(2, rewards.size()) && rewards[expected_inserted] > 0.0) {
            ++expected_inserted;
        }
        if (inserted.size() != expected_inserted) {
            return false;
        }
        for (std::size_t k = 0; k < inserted.size(); ++k) {
            shadow.nodes[inserted[k]] = {parent, rewards[k], rewards[k], 0};
        }
    }
    if (a.size() != shadow.nodes.size()) {
        return false;
    }

    double const c = c_dist(rng);
    std::set<NodeId> blocked;
    for (auto const& [id, n] : shadow.nodes) {
        if (rng() % 6 == 0) { blocked.insert(id); }
    }
    auto const scores = shadow.scores(c);
    std::optional<NodeId> expected;
    double best = -INFINITY;
    for (auto const& [id, s] : scores) {
        bool const excluded =
            std::any_of(blocked.begin(), blocked.end(), [&, id = id](NodeId b) { return shadow.related(id, b); });
        if (!excluded && s > best + 1e-12) {
            best = s;
            expected = id;
        }
    }
    auto const got = a.puct_select(blocked, c);
    if (got.has_value() != expected.has_value()) {
        return false;
    }
    return !got || (std::abs(scores.at(*got) - best) <= 1e-12 && std::abs(a.puct_score(*got, c) - best) <= 1e-12);
}

// Random capacity-bounded expansion sequence; checks P sums to 1, visit
// monotonicity along lineages, capacity, seed retention, nondecreasing m.
inline auto archive_invariants_hold(std::mt19937_64& rng) -> bool
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto const dummy = discover::Construction::step_function({1.0});
    std::size_t const capacity = 1 + rng() % 8;
    discover::Archive a(capacity);
    std::size_t const seeds = 1 + rng() % 2;
    for (std::size_t s = 0; s < seeds; ++s) { a.add_seed(dummy, unit(rng)); }
    std::map<NodeId, double> last_m;
    int const expansions = 1 + static_cast<int>(rng() % 12);
    for (int e = 0; e < expansions; ++e) {
        auto const ids = a.nodes();
        NodeId const parent = ids[rng() % ids.size()]->id;
        std::vector<discover::ChildCandidate> kids;
        for (std::size_t k = 0, count = 1 + rng() % 4; k < count; ++k) {
            kids.push_back({dummy, rng() % 4 == 0 ? 0.0 : unit(rng)});
        }
        a.record_expansion(parent, std::move(kids));

        if (a.non_seed_count() > capacity || a.total_expansions() != e + 1) {
            return false;
        }
        for (NodeId s : a.seeds()) {
            if (!a.contains(s)) { return false; }
        }
        double total = 0.0;
        for (auto const& [id, p] : a.rank_prior()) { total += p; }
        if (std::abs(total - 1.0) > 1e-12) {
            return false;
        }
        for (auto const* n : a.nodes()) {
            if (n->visits < 0 || n->best_descendant < n->reward) { return false; }
            if (auto it = last_m.find(n->id); it != last_m.end() && n->best_descendant < it->second) { return false; }
            last_m[n->id] = n->best_descendant;
            for (NodeId up : a.ancestors(n->id)) {
                if (a.contains(up) && a.node(up).visits < n->visits) { return false; }
            }
        }
    }
    return true;
}

// Central difference of the exact entropic objective in logit k.
inline auto objective_finite_difference(std::vector<double> logits, std::vector<double> const& rewards, double beta,
                                        std::size_t k) -> double
{
    constexpr double h = 1e-6;
    double const x = logits[k];
    logits[k] = x + h;
    double const up = discover::entropic::entropic_objective_exact(discover::entropic::softmax(logits), rewards, beta);
    logits[k] = x - h;
    double const down =
        discover::entropic::entropic_objective_exact(discover::entropic::softmax(logits), rewards, beta);
    return (up - down) / (2.0 * h);
}

// q_beta - p computed from scratch.
inline auto tilted_minus_policy(std::vector<double> const& logits, std::vector<double> const& rewards, double beta)
    -> std::vector<double>
{
    double const top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double zp = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - top);
        zp += p[i];
    }
    std::vector<double> q(logits.size());
    double zq = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] /= zp;
        q[i] = p[i] * std::exp(beta * rewards[i]);
        zq += q[i];
    }
    for (std::size_t i = 0; i < logits.size(); ++i) { q[i] = q[i] / zq - p[i]; }
    return q;
}

// Frozen 50-digit values (computed independently, see test_entropic).
inline constexpr double kKlOneHotFourBeta2 = 0.46801059566194717334;
inline constexpr double kBetaOneHotFourLn2 = 2.5532449091856573277;
inline constexpr double kLogHalfOnePlusE = 0.62011450695827752463;

} // namespace oracle

#endif
