#include "discover/archive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace discover {

namespace {

// Rank order: higher reward first, older id first among equal rewards.
auto better(ArchiveNode const& a, ArchiveNode const& b) -> bool
{
    if (a.reward != b.reward) {
        return a.reward > b.reward;
    }
    return a.id < b.id;
}

} // namespace

auto Archive::add_seed(Construction construction, double reward) -> NodeId
{
    NodeId const id = next_id_++;
    nodes_.emplace(id, ArchiveNode{id, std::nullopt, reward, reward, 0, true, std::move(construction)});
    parent_history_.emplace(id, std::nullopt);
    seeds_.push_back(id);
    return id;
}

auto Archive::node(NodeId id) const -> ArchiveNode const&
{
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        throw UnknownNode("unknown archive node " + std::to_string(id));
    }
    return it->second;
}

auto Archive::nodes() const -> std::vector<ArchiveNode const*>
{
    std::vector<ArchiveNode const*> out;
    out.reserve(nodes_.size());
    for (auto const& [id, n] : nodes_) {
        out.push_back(&n);
    }
    return out;
}

auto Archive::ancestors(NodeId id) const -> std::vector<NodeId>
{
    std::vector<NodeId> out;
    auto it = parent_history_.find(id);
    while (it != parent_history_.end() && it->second) {
        out.push_back(*it->second);
        it = parent_history_.find(*it->second);
    }
    return out;
}

auto Archive::same_lineage(NodeId a, NodeId b) const -> bool
{
    if (a == b) {
        return true;
    }
    auto const up_a = ancestors(a);
    if (std::find(up_a.begin(), up_a.end(), b) != up_a.end()) {
        return true;
    }
    auto const up_b = ancestors(b);
    return std::find(up_b.begin(), up_b.end(), a) != up_b.end();
}

auto Archive::best_node() const -> NodeId
{
    if (nodes_.empty()) {
        throw UnknownNode("archive is empty");
    }
    auto it = std::min_element(nodes_.begin(), nodes_.end(),
                               [](auto const& a, auto const& b) { return better(a.second, b.second); });
    return it->first;
}

auto Archive::rank_prior() const -> std::map<NodeId, double>
{
    std::vector<ArchiveNode const*> order = nodes();
    std::sort(order.begin(), order.end(), [](auto const* a, auto const* b) { return better(*a, *b); });
    auto const size = static_cast<double>(order.size());
    double const total = size * (size + 1.0) / 2.0;
    std::map<NodeId, double> prior;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        prior[order[rank]->id] = (size - static_cast<double>(rank)) / total;
    }
    return prior;
}

auto Archive::reward_range() const -> double
{
    if (nodes_.empty()) {
        return 0.0;
    }
    auto [lo, hi] = std::minmax_element(nodes_.begin(), nodes_.end(),
                                        [](auto const& a, auto const& b) { return a.second.reward < b.second.reward; });
    return hi->second.reward - lo->second.reward;
}

auto Archive::puct_score(NodeId id, double c) const -> double
{
    auto const& n = node(id);
    double const prior = rank_prior().at(id);
    double const q = n.visits > 0 ? n.best_descendant : n.reward;
    double const explore = std::sqrt(1.0 + static_cast<double>(total_expansions_))
                           / (1.0 + static_cast<double>(n.visits));
    return q + c * reward_range() * prior * explore;
}

auto Archive::puct_select(std::set<NodeId> const& blocked, double c) const -> std::optional<NodeId>
{
    auto const prior = rank_prior();
    double const scale = reward_range();
    double const root = std::sqrt(1.0 + static_cast<double>(total_expansions_));
    std::optional<NodeId> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto const& [id, n] : nodes_) {
        bool const excluded = std::any_of(blocked.begin(), blocked.end(),
                                          [&, id = id](NodeId b) { return same_lineage(id, b); });
        if (excluded) {
            continue;
        }
        double const q = n.visits > 0 ? n.best_descendant : n.reward;
        double const score = q + c * scale * prior.at(id) * root / (1.0 + static_cast<double>(n.visits));
        // ascending id iteration, strict comparison keeps the lowest id on ties
        if (!best || score > best_score) {
            best = id;
            best_score = score;
        }
    }
    return best;
}

auto Archive::puct_select_relaxing(std::set<NodeId> const& blocked, double c) const -> Selection
{
    if (auto id = puct_select(blocked, c)) {
        return {*id, 0};
    }
    // direct blocking only
    auto const prior = rank_prior();
    double const scale = reward_range();
    double const root = std::sqrt(1.0 + static_cast<double>(total_expansions_));
    for (int relaxation : {1, 2}) {
        std::optional<NodeId> best;
        double best_score = -std::numeric_limits<double>::infinity();
        for (auto const& [id, n] : nodes_) {
            if (relaxation == 1 && blocked.contains(id)) {
                continue;
            }
            double const q = n.visits > 0 ? n.best_descendant : n.reward;
            double const score = q + c * scale * prior.at(id) * root / (1.0 + static_cast<double>(n.visits));
            if (!best || score > best_score) {
                best = id;
                best_score = score;
            }
        }
        if (best) {
            return {*best, relaxation};
        }
    }
    throw UnknownNode("archive is empty");
}

auto Archive::epsilon_greedy_select(double epsilon, std::mt19937_64& rng) const -> NodeId
{
    if (nodes_.empty()) {
        throw UnknownNode("archive is empty");
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, nodes_.size() - 1);
        return std::next(nodes_.begin(), static_cast<std::ptrdiff_t>(pick(rng)))->first;
    }
    return best_node();
}

auto Archive::no_reuse_select() const -> NodeId
{
    if (seeds_.empty()) {
        throw UnknownNode("archive has no seed");
    }
    return seeds_.front();
}

auto Archive::record_expansion(NodeId parent, std::vector<ChildCandidate> children, bool prune)
    -> std::vector<NodeId>
{
    auto it = nodes_.find(parent);
    if (it == nodes_.end()) {
        throw UnknownNode("unknown parent " + std::to_string(parent));
    }
    if (children.empty()) {
        throw std::invalid_argument("expansion without children");
    }
    double best_child = -std::numeric_limits<double>::infinity();
    for (auto const& child : children) {
        best_child = std::max(best_child, child.reward);
    }
    it->second.best_descendant = std::max(it->second.best_descendant, best_child);

    it->second.visits += 1;
    for (NodeId a : ancestors(parent)) {
        if (auto anc = nodes_.find(a); anc != nodes_.end()) {
            anc->second.visits += 1;
        }
    }
    total_expansions_ += 1;

    std::stable_sort(children.begin(), children.end(),
                     [](auto const& a, auto const& b) { return a.reward > b.reward; });
    std::vector<NodeId> inserted;
    for (auto& child : children) {
        if (inserted.size() == kChildrenKept || !(child.reward > 0.0)) {
            break;
        }
        NodeId const id = next_id_++;
        nodes_.emplace(id, ArchiveNode{id, parent, child.reward, child.reward, 0, false, std::move(child.construction)});
        parent_history_.emplace(id, parent);
        inserted.push_back(id);
    }
    if (prune) {
        this->prune();
    }
    return inserted;
}

void Archive::prune()
{
    if (non_seed_count() <= capacity_) {
        return;
    }
    std::vector<ArchiveNode const*> candidates;
    for (auto const& [id, n] : nodes_) {
        if (!n.is_seed) {
            candidates.push_back(&n);
        }
    }
    // worst first: lowest reward, newest id among ties
    std::sort(candidates.begin(), candidates.end(), [](auto const* a, auto const* b) { return better(*b, *a); });
    std::size_t const excess = candidates.size() - capacity_;
    std::vector<NodeId> evict;
    for (std::size_t i = 0; i < excess; ++i) {
        evict.push_back(candidates[i]->id);
    }
    for (NodeId id : evict) {
        nodes_.erase(id);
    }
}

auto encode_archive_snapshot(Archive const& archive, int step_index) -> std::string
{
    std::string out;
    for (auto const* n : archive.nodes()) {
        nlohmann::json j;
        j["step"] = step_index;
        j["id"] = n->id;
        j["parent_id"] = n->parent_id ? nlohmann::json(*n->parent_id) : nlohmann::json(nullptr);
        j["reward"] = n->reward;
        j["best_descendant"] = n->best_descendant;
        j["visits"] = n->visits;
        j["is_seed"] = n->is_seed;
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace discover
