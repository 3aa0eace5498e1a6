#ifndef DISCOVER_ARCHIVE_HPP
#define DISCOVER_ARCHIVE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "discover/core.hpp"

namespace discover {

struct ArchiveNode {
    NodeId id{};
    std::optional<NodeId> parent_id;
    double reward{};          // R(s)
    double best_descendant{}; // m(s): best one-step child reward, starts at R(s)
    std::int64_t visits{};    // n(s): expansions of s or any descendant
    bool is_seed{false};
    Construction construction;
};

class UnknownNode : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct ChildCandidate {
    Construction construction;
    double reward{};
};

// Outcome of a blocked selection. `relaxation` is 0 when full lineage
// blocking was honoured, 1 when only the blocked nodes themselves were
// excluded, 2 when blocking was dropped.
struct Selection {
    NodeId id{};
    int relaxation{0};
};

// Reuse buffer of previously discovered states with PUCT-style scoring.
//
// score(s) = Q(s) + c * scale * P(s) * sqrt(1 + T) / (1 + n(s))
//   Q(s)  = m(s) if n(s) > 0 else R(s)
//   scale = R_max - R_min over the archive
//   P(s)  = (|H| - rank(s)) / sum_s' (|H| - rank(s')), rank 0 = highest R,
//           ties ranked by ascending id
//
// Expansion keeps the top-2 children, backpropagates visits to every
// ancestor, raises m only on the direct parent, and prunes non-seed nodes
// beyond `capacity` by lowest reward (newest first among ties).
class Archive {
public:
    static constexpr std::size_t kDefaultCapacity = 1000;
    static constexpr std::size_t kChildrenKept = 2;

    explicit Archive(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}

    auto add_seed(Construction construction, double reward) -> NodeId;

    // Returns the ids of the inserted children (at most kChildrenKept).
    // Children with reward <= 0 (verifier rejections) count towards m(parent)
    // but are never inserted. Throws UnknownNode. With prune = false the
    // capacity is left to a later enforce_capacity(), so several expansions
    // of one step can land before any of their parents is evicted.
    auto record_expansion(NodeId parent, std::vector<ChildCandidate> children, bool prune = true)
        -> std::vector<NodeId>;
    void enforce_capacity() { prune(); }

    [[nodiscard]] auto puct_score(NodeId id, double c) const -> double;
    // P(s) for every node, keyed by id.
    [[nodiscard]] auto rank_prior() const -> std::map<NodeId, double>;

    // Highest-score node whose lineage is disjoint from `blocked`; nullopt when
    // every node is excluded.
    [[nodiscard]] auto puct_select(std::set<NodeId> const& blocked, double c) const -> std::optional<NodeId>;
    // puct_select with the exhaustion fallback: lineage -> direct -> none.
    [[nodiscard]] auto puct_select_relaxing(std::set<NodeId> const& blocked, double c) const -> Selection;

    [[nodiscard]] auto epsilon_greedy_select(double epsilon, std::mt19937_64& rng) const -> NodeId;
    [[nodiscard]] auto no_reuse_select() const -> NodeId;

    // True if a == b or one is an ancestor of the other. Uses the full
    // parent history, so lineages survive pruning of intermediate nodes.
    [[nodiscard]] auto same_lineage(NodeId a, NodeId b) const -> bool;
    [[nodiscard]] auto ancestors(NodeId id) const -> std::vector<NodeId>;

    [[nodiscard]] auto contains(NodeId id) const -> bool { return nodes_.contains(id); }
    [[nodiscard]] auto node(NodeId id) const -> ArchiveNode const&;
    [[nodiscard]] auto nodes() const -> std::vector<ArchiveNode const*>; // ascending id
    [[nodiscard]] auto size() const noexcept -> std::size_t { return nodes_.size(); }
    [[nodiscard]] auto non_seed_count() const noexcept -> std::size_t { return nodes_.size() - seeds_.size(); }
    [[nodiscard]] auto seeds() const -> std::vector<NodeId> const& { return seeds_; }
    [[nodiscard]] auto total_expansions() const noexcept -> std::int64_t { return total_expansions_; }
    [[nodiscard]] auto capacity() const noexcept -> std::size_t { return capacity_; }
    [[nodiscard]] auto best_node() const -> NodeId;

private:
    void prune();
    [[nodiscard]] auto reward_range() const -> double;

    std::size_t capacity_;
    std::map<NodeId, ArchiveNode> nodes_;
    std::unordered_map<NodeId, std::optional<NodeId>> parent_history_;
    std::vector<NodeId> seeds_;
    NodeId next_id_{0};
    std::int64_t total_expansions_{0};
};

// One JSON object per node: {"step", "id", "parent_id", "reward",
// "best_descendant", "visits", "is_seed"}.
auto encode_archive_snapshot(Archive const& archive, int step_index) -> std::string;

} // namespace discover

#endif
