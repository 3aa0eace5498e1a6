#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "discover/archive.hpp"
#include "oracles.hpp"

using namespace discover;

namespace {

auto dummy() -> Construction
{
    return Construction::step_function({1.0});
}

auto children_with(std::initializer_list<double> rewards) -> std::vector<ChildCandidate>
{
    std::vector<ChildCandidate> out;
    for (double r : rewards) { out.push_back({dummy(), r}); }
    return out;
}

} // namespace

TEST_CASE("puct_score examples")
{
    SUBCASE("single seed has no bonus")
    {
        Archive a;
        auto const s = a.add_seed(dummy(), 0.2);
        CHECK(a.puct_score(s, 1.0) == 0.2);
    }
    SUBCASE("two unexpanded nodes")
    {
        Archive a;
        auto const best = a.add_seed(dummy(), 1.0);
        auto const other = a.add_seed(dummy(), 0.0);
        CHECK(a.puct_score(best, 1.0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
        CHECK(a.puct_score(other, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(a.puct_select({}, 1.0) == best);

        // expand best once, best child 0.5: it joins the archive as a third node
        a.record_expansion(best, children_with({0.5}));
        CHECK(a.node(best).visits == 1);
        CHECK(a.total_expansions() == 1);
        double const explore = a.puct_score(best, 1.0) - a.node(best).best_descendant;
        double const prior = a.rank_prior().at(best);
        CHECK(a.node(best).best_descendant == 1.0);
        CHECK(explore == doctest::Approx(prior * std::sqrt(2.0) / 2.0).epsilon(1e-15));
    }
}

TEST_CASE("puct_select blocking")
{
    Archive a;
    auto const best = a.add_seed(dummy(), 1.0);
    auto const other = a.add_seed(dummy(), 0.0001);
    CHECK(a.puct_select({best}, 1.0) == other);

    Archive chain;
    auto const seed = chain.add_seed(dummy(), 0.1);
    auto const mid = chain.record_expansion(seed, children_with({0.2})).at(0);
    auto const leaf = chain.record_expansion(mid, children_with({0.3})).at(0);
    CHECK_FALSE(chain.puct_select({leaf}, 1.0).has_value());
    auto const relaxed = chain.puct_select_relaxing({leaf}, 1.0);
    CHECK(relaxed.relaxation == 1);
    CHECK(relaxed.id != leaf);
    auto const dropped = chain.puct_select_relaxing({seed, mid, leaf}, 1.0);
    CHECK(dropped.relaxation == 2);
    CHECK(chain.puct_select_relaxing({}, 1.0).relaxation == 0);
}

TEST_CASE("record_expansion examples")
{
    SUBCASE("m stays, top two kept, visits backpropagate")
    {
        Archive a;
        auto const root = a.add_seed(dummy(), 0.1);
        auto const parent = a.record_expansion(root, children_with({1.0})).at(0);
        REQUIRE(a.node(parent).best_descendant == 1.0);
        auto const inserted = a.record_expansion(parent, children_with({0.5, 0.7, 0.9}));
        REQUIRE(inserted.size() == 2);
        CHECK(a.node(inserted[0]).reward == 0.9);
        CHECK(a.node(inserted[1]).reward == 0.7);
        CHECK(a.node(parent).best_descendant == 1.0);
        CHECK(a.node(parent).visits == 1);
        CHECK(a.node(root).visits == 2);
        CHECK(a.total_expansions() == 2);
        CHECK(a.size() == 4);
    }
    SUBCASE("m rises on the direct parent only")
    {
        Archive a;
        auto const grand = a.add_seed(dummy(), 0.2);
        auto const parent = a.record_expansion(grand, children_with({0.3})).at(0);
        double const grand_m = a.node(grand).best_descendant;
        a.record_expansion(parent, children_with({0.9}));
        CHECK(a.node(parent).best_descendant == 0.9);
        CHECK(a.node(grand).best_descendant == grand_m);
    }
    SUBCASE("rejected children are not inserted")
    {
        Archive a;
        auto const s = a.add_seed(dummy(), 0.5);
        CHECK(a.record_expansion(s, children_with({0.0, 0.0})).empty());
        CHECK(a.node(s).visits == 1);
        CHECK_THROWS_AS(a.record_expansion(99, children_with({0.1})), UnknownNode);
    }
}

TEST_CASE("capacity eviction keeps seeds and the best nodes")
{
    Archive a(3);
    auto const s = a.add_seed(dummy(), 0.01);
    a.record_expansion(s, children_with({0.5, 0.4}));
    a.record_expansion(s, children_with({0.6, 0.4}));
    CHECK(a.non_seed_count() == 3);
    CHECK(a.contains(s));
    std::vector<double> kept;
    for (auto const* n : a.nodes()) {
        if (!n->is_seed) { kept.push_back(n->reward); }
    }
    std::sort(kept.begin(), kept.end());
    CHECK(kept == std::vector<double>{0.4, 0.5, 0.6});
    // older 0.4 survives the tie
    CHECK(a.contains(2));
    CHECK_FALSE(a.contains(4));
}

TEST_CASE("epsilon greedy")
{
    std::mt19937_64 rng(1);
    Archive a;
    a.add_seed(dummy(), 0.1);
    auto const top = a.add_seed(dummy(), 0.9);
    for (int i = 0; i < 1000; ++i) { REQUIRE(a.epsilon_greedy_select(0.0, rng) == top); }

    int hits = 0;
    constexpr int kDraws = 10'000;
    for (int i = 0; i < kDraws; ++i) { hits += a.epsilon_greedy_select(0.1, rng) == top; }
    CHECK(std::abs(hits / static_cast<double>(kDraws) - 0.95) <= 0.02);

    Archive wide;
    for (int i = 0; i < 5; ++i) { wide.add_seed(dummy(), 0.1 * (i + 1)); }
    std::vector<int> counts(5, 0);
    for (int i = 0; i < kDraws; ++i) { counts[static_cast<std::size_t>(wide.epsilon_greedy_select(1.0, rng))] += 1; }
    double chi2 = 0.0;
    for (int c : counts) { chi2 += std::pow(c - kDraws / 5.0, 2) / (kDraws / 5.0); }
    CHECK(chi2 < 18.47); // 4 dof, p = 0.001
}

TEST_CASE("no reuse always returns the seed")
{
    Archive a;
    auto const s = a.add_seed(dummy(), 0.1);
    CHECK(a.no_reuse_select() == s);
    a.record_expansion(s, children_with({0.9, 0.8}));
    CHECK(a.no_reuse_select() == s);
}

TEST_CASE("puct_select agrees with exhaustive re-evaluation")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        CAPTURE(trial);
        REQUIRE(oracle::puct_matches_exhaustive(rng));
    }
}

TEST_CASE("archive invariants over random expansion sequences")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10'000; ++trial) {
        CAPTURE(trial);
        REQUIRE(oracle::archive_invariants_hold(rng));
    }
}

TEST_CASE("lineage survives pruning of intermediate nodes")
{
    Archive a(1);
    auto const seed = a.add_seed(dummy(), 0.1);
    auto const mid = a.record_expansion(seed, children_with({0.2})).at(0);
    auto const leaf = a.record_expansion(mid, children_with({0.9})).at(0);
    CHECK_FALSE(a.contains(mid));
    CHECK(a.same_lineage(seed, leaf));
    CHECK_FALSE(a.puct_select({leaf}, 1.0).has_value());
}

TEST_CASE("snapshot encodes one line per node")
{
    Archive a;
    auto const s = a.add_seed(dummy(), 0.1);
    a.record_expansion(s, children_with({0.2, 0.3}));
    auto const text = encode_archive_snapshot(a, 4);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("\"parent_id\":null") != std::string::npos);
}
