#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "discover/config.hpp"
#include "discover/core.hpp"

using namespace discover;

namespace {

auto bits_equal(double a, double b) -> bool
{
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

} // namespace

TEST_CASE("step function round trip")
{
    auto const c = Construction::step_function({0.5, 0.5});
    auto const back = decode_construction(encode_construction(c));
    CHECK(back.kind() == ConstructionKind::StepFunction);
    CHECK(back.heights() == std::vector<double>{0.5, 0.5});
}

TEST_CASE("circle packing round trip")
{
    auto const c = Construction::circle_packing({{0.5, 0.5, 0.5}});
    CHECK(decode_construction(encode_construction(c)) == c);
}

TEST_CASE("encode rejects NaN heights")
{
    auto const c = Construction::unchecked_step_function({0.1, std::nan("")});
    CHECK_THROWS_AS((void)encode_construction(c), InvariantViolation);
    CHECK_THROWS_AS(Construction::step_function({std::nan("")}), InvariantViolation);
}

TEST_CASE("decode")
{
    SUBCASE("bare array") { CHECK(decode_construction("[1.0]").heights() == std::vector<double>{1.0}); }
    SUBCASE("object form")
    {
        auto c = decode_construction(R"({"kind":"circle_packing","circles":[[0.5,0.5,0.25]]})");
        REQUIRE(c.circles().size() == 1);
        CHECK(c.circles()[0].r == 0.25);
    }
    SUBCASE("negative height")
    {
        CHECK_THROWS_WITH_AS(decode_construction("[1.0, -0.5]"), doctest::Contains("invariant violation"),
                             InvariantViolation);
    }
    SUBCASE("empty array")
    {
        CHECK_THROWS_WITH_AS(decode_construction("[]"), doctest::Contains("non-empty required"), InvariantViolation);
    }
    SUBCASE("malformed")
    {
        CHECK_THROWS_AS(decode_construction("[1.0,"), MalformedInput);
        CHECK_THROWS_AS(decode_construction(R"({"kind":"spiral"})"), MalformedInput);
        CHECK_THROWS_AS(decode_construction(R"(["a"])"), MalformedInput);
        CHECK_THROWS_AS(decode_construction("[[0.1, 0.2]]"), MalformedInput);
    }
    SUBCASE("negative radius") { CHECK_THROWS_AS(decode_construction("[[0.5,0.5,-0.1]]"), InvariantViolation); }
}

TEST_CASE("round trip is bit exact over random constructions")
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(1, 64);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> heavy(0.01);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> h(static_cast<std::size_t>(len(rng)));
        for (double& v : h) {
            // mix of magnitudes, exact zeros, and subnormal-adjacent values
            switch (rng() % 4) {
            case 0: v = unit(rng); break;
            case 1: v = heavy(rng); break;
            case 2: v = 0.0; break;
            default: v = unit(rng) * 1e-300; break;
            }
        }
        auto const back = decode_construction(encode_construction(Construction::step_function(h)));
        REQUIRE(back.heights().size() == h.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            REQUIRE(bits_equal(back.heights()[i], h[i]));
        }

        std::vector<Circle> circles(static_cast<std::size_t>(len(rng)));
        for (auto& c : circles) {
            c = {unit(rng), unit(rng), unit(rng) * 0.1};
        }
        REQUIRE(decode_construction(encode_construction(Construction::circle_packing(circles))).circles() == circles);
    }
}

TEST_CASE("step log round trip")
{
    StepLog log{3, {0.5, 0.25}, 0.5, 2.0, {1.5}, {0, 4}, true};
    CHECK(decode_step_log(encode_step_log(log)) == log);

    StepLog empty_best{0, {0.0, 0.0}, 0.0, std::numeric_limits<double>::infinity(), {0.0}, {0}, false};
    auto const back = decode_step_log(encode_step_log(empty_best));
    CHECK(std::isinf(back.best_bound_so_far));
    CHECK_THROWS_AS(decode_step_log("{\"step_index\": 1}"), MalformedInput);
    CHECK_THROWS_AS(decode_step_log("not json"), MalformedInput);
}

TEST_CASE("config round trip")
{
    RunConfig config;
    config.env = EnvKind::CirclePacking;
    config.env_size = 26;
    config.steps = 7;
    config.rng_seed = 123456789012345ULL;
    config.kl_budget_gamma = 0.3;
    config.reuse_mode = ReuseMode::EpsilonGreedy;
    config.objective_mode = ObjectiveMode::EntropicConstant;
    config.magnitudes = {0.0, 0.05};
    config.external_command = "python3 policy.py --fast";
    CHECK(parse_config(serialize_config(config)) == config);
    CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config parsing errors")
{
    CHECK_THROWS_AS(parse_config("env.kind = torus"), ConfigError);
    CHECK_THROWS_AS(parse_config("nope = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("run.steps = many"), ConfigError);
    CHECK_THROWS_AS(parse_config("run.steps"), ConfigError);

    auto c = parse_config("# comment\nrun.steps = 3  # trailing\n\nreuse.mode = none\n");
    CHECK(c.steps == 3);
    CHECK(c.reuse_mode == ReuseMode::None);

    c.rollouts_per_group = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.beta_max = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RunConfig{};
    c.steps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
