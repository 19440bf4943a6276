#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hh"
#include "oracle.hh"

#include <wsp/generator.hh>
#include <wsp/matching.hh>
#include <wsp/rng.hh>

#include <bit>

using namespace wsp;

namespace
{
    auto bits(std::initializer_list<int> steps) -> StepSet
    {
        StepSet mask = 0;
        for (int s : steps)
            mask |= step_bit(s);
        return mask;
    }
}

TEST_CASE("candidate users require authorisation for the whole block")
{
    auto inst = fixtures::worked_example();
    CHECK(candidate_users(inst, bits({2}), 10) == std::vector<std::int32_t>{0, 4, 5});
    CHECK(candidate_users(inst, bits({0, 1}), 10) == std::vector<std::int32_t>{2});
    CHECK(candidate_users(inst, bits({0, 2}), 10) == std::vector<std::int32_t>{5});
    CHECK(candidate_users(inst, bits({1, 2}), 10).empty());

    SUBCASE("the cap truncates, keeping the smallest ids") {
        CHECK(candidate_users(inst, bits({2}), 2) == std::vector<std::int32_t>{0, 4});
    }
    SUBCASE("the cached overload returns the same rows and counts traffic") {
        BlockEdgeCache cache;
        auto & row1 = candidate_users(inst, bits({2}), 10, cache);
        CHECK(row1 == candidate_users(inst, bits({2}), 10));
        CHECK(cache.misses == 1);
        candidate_users(inst, bits({2}), 10, cache);
        CHECK(cache.hits == 1);
        CHECK(cache.misses == 1);
    }
}

TEST_CASE("pattern authorisation is a matching question")
{
    auto inst = fixtures::worked_example();

    Pattern authorised{{bits({0, 1}), bits({2}), bits({3, 4})}};
    auto yes = is_authorised(inst, authorised);
    REQUIRE(yes.ok);
    auto plan = plan_from_matching(authorised, yes.user_of_block, 5);
    CHECK(verify_plan(inst, plan).authorised);
    CHECK(pattern_of_plan(plan) == authorised);

    // splitting the tail blocks leaves four blocks over three usable users
    Pattern too_fine{{bits({0, 1}), bits({2}), bits({3}), bits({4})}};
    CHECK(! is_authorised(inst, too_fine).ok);
}

TEST_CASE("capped and uncapped verdicts coincide below the step bound")
{
    // the cap argument: a matching never needs more than k users per block
    Rng rng{5150};
    for (int trial = 0; trial < 40; ++trial) {
        GenConfig cfg{6, 9, int(rng.below(10)), 0, rng.next()};
        auto inst = generate(cfg);
        for (const auto & pat : oracle::all_patterns(6)) {
            bool capped = is_authorised(inst, pat, 6).ok;
            bool uncapped = is_authorised(inst, pat, 9).ok;
            CHECK(capped == uncapped);
            CHECK(capped == oracle::pattern_authorised(inst, pat).has_value());
        }
    }
}

TEST_CASE("incremental pushes track the from-scratch answer")
{
    Rng rng{60321};
    for (int trial = 0; trial < 30; ++trial) {
        GenConfig cfg{7, 10, 0, 0, rng.next()};
        auto inst = generate(cfg);
        AssignmentState state{inst};

        // drive a random push/pop walk; after each mutation the incremental
        // matching verdict must match a fresh matching on the same pattern
        std::vector<char> kind_of_level;
        for (int op = 0; op < 200; ++op) {
            auto pat = state.current_pattern();
            StepSet used = pat.covered();
            bool can_push = std::popcount(used) < 7;
            bool do_push = can_push && (kind_of_level.empty() || rng.below(3) != 0);

            if (do_push) {
                int s = 0;
                while (used & step_bit(s))
                    ++s;
                bool ok;
                if (state.block_count() > 0 && rng.below(2) == 0)
                    ok = state.push_extend_block(int(rng.below(state.block_count())), s);
                else
                    ok = state.push_new_block(s);
                kind_of_level.push_back(1);
                CHECK(ok == oracle::pattern_authorised(inst, state.current_pattern()).has_value());
                if (! ok) {
                    state.pop();
                    kind_of_level.pop_back();
                }
            }
            else if (! kind_of_level.empty()) {
                state.pop();
                kind_of_level.pop_back();
                auto back = state.current_pattern();
                CHECK(is_authorised(inst, back).ok
                        == oracle::pattern_authorised(inst, back).has_value());
            }
        }
    }
}

TEST_CASE("a full matched state converts to a valid plan")
{
    auto inst = fixtures::worked_example_merged();
    AssignmentState state{inst};
    REQUIRE(state.push_new_block(0));
    REQUIRE(state.push_new_block(1));
    REQUIRE(state.push_new_block(2));
    REQUIRE(state.push_extend_block(2, 3));
    REQUIRE(state.full());
    auto plan = state.current_plan();
    CHECK(verify_plan(inst, plan).valid());
}

TEST_CASE("pop restores the matching exactly")
{
    auto inst = fixtures::worked_example_merged();
    AssignmentState state{inst};
    REQUIRE(state.push_new_block(0));
    auto before_pattern = state.current_pattern();
    auto before_user = state.matched_user(0);

    REQUIRE(state.push_new_block(1));
    state.pop();
    CHECK(state.current_pattern() == before_pattern);
    CHECK(state.matched_user(0) == before_user);
    CHECK(state.block_count() == 1);
}

TEST_CASE("edge rows are capped so push work is bounded by k")
{
    GenConfig cfg{10, 200, 0, 0, 99};
    auto inst = generate(cfg);
    AssignmentState state{inst};
    for (int s = 0; s < 10; ++s) {
        auto before = state.edges_touched();
        state.push_new_block(s);
        // one augmenting path over at most k rows of at most k capped entries,
        // independent of the 200 users
        CHECK(state.edges_touched() - before <= 10 * 10);
    }
}
