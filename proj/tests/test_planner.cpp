// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"

#include "tandem/error.hpp"
#include "tandem/planner.hpp"
#include "tandem/tasks.hpp"

using namespace tandem;
using tandem::testing::blank_world;
using tandem::testing::give;

namespace {

using Goals = std::vector<std::string>;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a tandem::Error");
    return ErrorCode::IoError;
}

const Goals kTask1{"find tree",  "chop tree",  "place crafting table", "make wood pickaxe",
                   "find stone", "mine stone", "make stone sword"};

PlannerRequest request(const std::string& target, StartContext start = {}) {
    PlannerRequest r;
    r.target = target;
    r.start = start;
    return r;
}

/// Drives the oracle performer through `goals`; returns how many it completed.
std::size_t perform_all(WorldState& s, const Goals& goals, int cap) {
    OracleBackend oracle;
    std::size_t k = 0;
    for (int t = 0; t < cap && k < goals.size() && s.alive(); ++t) {
        ActionCommand a;
        try {
            a = oracle.perform_step(goals[k], caption_observation(s, goals), s).next_action;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoPathToGoal) throw;
        }
        if (goal_satisfied(step_in_place(s, a), goals[k])) ++k;
    }
    return k;
}

}  // namespace

TEST_CASE("decomposition chains") {
    OracleBackend oracle;
    CHECK(oracle.decompose(request("craft stone sword")) == kTask1);
    CHECK(oracle.decompose(request("chop tree")) == Goals{"find tree", "chop tree"});
    CHECK(oracle.decompose(request("mine diamond")).size() == 15);
    CHECK(code_of([&] { oracle.decompose(request("fly to the moon")); }) == ErrorCode::UnknownTarget);
    CHECK(code_of([&] { oracle.decompose(request("")); }) == ErrorCode::UnknownTarget);
}

TEST_CASE("start context prunes covered steps") {
    CHECK(oracle_chain("craft stone sword", scenario(9).start) ==
          Goals{"make wood pickaxe", "find stone", "mine stone", "make stone sword"});
    CHECK(oracle_chain("mine diamond", scenario(8).start) ==
          Goals{"place furnace", "make iron pickaxe", "find diamond", "mine diamond"});
}

TEST_CASE("reflection on good and broken chains") {
    CHECK(oracle_reflect(kTask1, "craft stone sword").verdict() == Verdict::Accept);

    Goals swapped = kTask1;
    std::swap(swapped[3], swapped[5]);  // mine stone before make wood pickaxe
    const auto note = oracle_reflect(swapped, "craft stone sword");
    CHECK(note.verdict() == Verdict::Revise);
    CHECK(note.issues.front().position == 3);

    Goals truncated(kTask1.begin(), kTask1.end() - 1);
    CHECK(oracle_reflect(truncated, "craft stone sword").verdict() == Verdict::Revise);

    Goals doubled = kTask1;
    doubled.insert(doubled.begin() + 1, "find tree");
    CHECK(oracle_reflect(doubled, "craft stone sword").verdict() == Verdict::Revise);
}

TEST_CASE("finalize restores the chain or keeps an accepted one") {
    OracleBackend oracle;
    const auto req = request("craft stone sword");
    CHECK(oracle.finalize(ReflectionNote{}, kTask1, req) == kTask1);
    Goals swapped = kTask1;
    std::swap(swapped[3], swapped[5]);
    const auto fixed = oracle.finalize(oracle.reflect(swapped, req), swapped, req);
    CHECK(fixed == kTask1);
    CHECK(oracle_reflect(fixed, req.target).issues.empty());
}

TEST_CASE("finalize output is sound for every scenario") {
    OracleBackend oracle;
    for (const auto& s : scenarios()) {
        const auto plan = build_plan(oracle, request(s.target, s.start), MemorySpace{}, RouterConfig{});
        CHECK(plan.reflection.verdict() == Verdict::Accept);
        CHECK(oracle_reflect(plan.goals, s.target, s.start).issues.empty());
        CHECK(plan.goals.back() == resolve_target(s.target).terminal);
    }
}

TEST_CASE("scripted replay reaches every scenario's terminal") {
    OracleBackend oracle;
    for (const auto& sc : scenarios()) {
        const auto goals = oracle_chain(sc.target, sc.start);
        WorldConfig cfg = scenario_world(WorldConfig{}, sc);
        cfg.hazard = false;  // solvability, not survival, is under test
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            WorldState s = generate_world(cfg, seed);
            CHECK_MESSAGE(perform_all(s, goals, 400) == goals.size(), "scenario " << sc.id << " seed " << seed);
        }
    }
}

TEST_CASE("replaying a chain that skips the pickaxe stalls at mining") {
    Goals broken = kTask1;
    broken.erase(broken.begin() + 3);  // no wood pickaxe
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        WorldState s = generate_world(WorldConfig{}, seed);
        CHECK(perform_all(s, broken, 300) == 4);  // stuck before "mine stone"
    }
}

TEST_CASE("routing law") {
    MemorySpace m;
    record_rewarded_action(m, {"chop tree", 0});
    record_rewarded_action(m, {"find tree", 0});
    record_rewarded_action(m, {"mine stone", 0});
    const auto set_p = [&](const char* t, double p) {
        assess_proficiency(m, t, [p](std::string_view) { return Assessment{p, {}}; }, false);
    };
    set_p("chop tree", 0.9);
    set_p("find tree", 0.7);
    set_p("mine stone", 0.5);
    const Goals goals{"chop tree", "find tree", "mine stone", "mine diamond"};
    const auto tags = route(goals, m, RouterConfig{0.7});
    CHECK(tags == std::vector<Executor>{Executor::RL, Executor::RL, Executor::VLM, Executor::VLM});
}

TEST_CASE("build plan can skip reflection") {
    OracleBackend oracle;
    const auto plan = build_plan(oracle, request("craft stone sword"), MemorySpace{}, RouterConfig{}, true);
    CHECK(plan.goals == plan.g_init);
    CHECK(plan.reflection.issues.empty());
    CHECK(plan.tags == std::vector<Executor>(plan.goals.size(), Executor::VLM));
}

TEST_CASE("performer approaches then acts") {
    OracleBackend oracle;
    WorldState s = blank_world(9, 9, {1, 4});
    s.set_tile({5, 4}, TileKind::Diamond);
    give(s, Tool::IronPickaxe);
    const auto obs = caption_observation(s, Goals{"mine diamond"});
    CHECK(oracle.perform_step("mine diamond", obs, s).next_action == ActionCommand{Verb::Find, Noun::Diamond});
    s.agent_pos = {4, 4};
    CHECK(oracle.perform_step("mine diamond", obs, s).next_action == ActionCommand{Verb::Mine, Noun::Diamond});

    WorldState bare = blank_world();
    give(bare, Tool::IronPickaxe);
    CHECK(code_of([&] { oracle.perform_step("mine diamond", obs, bare); }) == ErrorCode::NoPathToGoal);
}

TEST_CASE("performer gathers a missing ingredient") {
    OracleBackend oracle;
    WorldState s = blank_world(9, 9, {1, 4});
    s.set_tile({6, 4}, TileKind::Tree);
    const auto script = oracle.perform_step("place crafting table", caption_observation(s, {}), s);
    CHECK(script.goal == "place crafting table");
    CHECK(script.next_action == ActionCommand{Verb::Find, Noun::Tree});
}

TEST_CASE("emergency triggers on unknown hostiles only") {
    OracleBackend oracle;
    const EmergencyConfig cfg;
    WorldState s = blank_world();
    CHECK_FALSE(oracle.emergency(s, MemorySpace{}, cfg));

    s.entities.push_back({EntityKind::Zombie, {5, 4}});
    const auto flee = oracle.emergency(s, MemorySpace{}, cfg);
    REQUIRE(flee);
    CHECK(flee->trigger == "zombie");
    CHECK(flee->action.verb == Verb::Move);
    CHECK(manhattan(offset(s.agent_pos, static_cast<Direction>(static_cast<int>(flee->action.noun) -
                                                               static_cast<int>(Noun::North))),
                    s.entities[0].pos) == 2);

    give(s, Tool::WoodSword);
    const auto fight = oracle.emergency(s, MemorySpace{}, cfg);
    REQUIRE(fight);
    CHECK(fight->action == ActionCommand{Verb::Attack, Noun::Zombie});

    MemorySpace knows;
    record_rewarded_action(knows, {"attack zombie", 0});
    CHECK_FALSE(oracle.emergency(s, knows, cfg));

    WorldState pasture = blank_world();
    pasture.entities.push_back({EntityKind::Cow, {6, 4}});
    MemorySpace cows;
    record_rewarded_action(cows, {"attack cow", 0});
    CHECK_FALSE(oracle.emergency(pasture, cows, cfg));
    const auto wary = oracle.emergency(pasture, MemorySpace{}, cfg);
    REQUIRE(wary);
    CHECK(wary->action == ActionCommand{});
}

TEST_CASE("target inference from reward history") {
    OracleBackend oracle;
    const auto history_of = [](const Goals& events) {
        EpisodeTrace t;
        for (std::size_t i = 0; i < events.size(); ++i) {
            TraceRecord r;
            r.step = i;
            r.event = events[i];
            r.reward.total = 0.5;
            t.records.push_back(r);
        }
        return std::vector<EpisodeTrace>{t};
    };
    CHECK(oracle.infer_target(history_of(kTask1)) == "craft stone sword");
    CHECK(oracle.infer_target(history_of({"chop tree"})) == "chop tree");
    CHECK(code_of([&] { oracle.infer_target({}); }) == ErrorCode::NoSignal);
}
