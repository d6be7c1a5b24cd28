// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "doctest.h"

#include "tandem/error.hpp"
#include "tandem/memory.hpp"

using namespace tandem;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a tandem::Error");
    return ErrorCode::IoError;
}

ProficiencyEvaluator fixed(std::uint64_t successes, std::uint64_t episodes, double steps = 5.0) {
    return [=](std::string_view) {
        const double p = episodes ? static_cast<double>(successes) / static_cast<double>(episodes) : 0.0;
        return Assessment{p, {episodes, successes, steps}};
    };
}

}  // namespace

TEST_CASE("recording files tasks under their verb") {
    MemorySpace m;
    record_rewarded_action(m, {"attack cow", 4});
    REQUIRE(m.subspaces.size() == 1);
    CHECK(m.subspaces[0].kind == "attack");
    CHECK(m.subspaces[0].entries[0] == TaskEntry{"attack cow", 0.0, {}});

    assess_proficiency(m, "attack cow", fixed(3, 4));
    const MemorySpace before = m;
    record_rewarded_action(m, {"attack cow", 9});
    CHECK(m == before);

    record_rewarded_action(m, {"mine iron", 1});
    CHECK(m.find("mine iron") != nullptr);
    CHECK(subspace_kind("mine iron") == "mine");
    CHECK(m.size() == 2);
}

TEST_CASE("empirical proficiency is the success ratio") {
    MemorySpace m;
    record_rewarded_action(m, {"chop tree", 0});
    assess_proficiency(m, "chop tree", fixed(18, 20));
    CHECK(m.find("chop tree")->p == 0.9);
    record_rewarded_action(m, {"find stone", 0});
    assess_proficiency(m, "find stone", fixed(0, 20));
    CHECK(m.find("find stone")->p == 0.0);
}

TEST_CASE("out-of-range judgments keep the old value") {
    MemorySpace m;
    record_rewarded_action(m, {"chop tree", 0});
    assess_proficiency(m, "chop tree", fixed(18, 20));
    const auto bad = [](std::string_view) { return Assessment{1.3, {20, 20, 1.0}}; };
    CHECK(code_of([&] { assess_proficiency(m, "chop tree", bad, false); }) == ErrorCode::EvaluatorFailure);
    CHECK(m.find("chop tree")->p == 0.9);
    CHECK(m.find("chop tree")->probe.episodes == 20);
}

TEST_CASE("judged proficiency is stored as given") {
    MemorySpace m;
    record_rewarded_action(m, {"chop tree", 0});
    assess_proficiency(m, "chop tree", [](std::string_view) { return Assessment{0.42, {10, 9, 2.0}}; }, false);
    CHECK(m.find("chop tree")->p == 0.42);
    CHECK(m.find("chop tree")->probe.successes == 9);
}

TEST_CASE("evidence accumulates and p stays the exact ratio") {
    MemorySpace m;
    record_rewarded_action(m, {"mine stone", 0});
    Rng rng(8);
    std::uint64_t s = 0, n = 0;
    for (int i = 0; i < 50; ++i) {
        const std::uint64_t eps = 1 + uniform_index(rng, 20);
        const std::uint64_t wins = uniform_index(rng, eps + 1);
        const std::uint64_t prev = m.find("mine stone")->probe.episodes;
        assess_proficiency(m, "mine stone", fixed(wins, eps));
        s += wins;
        n += eps;
        const auto& e = *m.find("mine stone");
        CHECK(e.probe.episodes >= prev);
        CHECK(e.probe.episodes == n);
        CHECK(e.probe.successes == s);
        CHECK(e.p == static_cast<double>(s) / static_cast<double>(n));
    }
}

TEST_CASE("lookup") {
    MemorySpace m;
    CHECK_FALSE(lookup(m, "chop tree"));
    record_rewarded_action(m, {"chop tree", 0});
    assess_proficiency(m, "chop tree", [](std::string_view) { return Assessment{0.95, {20, 19, 1.0}}; }, false);
    CHECK(lookup(m, "chop tree") == 0.95);
    CHECK_FALSE(lookup(m, "mine diamond"));
}

TEST_CASE("every task lives in exactly one subspace") {
    MemorySpace m;
    const auto vocab = task_vocabulary();
    Rng rng(4);
    for (int i = 0; i < 300; ++i) record_rewarded_action(m, {vocab[uniform_index(rng, vocab.size())], 0});
    std::set<std::string> seen;
    for (const auto& sub : m.subspaces)
        for (const auto& e : sub.entries) {
            CHECK(subspace_kind(e.task) == sub.kind);
            CHECK(seen.insert(e.task).second);
        }
    CHECK(seen.size() == m.size());
}

TEST_CASE("memory documents round trip") {
    MemorySpace m;
    for (const char* t : {"chop tree", "find tree", "mine stone", "make wood pickaxe"}) {
        record_rewarded_action(m, {t, 0});
        assess_proficiency(m, t, fixed(17, 20, 3.25));
    }
    CHECK(load_memory(save_memory(m)) == m);
    CHECK(load_memory(save_memory(MemorySpace{})) == MemorySpace{});

    auto doc = save_memory(m);
    doc["version"] = 2;
    CHECK(code_of([&] { load_memory(doc); }) == ErrorCode::SchemaMismatch);
    doc = save_memory(m);
    doc["subspaces"][0]["entries"][0]["p"] = 1.5;
    CHECK(code_of([&] { load_memory(doc); }) == ErrorCode::CorruptDocument);
    doc = save_memory(m);
    doc["subspaces"][0]["kind"] = "attack";
    CHECK(code_of([&] { load_memory(doc); }) == ErrorCode::CorruptDocument);
    CHECK(code_of([&] { load_memory(nlohmann::json("nope")); }) == ErrorCode::CorruptDocument);
}
