// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

#include "tandem/config.hpp"
#include "tandem/error.hpp"

using namespace tandem;
using nlohmann::json;
using tandem::testing::scratch_dir;
using tandem::testing::source_path;

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

ErrorCode override_code(std::string assignment) {
    const std::vector<std::string> o{std::move(assignment)};
    return code_of([&] { load_config({}, o); });
}

AppConfig with(std::initializer_list<std::string> overrides) {
    const std::vector<std::string> o(overrides);
    return load_config({}, o);
}

/// Every key path in a document, e.g. "planner.endpoint".
std::vector<std::string> keys_of(const json& doc) {
    std::vector<std::string> out;
    for (const auto& [section, body] : doc.items())
        for (const auto& [key, value] : body.items()) out.push_back(section + "." + key);
    return out;
}

}  // namespace

TEST_CASE("defaults load from nothing") {
    CHECK(load_config({}) == AppConfig{});
    CHECK(config_from_json(json::object()) == AppConfig{});
}

TEST_CASE("rendered configs load back unchanged") {
    CHECK(config_from_json(json::parse(render_config(AppConfig{}))) == AppConfig{});

    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        AppConfig c;
        c.task = 1 + static_cast<int>(uniform_index(rng, 10));
        for (std::size_t n = uniform_index(rng, 4); n > 0; --n)
            c.train_tasks.push_back(1 + static_cast<int>(uniform_index(rng, 10)));
        c.run.seed = rng();
        c.run.world.seed = c.run.seed;
        c.run.mode = static_cast<Mode>(uniform_index(rng, 6));
        c.run.episodes = 1 + static_cast<int>(uniform_index(rng, 500));
        c.run.parallel = 1 + static_cast<int>(uniform_index(rng, 8));
        c.run.exploring_starts = uniform_index(rng, 2) == 1;
        c.run.world.width = 10 + static_cast<int>(uniform_index(rng, 20));
        c.run.world.hostile_move_prob = uniform_unit(rng);
        c.run.world.yields[2] = 1 + static_cast<int>(uniform_index(rng, 5));
        c.run.reward.gamma3 = uniform_unit(rng);
        c.run.reward.beta = uniform_unit(rng) * 0.99;
        c.run.learner.alpha = 0.01 + uniform_unit(rng) * 0.9;
        c.run.learner.budget = rng() % 1'000'000;
        c.run.router.threshold = uniform_unit(rng);
        c.run.emergency.radius = static_cast<int>(uniform_index(rng, 5)) - 1;
        c.run.embed.stopwords = {"you", "the"};
        c.planner.backend = uniform_index(rng, 2) ? "remote" : "oracle";
        c.planner.transport = uniform_index(rng, 2) ? "replay" : "http";
        c.planner.remote.endpoint = "https://example.invalid/v1/chat/completions";
        c.planner.remote.model = "m" + std::to_string(i);
        c.planner.remote.timeout_seconds = 0.5 + uniform_unit(rng) * 10;
        c.paths.traces = "out/t" + std::to_string(i) + ".jsonl";
        CHECK(config_from_json(json::parse(render_config(c))) == c);
    }
}

TEST_CASE("unknown names are rejected") {
    CHECK(code_of([] { config_from_json(json{{"wrld", json::object()}}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { config_from_json(json{{"world", {{"trees", 4}, {"treez", 4}}}}); }) ==
          ErrorCode::ConfigError);
    CHECK(code_of([] { config_from_json(json::array()); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { config_from_json(json{{"world", 3}}); }) == ErrorCode::ConfigError);
}

TEST_CASE("types are checked") {
    CHECK(override_code("world.trees=\"many\"") == ErrorCode::ConfigError);
    CHECK(override_code("world.trees=2.5") == ErrorCode::ConfigError);
    CHECK(override_code("learner.budget=-1") == ErrorCode::ConfigError);
    CHECK(override_code("run.exploring_starts=1") == ErrorCode::ConfigError);
    CHECK(override_code("world.yields=[1,2]") == ErrorCode::ConfigError);
    CHECK(override_code("run.mode=sideways") == ErrorCode::ConfigError);
}

TEST_CASE("ranges are checked") {
    for (const char* bad : {"run.task=0", "run.task=11", "run.train_tasks=[1,12]", "run.episodes=0",
                            "run.parallel=0", "router.threshold=1.5", "emergency.radius=-2", "emergency.expiry=0",
                            "embed.dimension=8", "planner.backend=cloud", "planner.transport=carrier-pigeon",
                            "planner.retries=11", "planner.timeout_seconds=0", "planner.api_key_env=\"\"",
                            "reward.beta=1.0", "learner.discount=1.0", "world.width=2"})
        CHECK_MESSAGE(override_code(bad) == ErrorCode::ConfigError, bad);
}

TEST_CASE("overrides") {
    const auto c = with({"run.seed=42", "planner.model=gpt-test", "run.mode=variation3", "reward.gamma3=0",
                         "run.train_tasks=[1,2,3]"});
    CHECK(c.run.seed == 42);
    CHECK(c.run.world.seed == 42);
    CHECK(c.planner.remote.model == "gpt-test");
    CHECK(c.run.mode == Mode::Variation3);
    CHECK(c.run.reward.gamma3 == 0.0);
    CHECK(c.train_tasks == std::vector<int>{1, 2, 3});
    CHECK(with({"run.mode=dsadf"}).run.mode == Mode::Full);
    // Later overrides win.
    CHECK(with({"run.episodes=5", "run.episodes=9"}).run.episodes == 9);

    CHECK(override_code("no-equals-sign") == ErrorCode::ConfigError);
    CHECK(override_code("nodot=3") == ErrorCode::ConfigError);
    CHECK(override_code(".key=3") == ErrorCode::ConfigError);
    CHECK(override_code("run.=3") == ErrorCode::ConfigError);
}

TEST_CASE("there is no place for a credential") {
    for (const char* key : {"planner.api_key=sk-123", "planner.key=sk-123", "planner.token=sk-123"})
        CHECK_MESSAGE(override_code(key) == ErrorCode::ConfigError, key);
    for (const auto& k : keys_of(config_to_json(AppConfig{}))) {
        CHECK((k.find("api_key") == std::string::npos || k == "planner.api_key_env"));
        CHECK(k.find("token") == std::string::npos);
        CHECK(k.find("secret") == std::string::npos);
    }
}

TEST_CASE("files") {
    const auto dir = scratch_dir("config_files");
    CHECK(code_of([&] { load_config(dir / "absent.json"); }) == ErrorCode::IoError);

    write_text(dir / "broken.json", "{ world: ");
    CHECK(code_of([&] { load_config(dir / "broken.json"); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] { read_json(dir / "broken.json"); }) == ErrorCode::CorruptDocument);

    AppConfig c;
    c.task = 4;
    c.run.episodes = 7;
    write_text(dir / "ok.json", render_config(c));
    CHECK(load_config(dir / "ok.json") == c);
    const std::vector<std::string> o{"run.episodes=3"};
    CHECK(load_config(dir / "ok.json", o).run.episodes == 3);

    write_json(dir / "doc.json", json{{"a", 1}});
    CHECK(read_json(dir / "doc.json") == json{{"a", 1}});
    write_text(dir / "nested" / "out.txt", "x");  // parents are created
    CHECK(read_text(dir / "nested" / "out.txt") == "x");
    CHECK(code_of([&] { write_text(dir / "doc.json" / "under_a_file.txt", "x"); }) == ErrorCode::IoError);
}

TEST_CASE("the bundled default config matches the built-in defaults") {
    const auto path = source_path("configs/default.json");
    if (std::getenv("TANDEM_UPDATE_GOLDEN")) write_text(path, render_config(AppConfig{}));
    CHECK(load_config(path) == AppConfig{});
}
