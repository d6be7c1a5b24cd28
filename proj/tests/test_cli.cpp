// SPDX-License-Identifier: Apache-2.0
// Drives the built binary end to end; each case works in its own scratch dir.
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include "tandem/config.hpp"

using namespace tandem;
using tandem::testing::scratch_dir;
using tandem::testing::source_path;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

Run tandem_cli(const std::filesystem::path& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd " + quote(dir.string()) + " && " + quote(TANDEM_BIN) + " " + args + " >" +
                            quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(out);
    r.err = read_text(err);
    return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

/// A small trained policy and memory in `dir`.
void train_small(const std::filesystem::path& dir) {
    const auto r = tandem_cli(dir, "train --task 1 --budget 4000 --set run.curve_points=2 run.curve_episodes=3");
    REQUIRE_MESSAGE(r.code == 0, r.err);
}

}  // namespace

TEST_CASE("train writes its artifacts") {
    const auto dir = scratch_dir("cli_train");
    const auto r = tandem_cli(dir, "train --task 1 --budget 4000 --set run.curve_points=2 run.curve_episodes=3");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("steps=4000") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "policy.json"));
    CHECK(std::filesystem::exists(dir / "memory.json"));
    const auto curve = read_text(dir / "curve.csv");
    CHECK(curve.rfind("step,successes,episodes,tsr\n", 0) == 0);
    CHECK(count_lines(curve) == 3);
}

TEST_CASE("eval is reproducible and thread-count independent") {
    const auto dir = scratch_dir("cli_eval");
    train_small(dir);
    const auto a = tandem_cli(dir, "eval --task 1 --episodes 6 --traces a.jsonl --metrics a.json --metrics-csv a.csv");
    REQUIRE_MESSAGE(a.code == 0, a.err);
    const auto b = tandem_cli(dir, "eval --task 1 --episodes 6 --traces b.jsonl --metrics b.json --metrics-csv b.csv "
                                   "--parallel 3");
    REQUIRE_MESSAGE(b.code == 0, b.err);
    CHECK(read_text(dir / "a.jsonl") == read_text(dir / "b.jsonl"));
    CHECK(read_text(dir / "a.json") == read_text(dir / "b.json"));
    CHECK(read_text(dir / "a.csv") == read_text(dir / "b.csv"));

    const auto metrics = read_json(dir / "a.json");
    CHECK(metrics["episodes"] == 6);
    CHECK(metrics["mode"] == "full");
    std::istringstream traces(read_text(dir / "a.jsonl"));
    std::size_t lines = 0;
    for (std::string line; std::getline(traces, line); ++lines) {
        const auto rec = nlohmann::json::parse(line);
        CHECK(rec.contains("episode"));
        CHECK(rec.contains("executor"));
    }
    CHECK(lines == metrics["total_steps"].get<std::size_t>());
}

TEST_CASE("plan prints the routed goal list") {
    const auto dir = scratch_dir("cli_plan");
    const auto r = tandem_cli(dir, "plan 'craft stone sword'");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    for (const char* step : {"find tree", "place crafting table", "make stone sword"})
        CHECK(r.out.find(step) != std::string::npos);

    train_small(dir);
    const auto routed = tandem_cli(dir, "plan 'mine diamond' --memory memory.json");
    REQUIRE_MESSAGE(routed.code == 0, routed.err);
    CHECK(routed.out.find("[VLM]") != std::string::npos);
}

TEST_CASE("plan through the replay transport") {
    const auto dir = scratch_dir("cli_replay");
    const std::string remote = "--backend remote --set planner.transport=replay planner.fallback_to_oracle=false "
                               "planner.replay=" +
                               quote(source_path("tests/fixtures/remote_task1.jsonl").string()) +
                               " planner.prompt_dir=" + quote(source_path("data/prompts").string());
    const auto r = tandem_cli(dir, "plan 'craft stone sword' " + remote);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("make stone sword") != std::string::npos);
    // Nothing recorded for this target and no fallback: a planner failure.
    CHECK(tandem_cli(dir, "plan 'mine diamond' " + remote).code == 2);
}

TEST_CASE("exit codes") {
    const auto dir = scratch_dir("cli_exit");
    CHECK(tandem_cli(dir, "").code == 1);
    CHECK(tandem_cli(dir, "frobnicate").code == 1);
    CHECK(tandem_cli(dir, "train --config missing.json").code == 1);
    CHECK(tandem_cli(dir, "train --set run.bogus=1").code == 1);
    CHECK(tandem_cli(dir, "eval --mode sideways").code == 1);
    CHECK(tandem_cli(dir, "plan 'craft stone sword' --api-key sk-123").code == 1);
    CHECK(tandem_cli(dir, "plan 'craft stone sword' --backend remote").code == 1);  // no endpoint
    CHECK(tandem_cli(dir, "plan 'fly to the moon'").code == 2);

    write_text(dir / "policy.json", "{ not json");
    CHECK(tandem_cli(dir, "eval --episodes 1").code == 3);
    write_text(dir / "policy.json", "{\"version\": 1, \"entries\": 5}");
    CHECK(tandem_cli(dir, "eval --episodes 1").code == 3);
    write_text(dir / "memory.json", "{\"version\": 99, \"subspaces\": []}");
    CHECK(tandem_cli(dir, "memory inspect memory.json").code == 3);
    CHECK(tandem_cli(dir, "memory inspect absent.json").code == 3);
}

TEST_CASE("memory inspect") {
    const auto dir = scratch_dir("cli_inspect");
    write_text(dir / "empty.json", "{\"version\": 1, \"subspaces\": []}");
    const auto empty = tandem_cli(dir, "memory inspect empty.json");
    REQUIRE(empty.code == 0);
    CHECK(count_lines(empty.out) == 1);
    CHECK(empty.out.find("subspace") == 0);

    train_small(dir);
    const auto r = tandem_cli(dir, "memory inspect memory.json");
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        std::istringstream cols(line);
        std::string kind, verb, noun;
        cols >> kind >> verb >> noun;
        rows.emplace_back(kind, verb + " " + noun);
    }
    CHECK(rows.size() >= 7);
    CHECK(std::is_sorted(rows.begin(), rows.end()));
}
