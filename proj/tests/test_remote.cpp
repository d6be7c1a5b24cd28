// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "json.hpp"

#include "tandem/error.hpp"
#include "tandem/remote.hpp"

using namespace tandem;
using tandem::testing::blank_world;
using tandem::testing::scratch_dir;
using tandem::testing::source_path;

namespace {

using Goals = std::vector<std::string>;

const Goals kTask1{"find tree",  "chop tree",  "place crafting table", "make wood pickaxe",
                   "find stone", "mine stone", "make stone sword"};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a tandem::Error");
    return ErrorCode::IoError;
}

std::string completion(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

/// A chat endpoint on localhost answering from a queue of (status, body).
class FakeServer {
public:
    FakeServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu_);
            ++hits_;
            auth_ = req.get_header_value("Authorization");
            last_body_ = req.body;
            if (script_.empty()) {
                res.status = 500;
                return;
            }
            auto [status, body] = script_.front();
            script_.pop_front();
            res.status = status;
            res.set_content(body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }
    void push(int status, std::string body) {
        std::lock_guard lock(mu_);
        script_.emplace_back(status, std::move(body));
    }
    RemoteConfig config() const {
        RemoteConfig c;
        c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
        c.model = "test-model";
        c.api_key_env = "TANDEM_TEST_REMOTE_KEY";
        c.retries = 2;
        c.timeout_seconds = 5;
        c.backoff_seconds = 0.01;
        return c;
    }
    int hits() const { return hits_; }
    std::string auth() {
        std::lock_guard lock(mu_);
        return auth_;
    }
    std::string last_body() {
        std::lock_guard lock(mu_);
        return last_body_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mu_;
    std::deque<std::pair<int, std::string>> script_;
    std::atomic<int> hits_ = 0;
    std::string auth_;
    std::string last_body_;
};

/// In-process transport; the handler sees every request.
class ScriptedTransport final : public Transport {
public:
    explicit ScriptedTransport(std::function<std::string(const ChatRequest&)> f) : f_(std::move(f)) {}
    std::string complete(const ChatRequest& req) override { return f_(req); }

private:
    std::function<std::string(const ChatRequest&)> f_;
};

PromptSet prompts() { return PromptSet::load(source_path("data/prompts")); }

RemoteBackend scripted(std::function<std::string(const ChatRequest&)> f, RemoteConfig cfg = {}) {
    return RemoteBackend(std::make_unique<ScriptedTransport>(std::move(f)), prompts(), std::move(cfg));
}

std::string failing(const ChatRequest&) { throw Error(ErrorCode::RemoteProtocolError, "offline"); }

PlannerRequest request(const std::string& target) {
    PlannerRequest r;
    r.target = target;
    return r;
}

std::string numbered_reply(const Goals& goals) {
    std::string out;
    for (std::size_t i = 0; i < goals.size(); ++i) out += std::to_string(i + 1) + ". " + goals[i] + "\n";
    return out;
}

/// A well-behaved model for the Task 1 target.
std::string task1_model(const ChatRequest& req) {
    if (req.operation == "decompose") return "Here is the plan.\n" + numbered_reply(kTask1);
    if (req.operation == "reflect") return "The plan is sound. No changes.";
    if (req.operation == "perform") return "find tree";
    if (req.operation == "infer") return "craft stone sword";
    return "0.8";
}

}  // namespace

TEST_CASE("http transport retries transient failures") {
    FakeServer server;
    server.push(503, "");
    server.push(429, "");
    server.push(200, completion("1. find tree"));
    HttpTransport http(server.config());
    CHECK(http.complete({"decompose", "sys", "user"}) == "1. find tree");
    CHECK(server.hits() == 3);
    const auto body = nlohmann::json::parse(server.last_body());
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"][0]["content"] == "sys");
    CHECK(body["messages"][1]["content"] == "user");
}

TEST_CASE("http transport gives up and reports") {
    FakeServer server;
    HttpTransport http(server.config());
    CHECK(code_of([&] { http.complete({"decompose", "s", "u"}); }) == ErrorCode::RemoteProtocolError);
    CHECK(server.hits() == 3);

    FakeServer rejecting;
    rejecting.push(401, "");
    HttpTransport denied(rejecting.config());
    CHECK(code_of([&] { denied.complete({"decompose", "s", "u"}); }) == ErrorCode::RemoteProtocolError);
    CHECK(rejecting.hits() == 1);

    FakeServer garbled;
    garbled.push(200, "{\"choices\": []}");
    HttpTransport confused(garbled.config());
    CHECK(code_of([&] { confused.complete({"decompose", "s", "u"}); }) == ErrorCode::RemoteProtocolError);
}

TEST_CASE("the credential comes from the environment") {
    FakeServer server;
    const auto cfg = server.config();
    ::unsetenv(cfg.api_key_env.c_str());
    server.push(200, completion("ok"));
    HttpTransport http(cfg);
    http.complete({"x", "s", "u"});
    CHECK(server.auth().empty());

    ::setenv(cfg.api_key_env.c_str(), "sk-test-123", 1);
    server.push(200, completion("ok"));
    http.complete({"x", "s", "u"});
    CHECK(server.auth() == "Bearer sk-test-123");
    ::unsetenv(cfg.api_key_env.c_str());
}

TEST_CASE("endpoint must be http") {
    RemoteConfig c;
    c.endpoint = "ftp://example.com";
    CHECK(code_of([&] { HttpTransport{c}; }) == ErrorCode::ConfigError);
    c.endpoint = "";
    CHECK(code_of([&] { HttpTransport{c}; }) == ErrorCode::ConfigError);
}

TEST_CASE("numbered list parsing") {
    const auto parsed = parse_numbered_list(
        "Sure!\n1. Find Tree - walk up to it\n2) **Chop trees**\n  3. place the crafting table: needs wood\n"
        "4. dance wildly\nnot an item\n5. `make wooden pickaxe` (at the table)\n");
    CHECK(parsed.tasks == Goals{"find tree", "chop tree", "place crafting table", "make wood pickaxe"});
    CHECK(parsed.unmatched == Goals{"dance wildly"});
    CHECK(parse_numbered_list("no list here").tasks.empty());
}

TEST_CASE("prompts render every placeholder") {
    const auto p = prompts();
    CHECK_FALSE(p.system().empty());
    const auto text = p.render("proficiency", {{"task", "chop tree"}, {"episodes", "20"}, {"successes", "18"},
                                               {"mean_steps", "3.5"}});
    CHECK(text.find("{{") == std::string::npos);
    CHECK(text.find("chop tree") != std::string::npos);
    CHECK(code_of([&] { p.render("sing", {}); }) == ErrorCode::ConfigError);
    CHECK(code_of([&] { PromptSet::load(scratch_dir("no_prompts")); }) == ErrorCode::IoError);
}

TEST_CASE("remote planning with a cooperative model") {
    auto remote = scripted(task1_model);
    const auto plan = build_plan(remote, request("craft stone sword"), MemorySpace{}, RouterConfig{});
    CHECK(plan.g_init == kTask1);
    CHECK(plan.reflection.verdict() == Verdict::Accept);
    CHECK(plan.goals == kTask1);

    WorldState s = blank_world();
    s.set_tile({7, 4}, TileKind::Tree);
    const auto script = remote.perform_step("find tree", caption_observation(s, {}), s);
    CHECK(script.next_action == ActionCommand{Verb::Find, Noun::Tree});
}

TEST_CASE("a revised plan is adopted only when it is sound") {
    Goals shuffled = kTask1;
    std::swap(shuffled[3], shuffled[5]);
    auto reviser = [&](const Goals& revision) {
        return [=](const ChatRequest& req) -> std::string {
            if (req.operation == "decompose") return numbered_reply(shuffled);
            return "Step 4 is out of order.\nRevised Plan:\n" + numbered_reply(revision);
        };
    };
    auto good = scripted(reviser(kTask1));
    const auto fixed = build_plan(good, request("craft stone sword"), MemorySpace{}, RouterConfig{});
    CHECK(fixed.reflection.verdict() == Verdict::Revise);
    CHECK(fixed.goals == kTask1);

    // An unsound revision is replaced by the repaired chain.
    Goals truncated(kTask1.begin(), kTask1.end() - 1);
    auto worse = scripted(reviser(truncated));
    CHECK(build_plan(worse, request("craft stone sword"), MemorySpace{}, RouterConfig{}).goals == kTask1);
}

TEST_CASE("unusable replies fall back to the oracle") {
    auto mute = scripted([](const ChatRequest&) { return std::string("I cannot help with that."); });
    CHECK(mute.decompose(request("craft stone sword")) == kTask1);

    auto offline = scripted(failing);
    CHECK(offline.decompose(request("craft stone sword")) == kTask1);

    RemoteConfig strict;
    strict.fallback_to_oracle = false;
    auto strict_mute = scripted([](const ChatRequest&) { return std::string("no"); }, strict);
    CHECK(code_of([&] { strict_mute.decompose(request("craft stone sword")); }) == ErrorCode::UnparseableReply);
    auto strict_offline = scripted(failing, strict);
    CHECK(code_of([&] { strict_offline.decompose(request("craft stone sword")); }) ==
          ErrorCode::RemoteProtocolError);

    WorldState s = blank_world();
    s.set_tile({7, 4}, TileKind::Tree);
    auto illegal = scripted([](const ChatRequest&) { return std::string("mine diamond"); });
    CHECK(illegal.perform_step("find tree", caption_observation(s, {}), s).next_action ==
          ActionCommand{Verb::Find, Noun::Tree});
}

TEST_CASE("remote target inference") {
    EpisodeTrace t;
    TraceRecord r;
    r.event = "make stone sword";
    r.reward.total = 1.0;
    t.records.push_back(r);
    const std::vector<EpisodeTrace> history{t};
    auto remote = scripted(task1_model);
    CHECK(remote.infer_target(history) == "craft stone sword");
    CHECK(code_of([&] { remote.infer_target({}); }) == ErrorCode::NoSignal);
    auto vague = scripted([](const ChatRequest&) { return std::string("something fun"); });
    CHECK(vague.infer_target(history) == "craft stone sword");  // oracle fallback
}

TEST_CASE("judged proficiency is range checked") {
    const ProbeReport evidence{20, 17, 4.0};
    const auto judge = [&](std::string reply) {
        return scripted([reply](const ChatRequest&) { return reply; }).judge_proficiency("chop tree", evidence);
    };
    CHECK(judge("0.85").p == 0.85);
    CHECK(judge("Proficiency: 1").p == 1.0);
    CHECK(judge("0.85").batch == evidence);
    CHECK(code_of([&] { judge("1.7"); }) == ErrorCode::EvaluatorFailure);
    CHECK(code_of([&] { judge("-0.2"); }) == ErrorCode::EvaluatorFailure);
    CHECK(code_of([&] { judge("very good"); }) == ErrorCode::EvaluatorFailure);
    auto offline = scripted(failing);
    CHECK(code_of([&] { offline.judge_proficiency("chop tree", evidence); }) == ErrorCode::EvaluatorFailure);
}

TEST_CASE("transcripts replay offline") {
    const auto dir = scratch_dir("remote_transcript");
    RemoteConfig cfg;
    cfg.transcript_path = dir / "session.jsonl";
    {
        auto live = scripted(task1_model, cfg);
        CHECK(build_plan(live, request("craft stone sword"), MemorySpace{}, RouterConfig{}).goals == kTask1);
    }
    RemoteConfig quiet;
    quiet.fallback_to_oracle = false;
    RemoteBackend replay(std::make_unique<ReplayTransport>(cfg.transcript_path), prompts(), quiet);
    CHECK(build_plan(replay, request("craft stone sword"), MemorySpace{}, RouterConfig{}).goals == kTask1);
    // Anything not recorded is a protocol error, not a silent guess.
    CHECK(code_of([&] { replay.decompose(request("mine diamond")); }) == ErrorCode::RemoteProtocolError);
}

TEST_CASE("bundled replay fixture") {
    const auto path = source_path("tests/fixtures/remote_task1.jsonl");
    if (std::getenv("TANDEM_UPDATE_GOLDEN")) {
        std::filesystem::remove(path);
        RemoteConfig cfg;
        cfg.transcript_path = path;
        auto live = scripted(task1_model, cfg);
        build_plan(live, request("craft stone sword"), MemorySpace{}, RouterConfig{});
    }
    ReplayTransport transport(path);
    CHECK(transport.size() == 2);
    RemoteConfig strict;
    strict.fallback_to_oracle = false;
    RemoteBackend replay(std::make_unique<ReplayTransport>(path), prompts(), strict);
    CHECK(build_plan(replay, request("craft stone sword"), MemorySpace{}, RouterConfig{}).goals == kTask1);
}

TEST_CASE("corrupt transcripts are rejected") {
    const auto dir = scratch_dir("remote_corrupt");
    std::ofstream(dir / "bad.jsonl") << "{\"request\": 3}\n";
    CHECK(code_of([&] { ReplayTransport{dir / "bad.jsonl"}; }) == ErrorCode::CorruptDocument);
    CHECK(code_of([&] { ReplayTransport{dir / "missing.jsonl"}; }) == ErrorCode::IoError);
}
