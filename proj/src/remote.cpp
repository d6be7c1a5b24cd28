// SPDX-License-Identifier: Apache-2.0
#include "tandem/remote.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "tandem/error.hpp"

namespace tandem {

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string numbered(std::span<const std::string> items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += std::to_string(i + 1) + ". " + items[i] + "\n";
    return out;
}

/// Strips markup and trailing commentary from one list item.
std::string clean_item(std::string item) {
    item.erase(std::remove_if(item.begin(), item.end(), [](char c) { return c == '`' || c == '*'; }), item.end());
    for (const char* sep : {" - ", " \u2013 ", " \u2014 ", ":"}) {
        if (const auto pos = item.find(sep); pos != std::string::npos) item.erase(pos);
    }
    if (const auto pos = item.find('('); pos != std::string::npos) item.erase(pos);
    return trim(item);
}

}  // namespace

HttpTransport::HttpTransport(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(cfg_.endpoint, m, url))
        throw Error(ErrorCode::ConfigError, "planner.endpoint must be an http(s) URL");
    base_ = m[1];
    path_ = m[2].matched ? std::string(m[2]) : "/v1/chat/completions";
}

std::string HttpTransport::complete(const ChatRequest& req) {
    const nlohmann::json body{{"model", cfg_.model},
                              {"temperature", 0},
                              {"messages",
                               {{{"role", "system"}, {"content", req.system}}, {{"role", "user"}, {"content", req.user}}}}};
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    httplib::Client client(base_);
    const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.backoff_seconds * (1 << (attempt - 1))));
        const auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw Error(ErrorCode::RemoteProtocolError, "HTTP " + std::to_string(res->status));
        try {
            const auto doc = nlohmann::json::parse(res->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::RemoteProtocolError, std::string("malformed completion: ") + ex.what());
        }
    }
    throw Error(ErrorCode::RemoteProtocolError, "gave up after retries: " + last_error);
}

ReplayTransport::ReplayTransport(const std::filesystem::path& transcript) {
    std::ifstream in(transcript);
    if (!in) throw Error(ErrorCode::IoError, "cannot read transcript " + transcript.string());
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            const auto rec = nlohmann::json::parse(line);
            const auto& req = rec.at("request");
            replies_[{req.at("operation").get<std::string>(), req.at("user").get<std::string>()}] =
                rec.at("reply").get<std::string>();
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::CorruptDocument, std::string("transcript: ") + ex.what());
        }
    }
}

std::string ReplayTransport::complete(const ChatRequest& req) {
    const auto it = replies_.find({req.operation, req.user});
    if (it == replies_.end()) throw Error(ErrorCode::RemoteProtocolError, "no recorded reply for " + req.operation);
    return it->second;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
    PromptSet set;
    set.system_ = trim(read_file(dir / "system.txt"));
    for (const char* name : {"decompose", "reflect", "perform", "infer", "proficiency"})
        set.templates_[name] = read_file(dir / (std::string(name) + ".txt"));
    return set;
}

std::string PromptSet::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorCode::ConfigError, "no prompt template " + name);
    std::string out = it->second;
    for (const auto& [key, value] : vars) {
        const std::string marker = "{{" + key + "}}";
        for (auto pos = out.find(marker); pos != std::string::npos; pos = out.find(marker, pos + value.size()))
            out.replace(pos, marker.size(), value);
    }
    return out;
}

ParsedList parse_numbered_list(const std::string& reply) {
    static const std::regex item(R"(^\s*(\d+)[.)]\s*(.+?)\s*$)");
    ParsedList out;
    std::istringstream in(reply);
    std::string line;
    std::smatch m;
    while (std::getline(in, line)) {
        if (!std::regex_match(line, m, item)) continue;
        const std::string text = clean_item(m[2]);
        if (auto canon = canonical_task(text)) out.tasks.push_back(*canon);
        else out.unmatched.push_back(trim(m[2]));
    }
    return out;
}

std::string action_space_listing() {
    std::string out;
    for (const auto& a : action_catalog()) out += "- " + to_string(a) + "\n";
    return out;
}

RemoteBackend::RemoteBackend(std::unique_ptr<Transport> transport, PromptSet prompts, RemoteConfig cfg)
    : transport_(std::move(transport)), prompts_(std::move(prompts)), cfg_(std::move(cfg)) {
    if (!cfg_.transcript_path.empty()) {
        transcript_.open(cfg_.transcript_path, std::ios::app);
        if (!transcript_) throw Error(ErrorCode::IoError, "cannot open " + cfg_.transcript_path.string());
    }
}

RemoteBackend::Exchange RemoteBackend::ask(const std::string& operation,
                                           const std::map<std::string, std::string>& vars) {
    Exchange ex{{operation, prompts_.system(), prompts_.render(operation, vars)}, {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
        ex.reply = transport_->complete(ex.request);
    } catch (const Error& e) {
        ex.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        log(ex, std::string("error: ") + e.what());
        throw;
    }
    ex.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return ex;
}

void RemoteBackend::log(const Exchange& ex, const std::string& parse) {
    if (!transcript_.is_open()) return;
    const nlohmann::json rec{{"request", {{"operation", ex.request.operation}, {"system", ex.request.system},
                                          {"user", ex.request.user}}},
                             {"reply", ex.reply},
                             {"parse", parse},
                             {"latency_ms", ex.latency_ms}};
    transcript_ << rec.dump() << '\n';
    transcript_.flush();
}

template <class F, class G>
auto RemoteBackend::with_fallback(F&& remote, G&& oracle) -> decltype(remote()) {
    try {
        return remote();
    } catch (const Error& e) {
        const bool recoverable = e.code() == ErrorCode::RemoteProtocolError || e.code() == ErrorCode::UnparseableReply;
        if (!recoverable || !cfg_.fallback_to_oracle) throw;
        return oracle();
    }
}

std::vector<std::string> RemoteBackend::decompose(const PlannerRequest& req) {
    return with_fallback(
        [&] {
            const auto ex = ask("decompose", {{"goal", req.target},
                                              {"actions", action_space_listing()},
                                              {"observation", req.observation},
                                              {"hint", req.hint.empty() ? "none" : req.hint}});
            auto parsed = parse_numbered_list(ex.reply);
            log(ex, std::to_string(parsed.tasks.size()) + " tasks, " + std::to_string(parsed.unmatched.size()) +
                        " unmatched");
            if (parsed.tasks.empty()) throw Error(ErrorCode::UnparseableReply, "no numbered plan in reply");
            unmatched_ = std::move(parsed.unmatched);
            return parsed.tasks;
        },
        [&] {
            unmatched_.clear();
            return oracle_.decompose(req);
        });
}

ReflectionNote RemoteBackend::reflect(std::span<const std::string> g_init, const PlannerRequest& req) {
    revision_.reset();
    return with_fallback(
        [&] {
            const auto ex = ask("reflect", {{"goal", req.target}, {"plan", numbered(g_init)}});
            ReflectionNote note;
            for (const auto& u : unmatched_) note.issues.push_back({0, "unrecognised step '" + u + "'", "drop it"});
            const auto pos = ex.reply.find("Revised Plan");
            if (pos != std::string::npos) {
                auto parsed = parse_numbered_list(ex.reply.substr(pos));
                if (!parsed.tasks.empty() && !std::equal(parsed.tasks.begin(), parsed.tasks.end(), g_init.begin(),
                                                         g_init.end())) {
                    note.issues.push_back({0, "model proposed a revised plan", numbered(parsed.tasks)});
                    revision_ = std::move(parsed.tasks);
                }
            }
            log(ex, note.issues.empty() ? "accept" : "revise");
            return note;
        },
        [&] { return oracle_.reflect(g_init, req); });
}

std::vector<std::string> RemoteBackend::finalize(const ReflectionNote& note, std::span<const std::string> g_init,
                                                 const PlannerRequest& req) {
    if (note.verdict() == Verdict::Accept) return {g_init.begin(), g_init.end()};
    try {
        if (revision_ && oracle_reflect(*revision_, req.target, req.start).issues.empty()) return *revision_;
        ReflectionNote forced = note;
        if (forced.issues.empty()) forced.issues.push_back({0, "revision rejected", ""});
        return oracle_.finalize(forced, g_init, req);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::IrreparablePlan) throw;
        throw Error(ErrorCode::IrreparablePlan, e.what());
    }
}

PerformerScript RemoteBackend::perform_step(std::string_view goal, const TextualObservation& obs,
                                            const WorldState& state) {
    return with_fallback(
        [&] {
            const auto legal = legal_actions(state);
            std::string listing;
            for (const auto& a : legal) listing += "- " + to_string(a) + "\n";
            for (int attempt = 0; attempt < 2; ++attempt) {
                const auto ex = ask("perform", {{"goal", std::string(goal)},
                                                {"observation", render(obs)},
                                                {"actions", listing},
                                                {"attempt", std::to_string(attempt + 1)}});
                std::istringstream in(ex.reply);
                for (std::string line; std::getline(in, line);) {
                    const auto action = parse_action(clean_item(line));
                    if (action && std::find(legal.begin(), legal.end(), *action) != legal.end()) {
                        log(ex, "action " + to_string(*action));
                        return PerformerScript{std::string(goal), *action, trim(ex.reply)};
                    }
                }
                log(ex, "no legal action");
            }
            throw Error(ErrorCode::UnparseableReply, "performer reply named no legal action");
        },
        [&] { return oracle_.perform_step(goal, obs, state); });
}

std::optional<EmergencyInstruction> RemoteBackend::emergency(const WorldState& state, const MemorySpace& memory,
                                                             const EmergencyConfig& cfg) {
    // Runs every step, so it stays local instead of costing a round trip.
    return oracle_.emergency(state, memory, cfg);
}

std::string RemoteBackend::infer_target(std::span<const EpisodeTrace> history) {
    std::string listing;
    bool any = false;
    for (const auto& ep : history)
        for (const auto& r : ep.records)
            if (r.event && r.reward.total > 0.0) {
                listing += "- step " + std::to_string(r.step) + ": " + *r.event + " (reward " +
                           std::to_string(r.reward.total) + ")\n";
                any = true;
            }
    if (!any) throw Error(ErrorCode::NoSignal, "history holds no rewarded steps");
    return with_fallback(
        [&] {
            const auto ex = ask("infer", {{"history", listing}, {"actions", action_space_listing()}});
            std::istringstream in(ex.reply);
            for (std::string line; std::getline(in, line);) {
                const std::string text = clean_item(line);
                if (text.empty()) continue;
                try {
                    const auto resolved = resolve_target(text);
                    for (const auto& c : candidate_targets()) {
                        const auto r = resolve_target(c);
                        if (r.terminal == resolved.terminal && r.repeat == resolved.repeat) {
                            log(ex, "target " + c);
                            return c;
                        }
                    }
                } catch (const Error&) {
                }
            }
            log(ex, "unmapped");
            throw Error(ErrorCode::UnparseableReply, "reply names no known target");
        },
        [&] { return oracle_.infer_target(history); });
}

Assessment RemoteBackend::judge_proficiency(std::string_view task, const ProbeReport& evidence) {
    static const std::regex number(R"([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)");
    try {
        const auto ex = ask("proficiency", {{"task", std::string(task)},
                                            {"episodes", std::to_string(evidence.episodes)},
                                            {"successes", std::to_string(evidence.successes)},
                                            {"mean_steps", std::to_string(evidence.mean_steps)}});
        std::smatch m;
        if (!std::regex_search(ex.reply, m, number)) {
            log(ex, "no number");
            throw Error(ErrorCode::EvaluatorFailure, "proficiency reply holds no number");
        }
        const double p = std::stod(m[0]);
        log(ex, "p=" + std::string(m[0]));
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::EvaluatorFailure, "proficiency " + std::string(m[0]) + " outside [0, 1]");
        return {p, evidence};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::EvaluatorFailure) throw;
        throw Error(ErrorCode::EvaluatorFailure, e.what());
    }
}

}  // namespace tandem
