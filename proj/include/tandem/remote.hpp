// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tandem/memory.hpp"
#include "tandem/planner.hpp"

namespace tandem {

struct ChatRequest {
    std::string operation;  ///< "decompose", "reflect", ...
    std::string system;
    std::string user;
};

/// Moves one chat exchange. Throws RemoteProtocolError.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string complete(const ChatRequest& req) = 0;
};

struct RemoteConfig {
    std::string endpoint;  ///< e.g. https://api.example.com/v1/chat/completions
    std::string model;
    /// Name of the environment variable holding the API key. The key itself
    /// is never read from files or flags.
    std::string api_key_env = "TANDEM_API_KEY";
    int retries = 2;
    double timeout_seconds = 30.0;
    double backoff_seconds = 0.5;
    bool fallback_to_oracle = true;
    std::filesystem::path prompt_dir = "data/prompts";
    std::filesystem::path transcript_path;  ///< empty disables the log
    friend bool operator==(const RemoteConfig&, const RemoteConfig&) = default;
};

/// Chat-completions POST with retries and exponential backoff.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(RemoteConfig cfg);
    std::string complete(const ChatRequest& req) override;

private:
    RemoteConfig cfg_;
    std::string base_;
    std::string path_;
};

/// Serves replies from a recorded transcript, matched on the request text.
class ReplayTransport final : public Transport {
public:
    explicit ReplayTransport(const std::filesystem::path& transcript);
    std::string complete(const ChatRequest& req) override;
    std::size_t size() const { return replies_.size(); }

private:
    std::map<std::pair<std::string, std::string>, std::string> replies_;
};

/// Prompt templates with {{name}} placeholders.
class PromptSet {
public:
    static PromptSet load(const std::filesystem::path& dir);
    std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;
    const std::string& system() const { return system_; }

private:
    std::string system_;
    std::map<std::string, std::string> templates_;
};

/// Numbered-list items ("1. Find Tree - walk over") mapped onto the task
/// vocabulary. Lines that do not map are kept in `unmatched`.
struct ParsedList {
    std::vector<std::string> tasks;
    std::vector<std::string> unmatched;
};
ParsedList parse_numbered_list(const std::string& reply);

class RemoteBackend final : public PlannerBackend {
public:
    RemoteBackend(std::unique_ptr<Transport> transport, PromptSet prompts, RemoteConfig cfg);

    std::string_view name() const override { return "remote"; }
    std::vector<std::string> decompose(const PlannerRequest& req) override;
    ReflectionNote reflect(std::span<const std::string> g_init, const PlannerRequest& req) override;
    std::vector<std::string> finalize(const ReflectionNote& note, std::span<const std::string> g_init,
                                      const PlannerRequest& req) override;
    PerformerScript perform_step(std::string_view goal, const TextualObservation& obs,
                                 const WorldState& state) override;
    std::optional<EmergencyInstruction> emergency(const WorldState& state, const MemorySpace& memory,
                                                  const EmergencyConfig& cfg) override;
    std::string infer_target(std::span<const EpisodeTrace> history) override;

    /// Proficiency judged by the model from probe evidence. Throws
    /// EvaluatorFailure when unreachable or out of range.
    Assessment judge_proficiency(std::string_view task, const ProbeReport& evidence);

private:
    struct Exchange {
        ChatRequest request;
        std::string reply;
        double latency_ms = 0.0;
    };
    Exchange ask(const std::string& operation, const std::map<std::string, std::string>& vars);
    void log(const Exchange& ex, const std::string& parse);
    template <class F, class G>
    auto with_fallback(F&& remote, G&& oracle) -> decltype(remote());

    std::unique_ptr<Transport> transport_;
    PromptSet prompts_;
    RemoteConfig cfg_;
    OracleBackend oracle_;
    std::vector<std::string> unmatched_;
    std::optional<std::vector<std::string>> revision_;
    std::ofstream transcript_;
};

std::string action_space_listing();

}  // namespace tandem
