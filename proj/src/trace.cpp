// SPDX-License-Identifier: Apache-2.0
#include "tandem/trace.hpp"

namespace tandem {

std::string_view to_string(Executor e) noexcept {
    switch (e) {
        case Executor::RL: return "RL";
        case Executor::VLM: return "VLM";
        case Executor::Emergency: return "emergency";
    }
    return "";
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::Failure: return "failure";
        case Outcome::Died: return "died";
    }
    return "";
}

nlohmann::json to_json(const TraceRecord& r, std::uint64_t episode) {
    return {{"v", kTraceVersion},
            {"episode", episode},
            {"step", r.step},
            {"observation", r.observation},
            {"goal", r.goal},
            {"executor", to_string(r.executor)},
            {"action", to_string(r.action)},
            {"r_target", r.reward.r_target},
            {"r_sub", r.reward.r_sub},
            {"r_proxi", r.reward.r_proxi},
            {"reward", r.reward.total},
            {"event", r.event ? nlohmann::json(*r.event) : nlohmann::json(nullptr)},
            {"health", r.health}};
}

}  // namespace tandem
