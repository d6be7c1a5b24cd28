// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tandem/reward.hpp"
#include "tandem/world.hpp"

namespace tandem {

enum class Executor { RL, VLM, Emergency };
std::string_view to_string(Executor e) noexcept;

enum class Outcome { Success, Failure, Died };
std::string_view to_string(Outcome o) noexcept;

struct TraceRecord {
    std::uint64_t step = 0;
    std::string observation;  ///< compact "name@dx,dy" list
    std::string goal;
    Executor executor = Executor::RL;
    ActionCommand action;
    RewardBreakdown reward;
    std::optional<std::string> event;
    int health = 0;
};

struct EpisodeTrace {
    std::uint64_t episode = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> plan;
    std::vector<Executor> tags;  ///< routing tag per plan position
    std::vector<TraceRecord> records;
    Outcome outcome = Outcome::Failure;
    std::uint64_t steps = 0;
    std::size_t goals_completed = 0;
};

inline constexpr int kTraceVersion = 1;
nlohmann::json to_json(const TraceRecord& r, std::uint64_t episode);

}  // namespace tandem
