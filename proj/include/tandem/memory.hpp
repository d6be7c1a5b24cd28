// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tandem/world.hpp"

namespace tandem {

struct ProbeReport {
    std::uint64_t episodes = 0;
    std::uint64_t successes = 0;
    double mean_steps = 0.0;  ///< over successful episodes
    friend bool operator==(const ProbeReport&, const ProbeReport&) = default;
};

struct TaskEntry {
    std::string task;
    double p = 0.0;
    ProbeReport probe;
    friend bool operator==(const TaskEntry&, const TaskEntry&) = default;
};

struct Subspace {
    std::string kind;  ///< verb of every task inside
    std::vector<TaskEntry> entries;
    friend bool operator==(const Subspace&, const Subspace&) = default;
};

struct MemorySpace {
    std::vector<Subspace> subspaces;
    friend bool operator==(const MemorySpace&, const MemorySpace&) = default;

    const TaskEntry* find(std::string_view task) const;
    TaskEntry* find(std::string_view task);
    std::size_t size() const;
};

/// Verb of a canonical task, e.g. "mine" for "mine iron".
std::string subspace_kind(std::string_view task);

/// Inserts the event's task with p = 0 unless already present.
void record_rewarded_action(MemorySpace& memory, const AchievementEvent& event);

/// Result of one assessment batch. `p` is the evaluator's judgment; for the
/// empirical probe it equals successes / episodes over this batch.
struct Assessment {
    double p = 0.0;
    ProbeReport batch;
};

using ProficiencyEvaluator = std::function<Assessment(std::string_view task)>;

/// Replaces the entry's p and folds the batch into its probe evidence. The
/// stored p is successes / episodes over all evidence when the evaluator is
/// empirical (`cumulative`), else the evaluator's value. Throws
/// EvaluatorFailure on an out-of-range value, keeping the old p.
void assess_proficiency(MemorySpace& memory, std::string_view task, const ProficiencyEvaluator& evaluator,
                        bool cumulative = true);

/// Exact task match.
std::optional<double> lookup(const MemorySpace& memory, std::string_view goal);

inline constexpr int kMemoryVersion = 1;
nlohmann::json save_memory(const MemorySpace& memory);
/// Throws SchemaMismatch or CorruptDocument.
MemorySpace load_memory(const nlohmann::json& doc);

}  // namespace tandem
