// SPDX-License-Identifier: Apache-2.0
#include "tandem/memory.hpp"

#include <algorithm>
#include <cmath>

#include "tandem/error.hpp"

namespace tandem {

const TaskEntry* MemorySpace::find(std::string_view task) const {
    for (const auto& s : subspaces)
        for (const auto& e : s.entries)
            if (e.task == task) return &e;
    return nullptr;
}

TaskEntry* MemorySpace::find(std::string_view task) {
    return const_cast<TaskEntry*>(std::as_const(*this).find(task));
}

std::size_t MemorySpace::size() const {
    std::size_t n = 0;
    for (const auto& s : subspaces) n += s.entries.size();
    return n;
}

std::string subspace_kind(std::string_view task) {
    const auto action = task_action(task);
    return std::string(name(action.verb));
}

void record_rewarded_action(MemorySpace& memory, const AchievementEvent& event) {
    const auto canon = canonical_task(event.kind);
    if (!canon) throw Error(ErrorCode::UnknownGoal, event.kind);
    if (memory.find(*canon)) return;
    const std::string kind = subspace_kind(*canon);
    auto it = std::find_if(memory.subspaces.begin(), memory.subspaces.end(),
                           [&](const Subspace& s) { return s.kind == kind; });
    if (it == memory.subspaces.end()) {
        memory.subspaces.push_back({kind, {}});
        it = std::prev(memory.subspaces.end());
    }
    it->entries.push_back({*canon, 0.0, {}});
}

void assess_proficiency(MemorySpace& memory, std::string_view task, const ProficiencyEvaluator& evaluator,
                        bool cumulative) {
    TaskEntry* entry = memory.find(task);
    if (!entry) throw Error(ErrorCode::UnknownGoal, "task not recorded: " + std::string(task));
    const Assessment a = evaluator(task);
    if (!std::isfinite(a.p) || a.p < 0.0 || a.p > 1.0)
        throw Error(ErrorCode::EvaluatorFailure, "proficiency out of range for " + std::string(task));
    if (a.batch.successes > a.batch.episodes)
        throw Error(ErrorCode::EvaluatorFailure, "probe reports more successes than episodes");
    ProbeReport& r = entry->probe;
    const std::uint64_t successes = r.successes + a.batch.successes;
    if (successes > 0)
        r.mean_steps = (r.mean_steps * static_cast<double>(r.successes) +
                        a.batch.mean_steps * static_cast<double>(a.batch.successes)) /
                       static_cast<double>(successes);
    r.episodes += a.batch.episodes;
    r.successes = successes;
    entry->p = cumulative && r.episodes > 0 ? static_cast<double>(r.successes) / static_cast<double>(r.episodes) : a.p;
}

std::optional<double> lookup(const MemorySpace& memory, std::string_view goal) {
    if (const TaskEntry* e = memory.find(goal)) return e->p;
    return std::nullopt;
}

nlohmann::json save_memory(const MemorySpace& memory) {
    nlohmann::json subspaces = nlohmann::json::array();
    for (const auto& s : memory.subspaces) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : s.entries)
            entries.push_back({{"task", e.task}, {"p", e.p}, {"episodes", e.probe.episodes},
                               {"successes", e.probe.successes}, {"mean_steps", e.probe.mean_steps}});
        subspaces.push_back({{"kind", s.kind}, {"entries", entries}});
    }
    return {{"version", kMemoryVersion}, {"subspaces", subspaces}};
}

MemorySpace load_memory(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("version")) throw Error(ErrorCode::CorruptDocument, "memory: missing version");
    if (doc["version"] != kMemoryVersion)
        throw Error(ErrorCode::SchemaMismatch, "memory: unsupported version " + doc["version"].dump());
    MemorySpace m;
    try {
        for (const auto& s : doc.at("subspaces")) {
            Subspace sub{s.at("kind").get<std::string>(), {}};
            for (const auto& e : s.at("entries")) {
                TaskEntry t{e.at("task").get<std::string>(), e.at("p").get<double>(),
                            {e.at("episodes").get<std::uint64_t>(), e.at("successes").get<std::uint64_t>(),
                             e.at("mean_steps").get<double>()}};
                if (!canonical_task(t.task) || *canonical_task(t.task) != t.task)
                    throw Error(ErrorCode::CorruptDocument, "memory: non-canonical task " + t.task);
                if (subspace_kind(t.task) != sub.kind)
                    throw Error(ErrorCode::CorruptDocument, "memory: " + t.task + " filed under " + sub.kind);
                if (!(t.p >= 0.0 && t.p <= 1.0) || t.probe.successes > t.probe.episodes)
                    throw Error(ErrorCode::CorruptDocument, "memory: inconsistent entry for " + t.task);
                const bool seen_here = std::any_of(sub.entries.begin(), sub.entries.end(),
                                                   [&](const TaskEntry& x) { return x.task == t.task; });
                if (seen_here || m.find(t.task)) throw Error(ErrorCode::CorruptDocument, "memory: duplicate task " + t.task);
                sub.entries.push_back(std::move(t));
            }
            m.subspaces.push_back(std::move(sub));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptDocument, std::string("memory: ") + ex.what());
    }
    return m;
}

}  // namespace tandem
