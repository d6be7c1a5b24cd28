// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/memory.hpp"
#include "tandem/text.hpp"
#include "tandem/trace.hpp"
#include "tandem/world.hpp"

namespace tandem {

struct PlannerRequest {
    std::string target;
    std::string observation;
    std::string hint;
    /// Resources and stations already available; prerequisites they cover
    /// are left out of the plan.
    StartContext start;
};

/// A target resolved onto the task vocabulary.
struct ResolvedTarget {
    std::string terminal;  ///< canonical task whose event completes the target
    int repeat = 1;        ///< times the terminal task must be achieved
};

/// Maps free text ("craft stone sword", "Deforestation") to its terminal
/// task. Throws UnknownTarget.
ResolvedTarget resolve_target(std::string_view target);

/// Direct prerequisites of a canonical task, in plan order.
std::span<const std::string> prerequisites(std::string_view task);

struct ReflectionIssue {
    std::size_t position = 0;
    std::string description;
    std::string fix;
    friend bool operator==(const ReflectionIssue&, const ReflectionIssue&) = default;
};

enum class Verdict { Accept, Revise };

struct ReflectionNote {
    std::vector<ReflectionIssue> issues;
    Verdict verdict() const { return issues.empty() ? Verdict::Accept : Verdict::Revise; }
};

struct GoalPlan {
    std::string target;
    std::vector<std::string> g_init;
    ReflectionNote reflection;
    std::vector<std::string> goals;
    std::vector<Executor> tags;
};

struct RouterConfig {
    double threshold = 0.7;
    friend bool operator==(const RouterConfig&, const RouterConfig&) = default;
};

struct PerformerScript {
    std::string goal;
    ActionCommand next_action;
    std::string rationale;
};

struct EmergencyInstruction {
    std::string trigger;
    ActionCommand action;
    std::uint64_t expiry = 1;
};

struct EmergencyConfig {
    int radius = 2;
    std::uint64_t expiry = 1;
    friend bool operator==(const EmergencyConfig&, const EmergencyConfig&) = default;
};

/// The deliberative side. The oracle implementation answers from the
/// dependency table; the remote one asks a chat model.
class PlannerBackend {
public:
    virtual ~PlannerBackend() = default;
    virtual std::string_view name() const = 0;
    virtual std::vector<std::string> decompose(const PlannerRequest& req) = 0;
    virtual ReflectionNote reflect(std::span<const std::string> g_init, const PlannerRequest& req) = 0;
    virtual std::vector<std::string> finalize(const ReflectionNote& note, std::span<const std::string> g_init,
                                              const PlannerRequest& req) = 0;
    virtual PerformerScript perform_step(std::string_view goal, const TextualObservation& obs,
                                         const WorldState& state) = 0;
    virtual std::optional<EmergencyInstruction> emergency(const WorldState& state, const MemorySpace& memory,
                                                          const EmergencyConfig& cfg) = 0;
    virtual std::string infer_target(std::span<const EpisodeTrace> history) = 0;
};

class OracleBackend final : public PlannerBackend {
public:
    std::string_view name() const override { return "oracle"; }
    std::vector<std::string> decompose(const PlannerRequest& req) override;
    ReflectionNote reflect(std::span<const std::string> g_init, const PlannerRequest& req) override;
    std::vector<std::string> finalize(const ReflectionNote& note, std::span<const std::string> g_init,
                                      const PlannerRequest& req) override;
    PerformerScript perform_step(std::string_view goal, const TextualObservation& obs,
                                 const WorldState& state) override;
    std::optional<EmergencyInstruction> emergency(const WorldState& state, const MemorySpace& memory,
                                                  const EmergencyConfig& cfg) override;
    std::string infer_target(std::span<const EpisodeTrace> history) override;
};

/// Dependency-closure chain for a target, pruned by the start context.
std::vector<std::string> oracle_chain(std::string_view target, const StartContext& start = {});
/// Checks prerequisites-before-use, terminal reachability and multiplicity.
ReflectionNote oracle_reflect(std::span<const std::string> plan, std::string_view target,
                              const StartContext& start = {});

/// RL iff the recorded proficiency is >= threshold.
std::vector<Executor> route(std::span<const std::string> goals, const MemorySpace& memory, const RouterConfig& cfg);

/// decompose, reflect (unless skipped), finalize, then route.
GoalPlan build_plan(PlannerBackend& backend, const PlannerRequest& req, const MemorySpace& memory,
                    const RouterConfig& router, bool skip_reflection = false);

/// Targets infer_target chooses between: the scenario targets and every
/// vocabulary task.
std::vector<std::string> candidate_targets();

}  // namespace tandem
