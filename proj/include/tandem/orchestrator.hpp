// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tandem/agent.hpp"
#include "tandem/memory.hpp"
#include "tandem/planner.hpp"
#include "tandem/reward.hpp"
#include "tandem/tasks.hpp"
#include "tandem/trace.hpp"

namespace tandem {

enum class Mode { Full, Variation1, Variation2, Variation3, Variation4, Variation5 };

/// Accepts "full" (alias "dsadf") and "variation1".."variation5". Throws InvalidMode.
Mode parse_mode(std::string_view text);
std::string_view to_string(Mode m) noexcept;

/// What each mode switches on.
struct Wiring {
    bool decompose = true;    ///< false: the goal list is the literal target
    bool reflect = true;
    bool shaped_reward = true;
    bool rl = true;           ///< RL may execute goals
    bool performer = true;    ///< the planner backend may execute goals
    bool emergency = true;
    friend bool operator==(const Wiring&, const Wiring&) = default;
};
Wiring apply_variation(Mode mode);

struct RunConfig {
    Mode mode = Mode::Full;
    std::uint64_t seed = 7;
    int episodes = 60;
    int step_cap = 300;
    int train_episode_cap = 50;
    /// Begin each training episode at a drawn plan position, reached by the
    /// scripted performer.
    bool exploring_starts = true;
    int probe_episodes = 20;
    int probe_steps = 60;
    int curve_points = 10;      ///< 0 disables the training curve
    int curve_episodes = 20;
    int curve_task = 0;         ///< 0: the first training task
    int parallel = 1;
    WorldConfig world;
    RewardWeights reward;
    LearnerConfig learner;
    RouterConfig router;
    EmergencyConfig emergency;
    EmbedConfig embed;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct CurvePoint {
    std::uint64_t step = 0;
    std::uint64_t successes = 0;
    std::uint64_t episodes = 0;
};

struct TrainResult {
    PolicyTable policy;
    MemorySpace memory;
    std::vector<CurvePoint> curve;
    std::uint64_t steps = 0;
    std::uint64_t episodes = 0;
};

/// Goal plan for a scenario under a mode's wiring.
GoalPlan plan_for(const Scenario& scenario, Mode mode, PlannerBackend& backend, const MemorySpace& memory,
                  const RunConfig& cfg);

/// Turns probe evidence into a proficiency, e.g. a model's judgment.
using ProbeJudge = std::function<Assessment(std::string_view task, const ProbeReport& evidence)>;

/// Progressive-reward training over the listed scenarios, interleaved by
/// episode, followed by memory recording and proficiency probes. Without a
/// judge the probe's success ratio is the proficiency.
TrainResult train(std::span<const int> task_ids, const RunConfig& cfg, PlannerBackend& backend,
                  const ProbeJudge* judge = nullptr);

/// Empirical probe: the oracle walks the prerequisites, then the frozen
/// greedy policy gets probe_steps to achieve `task`.
Assessment probe_proficiency(const PolicyTable& policy, std::string_view task, const RunConfig& cfg);

/// One inference episode (the alternating-execution loop) from `start`.
EpisodeTrace run_episode(WorldState start, const GoalPlan& plan, const PolicyTable& policy,
                         const MemorySpace& memory, const RunConfig& cfg, PlannerBackend& backend,
                         std::uint64_t episode = 0);

/// Inference episode on a freshly generated world for the scenario.
EpisodeTrace run_inference(const Scenario& scenario, const PolicyTable& policy, const MemorySpace& memory,
                           const RunConfig& cfg, PlannerBackend& backend, std::uint64_t episode = 0);

struct MetricsReport {
    int task = 0;
    std::string mode;
    std::uint64_t episodes = 0;
    std::uint64_t successes = 0;
    std::uint64_t deaths = 0;
    std::uint64_t total_steps = 0;
    double completion_sum = 0.0;  ///< sum over episodes of completed / |G|
    double tsr = 0.0;
    double completion_rate = 0.0;
    double survival_rate = 0.0;
    double mean_steps = 0.0;
    std::vector<EpisodeTrace> traces;
};

MetricsReport evaluate(const Scenario& scenario, const PolicyTable& policy, const MemorySpace& memory,
                       const RunConfig& cfg, PlannerBackend& backend);

/// Builds the aggregate fields from per-episode traces.
MetricsReport summarize(std::vector<EpisodeTrace> traces, int task, std::string mode);

/// Percentage of num/den rounded half-up at two decimals, e.g. "88.33".
std::string percent_2dp(std::uint64_t num, std::uint64_t den);

nlohmann::json metrics_json(const MetricsReport& m, std::string_view backend);
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& m, std::string_view backend);

/// Mean over trials of placed / total, as a percentage. Throws EmptyTrials.
double compute_aosr(std::span<const std::pair<int, int>> trials);

}  // namespace tandem
