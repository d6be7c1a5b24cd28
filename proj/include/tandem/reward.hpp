// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <span>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/text.hpp"
#include "tandem/world.hpp"

namespace tandem {

struct RewardWeights {
    double gamma1 = 1.0;  ///< target
    double gamma2 = 0.5;  ///< sub-goal
    double gamma3 = 0.2;  ///< proximity
    double beta = 0.35;   ///< proximity gate
    friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

/// Throws ConfigError unless weights are finite, non-negative and beta in [0, 1).
void validate(const RewardWeights& w);

struct RewardBreakdown {
    double r_target = 0.0;
    double r_sub = 0.0;
    double r_proxi = 0.0;
    double total = 0.0;
    friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

/// 1 iff the event satisfies the target's terminal achievement.
int target_reward(const std::optional<AchievementEvent>& event, std::string_view target);

/// Tracks which plan positions already paid. Positions, not strings, are
/// tracked so a plan that repeats a task pays once per occurrence.
class SubgoalLedger {
public:
    explicit SubgoalLedger(std::size_t plan_size = 0) : paid_(plan_size, false) {}
    bool paid(std::size_t position) const { return paid_.at(position); }
    void mark(std::size_t position) { paid_.at(position) = true; }
    std::size_t size() const { return paid_.size(); }
    std::size_t paid_count() const;

private:
    std::vector<bool> paid_;
};

/// Pays 1 for the first unpaid sub-goal position (every position but the
/// last) whose goal the event satisfies, and marks it.
double subgoal_reward(const std::optional<AchievementEvent>& event, std::span<const std::string> plan,
                      SubgoalLedger& ledger);

/// Cosine between the transition caption and the goal, zeroed at or below beta.
double proximity_reward(const WorldState& before, const ActionCommand& action, const WorldState& after,
                        std::string_view goal, const RewardWeights& weights, const EmbedConfig& embed = {});
/// Same gate applied to an already computed caption.
double proximity_reward(const Caption& caption, std::string_view goal, const RewardWeights& weights,
                        const EmbedConfig& embed = {});

RewardBreakdown combine(double r_target, double r_sub, double r_proxi, const RewardWeights& weights);

/// Per-episode reward state: the plan, its ledger and cached goal embeddings.
class EpisodeReward {
public:
    EpisodeReward(std::vector<std::string> plan, RewardWeights weights, EmbedConfig embed = {});

    /// Reward for one transition while plan[active] is the current goal. The
    /// target component pays only once the terminal goal is active. Each
    /// (goal position, caption) pair earns proximity at most once, except
    /// approach captions, which pay whenever the agent reaches a new closest
    /// distance to that object. Oscillating or repeating cannot farm either.
    RewardBreakdown step(const WorldState& before, const ActionCommand& action, const WorldState& after,
                         const std::optional<AchievementEvent>& event, std::size_t active);

    const SubgoalLedger& ledger() const { return ledger_; }

private:
    std::vector<std::string> plan_;
    RewardWeights weights_;
    EmbedConfig embed_;
    std::vector<TokenVector> goal_vectors_;
    SubgoalLedger ledger_;
    std::set<std::pair<std::size_t, std::string>> paid_captions_;
    std::map<std::pair<std::size_t, Noun>, int> closest_;
};

}  // namespace tandem
