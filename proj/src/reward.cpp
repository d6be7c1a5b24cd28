// SPDX-License-Identifier: Apache-2.0
#include "tandem/reward.hpp"

#include <algorithm>
#include <cmath>

#include "tandem/error.hpp"

namespace tandem {

void validate(const RewardWeights& w) {
    for (double g : {w.gamma1, w.gamma2, w.gamma3})
        if (!std::isfinite(g) || g < 0.0) throw Error(ErrorCode::ConfigError, "reward gammas must be finite and >= 0");
    if (!std::isfinite(w.beta) || w.beta < 0.0 || w.beta >= 1.0)
        throw Error(ErrorCode::ConfigError, "reward.beta must lie in [0, 1)");
}

int target_reward(const std::optional<AchievementEvent>& event, std::string_view target) {
    return goal_satisfied(event, target) ? 1 : 0;
}

std::size_t SubgoalLedger::paid_count() const {
    return static_cast<std::size_t>(std::count(paid_.begin(), paid_.end(), true));
}

double subgoal_reward(const std::optional<AchievementEvent>& event, std::span<const std::string> plan,
                      SubgoalLedger& ledger) {
    if (!event || plan.size() < 2) return 0.0;
    for (std::size_t i = 0; i + 1 < plan.size(); ++i) {
        if (ledger.paid(i) || !goal_satisfied(event, plan[i])) continue;
        ledger.mark(i);
        return 1.0;
    }
    return 0.0;
}

double proximity_reward(const Caption& caption, std::string_view goal, const RewardWeights& weights,
                        const EmbedConfig& embed) {
    const auto goal_tokens = tokenize(goal, embed);
    const double c = cosine(embed_text(caption.tokens, embed), embed_text(goal_tokens, embed));
    return c > weights.beta ? c : 0.0;
}

double proximity_reward(const WorldState& before, const ActionCommand& action, const WorldState& after,
                        std::string_view goal, const RewardWeights& weights, const EmbedConfig& embed) {
    return proximity_reward(caption_transition(before, action, after), goal, weights, embed);
}

RewardBreakdown combine(double r_target, double r_sub, double r_proxi, const RewardWeights& weights) {
    return {r_target, r_sub, r_proxi, weights.gamma1 * r_target + weights.gamma2 * r_sub + weights.gamma3 * r_proxi};
}

EpisodeReward::EpisodeReward(std::vector<std::string> plan, RewardWeights weights, EmbedConfig embed)
    : plan_(std::move(plan)), weights_(weights), embed_(std::move(embed)), ledger_(plan_.size()) {
    for (const auto& g : plan_) goal_vectors_.push_back(embed_text(tokenize(g, embed_), embed_));
}

RewardBreakdown EpisodeReward::step(const WorldState& before, const ActionCommand& action, const WorldState& after,
                                    const std::optional<AchievementEvent>& event, std::size_t active) {
    if (plan_.empty() || active >= plan_.size()) return {};
    const bool terminal_active = active + 1 == plan_.size();
    const double r_target = terminal_active ? target_reward(event, plan_.back()) : 0.0;
    const double r_sub = subgoal_reward(event, plan_, ledger_);
    double r_proxi = 0.0;
    if (weights_.gamma3 != 0.0) {
        const Caption caption = caption_transition(before, action, after);
        const double c = cosine(embed_text(caption.tokens, embed_), goal_vectors_[active]);
        if (c > weights_.beta) {
            bool fresh = false;
            if (caption.tokens.size() > 1 && caption.tokens[1] == "closer") {
                // A closer caption implies the object is reachable from `after`.
                const int d = distance_to(after, action.noun).value_or(0);
                const auto [it, inserted] = closest_.try_emplace({active, action.noun}, d);
                fresh = inserted || d < it->second;
                it->second = std::min(it->second, d);
            } else {
                fresh = paid_captions_.emplace(active, caption.raw).second;
            }
            if (fresh) r_proxi = c;
        }
    }
    return combine(r_target, r_sub, r_proxi, weights_);
}

}  // namespace tandem
