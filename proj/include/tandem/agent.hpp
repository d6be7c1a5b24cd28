// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "json.hpp"

#include "tandem/rng.hpp"
#include "tandem/text.hpp"
#include "tandem/world.hpp"

namespace tandem {

enum Predicate : unsigned {
    kAdjacentToTarget = 1u << 0,
    kHasRequiredTool = 1u << 1,
    kHasRecipeResources = 1u << 2,
    kNearTable = 1u << 3,
    kNearFurnace = 1u << 4,
    kHostileAdjacent = 1u << 5,
};

inline constexpr int kDirectionNone = 8;  // 0..7 = N, NE, E, SE, S, SW, W, NW
inline constexpr int kDistanceUnseen = 4;  // buckets 0, 1, 2, 3+ then unseen

struct StateFeatures {
    /// Verb for object-directed goals ("mine"), the whole goal otherwise.
    std::string skill;
    unsigned predicates = 0;
    int direction = kDirectionNone;
    int distance = kDistanceUnseen;
    /// Goal object for object-directed skills. Not part of the key: actions
    /// on it are stored in the skill's shared "<target>" slots.
    Noun target = Noun::None;

    std::string key() const;
    friend bool operator==(const StateFeatures&, const StateFeatures&) = default;
};

/// Throws UnknownGoal for text outside the task vocabulary.
StateFeatures featurize(const TextualObservation& obs, const WorldState& state, std::string_view goal);

struct LearnerConfig {
    double alpha = 0.1;
    double discount = 0.6;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double decay_fraction = 0.8;  ///< share of the budget over which epsilon decays
    std::uint64_t budget = 50'000;
    friend bool operator==(const LearnerConfig&, const LearnerConfig&) = default;
};

/// Throws ConfigError on out-of-range fields.
void validate(const LearnerConfig& cfg);
/// Linear schedule clamped at epsilon_end.
double epsilon_at(const LearnerConfig& cfg, std::uint64_t step);

struct QCell {
    double value = 0.0;
    std::uint64_t visits = 0;
    friend bool operator==(const QCell&, const QCell&) = default;
};

/// Catalog actions followed by one "<verb> <target>" slot per verb.
inline constexpr std::size_t kCatalogSize = 37;
inline constexpr std::size_t kActionSlots = kCatalogSize + kVerbs;
using QRow = std::array<QCell, kActionSlots>;

/// Slot an action occupies under the given features.
std::size_t action_slot(const ActionCommand& a, const StateFeatures& f);
/// Display form of a slot, e.g. "mine stone" or "mine <target>".
std::string slot_name(std::size_t slot);

struct PolicyTable {
    std::unordered_map<std::string, QRow> rows;

    double value(const StateFeatures& f, const ActionCommand& a) const;
    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;
};

/// Epsilon-greedy over `legal`; greedy ties go to the lowest catalog index.
ActionCommand select_action(const PolicyTable& policy, const StateFeatures& f, std::span<const ActionCommand> legal,
                            double epsilon, Rng& rng);

struct Transition {
    StateFeatures features;
    ActionCommand action;
    double reward = 0.0;
    StateFeatures next;
    bool terminal = false;
};

/// One-step Q-learning backup. Throws TrainingDiverged past |Q| = 1e6.
void update(PolicyTable& policy, const Transition& t, const LearnerConfig& cfg);

inline constexpr int kPolicyVersion = 1;
std::string feature_schema_hash();
nlohmann::json save_policy(const PolicyTable& policy);
/// Throws SchemaMismatch or CorruptDocument.
PolicyTable load_policy(const nlohmann::json& doc);

}  // namespace tandem
