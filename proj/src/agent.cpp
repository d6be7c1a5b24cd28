// SPDX-License-Identifier: Apache-2.0
#include "tandem/agent.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tandem/error.hpp"

namespace tandem {

namespace {

bool object_directed(Verb v) {
    switch (v) {
        case Verb::Find:
        case Verb::Chop:
        case Verb::Mine:
        case Verb::Attack:
        case Verb::Eat:
        case Verb::Drink: return true;
        default: return false;
    }
}

/// Object the featurizer measures direction and distance to.
Noun goal_object(const ActionCommand& a) {
    if (object_directed(a.verb)) return a.noun;
    if (a.verb == Verb::Make || (a.verb == Verb::Place && a.noun == Noun::Furnace)) return Noun::CraftingTable;
    return Noun::None;
}

int octant(int dx, int dy) {
    const int sx = (dx > 0) - (dx < 0);
    const int sy = (dy > 0) - (dy < 0);
    static constexpr int table[3][3] = {
        // sy = -1, 0, +1 by rows; sx = -1, 0, +1 by columns
        {7, 0, 1},
        {6, kDirectionNone, 2},
        {5, 4, 3},
    };
    return table[sy + 1][sx + 1];
}

bool hostile_adjacent(const WorldState& s) {
    return std::any_of(s.entities.begin(), s.entities.end(), [&](const Entity& e) {
        return e.kind != EntityKind::Cow && manhattan(e.pos, s.agent_pos) == 1;
    });
}

void check_finite(double v) {
    if (!std::isfinite(v) || std::abs(v) > 1e6)
        throw Error(ErrorCode::TrainingDiverged, "Q-value out of bounds: " + std::to_string(v));
}

}  // namespace

std::string StateFeatures::key() const {
    return skill + '|' + std::to_string(predicates) + '|' + std::to_string(direction) + '|' + std::to_string(distance);
}

StateFeatures featurize(const TextualObservation& obs, const WorldState& state, std::string_view goal) {
    const auto canon = canonical_task(goal);
    if (!canon) throw Error(ErrorCode::UnknownGoal, std::string(goal));
    const ActionCommand a = task_action(*canon);
    StateFeatures f;
    f.skill = object_directed(a.verb) ? std::string(name(a.verb)) : *canon;
    f.target = object_directed(a.verb) ? a.noun : Noun::None;

    const Noun object = goal_object(a);
    const bool near_table = near_station(state, TileKind::CraftingTable);
    bool adjacent = false;
    if (object_directed(a.verb)) adjacent = adjacent_to(state, object);
    else if (object == Noun::CraftingTable) adjacent = near_table;
    // Only predicates that bear on the goal's own action enter the key, so a
    // skill learned beside one station still applies beside another.
    const bool crafting = a.verb == Verb::Make || a.verb == Verb::Place;
    if (adjacent) f.predicates |= kAdjacentToTarget;
    if (object_directed(a.verb) && has_required_tool(state.inventory, a)) f.predicates |= kHasRequiredTool;
    if (crafting && has_recipe_resources(state.inventory, a)) f.predicates |= kHasRecipeResources;
    if (crafting && near_table) f.predicates |= kNearTable;
    if (crafting && near_station(state, TileKind::Furnace)) f.predicates |= kNearFurnace;
    if (hostile_adjacent(state)) f.predicates |= kHostileAdjacent;

    if (object != Noun::None) {
        const std::string_view wanted = name(object);
        int best = -1;
        for (const auto& o : obs.objects) {
            if (o.name != wanted) continue;
            const int d = std::abs(o.dx) + std::abs(o.dy);
            if (best != -1 && d >= best) continue;
            best = d;
            f.direction = octant(o.dx, o.dy);
        }
        if (best >= 0) f.distance = std::min(best, 3);
    }
    return f;
}

void validate(const LearnerConfig& cfg) {
    const auto fail = [](const char* why) { throw Error(ErrorCode::ConfigError, why); };
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) fail("learner.alpha must lie in (0, 1]");
    if (!(cfg.discount >= 0.0 && cfg.discount < 1.0)) fail("learner.discount must lie in [0, 1)");
    if (!(cfg.epsilon_end >= 0.05 && cfg.epsilon_end <= cfg.epsilon_start && cfg.epsilon_start <= 1.0))
        fail("learner epsilon schedule must satisfy 0.05 <= end <= start <= 1");
    if (!(cfg.decay_fraction > 0.0 && cfg.decay_fraction <= 1.0)) fail("learner.decay_fraction must lie in (0, 1]");
}

double epsilon_at(const LearnerConfig& cfg, std::uint64_t step) {
    const double horizon = cfg.decay_fraction * static_cast<double>(cfg.budget);
    if (horizon <= 0.0) return cfg.epsilon_end;
    const double t = std::min(1.0, static_cast<double>(step) / horizon);
    return cfg.epsilon_start + t * (cfg.epsilon_end - cfg.epsilon_start);
}

std::size_t action_slot(const ActionCommand& a, const StateFeatures& f) {
    if (f.target != Noun::None && a.noun == f.target) return kCatalogSize + static_cast<std::size_t>(a.verb);
    return action_index(a);
}

std::string slot_name(std::size_t slot) {
    if (slot < kCatalogSize) return to_string(action_catalog()[slot]);
    return std::string(name(static_cast<Verb>(slot - kCatalogSize))) + " <target>";
}

double PolicyTable::value(const StateFeatures& f, const ActionCommand& a) const {
    const auto it = rows.find(f.key());
    return it == rows.end() ? 0.0 : it->second[action_slot(a, f)].value;
}

ActionCommand select_action(const PolicyTable& policy, const StateFeatures& f, std::span<const ActionCommand> legal,
                            double epsilon, Rng& rng) {
    if (legal.empty()) return {};
    if (epsilon > 0.0 && uniform_unit(rng) < epsilon) return legal[uniform_index(rng, legal.size())];
    const auto it = policy.rows.find(f.key());
    if (it == policy.rows.end()) return legal.front();
    // `legal` arrives in catalog order, so strict > keeps the lowest index.
    std::size_t best = 0;
    double best_value = it->second[action_slot(legal[0], f)].value;
    for (std::size_t i = 1; i < legal.size(); ++i) {
        const double v = it->second[action_slot(legal[i], f)].value;
        if (v > best_value) {
            best = i;
            best_value = v;
        }
    }
    return legal[best];
}

void update(PolicyTable& policy, const Transition& t, const LearnerConfig& cfg) {
    check_finite(t.reward);
    double bootstrap = 0.0;
    if (!t.terminal) {
        if (const auto next = policy.rows.find(t.next.key()); next != policy.rows.end()) {
            // Catalog slots naming the next target are shadowed by its
            // "<verb> <target>" slots and never selected there.
            const auto catalog = action_catalog();
            bootstrap = next->second[0].value;
            for (std::size_t i = 1; i < kActionSlots; ++i) {
                if (i < kCatalogSize && t.next.target != Noun::None && catalog[i].noun == t.next.target) continue;
                bootstrap = std::max(bootstrap, next->second[i].value);
            }
        }
    }
    QCell& cell = policy.rows[t.features.key()][action_slot(t.action, t.features)];
    cell.value += cfg.alpha * (t.reward + cfg.discount * bootstrap - cell.value);
    cell.visits += 1;
    check_finite(cell.value);
}

std::string feature_schema_hash() {
    static const std::string schema =
        "skill|predicates:adjacent,tool(object),recipe,table,furnace(craft),hostile|direction:9|distance:5|slots:" +
        std::to_string(kActionSlots);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : schema) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json save_policy(const PolicyTable& policy) {
    // Sorted so equal tables serialize to equal bytes.
    const std::map<std::string, QRow> ordered(policy.rows.begin(), policy.rows.end());
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, row] : ordered) {
        for (std::size_t slot = 0; slot < kActionSlots; ++slot) {
            if (row[slot] == QCell{}) continue;
            entries.push_back({{"features", key}, {"action", slot_name(slot)}, {"value", row[slot].value},
                               {"visits", row[slot].visits}});
        }
    }
    return {{"version", kPolicyVersion}, {"feature_schema_hash", feature_schema_hash()}, {"entries", entries}};
}

PolicyTable load_policy(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("version")) throw Error(ErrorCode::CorruptDocument, "policy: missing version");
    if (doc["version"] != kPolicyVersion)
        throw Error(ErrorCode::SchemaMismatch, "policy: unsupported version " + doc["version"].dump());
    if (doc.value("feature_schema_hash", std::string()) != feature_schema_hash())
        throw Error(ErrorCode::SchemaMismatch, "policy: feature schema differs from this build");
    static const std::map<std::string, std::size_t> slots = [] {
        std::map<std::string, std::size_t> m;
        for (std::size_t s = 0; s < kActionSlots; ++s) m.emplace(slot_name(s), s);
        return m;
    }();
    PolicyTable policy;
    try {
        for (const auto& e : doc.at("entries")) {
            const auto slot = slots.find(e.at("action").get<std::string>());
            if (slot == slots.end()) throw Error(ErrorCode::CorruptDocument, "policy: unknown action " + e.at("action").dump());
            QCell& cell = policy.rows[e.at("features").get<std::string>()][slot->second];
            cell.value = e.at("value").get<double>();
            cell.visits = e.at("visits").get<std::uint64_t>();
            if (!std::isfinite(cell.value)) throw Error(ErrorCode::CorruptDocument, "policy: non-finite value");
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptDocument, std::string("policy: ") + ex.what());
    }
    return policy;
}

}  // namespace tandem
