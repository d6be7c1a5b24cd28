// SPDX-License-Identifier: Apache-2.0
#include "tandem/tasks.hpp"

#include <vector>

#include "tandem/error.hpp"

namespace tandem {

namespace {

StartContext advanced_smelting() {
    StartContext s;
    s.table_nearby = true;
    s.inventory[Resource::Wood] = 1;
    s.inventory[Resource::Stone] = 1;
    s.inventory[Resource::Coal] = 1;
    s.inventory[Resource::Iron] = 1;
    s.inventory.tools[static_cast<std::size_t>(Tool::WoodPickaxe)] = true;
    s.inventory.tools[static_cast<std::size_t>(Tool::StonePickaxe)] = true;
    return s;
}

StartContext table_and_wood() {
    StartContext s;
    s.table_nearby = true;
    s.inventory[Resource::Wood] = 2;
    return s;
}

std::vector<Scenario> build() {
    return {
        {1, "Craft stone sword", "craft stone sword", {}, false},
        {2, "Mine iron", "mine iron", {}, false},
        {3, "Attack cow", "attack cow", {}, false},
        {4, "Deforestation", "deforestation", {}, false},
        {5, "Mine diamond", "mine diamond", {}, false},
        {6, "Craft iron sword", "craft iron sword", {}, false},
        {7, "Attack cow with hazards", "attack cow", {}, true},
        {8, "Mine diamond from smelting start", "mine diamond", advanced_smelting(), false},
        // The bundled step list for this scenario ends in a stone sword, so
        // that is the target used here.
        {9, "Craft stone sword from table start", "craft stone sword", table_and_wood(), false},
        {10, "Craft wood sword", "craft wood sword", {}, false},
    };
}

}  // namespace

std::span<const Scenario> scenarios() {
    static const std::vector<Scenario> all = build();
    return all;
}

const Scenario& scenario(int id) {
    if (id < 1 || id > static_cast<int>(scenarios().size()))
        throw Error(ErrorCode::ConfigError, "task id must be 1..10, got " + std::to_string(id));
    return scenarios()[static_cast<std::size_t>(id - 1)];
}

WorldConfig scenario_world(const WorldConfig& base, const Scenario& s) {
    WorldConfig cfg = base;
    cfg.start = s.start;
    cfg.hazard = s.hazard;
    return cfg;
}

}  // namespace tandem
