// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

#include "tandem/world.hpp"

namespace tandem {

/// One of the ten bundled crafting scenarios.
struct Scenario {
    int id = 0;
    std::string title;
    std::string target;  ///< text handed to the planner
    StartContext start;
    bool hazard = false;
};

std::span<const Scenario> scenarios();
/// Throws ConfigError for ids outside 1..10.
const Scenario& scenario(int id);

/// World config for a scenario: the base config with its start context and
/// hazard flag applied.
WorldConfig scenario_world(const WorldConfig& base, const Scenario& s);

}  // namespace tandem
