// SPDX-License-Identifier: Apache-2.0
// Hand-built worlds for tests that need an exact layout.
#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>

#include "tandem/world.hpp"

namespace tandem::testing {

/// All-grass world with the agent at `agent`, full health, seeded rng.
inline WorldState blank_world(int width = 9, int height = 9, Pos agent = {4, 4}) {
    WorldState s;
    s.width = width;
    s.height = height;
    s.grid.assign(static_cast<std::size_t>(width * height), TileKind::Grass);
    s.agent_pos = agent;
    s.rng.seed(1);
    return s;
}

inline void give(WorldState& s, Tool t) { s.inventory.tools[static_cast<std::size_t>(t)] = true; }

inline std::filesystem::path source_path(const std::string& rel) {
    return std::filesystem::path(TANDEM_SOURCE_DIR) / rel;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("tandem_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace tandem::testing
