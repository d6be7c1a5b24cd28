// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/rng.hpp"

namespace tandem {

enum class TileKind : std::uint8_t {
    Grass,
    Tree,
    Stone,
    Coal,
    Iron,
    Diamond,
    Water,
    Sand,
    Lava,
    Path,
    CraftingTable,
    Furnace,
    Plant,
};
inline constexpr std::size_t kTileKinds = 13;

enum class EntityKind : std::uint8_t { Cow, Zombie, Skeleton };
inline constexpr std::size_t kEntityKinds = 3;

enum class Resource : std::uint8_t { Wood, Stone, Coal, Iron, Diamond, Sapling };
inline constexpr std::size_t kResources = 6;

enum class Tool : std::uint8_t { WoodPickaxe, StonePickaxe, IronPickaxe, WoodSword, StoneSword, IronSword };
inline constexpr std::size_t kTools = 6;

enum class Verb : std::uint8_t { DoNothing, Eat, Sleep, Find, Attack, Chop, Mine, Drink, Place, Make, Move };
inline constexpr std::size_t kVerbs = 11;

enum class Direction : std::uint8_t { North, East, South, West };

/// Every object name an action can refer to, in display order.
enum class Noun : std::uint8_t {
    None,
    Tree, Stone, Coal, Iron, Diamond, Cow, Water, CraftingTable, Furnace,
    Zombie, Skeleton, Grass, Plant,
    WoodPickaxe, StonePickaxe, IronPickaxe, WoodSword, StoneSword, IronSword,
    North, East, South, West,
};
inline constexpr std::size_t kNouns = 24;

std::string_view name(TileKind t) noexcept;
std::string_view name(EntityKind e) noexcept;
std::string_view name(Resource r) noexcept;
std::string_view name(Tool t) noexcept;
std::string_view name(Verb v) noexcept;
/// Display name with spaces, e.g. "crafting table".
std::string_view name(Noun n) noexcept;

bool is_walkable(TileKind t) noexcept;

struct Pos {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pos&, const Pos&) = default;
};

Pos offset(Pos p, Direction d) noexcept;
int manhattan(Pos a, Pos b) noexcept;
int chebyshev(Pos a, Pos b) noexcept;

struct Inventory {
    std::array<int, kResources> counts{};
    std::array<bool, kTools> tools{};

    int& operator[](Resource r) { return counts[static_cast<std::size_t>(r)]; }
    int operator[](Resource r) const { return counts[static_cast<std::size_t>(r)]; }
    bool has(Tool t) const { return tools[static_cast<std::size_t>(t)]; }
    bool has_any_sword() const;
    friend bool operator==(const Inventory&, const Inventory&) = default;
};

struct ActionCommand {
    Verb verb = Verb::DoNothing;
    Noun noun = Noun::None;

    friend bool operator==(const ActionCommand&, const ActionCommand&) = default;
};

/// "mine stone", "place crafting table", "do nothing".
std::string to_string(const ActionCommand& a);
/// Inverse of to_string; accepts underscores for spaces. Empty when the
/// text is not a catalog action.
std::optional<ActionCommand> parse_action(std::string_view text);

/// The fixed action catalog. Its order is the tie-break order everywhere.
std::span<const ActionCommand> action_catalog() noexcept;
/// Position of an action in action_catalog().
std::size_t action_index(const ActionCommand& a);

struct AchievementEvent {
    std::string kind;  ///< canonical short-horizon task, e.g. "chop tree"
    std::uint64_t step = 0;
    friend bool operator==(const AchievementEvent&, const AchievementEvent&) = default;
};

/// Canonical short-horizon task vocabulary ("find tree", "make wood pickaxe", ...).
std::span<const std::string> task_vocabulary();
/// Normalizes free text ("Chop Trees", "craft wooden sword") onto the
/// vocabulary; empty when nothing matches.
std::optional<std::string> canonical_task(std::string_view text);
/// The action whose success emits the given canonical task.
ActionCommand task_action(std::string_view canonical);

/// Goal predicate: true iff the event is present and names `goal`.
/// Throws UnknownGoal for text outside the vocabulary.
bool goal_satisfied(const std::optional<AchievementEvent>& event, std::string_view goal);

struct StartContext {
    Inventory inventory;
    bool table_nearby = false;
    bool furnace_nearby = false;
    friend bool operator==(const StartContext&, const StartContext&) = default;
};

struct WorldConfig {
    int width = 12;
    int height = 12;
    /// Tiles placed on top of the grass background.
    int trees = 6;
    int stone = 6;
    int coal = 3;
    int iron = 3;
    int diamond = 1;
    int water = 2;
    int sand = 4;
    int lava = 0;
    int cows = 2;
    int zombies = 2;     ///< only spawned when hazard is set
    int skeletons = 0;   ///< only spawned when hazard is set
    bool hazard = false;
    int max_health = 9;
    int hostile_damage = 2;
    double hostile_move_prob = 0.5;
    double cow_move_prob = 0.2;
    /// Units added per successful chop/mine, indexed by Resource.
    std::array<int, kResources> yields{4, 2, 1, 1, 1, 1};
    StartContext start;
    std::uint64_t seed = 7;

    friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct Entity {
    EntityKind kind = EntityKind::Cow;
    Pos pos;
    friend bool operator==(const Entity&, const Entity&) = default;
};

struct WorldParams {
    int max_health = 9;
    int hostile_damage = 2;
    double hostile_move_prob = 0.5;
    double cow_move_prob = 0.2;
    std::array<int, kResources> yields{4, 2, 1, 1, 1, 1};
    friend bool operator==(const WorldParams&, const WorldParams&) = default;
};

struct WorldState {
    int width = 0;
    int height = 0;
    std::vector<TileKind> grid;
    std::vector<Entity> entities;
    Pos agent_pos;
    Direction agent_facing = Direction::South;
    Inventory inventory;
    int health = 9;
    std::uint64_t step_count = 0;
    Rng rng;
    WorldParams params;

    bool in_bounds(Pos p) const noexcept { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
    TileKind tile(Pos p) const { return grid[static_cast<std::size_t>(p.y * width + p.x)]; }
    void set_tile(Pos p, TileKind t) { grid[static_cast<std::size_t>(p.y * width + p.x)] = t; }
    const Entity* entity_at(Pos p) const noexcept;
    bool alive() const noexcept { return health > 0; }

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Structural check: ranges and pigeonhole. Throws UnsatisfiableConfig.
void check_config(const WorldConfig& cfg);
/// Resources the decomposed chain for `target_terminal` consumes (x repeat),
/// checked against the configured tiles. Throws UnsatisfiableConfig.
void check_solvable_for(const WorldConfig& cfg, std::span<const std::string> chain);

/// Deterministic for (cfg, seed). Every resource tile touches the agent's
/// walkable component.
WorldState generate_world(const WorldConfig& cfg, std::uint64_t seed);

std::vector<ActionCommand> legal_actions(const WorldState& state);
bool is_legal(const WorldState& state, const ActionCommand& action);

struct StepResult {
    WorldState state;
    std::optional<AchievementEvent> event;
};

/// One environment transition. Throws IllegalAction. Unmet preconditions
/// make the action a no-op without an event.
StepResult step(const WorldState& state, const ActionCommand& action);
/// In-place variant used by the hot loops.
std::optional<AchievementEvent> step_in_place(WorldState& state, const ActionCommand& action);

// Shared geometric queries used by captions, features and the performer.

/// True if `noun` names a tile or entity present at `p`.
bool object_at(const WorldState& s, Pos p, Noun noun);
bool object_exists(const WorldState& s, Noun noun);
bool adjacent_to(const WorldState& s, Noun noun);
bool near_station(const WorldState& s, TileKind station);
/// Cells the agent may enter: in bounds, walkable tile, no entity.
bool enterable(const WorldState& s, Pos p);
/// BFS steps from the agent to the nearest cell 4-adjacent to `noun`
/// (0 when already adjacent); empty when unreachable.
std::optional<int> distance_to(const WorldState& s, Noun noun);
/// First step direction of a shortest path to any cell satisfying `goal`;
/// ties broken by neighbor order N, E, S, W. Empty if the agent already
/// satisfies it or none is reachable.
template <class Pred>
std::optional<Direction> first_step_toward(const WorldState& s, Pred goal);
/// Convenience: the next step of find(noun).
std::optional<Direction> find_step(const WorldState& s, Noun noun);

bool has_required_tool(const Inventory& inv, const ActionCommand& a);
/// Units of each resource a make/place action consumes; zeros otherwise.
std::array<int, kResources> recipe_of(const ActionCommand& a);
bool has_recipe_resources(const Inventory& inv, const ActionCommand& a);

}  // namespace tandem

#include "tandem/world_bfs.inl"
