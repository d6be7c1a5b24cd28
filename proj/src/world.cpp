// SPDX-License-Identifier: Apache-2.0
#include "tandem/world.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <numeric>
#include <sstream>

#include "tandem/error.hpp"

namespace tandem {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnsatisfiableConfig: return "UnsatisfiableConfig";
        case ErrorCode::IllegalAction: return "IllegalAction";
        case ErrorCode::UnknownGoal: return "UnknownGoal";
        case ErrorCode::UnknownTarget: return "UnknownTarget";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::CorruptDocument: return "CorruptDocument";
        case ErrorCode::EvaluatorFailure: return "EvaluatorFailure";
        case ErrorCode::RemoteProtocolError: return "RemoteProtocolError";
        case ErrorCode::UnparseableReply: return "UnparseableReply";
        case ErrorCode::IrreparablePlan: return "IrreparablePlan";
        case ErrorCode::NoPathToGoal: return "NoPathToGoal";
        case ErrorCode::NoSignal: return "NoSignal";
        case ErrorCode::TrainingDiverged: return "TrainingDiverged";
        case ErrorCode::InvalidMode: return "InvalidMode";
        case ErrorCode::EmptyTrials: return "EmptyTrials";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

std::string_view name(TileKind t) noexcept {
    static constexpr std::array<std::string_view, kTileKinds> names{
        "grass", "tree", "stone", "coal", "iron", "diamond", "water",
        "sand", "lava", "path", "crafting table", "furnace", "plant"};
    return names[static_cast<std::size_t>(t)];
}

std::string_view name(EntityKind e) noexcept {
    static constexpr std::array<std::string_view, kEntityKinds> names{"cow", "zombie", "skeleton"};
    return names[static_cast<std::size_t>(e)];
}

std::string_view name(Resource r) noexcept {
    static constexpr std::array<std::string_view, kResources> names{"wood", "stone", "coal", "iron", "diamond", "sapling"};
    return names[static_cast<std::size_t>(r)];
}

std::string_view name(Tool t) noexcept {
    static constexpr std::array<std::string_view, kTools> names{
        "wood pickaxe", "stone pickaxe", "iron pickaxe", "wood sword", "stone sword", "iron sword"};
    return names[static_cast<std::size_t>(t)];
}

std::string_view name(Verb v) noexcept {
    static constexpr std::array<std::string_view, kVerbs> names{
        "do nothing", "eat", "sleep", "find", "attack", "chop", "mine", "drink", "place", "make", "move"};
    return names[static_cast<std::size_t>(v)];
}

std::string_view name(Noun n) noexcept {
    static constexpr std::array<std::string_view, kNouns> names{
        "", "tree", "stone", "coal", "iron", "diamond", "cow", "water", "crafting table", "furnace",
        "zombie", "skeleton", "grass", "plant",
        "wood pickaxe", "stone pickaxe", "iron pickaxe", "wood sword", "stone sword", "iron sword",
        "north", "east", "south", "west"};
    return names[static_cast<std::size_t>(n)];
}

bool is_walkable(TileKind t) noexcept {
    return t == TileKind::Grass || t == TileKind::Sand || t == TileKind::Path || t == TileKind::Plant;
}

Pos offset(Pos p, Direction d) noexcept {
    switch (d) {
        case Direction::North: return {p.x, p.y - 1};
        case Direction::East: return {p.x + 1, p.y};
        case Direction::South: return {p.x, p.y + 1};
        case Direction::West: return {p.x - 1, p.y};
    }
    return p;
}

int manhattan(Pos a, Pos b) noexcept { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
int chebyshev(Pos a, Pos b) noexcept { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

bool Inventory::has_any_sword() const {
    return has(Tool::WoodSword) || has(Tool::StoneSword) || has(Tool::IronSword);
}

namespace {

constexpr std::array<Direction, 4> kNesw{Direction::North, Direction::East, Direction::South, Direction::West};

std::vector<ActionCommand> build_catalog() {
    std::vector<ActionCommand> c;
    c.push_back({Verb::DoNothing, Noun::None});
    for (Noun n : {Noun::Plant, Noun::Cow}) c.push_back({Verb::Eat, n});
    c.push_back({Verb::Sleep, Noun::None});
    for (Noun n : {Noun::Tree, Noun::Stone, Noun::Coal, Noun::Iron, Noun::Diamond, Noun::Cow, Noun::Water,
                   Noun::CraftingTable, Noun::Furnace})
        c.push_back({Verb::Find, n});
    for (Noun n : {Noun::Zombie, Noun::Skeleton, Noun::Cow}) c.push_back({Verb::Attack, n});
    for (Noun n : {Noun::Tree, Noun::Grass}) c.push_back({Verb::Chop, n});
    for (Noun n : {Noun::Stone, Noun::Coal, Noun::Iron, Noun::Diamond}) c.push_back({Verb::Mine, n});
    c.push_back({Verb::Drink, Noun::Water});
    for (Noun n : {Noun::Stone, Noun::CraftingTable, Noun::Furnace, Noun::Plant}) c.push_back({Verb::Place, n});
    for (Noun n : {Noun::WoodPickaxe, Noun::StonePickaxe, Noun::IronPickaxe, Noun::WoodSword, Noun::StoneSword,
                   Noun::IronSword})
        c.push_back({Verb::Make, n});
    for (Noun n : {Noun::North, Noun::East, Noun::South, Noun::West}) c.push_back({Verb::Move, n});
    return c;
}

const std::vector<ActionCommand>& catalog() {
    static const std::vector<ActionCommand> c = build_catalog();
    return c;
}

std::vector<std::string> build_vocabulary() {
    std::vector<std::string> v;
    for (const auto& a : catalog()) {
        if (a.verb == Verb::DoNothing || a.verb == Verb::Move) continue;
        v.push_back(to_string(a));
    }
    return v;
}

std::optional<TileKind> tile_of(Noun n) {
    switch (n) {
        case Noun::Tree: return TileKind::Tree;
        case Noun::Stone: return TileKind::Stone;
        case Noun::Coal: return TileKind::Coal;
        case Noun::Iron: return TileKind::Iron;
        case Noun::Diamond: return TileKind::Diamond;
        case Noun::Water: return TileKind::Water;
        case Noun::CraftingTable: return TileKind::CraftingTable;
        case Noun::Furnace: return TileKind::Furnace;
        case Noun::Grass: return TileKind::Grass;
        case Noun::Plant: return TileKind::Plant;
        default: return std::nullopt;
    }
}

std::optional<EntityKind> entity_of(Noun n) {
    switch (n) {
        case Noun::Cow: return EntityKind::Cow;
        case Noun::Zombie: return EntityKind::Zombie;
        case Noun::Skeleton: return EntityKind::Skeleton;
        default: return std::nullopt;
    }
}

std::optional<Tool> tool_of(Noun n) {
    switch (n) {
        case Noun::WoodPickaxe: return Tool::WoodPickaxe;
        case Noun::StonePickaxe: return Tool::StonePickaxe;
        case Noun::IronPickaxe: return Tool::IronPickaxe;
        case Noun::WoodSword: return Tool::WoodSword;
        case Noun::StoneSword: return Tool::StoneSword;
        case Noun::IronSword: return Tool::IronSword;
        default: return std::nullopt;
    }
}

Resource mined_resource(Noun n) {
    switch (n) {
        case Noun::Stone: return Resource::Stone;
        case Noun::Coal: return Resource::Coal;
        case Noun::Iron: return Resource::Iron;
        default: return Resource::Diamond;
    }
}

enum class Tier { Wood, Stone, Iron };

Tier tier_of(Noun n) {
    switch (n) {
        case Noun::StonePickaxe:
        case Noun::StoneSword: return Tier::Stone;
        case Noun::IronPickaxe:
        case Noun::IronSword: return Tier::Iron;
        default: return Tier::Wood;
    }
}

bool is_hostile(EntityKind k) { return k == EntityKind::Zombie || k == EntityKind::Skeleton; }

std::string lowercase_words(std::string_view text) {
    std::string out;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
        else out.push_back(' ');
    }
    return out;
}

// Position of the first 4-neighbor (N, E, S, W) holding `noun`.
std::optional<Pos> adjacent_object(const WorldState& s, Noun noun) {
    for (Direction d : kNesw) {
        const Pos n = offset(s.agent_pos, d);
        if (s.in_bounds(n) && object_at(s, n, noun)) return n;
    }
    return std::nullopt;
}

std::optional<Direction> direction_to(Pos from, Pos to) {
    for (Direction d : kNesw)
        if (offset(from, d) == to) return d;
    return std::nullopt;
}

bool placeable(const WorldState& s, Pos p, Noun item) {
    if (!s.in_bounds(p) || p == s.agent_pos || s.entity_at(p) != nullptr) return false;
    const TileKind t = s.tile(p);
    if (item == Noun::Plant) return t == TileKind::Grass;
    return t == TileKind::Grass || t == TileKind::Sand || t == TileKind::Path;
}

void consume_recipe(Inventory& inv, const ActionCommand& a) {
    const auto need = recipe_of(a);
    for (std::size_t r = 0; r < kResources; ++r) inv.counts[r] -= need[r];
}

bool hostile_enterable(const WorldState& s, Pos p) { return enterable(s, p) && !(p == s.agent_pos); }

void move_entities(WorldState& s) {
    for (std::size_t i = 0; i < s.entities.size(); ++i) {
        Entity& e = s.entities[i];
        const double roll = uniform_unit(s.rng);
        if (e.kind == EntityKind::Cow) {
            const Direction d = kNesw[uniform_index(s.rng, 4)];
            if (roll < s.params.cow_move_prob && hostile_enterable(s, offset(e.pos, d))) e.pos = offset(e.pos, d);
            continue;
        }
        if (manhattan(e.pos, s.agent_pos) <= 1 || roll >= s.params.hostile_move_prob) continue;
        const int dx = s.agent_pos.x - e.pos.x;
        const int dy = s.agent_pos.y - e.pos.y;
        const Direction horizontal = dx > 0 ? Direction::East : Direction::West;
        const Direction vertical = dy > 0 ? Direction::South : Direction::North;
        std::array<std::optional<Direction>, 2> tries;
        if (std::abs(dx) >= std::abs(dy)) tries = {dx != 0 ? std::optional(horizontal) : std::nullopt,
                                                   dy != 0 ? std::optional(vertical) : std::nullopt};
        else tries = {dy != 0 ? std::optional(vertical) : std::nullopt,
                      dx != 0 ? std::optional(horizontal) : std::nullopt};
        for (const auto& d : tries) {
            if (d && hostile_enterable(s, offset(e.pos, *d))) {
                e.pos = offset(e.pos, *d);
                break;
            }
        }
    }
    for (const Entity& e : s.entities)
        if (is_hostile(e.kind) && manhattan(e.pos, s.agent_pos) == 1)
            s.health = std::max(0, s.health - s.params.hostile_damage);
}

void face_toward(WorldState& s, Noun noun) {
    if (auto p = adjacent_object(s, noun))
        if (auto d = direction_to(s.agent_pos, *p)) s.agent_facing = *d;
}

constexpr double kSaplingChance = 0.1;

std::optional<std::string> apply_action(WorldState& s, const ActionCommand& a) {
    Inventory& inv = s.inventory;
    const std::string task = to_string(a);
    switch (a.verb) {
        case Verb::DoNothing: return std::nullopt;
        case Verb::Sleep: return task;
        case Verb::Move: {
            const auto d = static_cast<Direction>(static_cast<int>(a.noun) - static_cast<int>(Noun::North));
            s.agent_facing = d;
            if (enterable(s, offset(s.agent_pos, d))) s.agent_pos = offset(s.agent_pos, d);
            return std::nullopt;
        }
        case Verb::Find: {
            if (!adjacent_to(s, a.noun)) {
                const auto d = find_step(s, a.noun);
                if (!d) return std::nullopt;
                s.agent_facing = *d;
                s.agent_pos = offset(s.agent_pos, *d);
                if (!adjacent_to(s, a.noun)) return std::nullopt;
            }
            face_toward(s, a.noun);
            return task;
        }
        case Verb::Chop: {
            const auto p = adjacent_object(s, a.noun);
            if (!p) return std::nullopt;
            if (a.noun == Noun::Tree) {
                s.set_tile(*p, TileKind::Grass);
                inv[Resource::Wood] += s.params.yields[static_cast<std::size_t>(Resource::Wood)];
            } else {
                // Saplings turn up in one grass cell out of ten.
                if (uniform_unit(s.rng) >= kSaplingChance) return std::nullopt;
                inv[Resource::Sapling] += s.params.yields[static_cast<std::size_t>(Resource::Sapling)];
            }
            return task;
        }
        case Verb::Mine: {
            const auto p = adjacent_object(s, a.noun);
            if (!p || !has_required_tool(inv, a)) return std::nullopt;
            s.set_tile(*p, TileKind::Path);
            const Resource r = mined_resource(a.noun);
            inv[r] += s.params.yields[static_cast<std::size_t>(r)];
            return task;
        }
        case Verb::Attack:
        case Verb::Eat: {
            const auto p = adjacent_object(s, a.noun);
            if (!p || !has_required_tool(inv, a)) return std::nullopt;
            if (a.noun == Noun::Plant) {
                s.set_tile(*p, TileKind::Grass);
            } else {
                const auto it = std::find_if(s.entities.begin(), s.entities.end(),
                                             [&](const Entity& e) { return e.pos == *p; });
                s.entities.erase(it);
            }
            return task;
        }
        case Verb::Drink:
            if (!adjacent_object(s, a.noun)) return std::nullopt;
            s.health = std::min(s.health + 1, s.params.max_health);
            return task;
        case Verb::Place: {
            if (!has_recipe_resources(inv, a)) return std::nullopt;
            if (a.noun == Noun::Furnace && !near_station(s, TileKind::CraftingTable)) return std::nullopt;
            std::optional<Pos> target;
            if (placeable(s, offset(s.agent_pos, s.agent_facing), a.noun)) target = offset(s.agent_pos, s.agent_facing);
            for (Direction d : kNesw) {
                if (target) break;
                if (placeable(s, offset(s.agent_pos, d), a.noun)) target = offset(s.agent_pos, d);
            }
            if (!target) return std::nullopt;
            s.set_tile(*target, *tile_of(a.noun));
            consume_recipe(inv, a);
            return task;
        }
        case Verb::Make: {
            if (!near_station(s, TileKind::CraftingTable)) return std::nullopt;
            if (tier_of(a.noun) == Tier::Iron && !near_station(s, TileKind::Furnace)) return std::nullopt;
            if (!has_recipe_resources(inv, a)) return std::nullopt;
            consume_recipe(inv, a);
            inv.tools[static_cast<std::size_t>(*tool_of(a.noun))] = true;
            return task;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string to_string(const ActionCommand& a) {
    if (a.noun == Noun::None) return std::string(name(a.verb));
    std::string s(name(a.verb));
    s += ' ';
    s += name(a.noun);
    return s;
}

std::optional<ActionCommand> parse_action(std::string_view text) {
    std::string norm = lowercase_words(text);
    std::istringstream in(norm);
    std::string joined, w;
    while (in >> w) joined += (joined.empty() ? "" : " ") + w;
    for (const auto& a : catalog())
        if (to_string(a) == joined) return a;
    return std::nullopt;
}

std::span<const ActionCommand> action_catalog() noexcept { return catalog(); }

std::size_t action_index(const ActionCommand& a) {
    const auto& c = catalog();
    const auto it = std::find(c.begin(), c.end(), a);
    if (it == c.end()) throw Error(ErrorCode::IllegalAction, "not a catalog action");
    return static_cast<std::size_t>(it - c.begin());
}

std::span<const std::string> task_vocabulary() {
    static const std::vector<std::string> v = build_vocabulary();
    return v;
}

std::optional<std::string> canonical_task(std::string_view text) {
    std::istringstream in(lowercase_words(text));
    std::vector<std::string> words;
    for (std::string w; in >> w;) {
        if (w == "the" || w == "a" || w == "an" || w == "some") continue;
        if (w == "wooden") w = "wood";
        else if (w == "trees") w = "tree";
        else if (w == "cows") w = "cow";
        else if (w == "stones") w = "stone";
        else if (w == "diamonds") w = "diamond";
        else if (w == "zombies") w = "zombie";
        else if (w == "pickaxes") w = "pickaxe";
        else if (w == "swords") w = "sword";
        words.push_back(w);
    }
    if (words.empty()) return std::nullopt;
    if (words[0] == "craft" || words[0] == "build" || words[0] == "create") words[0] = "make";
    if (words.size() == 2 && words[0] == "place" && words[1] == "table") words = {"place", "crafting", "table"};
    if (words[0] == "make" && words.size() >= 2 && (words.back() == "table" || words.back() == "furnace"))
        words[0] = "place";
    if (words.size() == 2 && words[0] == "make" && words[1] == "table") words = {"place", "crafting", "table"};
    std::string joined;
    for (const auto& w : words) joined += (joined.empty() ? "" : " ") + w;
    if (joined == "place table") joined = "place crafting table";
    for (const auto& t : task_vocabulary())
        if (t == joined) return t;
    return std::nullopt;
}

ActionCommand task_action(std::string_view canonical) {
    for (const auto& a : catalog())
        if (a.verb != Verb::DoNothing && a.verb != Verb::Move && to_string(a) == canonical) return a;
    throw Error(ErrorCode::UnknownGoal, std::string(canonical));
}

bool goal_satisfied(const std::optional<AchievementEvent>& event, std::string_view goal) {
    const auto canon = canonical_task(goal);
    if (!canon) throw Error(ErrorCode::UnknownGoal, std::string(goal));
    return event && event->kind == *canon;
}

const Entity* WorldState::entity_at(Pos p) const noexcept {
    for (const auto& e : entities)
        if (e.pos == p) return &e;
    return nullptr;
}

bool object_at(const WorldState& s, Pos p, Noun noun) {
    if (!s.in_bounds(p)) return false;
    if (auto t = tile_of(noun)) return s.tile(p) == *t && !(noun == Noun::Grass && s.entity_at(p));
    if (auto k = entity_of(noun)) {
        const Entity* e = s.entity_at(p);
        return e != nullptr && e->kind == *k;
    }
    return false;
}

bool object_exists(const WorldState& s, Noun noun) {
    if (auto t = tile_of(noun)) return std::find(s.grid.begin(), s.grid.end(), *t) != s.grid.end();
    if (auto k = entity_of(noun))
        return std::any_of(s.entities.begin(), s.entities.end(), [&](const Entity& e) { return e.kind == *k; });
    return false;
}

bool adjacent_to(const WorldState& s, Noun noun) { return adjacent_object(s, noun).has_value(); }

bool near_station(const WorldState& s, TileKind station) {
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const Pos p{s.agent_pos.x + dx, s.agent_pos.y + dy};
            if (s.in_bounds(p) && s.tile(p) == station) return true;
        }
    return false;
}

bool enterable(const WorldState& s, Pos p) {
    return s.in_bounds(p) && is_walkable(s.tile(p)) && s.entity_at(p) == nullptr;
}

namespace {
bool cell_touches(const WorldState& s, Pos p, Noun noun) {
    for (Direction d : kNesw)
        if (object_at(s, offset(p, d), noun)) return true;
    return false;
}
}  // namespace

std::optional<int> distance_to(const WorldState& s, Noun noun) {
    if (cell_touches(s, s.agent_pos, noun)) return 0;
    std::vector<int> dist(static_cast<std::size_t>(s.width * s.height), -1);
    const auto idx = [&](Pos p) { return static_cast<std::size_t>(p.y * s.width + p.x); };
    std::deque<Pos> frontier{s.agent_pos};
    dist[idx(s.agent_pos)] = 0;
    while (!frontier.empty()) {
        const Pos p = frontier.front();
        frontier.pop_front();
        for (Direction d : kNesw) {
            const Pos n = offset(p, d);
            if (!enterable(s, n) || dist[idx(n)] != -1) continue;
            dist[idx(n)] = dist[idx(p)] + 1;
            if (cell_touches(s, n, noun)) return dist[idx(n)];
            frontier.push_back(n);
        }
    }
    return std::nullopt;
}

std::optional<Direction> find_step(const WorldState& s, Noun noun) {
    return first_step_toward(s, [&](Pos p) { return cell_touches(s, p, noun); });
}

bool has_required_tool(const Inventory& inv, const ActionCommand& a) {
    if (a.verb == Verb::Attack) return inv.has_any_sword();
    if (a.verb != Verb::Mine) return true;
    switch (a.noun) {
        case Noun::Stone:
        case Noun::Coal:
            return inv.has(Tool::WoodPickaxe) || inv.has(Tool::StonePickaxe) || inv.has(Tool::IronPickaxe);
        case Noun::Iron: return inv.has(Tool::StonePickaxe) || inv.has(Tool::IronPickaxe);
        case Noun::Diamond: return inv.has(Tool::IronPickaxe);
        default: return false;
    }
}

std::array<int, kResources> recipe_of(const ActionCommand& a) {
    std::array<int, kResources> need{};
    const auto add = [&](Resource r) { need[static_cast<std::size_t>(r)] += 1; };
    if (a.verb == Verb::Place) {
        switch (a.noun) {
            case Noun::Stone:
            case Noun::Furnace: add(Resource::Stone); break;
            case Noun::CraftingTable: add(Resource::Wood); break;
            case Noun::Plant: add(Resource::Sapling); break;
            default: break;
        }
    } else if (a.verb == Verb::Make) {
        add(Resource::Wood);
        switch (tier_of(a.noun)) {
            case Tier::Wood: break;
            case Tier::Stone: add(Resource::Stone); break;
            case Tier::Iron:
                add(Resource::Coal);
                add(Resource::Iron);
                break;
        }
    }
    return need;
}

bool has_recipe_resources(const Inventory& inv, const ActionCommand& a) {
    const auto need = recipe_of(a);
    if (a.verb == Verb::Place && need == std::array<int, kResources>{}) return false;
    for (std::size_t r = 0; r < kResources; ++r)
        if (inv.counts[r] < need[r]) return false;
    return true;
}

void check_config(const WorldConfig& cfg) {
    const auto fail = [](const std::string& why) { throw Error(ErrorCode::UnsatisfiableConfig, why); };
    if (cfg.width < 3 || cfg.height < 3 || cfg.width > 256 || cfg.height > 256) fail("grid must be 3..256 per side");
    for (int c : {cfg.trees, cfg.stone, cfg.coal, cfg.iron, cfg.diamond, cfg.water, cfg.sand, cfg.lava, cfg.cows,
                  cfg.zombies, cfg.skeletons})
        if (c < 0) fail("negative object count");
    for (int y : cfg.yields)
        if (y < 1) fail("yields must be >= 1");
    for (int c : cfg.start.inventory.counts)
        if (c < 0) fail("negative start inventory");
    if (cfg.max_health < 1) fail("max_health must be >= 1");
    if (cfg.hostile_damage < 0) fail("hostile_damage must be >= 0");
    if (!(cfg.hostile_move_prob >= 0.0 && cfg.hostile_move_prob <= 1.0) ||
        !(cfg.cow_move_prob >= 0.0 && cfg.cow_move_prob <= 1.0))
        fail("move probabilities must lie in [0, 1]");
    const long cells = static_cast<long>(cfg.width) * cfg.height;
    long needed = 1L + cfg.trees + cfg.stone + cfg.coal + cfg.iron + cfg.diamond + cfg.water + cfg.sand + cfg.lava +
                  cfg.cows + (cfg.start.table_nearby ? 1 : 0) + (cfg.start.furnace_nearby ? 1 : 0);
    if (cfg.hazard) needed += cfg.zombies + cfg.skeletons;
    if (needed > cells)
        fail("objects (" + std::to_string(needed) + ") exceed grid cells (" + std::to_string(cells) + ")");
}

void check_solvable_for(const WorldConfig& cfg, std::span<const std::string> chain) {
    check_config(cfg);
    int trees = 0, cows = 0, water = 0;
    std::array<int, 4> mined{};  // stone, coal, iron, diamond
    for (const auto& g : chain) {
        const auto a = task_action(g);
        if (a.verb == Verb::Chop && a.noun == Noun::Tree) ++trees;
        if (a.verb == Verb::Mine) ++mined[static_cast<std::size_t>(mined_resource(a.noun)) - 1];
        if ((a.verb == Verb::Attack || a.verb == Verb::Eat) && a.noun == Noun::Cow) ++cows;
        if ((a.verb == Verb::Find || a.verb == Verb::Attack || a.verb == Verb::Eat) && a.noun == Noun::Cow)
            cows = std::max(cows, 1);
        if (a.noun == Noun::Water) water = 1;
    }
    const auto need = [](int have, int want, const char* what) {
        if (have < want)
            throw Error(ErrorCode::UnsatisfiableConfig, std::string("chain needs ") + std::to_string(want) + " " +
                                                            what + ", config has " + std::to_string(have));
    };
    need(cfg.trees, trees, "trees");
    need(cfg.stone, mined[0], "stone");
    need(cfg.coal, mined[1], "coal");
    need(cfg.iron, mined[2], "iron");
    need(cfg.diamond, mined[3], "diamond");
    need(cfg.cows, cows, "cows");
    need(cfg.water, water, "water");
}

WorldState generate_world(const WorldConfig& cfg, std::uint64_t seed) {
    check_config(cfg);
    const int cells = cfg.width * cfg.height;
    for (int attempt = 0; attempt < 200; ++attempt) {
        Rng rng(derive_seed(seed, 0x5eedULL, static_cast<std::uint64_t>(attempt)));
        WorldState s;
        s.width = cfg.width;
        s.height = cfg.height;
        s.grid.assign(static_cast<std::size_t>(cells), TileKind::Grass);
        s.inventory = cfg.start.inventory;
        s.health = cfg.max_health;
        s.params = WorldParams{cfg.max_health, cfg.hostile_damage, cfg.hostile_move_prob, cfg.cow_move_prob, cfg.yields};
        s.rng = Rng(derive_seed(seed, 0xd1ceULL));

        std::vector<int> order(static_cast<std::size_t>(cells));
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
        const auto pos_of = [&](int i) { return Pos{i % cfg.width, i / cfg.width}; };
        const auto idx_of = [&](Pos p) { return p.y * cfg.width + p.x; };

        std::vector<bool> used(static_cast<std::size_t>(cells), false);
        s.agent_pos = pos_of(order[0]);
        used[static_cast<std::size_t>(order[0])] = true;

        bool ok = true;
        for (auto [wanted, station] : {std::pair{cfg.start.table_nearby, TileKind::CraftingTable},
                                       std::pair{cfg.start.furnace_nearby, TileKind::Furnace}}) {
            if (!wanted) continue;
            bool placed = false;
            for (Direction d : kNesw) {
                const Pos n = offset(s.agent_pos, d);
                if (!s.in_bounds(n) || used[static_cast<std::size_t>(idx_of(n))]) continue;
                s.set_tile(n, station);
                used[static_cast<std::size_t>(idx_of(n))] = true;
                placed = true;
                break;
            }
            ok = ok && placed;
        }
        if (!ok) continue;

        std::size_t cursor = 1;
        const auto next_free = [&]() -> std::optional<Pos> {
            while (cursor < order.size() && used[static_cast<std::size_t>(order[cursor])]) ++cursor;
            if (cursor >= order.size()) return std::nullopt;
            used[static_cast<std::size_t>(order[cursor])] = true;
            return pos_of(order[cursor++]);
        };
        for (auto [count, kind] : {std::pair{cfg.trees, TileKind::Tree}, std::pair{cfg.stone, TileKind::Stone},
                                   std::pair{cfg.coal, TileKind::Coal}, std::pair{cfg.iron, TileKind::Iron},
                                   std::pair{cfg.diamond, TileKind::Diamond}, std::pair{cfg.water, TileKind::Water},
                                   std::pair{cfg.lava, TileKind::Lava}, std::pair{cfg.sand, TileKind::Sand}}) {
            for (int i = 0; i < count && ok; ++i) {
                const auto p = next_free();
                if (!p) ok = false;
                else s.set_tile(*p, kind);
            }
        }
        if (!ok) continue;

        // Reachability: flood the walkable component around the agent.
        std::vector<bool> reach(static_cast<std::size_t>(cells), false);
        std::deque<Pos> frontier{s.agent_pos};
        reach[static_cast<std::size_t>(idx_of(s.agent_pos))] = true;
        while (!frontier.empty()) {
            const Pos p = frontier.front();
            frontier.pop_front();
            for (Direction d : kNesw) {
                const Pos n = offset(p, d);
                if (!s.in_bounds(n) || !is_walkable(s.tile(n)) || reach[static_cast<std::size_t>(idx_of(n))]) continue;
                reach[static_cast<std::size_t>(idx_of(n))] = true;
                frontier.push_back(n);
            }
        }
        for (int i = 0; i < cells && ok; ++i) {
            const Pos p = pos_of(i);
            const TileKind t = s.tile(p);
            if (is_walkable(t) || t == TileKind::Lava) continue;
            bool touches = false;
            for (Direction d : kNesw) {
                const Pos n = offset(p, d);
                touches = touches || (s.in_bounds(n) && reach[static_cast<std::size_t>(idx_of(n))]);
            }
            ok = touches;
        }
        if (!ok) continue;

        const auto spawn = [&](EntityKind kind, int count, int min_distance) {
            for (int placed = 0; placed < count;) {
                bool found = false;
                for (std::size_t c = 1; c < order.size(); ++c) {
                    const Pos p = pos_of(order[c]);
                    if (used[static_cast<std::size_t>(order[c])] || !reach[static_cast<std::size_t>(order[c])]) continue;
                    if (manhattan(p, s.agent_pos) < min_distance) continue;
                    used[static_cast<std::size_t>(order[c])] = true;
                    s.entities.push_back({kind, p});
                    found = true;
                    break;
                }
                if (!found) return false;
                ++placed;
            }
            return true;
        };
        ok = spawn(EntityKind::Cow, cfg.cows, 2);
        if (ok && cfg.hazard) ok = spawn(EntityKind::Zombie, cfg.zombies, 4) && spawn(EntityKind::Skeleton, cfg.skeletons, 4);
        if (!ok) continue;
        return s;
    }
    throw Error(ErrorCode::UnsatisfiableConfig, "no connected layout found for this config");
}

std::vector<ActionCommand> legal_actions(const WorldState& state) {
    std::array<bool, kNouns> present{};
    for (TileKind t : state.grid) {
        switch (t) {
            case TileKind::Tree: present[static_cast<std::size_t>(Noun::Tree)] = true; break;
            case TileKind::Stone: present[static_cast<std::size_t>(Noun::Stone)] = true; break;
            case TileKind::Coal: present[static_cast<std::size_t>(Noun::Coal)] = true; break;
            case TileKind::Iron: present[static_cast<std::size_t>(Noun::Iron)] = true; break;
            case TileKind::Diamond: present[static_cast<std::size_t>(Noun::Diamond)] = true; break;
            case TileKind::Water: present[static_cast<std::size_t>(Noun::Water)] = true; break;
            case TileKind::CraftingTable: present[static_cast<std::size_t>(Noun::CraftingTable)] = true; break;
            case TileKind::Furnace: present[static_cast<std::size_t>(Noun::Furnace)] = true; break;
            case TileKind::Grass: present[static_cast<std::size_t>(Noun::Grass)] = true; break;
            case TileKind::Plant: present[static_cast<std::size_t>(Noun::Plant)] = true; break;
            default: break;
        }
    }
    for (const auto& e : state.entities) {
        const Noun n = e.kind == EntityKind::Cow ? Noun::Cow : e.kind == EntityKind::Zombie ? Noun::Zombie : Noun::Skeleton;
        present[static_cast<std::size_t>(n)] = true;
    }
    std::vector<ActionCommand> out;
    out.reserve(catalog().size());
    for (const auto& a : catalog()) {
        switch (a.verb) {
            case Verb::Find:
            case Verb::Attack:
            case Verb::Chop:
            case Verb::Mine:
            case Verb::Eat:
            case Verb::Drink:
                if (present[static_cast<std::size_t>(a.noun)]) out.push_back(a);
                break;
            default: out.push_back(a);
        }
    }
    return out;
}

bool is_legal(const WorldState& state, const ActionCommand& action) {
    const auto legal = legal_actions(state);
    return std::find(legal.begin(), legal.end(), action) != legal.end();
}

std::optional<AchievementEvent> step_in_place(WorldState& s, const ActionCommand& action) {
    if (!is_legal(s, action)) throw Error(ErrorCode::IllegalAction, to_string(action));
    const std::uint64_t index = s.step_count;
    auto kind = apply_action(s, action);
    move_entities(s);
    s.step_count += 1;
    if (!kind) return std::nullopt;
    return AchievementEvent{std::move(*kind), index};
}

StepResult step(const WorldState& state, const ActionCommand& action) {
    StepResult r{state, std::nullopt};
    r.event = step_in_place(r.state, action);
    return r;
}

}  // namespace tandem
