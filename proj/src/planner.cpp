// SPDX-License-Identifier: Apache-2.0
#include "tandem/planner.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "tandem/error.hpp"
#include "tandem/tasks.hpp"

namespace tandem {

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>>& dependency_table() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> table = [] {
        std::map<std::string, std::vector<std::string>, std::less<>> t;
        const std::vector<std::string> wood_bench{"chop tree", "place crafting table"};
        t["chop tree"] = {"find tree"};
        t["place crafting table"] = {"chop tree"};
        t["place furnace"] = {"place crafting table", "mine stone"};
        t["place stone"] = {"mine stone"};
        t["place plant"] = {"chop grass"};
        for (const char* tool : {"pickaxe", "sword"}) {
            t[std::string("make wood ") + tool] = wood_bench;
            t[std::string("make stone ") + tool] = {"chop tree", "place crafting table", "mine stone"};
            t[std::string("make iron ") + tool] = {"chop tree", "place crafting table", "mine iron", "mine coal",
                                                   "place furnace"};
        }
        t["mine stone"] = {"make wood pickaxe", "find stone"};
        t["mine coal"] = {"make wood pickaxe", "find coal"};
        t["mine iron"] = {"make stone pickaxe", "find iron"};
        t["mine diamond"] = {"make iron pickaxe", "find diamond"};
        t["attack cow"] = {"make wood sword", "find cow"};
        t["attack zombie"] = {"make wood sword"};
        t["attack skeleton"] = {"make wood sword"};
        t["eat cow"] = {"find cow"};
        t["drink water"] = {"find water"};
        return t;
    }();
    return table;
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string join(const std::vector<std::string>& words, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n && i < words.size(); ++i) s += (i ? " " : "") + words[i];
    return s;
}

/// True when the start context already provides what `task` would.
bool covered(std::string_view task, const StartContext& start) {
    const ActionCommand a = task_action(task);
    switch (a.verb) {
        case Verb::Chop: return a.noun == Noun::Tree && start.inventory[Resource::Wood] > 0;
        case Verb::Place:
            if (a.noun == Noun::CraftingTable) return start.table_nearby;
            if (a.noun == Noun::Furnace) return start.furnace_nearby;
            return false;
        case Verb::Mine: {
            const Resource r = a.noun == Noun::Stone  ? Resource::Stone
                               : a.noun == Noun::Coal ? Resource::Coal
                               : a.noun == Noun::Iron ? Resource::Iron
                                                      : Resource::Diamond;
            return start.inventory[r] > 0;
        }
        case Verb::Make: {
            const auto tool = static_cast<std::size_t>(a.noun) - static_cast<std::size_t>(Noun::WoodPickaxe);
            return start.inventory.tools[tool];
        }
        default: return false;
    }
}

void closure(std::string_view task, const StartContext& start, std::set<std::string, std::less<>>& seen,
             std::vector<std::string>& out) {
    if (seen.contains(task) || covered(task, start)) return;
    for (const auto& p : prerequisites(task)) closure(p, start, seen, out);
    seen.emplace(task);
    out.emplace_back(task);
}

constexpr std::array<Direction, 4> kNesw{Direction::North, Direction::East, Direction::South, Direction::West};

std::string gather_task(Resource r) {
    switch (r) {
        case Resource::Wood: return "chop tree";
        case Resource::Stone: return "mine stone";
        case Resource::Coal: return "mine coal";
        case Resource::Iron: return "mine iron";
        case Resource::Diamond: return "mine diamond";
        case Resource::Sapling: return "chop grass";
    }
    return "chop tree";
}

Noun move_noun(Direction d) { return static_cast<Noun>(static_cast<int>(Noun::North) + static_cast<int>(d)); }

Noun entity_noun(EntityKind k) {
    switch (k) {
        case EntityKind::Cow: return Noun::Cow;
        case EntityKind::Zombie: return Noun::Zombie;
        case EntityKind::Skeleton: return Noun::Skeleton;
    }
    return Noun::None;
}

bool in_station_range(const WorldState& s, Pos p, TileKind station) {
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const Pos q{p.x + dx, p.y + dy};
            if (s.in_bounds(q) && s.tile(q) == station) return true;
        }
    return false;
}

}  // namespace

ResolvedTarget resolve_target(std::string_view target) {
    auto words = words_of(target);
    std::erase_if(words, [](const std::string& w) { return w == "the" || w == "a" || w == "an"; });
    if (std::find(words.begin(), words.end(), "deforestation") != words.end()) return {"chop tree", 4};
    for (std::size_t n = words.size(); n > 0; --n)
        if (auto canon = canonical_task(join(words, n))) return {*canon, 1};
    throw Error(ErrorCode::UnknownTarget, "no supported achievement matches '" + std::string(target) + "'");
}

std::span<const std::string> prerequisites(std::string_view task) {
    static const std::vector<std::string> none;
    const auto& table = dependency_table();
    const auto it = table.find(task);
    return it == table.end() ? std::span<const std::string>(none) : std::span<const std::string>(it->second);
}

std::vector<std::string> oracle_chain(std::string_view target, const StartContext& start) {
    const ResolvedTarget t = resolve_target(target);
    std::vector<std::string> out;
    for (int round = 0; round < t.repeat; ++round) {
        std::set<std::string, std::less<>> seen;
        for (const auto& p : prerequisites(t.terminal)) closure(p, start, seen, out);
        out.push_back(t.terminal);
    }
    return out;
}

ReflectionNote oracle_reflect(std::span<const std::string> plan, std::string_view target, const StartContext& start) {
    ReflectionNote note;
    const ResolvedTarget t = resolve_target(target);
    std::map<std::string, int> allowed;
    for (const auto& g : oracle_chain(target, start)) allowed[g] += 1;
    std::map<std::string, int> seen;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto canon = canonical_task(plan[i]);
        if (!canon || *canon != plan[i]) {
            note.issues.push_back({i, "'" + plan[i] + "' is not an executable task", "remove or rename the step"});
            continue;
        }
        for (const auto& p : prerequisites(*canon)) {
            if (covered(p, start) || seen.contains(p)) continue;
            note.issues.push_back({i, "'" + *canon + "' needs '" + p + "' earlier", "insert '" + p + "' before it"});
        }
        const int count = ++seen[*canon];
        if (count > std::max(1, allowed[*canon]))
            note.issues.push_back({i, "'" + *canon + "' repeats without need", "drop the duplicate"});
    }
    if (plan.empty() || plan.back() != t.terminal)
        note.issues.push_back({plan.size(), "plan does not end in '" + t.terminal + "'", "append '" + t.terminal + "'"});
    else if (seen[t.terminal] < t.repeat)
        note.issues.push_back({plan.size(), "'" + t.terminal + "' must happen " + std::to_string(t.repeat) + " times",
                               "repeat its chain"});
    return note;
}

std::vector<Executor> route(std::span<const std::string> goals, const MemorySpace& memory, const RouterConfig& cfg) {
    std::vector<Executor> tags;
    tags.reserve(goals.size());
    for (const auto& g : goals) {
        const auto p = lookup(memory, g);
        tags.push_back(p && *p >= cfg.threshold ? Executor::RL : Executor::VLM);
    }
    return tags;
}

GoalPlan build_plan(PlannerBackend& backend, const PlannerRequest& req, const MemorySpace& memory,
                    const RouterConfig& router, bool skip_reflection) {
    GoalPlan plan;
    plan.target = req.target;
    plan.g_init = backend.decompose(req);
    if (skip_reflection) {
        plan.goals = plan.g_init;
    } else {
        plan.reflection = backend.reflect(plan.g_init, req);
        plan.goals = backend.finalize(plan.reflection, plan.g_init, req);
    }
    plan.tags = route(plan.goals, memory, router);
    return plan;
}

std::vector<std::string> candidate_targets() {
    std::vector<std::string> out;
    for (const auto& s : scenarios())
        if (std::find(out.begin(), out.end(), s.target) == out.end()) out.push_back(s.target);
    for (const auto& t : task_vocabulary())
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    return out;
}

std::vector<std::string> OracleBackend::decompose(const PlannerRequest& req) {
    if (req.target.empty()) throw Error(ErrorCode::UnknownTarget, "empty target");
    return oracle_chain(req.target, req.start);
}

ReflectionNote OracleBackend::reflect(std::span<const std::string> g_init, const PlannerRequest& req) {
    return oracle_reflect(g_init, req.target, req.start);
}

std::vector<std::string> OracleBackend::finalize(const ReflectionNote& note, std::span<const std::string> g_init,
                                                 const PlannerRequest& req) {
    if (note.verdict() == Verdict::Accept) return {g_init.begin(), g_init.end()};
    std::vector<std::string> chain;
    try {
        chain = oracle_chain(req.target, req.start);
    } catch (const Error& e) {
        throw Error(ErrorCode::IrreparablePlan, e.what());
    }
    if (!oracle_reflect(chain, req.target, req.start).issues.empty())
        throw Error(ErrorCode::IrreparablePlan, "re-derived plan still fails reflection");
    return chain;
}

PerformerScript OracleBackend::perform_step(std::string_view goal, const TextualObservation& obs, const WorldState& s) {
    const auto canon = canonical_task(goal);
    if (!canon) throw Error(ErrorCode::UnknownGoal, std::string(goal));
    const ActionCommand a = task_action(*canon);
    PerformerScript script{*canon, a, ""};
    const auto no_path = [&](const std::string& what) {
        return Error(ErrorCode::NoPathToGoal, *canon + ": " + what);
    };

    switch (a.verb) {
        case Verb::Find:
        case Verb::Chop:
        case Verb::Mine:
        case Verb::Attack:
        case Verb::Eat:
        case Verb::Drink: {
            if (!object_exists(s, a.noun)) throw no_path(std::string(tandem::name(a.noun)) + " not on the map");
            if (!has_required_tool(s.inventory, a)) throw no_path("required tool missing");
            if (adjacent_to(s, a.noun)) {
                script.rationale = "target adjacent";
                return script;
            }
            const auto d = find_step(s, a.noun);
            if (!d) throw no_path(std::string(tandem::name(a.noun)) + " unreachable");
            // Grass and plants have no find action; walk there directly.
            const ActionCommand find{Verb::Find, a.noun};
            const auto catalog = action_catalog();
            const bool findable = std::find(catalog.begin(), catalog.end(), find) != catalog.end();
            script.next_action = findable ? find : ActionCommand{Verb::Move, move_noun(*d)};
            script.rationale = "approach " + std::string(tandem::name(a.noun));
            return script;
        }
        case Verb::Make:
        case Verb::Place: {
            if (!has_recipe_resources(s.inventory, a)) {
                // Gather the first missing ingredient, e.g. after an earlier
                // step spent wood the plan had budgeted for this one.
                const auto need = recipe_of(a);
                for (std::size_t r = 0; r < kResources; ++r) {
                    if (s.inventory.counts[r] >= need[r]) continue;
                    PerformerScript sub = perform_step(gather_task(static_cast<Resource>(r)), obs, s);
                    sub.goal = *canon;
                    sub.rationale = "gather " + std::string(tandem::name(static_cast<Resource>(r))) + ": " + sub.rationale;
                    return sub;
                }
            }
            const bool iron = a.noun == Noun::IronPickaxe || a.noun == Noun::IronSword;
            const bool needs_table = a.verb == Verb::Make || a.noun == Noun::Furnace;
            if (!needs_table) {
                script.rationale = "place in front";
                return script;
            }
            const auto ready = [&](Pos p) {
                return in_station_range(s, p, TileKind::CraftingTable) &&
                       (!iron || in_station_range(s, p, TileKind::Furnace));
            };
            if (ready(s.agent_pos)) {
                script.rationale = "stations in reach";
                return script;
            }
            const auto d = first_step_toward(s, ready);
            if (!d) throw no_path("no reachable cell next to the required stations");
            script.next_action = {Verb::Move, move_noun(*d)};
            script.rationale = "walk to the stations";
            return script;
        }
        default: return script;
    }
}

std::optional<EmergencyInstruction> OracleBackend::emergency(const WorldState& s, const MemorySpace& memory,
                                                             const EmergencyConfig& cfg) {
    const auto known = [&](Noun n) {
        for (const auto& sub : memory.subspaces)
            for (const auto& e : sub.entries)
                if (task_action(e.task).noun == n) return true;
        return false;
    };
    const Entity* threat = nullptr;
    for (const auto& e : s.entities) {
        if (chebyshev(e.pos, s.agent_pos) > cfg.radius || known(entity_noun(e.kind))) continue;
        if (!threat || manhattan(e.pos, s.agent_pos) < manhattan(threat->pos, s.agent_pos)) threat = &e;
    }
    if (!threat) return std::nullopt;

    EmergencyInstruction out{std::string(tandem::name(threat->kind)), {}, cfg.expiry};
    if (threat->kind == EntityKind::Cow) return out;
    const int here = manhattan(threat->pos, s.agent_pos);
    if (here == 1 && s.inventory.has_any_sword()) {
        out.action = {Verb::Attack, entity_noun(threat->kind)};
        return out;
    }
    int best = here;
    for (Direction d : kNesw) {
        const Pos n = offset(s.agent_pos, d);
        if (!enterable(s, n) || manhattan(n, threat->pos) <= best) continue;
        best = manhattan(n, threat->pos);
        out.action = {Verb::Move, move_noun(d)};
    }
    return out;
}

std::string OracleBackend::infer_target(std::span<const EpisodeTrace> history) {
    std::map<std::string, int> rewarded;
    for (const auto& ep : history)
        for (const auto& r : ep.records)
            if (r.event && r.reward.total > 0.0) rewarded[*r.event] += 1;
    if (rewarded.empty()) throw Error(ErrorCode::NoSignal, "history holds no rewarded steps");

    struct Score {
        int matched;
        std::size_t size;
        std::string name;
    };
    std::optional<Score> best;
    for (const auto& c : candidate_targets()) {
        std::map<std::string, int> need;
        for (const auto& g : oracle_chain(c)) need[g] += 1;
        int matched = 0;
        for (const auto& [kind, n] : rewarded)
            if (auto it = need.find(kind); it != need.end()) matched += std::min(n, it->second);
        std::size_t size = 0;
        for (const auto& [_, n] : need) size += static_cast<std::size_t>(n);
        const Score s{matched, size, c};
        if (!best || s.matched > best->matched || (s.matched == best->matched && s.size < best->size) ||
            (s.matched == best->matched && s.size == best->size && s.name < best->name))
            best = s;
    }
    return best->name;
}

}  // namespace tandem
