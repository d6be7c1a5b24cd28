// SPDX-License-Identifier: Apache-2.0
#include "tandem/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "tandem/error.hpp"

namespace tandem {

namespace {

std::string_view direction_name(Direction d) {
    switch (d) {
        case Direction::North: return "north";
        case Direction::East: return "east";
        case Direction::South: return "south";
        case Direction::West: return "west";
    }
    return "";
}

std::vector<std::string> split_words(std::string_view text) {
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

bool contains_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > words.size()) return false;
    return std::search(words.begin(), words.end(), phrase.begin(), phrase.end()) != words.end();
}

std::string_view tile_object_name(TileKind t) {
    switch (t) {
        case TileKind::Grass:
        case TileKind::Sand:
        case TileKind::Path: return "";
        default: return name(t);
    }
}

int tile_count(const WorldState& s, TileKind t) {
    return static_cast<int>(std::count(s.grid.begin(), s.grid.end(), t));
}

int entity_count(const WorldState& s, EntityKind k) {
    return static_cast<int>(
        std::count_if(s.entities.begin(), s.entities.end(), [&](const Entity& e) { return e.kind == k; }));
}

std::optional<TileKind> placed_tile(Noun n) {
    switch (n) {
        case Noun::Stone: return TileKind::Stone;
        case Noun::CraftingTable: return TileKind::CraftingTable;
        case Noun::Furnace: return TileKind::Furnace;
        case Noun::Plant: return TileKind::Plant;
        default: return std::nullopt;
    }
}

std::optional<EntityKind> creature(Noun n) {
    switch (n) {
        case Noun::Cow: return EntityKind::Cow;
        case Noun::Zombie: return EntityKind::Zombie;
        case Noun::Skeleton: return EntityKind::Skeleton;
        default: return std::nullopt;
    }
}

Caption make_caption(std::vector<std::string> tokens) {
    Caption c;
    for (const auto& t : tokens) c.raw += (c.raw.empty() ? "" : " ") + t;
    c.tokens = std::move(tokens);
    return c;
}

void append_words(std::vector<std::string>& out, std::string_view phrase) {
    for (auto& w : split_words(phrase)) out.push_back(std::move(w));
}

std::uint64_t fnv1a(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(seed);
    for (char ch : token) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> build_lemmas() {
    std::vector<std::string> v{"nothing", "happen", "closer", "collect", "defeat", "wood", "sapling",
                               "north", "east", "south", "west"};
    for (const auto& a : action_catalog()) append_words(v, to_string(a));
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

TextualObservation caption_observation(const WorldState& state, std::span<const std::string> goals) {
    std::vector<std::vector<std::string>> goal_words;
    for (const auto& g : goals) goal_words.push_back(split_words(g));
    const auto relevant = [&](std::string_view object) {
        const auto phrase = split_words(object);
        return std::any_of(goal_words.begin(), goal_words.end(),
                           [&](const auto& words) { return contains_phrase(words, phrase); });
    };

    TextualObservation obs;
    for (int dy = -kViewRadius; dy <= kViewRadius; ++dy) {
        for (int dx = -kViewRadius; dx <= kViewRadius; ++dx) {
            const Pos p{state.agent_pos.x + dx, state.agent_pos.y + dy};
            if (!state.in_bounds(p)) continue;
            if (const auto tile = tile_object_name(state.tile(p)); !tile.empty())
                obs.objects.push_back({std::string(tile), dx, dy, relevant(tile)});
            if (const Entity* e = state.entity_at(p)) {
                const std::string n(name(e->kind));
                obs.objects.push_back({n, dx, dy, relevant(n)});
            }
        }
    }
    std::ostringstream inv;
    bool first = true;
    for (std::size_t r = 0; r < kResources; ++r) {
        if (state.inventory.counts[r] == 0) continue;
        inv << (first ? "" : ", ") << name(static_cast<Resource>(r)) << ' ' << state.inventory.counts[r];
        first = false;
    }
    for (std::size_t t = 0; t < kTools; ++t) {
        if (!state.inventory.tools[t]) continue;
        inv << (first ? "" : ", ") << name(static_cast<Tool>(t));
        first = false;
    }
    obs.inventory = first ? "empty" : inv.str();
    obs.health = state.health;
    return obs;
}

std::string render(const TextualObservation& obs) {
    std::ostringstream out;
    if (obs.objects.empty()) out << "You see nothing nearby.\n";
    for (const auto& o : obs.objects) {
        out << o.name << " at (" << (o.dx >= 0 ? "+" : "") << o.dx << ", " << (o.dy >= 0 ? "+" : "") << o.dy << ")";
        if (o.goal_relevant) out << " [goal]";
        out << '\n';
    }
    out << "inventory: " << obs.inventory << '\n' << "health: " << obs.health << '\n';
    return out.str();
}

Caption caption_transition(const WorldState& before, const ActionCommand& action, const WorldState& after) {
    static const Caption nothing = make_caption({"nothing", "happen"});
    std::vector<std::string> t;
    const std::string noun(name(action.noun));
    switch (action.verb) {
        case Verb::DoNothing: return nothing;
        case Verb::Sleep: return make_caption({"sleep"});
        case Verb::Move:
            if (before.agent_pos == after.agent_pos) return nothing;
            return make_caption({"move", std::string(direction_name(after.agent_facing))});
        case Verb::Find: {
            // Only an actual arrival reads as finding; standing still is not progress.
            if (before.agent_pos == after.agent_pos) return nothing;
            if (adjacent_to(after, action.noun)) {
                t = {"find"};
            } else {
                const auto d0 = distance_to(before, action.noun);
                const auto d1 = distance_to(after, action.noun);
                if (!d0 || !d1 || *d1 >= *d0) return nothing;
                t = {"move", "closer"};
            }
            append_words(t, noun);
            return make_caption(std::move(t));
        }
        case Verb::Chop: {
            const Resource r = action.noun == Noun::Tree ? Resource::Wood : Resource::Sapling;
            if (after.inventory[r] <= before.inventory[r]) return nothing;
            t = {"chop", noun, "collect", std::string(name(r))};
            return make_caption(std::move(t));
        }
        case Verb::Mine: {
            const Resource r = action.noun == Noun::Stone  ? Resource::Stone
                               : action.noun == Noun::Coal ? Resource::Coal
                               : action.noun == Noun::Iron ? Resource::Iron
                                                           : Resource::Diamond;
            if (after.inventory[r] <= before.inventory[r]) return nothing;
            return make_caption({"mine", noun, "collect", std::string(name(r))});
        }
        case Verb::Make: {
            // A successful craft always consumes resources.
            if (after.inventory == before.inventory) return nothing;
            t = {"make"};
            append_words(t, noun);
            return make_caption(std::move(t));
        }
        case Verb::Place: {
            const auto tile = placed_tile(action.noun);
            if (!tile || tile_count(after, *tile) <= tile_count(before, *tile)) return nothing;
            t = {"place"};
            append_words(t, noun);
            return make_caption(std::move(t));
        }
        case Verb::Attack:
        case Verb::Eat: {
            if (action.noun == Noun::Plant) {
                if (tile_count(after, TileKind::Plant) >= tile_count(before, TileKind::Plant)) return nothing;
                return make_caption({"eat", "plant"});
            }
            const auto kind = creature(action.noun);
            if (!kind || entity_count(after, *kind) >= entity_count(before, *kind)) return nothing;
            if (action.verb == Verb::Eat) return make_caption({"eat", noun});
            return make_caption({"attack", noun, "defeat"});
        }
        case Verb::Drink:
            if (after.health <= before.health) return nothing;
            return make_caption({"drink", "water"});
    }
    return nothing;
}

std::vector<std::string> tokenize(std::string_view text, const EmbedConfig& cfg) {
    auto words = split_words(text);
    std::erase_if(words, [&](const std::string& w) {
        return std::find(cfg.stopwords.begin(), cfg.stopwords.end(), w) != cfg.stopwords.end();
    });
    return words;
}

std::size_t bucket_of(std::string_view token, const EmbedConfig& cfg) {
    return static_cast<std::size_t>(fnv1a(token, cfg.hash_seed) % cfg.dimension);
}

TokenVector embed_text(std::span<const std::string> tokens, const EmbedConfig& cfg) {
    TokenVector v(cfg.dimension, 0.0);
    for (const auto& t : tokens) {
        if (std::find(cfg.stopwords.begin(), cfg.stopwords.end(), t) != cfg.stopwords.end()) continue;
        v[bucket_of(t, cfg)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) return v;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

double cosine(const TokenVector& u, const TokenVector& v) {
    const std::size_t n = std::min(u.size(), v.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += u[i] * v[i];
    return std::clamp(dot, 0.0, 1.0);
}

std::span<const std::string> lemma_vocabulary() {
    static const std::vector<std::string> v = build_lemmas();
    return v;
}

void check_vocabulary(const EmbedConfig& cfg) {
    if (cfg.dimension == 0) throw Error(ErrorCode::ConfigError, "embedding dimension must be positive");
    std::map<std::size_t, std::string> seen;
    for (const auto& lemma : lemma_vocabulary()) {
        const auto [it, inserted] = seen.emplace(bucket_of(lemma, cfg), lemma);
        if (!inserted)
            throw Error(ErrorCode::ConfigError, "hash collision between '" + it->second + "' and '" + lemma +
                                                    "'; choose another embed hash seed");
    }
}

}  // namespace tandem
