// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tandem/world.hpp"

namespace tandem {

inline constexpr int kViewRadius = 2;  // 5x5 egocentric window

struct VisibleObject {
    std::string name;  ///< "tree", "crafting table", "zombie"
    int dx = 0;
    int dy = 0;
    bool goal_relevant = false;
    friend bool operator==(const VisibleObject&, const VisibleObject&) = default;
};

struct TextualObservation {
    /// Row-major over the window (dy, then dx); the agent cell is included
    /// only for entities, which never share it.
    std::vector<VisibleObject> objects;
    std::string inventory;
    int health = 0;
    friend bool operator==(const TextualObservation&, const TextualObservation&) = default;
};

TextualObservation caption_observation(const WorldState& state, std::span<const std::string> goals);
/// Multi-line prompt text: one object per line with goal callouts marked.
std::string render(const TextualObservation& obs);

struct Caption {
    std::vector<std::string> tokens;
    std::string raw;
    friend bool operator==(const Caption&, const Caption&) = default;
};

Caption caption_transition(const WorldState& before, const ActionCommand& action, const WorldState& after);

struct EmbedConfig {
    std::size_t dimension = 256;
    /// Chosen so the lemma vocabulary lands in distinct buckets at dimension 256.
    std::uint64_t hash_seed = 50;
    std::vector<std::string> stopwords{"you", "the", "a", "to", "and"};
    friend bool operator==(const EmbedConfig&, const EmbedConfig&) = default;
};

using TokenVector = std::vector<double>;

/// Lowercases, splits on non-alphanumerics, drops stopwords.
std::vector<std::string> tokenize(std::string_view text, const EmbedConfig& cfg);
std::size_t bucket_of(std::string_view token, const EmbedConfig& cfg);
TokenVector embed_text(std::span<const std::string> tokens, const EmbedConfig& cfg);
/// Dot product clamped to [0, 1]; inputs are unit or zero vectors.
double cosine(const TokenVector& u, const TokenVector& v);

/// Every lemma captions and canonical tasks can produce.
std::span<const std::string> lemma_vocabulary();
/// Throws ConfigError naming the first pair of lemmas sharing a bucket.
void check_vocabulary(const EmbedConfig& cfg);

}  // namespace tandem
