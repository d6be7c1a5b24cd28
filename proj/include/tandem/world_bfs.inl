// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>

namespace tandem {

template <class Pred>
std::optional<Direction> first_step_toward(const WorldState& s, Pred goal) {
    if (goal(s.agent_pos)) return std::nullopt;
    constexpr std::array<Direction, 4> order{Direction::North, Direction::East, Direction::South, Direction::West};
    const auto idx = [&](Pos p) { return static_cast<std::size_t>(p.y * s.width + p.x); };
    // first[i] holds the initial direction taken on the path that reached cell i.
    std::vector<int> first(static_cast<std::size_t>(s.width * s.height), -1);
    std::deque<Pos> frontier;
    first[idx(s.agent_pos)] = 4;
    for (Direction d : order) {
        const Pos n = offset(s.agent_pos, d);
        if (!enterable(s, n) || first[idx(n)] != -1) continue;
        first[idx(n)] = static_cast<int>(d);
        if (goal(n)) return d;
        frontier.push_back(n);
    }
    while (!frontier.empty()) {
        const Pos p = frontier.front();
        frontier.pop_front();
        for (Direction d : order) {
            const Pos n = offset(p, d);
            if (!enterable(s, n) || first[idx(n)] != -1) continue;
            first[idx(n)] = first[idx(p)];
            if (goal(n)) return static_cast<Direction>(first[idx(n)]);
            frontier.push_back(n);
        }
    }
    return std::nullopt;
}

}  // namespace tandem
