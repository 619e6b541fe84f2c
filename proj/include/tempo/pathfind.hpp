#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tempo/grid.hpp"

namespace tempo::analytics {

// Shortest wall-avoiding 4-connected path length. Scoring always uses this,
// not Manhattan distance. Throws InvalidCell for wall or off-map endpoints;
// returns nullopt when the endpoints are disconnected.
std::optional<int> bfs_dist(const grid::GridMap& map, grid::Position a, grid::Position b);

// Memoizing wrapper for repeated queries against one map: one BFS sweep per
// distinct source.
class PathOracle {
public:
    explicit PathOracle(grid::GridMap map) : map_(std::move(map)) {}

    std::optional<int> dist(grid::Position a, grid::Position b) const;
    const grid::GridMap& map() const { return map_; }

private:
    grid::GridMap map_;
    mutable std::map<grid::Position, std::vector<int>> fields_; // -1 = unreachable
};

} // namespace tempo::analytics
