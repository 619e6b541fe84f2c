#include "tempo/pathfind.hpp"

#include <queue>

namespace tempo::analytics {

namespace {

std::vector<int> bfs_field(const grid::GridMap& map, grid::Position source) {
    std::vector<int> dist(static_cast<std::size_t>(map.size) * map.size, -1);
    auto idx = [&](grid::Position p) {
        return static_cast<std::size_t>(p.row) * map.size + p.col;
    };
    std::queue<grid::Position> q;
    dist[idx(source)] = 0;
    q.push(source);
    while (!q.empty()) {
        grid::Position p = q.front();
        q.pop();
        for (grid::Direction d : grid::kDirections) {
            grid::Position next = grid::step_towards(p, d);
            if (map.open(next) && dist[idx(next)] < 0) {
                dist[idx(next)] = dist[idx(p)] + 1;
                q.push(next);
            }
        }
    }
    return dist;
}

void check_cell(const grid::GridMap& map, grid::Position p, const char* which) {
    if (!map.in_bounds(p))
        throw InvalidCell(std::string(which) + " cell is off the map");
    if (map.is_wall(p))
        throw InvalidCell(std::string(which) + " cell is a wall");
}

} // namespace

std::optional<int> bfs_dist(const grid::GridMap& map, grid::Position a, grid::Position b) {
    check_cell(map, a, "source");
    check_cell(map, b, "destination");
    std::vector<int> field = bfs_field(map, a);
    int d = field[static_cast<std::size_t>(b.row) * map.size + b.col];
    if (d < 0) return std::nullopt;
    return d;
}

std::optional<int> PathOracle::dist(grid::Position a, grid::Position b) const {
    check_cell(map_, a, "source");
    check_cell(map_, b, "destination");
    auto it = fields_.find(a);
    if (it == fields_.end()) it = fields_.emplace(a, bfs_field(map_, a)).first;
    int d = it->second[static_cast<std::size_t>(b.row) * map_.size + b.col];
    if (d < 0) return std::nullopt;
    return d;
}

} // namespace tempo::analytics
