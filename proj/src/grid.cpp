#include "tempo/grid.hpp"

#include <algorithm>
#include <queue>

namespace tempo::grid {

Position step_towards(Position p, Direction d) {
    switch (d) {
    case Direction::North: return {p.row - 1, p.col};
    case Direction::South: return {p.row + 1, p.col};
    case Direction::East: return {p.row, p.col + 1};
    case Direction::West: return {p.row, p.col - 1};
    }
    return p;
}

std::string to_string(Direction d) {
    switch (d) {
    case Direction::North: return "north";
    case Direction::South: return "south";
    case Direction::East: return "east";
    case Direction::West: return "west";
    }
    return "?";
}

std::optional<Direction> direction_from_string(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "north" || s == "up") return Direction::North;
    if (s == "south" || s == "down") return Direction::South;
    if (s == "east" || s == "right") return Direction::East;
    if (s == "west" || s == "left") return Direction::West;
    return std::nullopt;
}

std::string to_string(Bearing b) {
    switch (b) {
    case Bearing::N: return "N";
    case Bearing::NE: return "NE";
    case Bearing::E: return "E";
    case Bearing::SE: return "SE";
    case Bearing::S: return "S";
    case Bearing::SW: return "SW";
    case Bearing::W: return "W";
    case Bearing::NW: return "NW";
    case Bearing::Here: return "Here";
    }
    return "?";
}

int manhattan(Position a, Position b) {
    return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

Signal emit_signal(Position agent, Position target) {
    const int drow = target.row - agent.row;
    const int dcol = target.col - agent.col;
    Signal s;
    s.distance = std::abs(drow) + std::abs(dcol);
    if (drow == 0 && dcol == 0) {
        s.bearing = Bearing::Here;
    } else if (drow == 0) {
        s.bearing = dcol > 0 ? Bearing::E : Bearing::W;
    } else if (dcol == 0) {
        s.bearing = drow > 0 ? Bearing::S : Bearing::N;
    } else if (drow < 0) {
        s.bearing = dcol > 0 ? Bearing::NE : Bearing::NW;
    } else {
        s.bearing = dcol > 0 ? Bearing::SE : Bearing::SW;
    }
    return s;
}

namespace {

bool reachable(const GridMap& map, Position from, Position to) {
    if (!map.open(from) || !map.open(to)) return false;
    std::vector<char> seen(static_cast<std::size_t>(map.size) * map.size, 0);
    auto idx = [&](Position p) { return static_cast<std::size_t>(p.row) * map.size + p.col; };
    std::queue<Position> q;
    q.push(from);
    seen[idx(from)] = 1;
    while (!q.empty()) {
        Position p = q.front();
        q.pop();
        if (p == to) return true;
        for (Direction d : kDirections) {
            Position next = step_towards(p, d);
            if (map.open(next) && !seen[idx(next)]) {
                seen[idx(next)] = 1;
                q.push(next);
            }
        }
    }
    return false;
}

Position draw_cell(Rng& rng, int n) {
    return {rng.range(0, n - 1), rng.range(0, n - 1)};
}

} // namespace

GridMap generate_map(std::uint64_t seed, int n, double wall_density, const GenOptions& opts) {
    if (n < 2) throw GenerationExhausted("map size must be at least 2");
    if (wall_density < 0.0 || wall_density >= 1.0)
        throw GenerationExhausted("wall density must be in [0, 1)");

    const int wall_count = static_cast<int>(wall_density * n * n);
    const int separation = std::min(opts.min_separation, 2 * (n - 1));
    Rng rng(seed);

    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        GridMap map;
        map.size = n;
        map.seed = seed;
        while (static_cast<int>(map.walls.size()) < wall_count)
            map.walls.insert(draw_cell(rng, n));

        std::vector<Position> open_cells;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (!map.is_wall({r, c})) open_cells.push_back({r, c});
        if (open_cells.size() < 2) continue;

        map.agent_start = open_cells[rng.below(open_cells.size())];
        map.target_start = open_cells[rng.below(open_cells.size())];

        if (map.agent_start == map.target_start) continue;
        if (manhattan(map.agent_start, map.target_start) < separation) continue;
        if (!reachable(map, map.agent_start, map.target_start)) continue;
        return map;
    }
    throw GenerationExhausted("no valid map after " + std::to_string(opts.max_attempts) +
                              " attempts (seed " + std::to_string(seed) + ")");
}

MoveOutcome apply_move(const EnvState& state, Direction dir) {
    MoveOutcome out{state, false};
    Position dest = step_towards(state.agent, dir);
    if (state.map.open(dest)) {
        out.state.agent = dest;
    } else {
        out.blocked = true;
    }
    out.state.step_index = state.step_index + 1;
    return out;
}

DetectOutcome apply_detect(const EnvState& state) {
    if (state.signal_mode != SignalMode::ActiveDetect)
        throw DetectUnavailable("detection is not an action in this setting");
    DetectOutcome out{state, emit_signal(state.agent, state.target)};
    out.state.step_index = state.step_index + 1;
    out.state.last_detection = Detection{out.signal, state.step_index};
    return out;
}

EnvState apply_stay(const EnvState& state) {
    EnvState next = state;
    next.step_index = state.step_index + 1;
    return next;
}

EnvState move_target(const EnvState& state, Rng& rng) {
    EnvState next = state;
    Direction d = kDirections[rng.below(4)];
    Position dest = step_towards(state.target, d);
    if (!state.map.open(dest)) return next;
    if (dest == state.agent) {
        d = kDirections[rng.below(4)];
        dest = step_towards(state.target, d);
        if (!state.map.open(dest) || dest == state.agent) return next;
    }
    next.target = dest;
    return next;
}

std::string render_map(const EnvState& state) {
    std::string out;
    out.reserve(static_cast<std::size_t>(state.map.size) * (state.map.size + 1));
    for (int r = 0; r < state.map.size; ++r) {
        for (int c = 0; c < state.map.size; ++c) {
            Position p{r, c};
            if (p == state.agent)
                out += 'A';
            else if (state.map.is_wall(p))
                out += '#';
            else
                out += '.';
        }
        out += '\n';
    }
    return out;
}

Json state_to_json(const EnvState& state, const std::optional<Signal>& signal) {
    Json j;
    j["size"] = state.map.size;
    Json walls = Json::array();
    for (const Position& w : state.map.walls) walls.push_back({w.row, w.col});
    j["walls"] = walls;
    j["agent"] = {state.agent.row, state.agent.col};
    j["target_kind"] = state.target_kind == TargetKind::Bomb ? "bomb" : "treasure";
    if (signal) {
        j["signal"] = {{"distance", signal->distance}, {"bearing", to_string(signal->bearing)}};
    } else {
        j["signal"] = nullptr;
    }
    j["step_index"] = state.step_index;
    return j;
}

Json to_json(const GridMap& map) {
    Json j;
    j["size"] = map.size;
    Json walls = Json::array();
    for (const Position& w : map.walls) walls.push_back({w.row, w.col});
    j["walls"] = walls;
    j["agent_start"] = {map.agent_start.row, map.agent_start.col};
    j["target_start"] = {map.target_start.row, map.target_start.col};
    j["seed"] = map.seed;
    return j;
}

GridMap map_from_json(const Json& j) {
    GridMap map;
    map.size = j.at("size").get<int>();
    for (const auto& w : j.at("walls")) map.walls.insert({w.at(0).get<int>(), w.at(1).get<int>()});
    map.agent_start = {j.at("agent_start").at(0).get<int>(), j.at("agent_start").at(1).get<int>()};
    map.target_start = {j.at("target_start").at(0).get<int>(), j.at("target_start").at(1).get<int>()};
    map.seed = j.at("seed").get<std::uint64_t>();
    return map;
}

} // namespace tempo::grid
