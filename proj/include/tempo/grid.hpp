#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tempo/common.hpp"

namespace tempo::grid {

struct Position {
    int row = 0; // 0 = north edge
    int col = 0; // 0 = west edge

    auto operator<=>(const Position&) const = default;
};

enum class Direction { North, South, East, West };

inline constexpr Direction kDirections[] = {Direction::North, Direction::South,
                                            Direction::East, Direction::West};

Position step_towards(Position p, Direction d);
std::string to_string(Direction d);
std::optional<Direction> direction_from_string(std::string_view name);

enum class Bearing { N, NE, E, SE, S, SW, W, NW, Here };

std::string to_string(Bearing b);

struct Signal {
    int distance = 0; // Manhattan cells
    Bearing bearing = Bearing::Here;

    bool operator==(const Signal&) const = default;
};

struct GridMap {
    int size = 8;
    std::set<Position> walls;
    Position agent_start;
    Position target_start;
    std::uint64_t seed = 0;

    bool in_bounds(Position p) const {
        return p.row >= 0 && p.row < size && p.col >= 0 && p.col < size;
    }
    bool is_wall(Position p) const { return walls.count(p) > 0; }
    bool open(Position p) const { return in_bounds(p) && !is_wall(p); }
};

enum class TargetKind { Treasure, Bomb };
enum class SignalMode { Passive, ActiveDetect };

struct Detection {
    Signal signal;
    int step_index = 0; // step at which the reading was taken
};

struct EnvState {
    GridMap map;
    Position agent;
    Position target;
    int step_index = 0;
    TargetKind target_kind = TargetKind::Treasure;
    SignalMode signal_mode = SignalMode::Passive;
    std::optional<Detection> last_detection;
};

struct GenOptions {
    int min_separation = 4; // Manhattan floor between the two start cells
    int max_attempts = 1000;
};

// Draws walls then both start cells from one seeded stream; candidates that
// violate distinctness, separation or reachability are discarded and the next
// attempt continues from the same stream, so a seed always maps to one map.
GridMap generate_map(std::uint64_t seed, int n, double wall_density,
                     const GenOptions& opts = {});

int manhattan(Position a, Position b);
Signal emit_signal(Position agent, Position target);

struct MoveOutcome {
    EnvState state;
    bool blocked = false;
};

// Blocked moves (wall or edge) leave the agent in place but still consume the
// step; the blocked flag is surfaced for the trajectory log.
MoveOutcome apply_move(const EnvState& state, Direction dir);

struct DetectOutcome {
    EnvState state;
    Signal signal;
};

// Active-detection settings only. The agent stays put, the step is consumed,
// and the reading reflects the target's position at this instant.
DetectOutcome apply_detect(const EnvState& state);

// Consumes a turn with no movement (the parse-failure fallback action).
EnvState apply_stay(const EnvState& state);

// Moving-bomb settings: called after every 3rd agent action. The bomb draws
// one cardinal direction from the stream; a draw into a wall or off the map
// leaves it in place, and a draw onto the agent's cell is redrawn once.
EnvState move_target(const EnvState& state, Rng& rng);

// 'A' = agent, '#' = wall, '.' = open. The target is never rendered.
std::string render_map(const EnvState& state);

// {size, walls, agent, target_kind, signal, step_index} — the record embedded
// in the user prompt. `signal` is null when the setting provides none.
Json state_to_json(const EnvState& state, const std::optional<Signal>& signal);

Json to_json(const GridMap& map);
GridMap map_from_json(const Json& j);

} // namespace tempo::grid
