#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tempo/common.hpp"
#include "tempo/grid.hpp"

namespace tempo::agents {

// One turn's view of the world. The episode loop also attaches the rendered
// prompts so model-backed agents can forward them verbatim; scripted agents
// read the structured fields and ignore the text.
struct Observation {
    std::string map_render;
    std::vector<grid::Position> walls;
    grid::Position agent;
    int map_size = 8;
    std::optional<grid::Signal> signal;
    std::optional<double> remaining_seconds;
    std::optional<int> last_round_tokens;
    std::optional<double> last_round_seconds;
    int step_index = 0;
    bool allow_detect = false;
    std::string system_prompt;
    std::string user_prompt;
};

struct AgentAction {
    enum class Kind { Move, Detect, Stay };

    Kind kind = Kind::Stay;
    grid::Direction dir = grid::Direction::North; // meaningful for Move only
    std::string reasoning;                        // full generated text
    bool parsed_ok = true;

    static AgentAction move(grid::Direction d) { return {Kind::Move, d, "", true}; }
    static AgentAction detect() { return {Kind::Detect, grid::Direction::North, "", true}; }
    static AgentAction stay_fallback() { return {Kind::Stay, grid::Direction::North, "", false}; }
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual std::string name() const = 0;
    virtual AgentAction act(const Observation& obs) = 0;

    // Called once per episode before the first observation. Scripted agents
    // that play with full map knowledge capture it here.
    virtual void begin_episode(const grid::GridMap& map) { (void)map; }
};

using AgentPtr = std::unique_ptr<Agent>;

// Walks a shortest wall-avoiding path to the stationary target captured at
// episode start. Ties between equally short first steps break N > E > S > W.
AgentPtr make_bfs_optimal_agent();

// Navigates by the signal alone: moves along a cardinal component of the
// bearing (tie order N > E > S > W), detecting first in active settings when
// its last reading has gone stale.
AgentPtr make_greedy_signal_agent(int redetect_every = 5);

AgentPtr make_random_agent(std::uint64_t seed);

// Consumes every turn in place with empty reasoning.
AgentPtr make_stay_agent();

// Wraps another agent and replaces its reasoning with a fixed text, so tests
// and calibration runs can pin the per-step token charge.
AgentPtr make_fixed_reasoning_agent(AgentPtr inner, std::string reasoning);

// ceil(len/4)-counter filler worth exactly `tokens` tokens.
std::string filler_reasoning(int tokens);

// Extracts the last well-formed action token (UP/NORTH, DOWN/SOUTH, LEFT/WEST,
// RIGHT/EAST, DETECT) case-insensitively, preferring the last labelled
// "Action:" line when one contains a token. DETECT is only well-formed when
// allow_detect. No match -> stay-in-place fallback with parsed_ok = false;
// every input maps to some action.
AgentAction parse_action(const std::string& raw_text, bool allow_detect);

} // namespace tempo::agents
