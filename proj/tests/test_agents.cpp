#include <doctest.h>

#include "tempo/agents.hpp"
#include "tempo/pathfind.hpp"

using namespace tempo;
using namespace tempo::agents;
using grid::Direction;

namespace {

Observation observe(const grid::GridMap& map, grid::Position agent,
                    std::optional<grid::Signal> signal = std::nullopt, int step = 0,
                    bool allow_detect = false) {
    Observation obs;
    obs.agent = agent;
    obs.map_size = map.size;
    obs.walls.assign(map.walls.begin(), map.walls.end());
    obs.signal = signal;
    obs.step_index = step;
    obs.allow_detect = allow_detect;
    return obs;
}

grid::GridMap open_map(int n = 8) {
    grid::GridMap m;
    m.size = n;
    m.agent_start = {0, 0};
    m.target_start = {n - 1, n - 1};
    return m;
}

} // namespace

TEST_CASE("bfs-oracle picks the unique shortest first step") {
    grid::GridMap m = open_map();
    m.agent_start = {0, 0};
    m.target_start = {0, 3};
    AgentPtr agent = make_bfs_optimal_agent();
    agent->begin_episode(m);
    AgentAction a = agent->act(observe(m, {0, 0}));
    CHECK(a.kind == AgentAction::Kind::Move);
    CHECK(a.dir == Direction::East);
}

TEST_CASE("bfs-oracle walks generated maps in exactly optimal steps") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        grid::GridMap m = grid::generate_map(seed, 8, 0.15);
        const int optimal = *analytics::bfs_dist(m, m.agent_start, m.target_start);

        AgentPtr agent = make_bfs_optimal_agent();
        agent->begin_episode(m);
        grid::EnvState state;
        state.map = m;
        state.agent = m.agent_start;
        state.target = m.target_start;
        int steps = 0;
        while (state.agent != state.target && steps <= optimal) {
            AgentAction a = agent->act(observe(m, state.agent));
            REQUIRE(a.kind == AgentAction::Kind::Move);
            grid::MoveOutcome out = grid::apply_move(state, a.dir);
            CHECK_FALSE(out.blocked);
            state = out.state;
            ++steps;
        }
        CHECK(state.agent == state.target);
        CHECK(steps == optimal);
    }
}

TEST_CASE("greedy-signal tie order is N > E > S > W") {
    grid::GridMap m = open_map();
    AgentPtr agent = make_greedy_signal_agent();
    agent->begin_episode(m);
    AgentAction a = agent->act(observe(m, {4, 4}, grid::Signal{4, grid::Bearing::NE}));
    CHECK(a.kind == AgentAction::Kind::Move);
    CHECK(a.dir == Direction::North);
}

TEST_CASE("greedy-signal never increases Manhattan distance on wall-free maps") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        grid::GridMap m = grid::generate_map(seed, 8, 0.0);
        AgentPtr agent = make_greedy_signal_agent();
        agent->begin_episode(m);
        grid::EnvState state;
        state.map = m;
        state.agent = m.agent_start;
        state.target = m.target_start;
        for (int step = 0; step < 20 && state.agent != state.target; ++step) {
            const int before = grid::manhattan(state.agent, state.target);
            AgentAction a =
                agent->act(observe(m, state.agent, grid::emit_signal(state.agent, state.target), step));
            REQUIRE(a.kind == AgentAction::Kind::Move);
            state = grid::apply_move(state, a.dir).state;
            CHECK(grid::manhattan(state.agent, state.target) <= before);
        }
        CHECK(state.agent == state.target);
    }
}

TEST_CASE("greedy-signal detects when it has no reading") {
    grid::GridMap m = open_map();
    AgentPtr agent = make_greedy_signal_agent();
    agent->begin_episode(m);
    AgentAction a = agent->act(observe(m, {4, 4}, std::nullopt, 0, true));
    CHECK(a.kind == AgentAction::Kind::Detect);
}

TEST_CASE("random agent replays identically for one seed") {
    grid::GridMap m = open_map();
    AgentPtr a = make_random_agent(123);
    AgentPtr b = make_random_agent(123);
    for (int i = 0; i < 64; ++i) {
        AgentAction act_a = a->act(observe(m, {3, 3}, std::nullopt, i, true));
        AgentAction act_b = b->act(observe(m, {3, 3}, std::nullopt, i, true));
        CHECK(act_a.kind == act_b.kind);
        if (act_a.kind == AgentAction::Kind::Move) CHECK(act_a.dir == act_b.dir);
    }
}

TEST_CASE("fixed-reasoning wrapper pins the token charge") {
    AgentPtr agent = make_fixed_reasoning_agent(make_stay_agent(), filler_reasoning(238));
    AgentAction a = agent->act(observe(open_map(), {0, 0}));
    CHECK(a.reasoning.size() == 238 * 4);
    CHECK(a.kind == AgentAction::Kind::Stay);
}

// ---------------------------------------------------------------------------
// parse_action: pinned examples plus a hand-labelled transcript set the
// last-token and labelled-line rules were validated against.
// ---------------------------------------------------------------------------

namespace {

struct Transcript {
    const char* text;
    bool allow_detect;
    AgentAction::Kind kind;
    Direction dir; // meaningful for Move
    bool parsed_ok;
};

constexpr Direction kAny = Direction::North;

const Transcript kTranscripts[] = {
    {"I should go north. Action: NORTH", false, AgentAction::Kind::Move, Direction::North, true},
    {"Let's detect first. DETECT", false, AgentAction::Kind::Stay, kAny, false},
    {"move east then north", false, AgentAction::Kind::Move, Direction::North, true},
    {"Action: SOUTH\nWait, better: Action: EAST", false, AgentAction::Kind::Move, Direction::East,
     true},
    {"I think going UP is best", false, AgentAction::Kind::Move, Direction::North, true},
    {"heading DOWN now", false, AgentAction::Kind::Move, Direction::South, true},
    {"turn LEFT!", false, AgentAction::Kind::Move, Direction::West, true},
    {"go right", false, AgentAction::Kind::Move, Direction::East, true},
    {"The bomb is north of us, but the wall forces WEST.", false, AgentAction::Kind::Move,
     Direction::West, true},
    {"I'll go south.\nAction:", false, AgentAction::Kind::Move, Direction::South, true},
    {"**Action: West**", false, AgentAction::Kind::Move, Direction::West, true},
    {"action = EAST", false, AgentAction::Kind::Move, Direction::East, true},
    {"Going upward", false, AgentAction::Kind::Stay, kAny, false},
    {"NORTHEAST", false, AgentAction::Kind::Stay, kAny, false},
    {"We could go East or West or maybe South", false, AgentAction::Kind::Move, Direction::South,
     true},
    {"DETECT", true, AgentAction::Kind::Detect, kAny, true},
    {"Let me scan. Action: DETECT", true, AgentAction::Kind::Detect, kAny, true},
    {"Action: DETECT", false, AgentAction::Kind::Stay, kAny, false},
    {"", false, AgentAction::Kind::Stay, kAny, false},
    {"asdf qwer 1234", false, AgentAction::Kind::Stay, kAny, false},
    {"Move Up\nAction: up", false, AgentAction::Kind::Move, Direction::North, true},
    {"I go north\nACTION: SOUTH", false, AgentAction::Kind::Move, Direction::South, true},
    {"the update is ready", false, AgentAction::Kind::Stay, kAny, false},
    {"detect, then go WEST", true, AgentAction::Kind::Move, Direction::West, true},
};

} // namespace

TEST_CASE("parse_action matches the hand-labelled transcript set") {
    for (const Transcript& t : kTranscripts) {
        CAPTURE(t.text);
        AgentAction a = parse_action(t.text, t.allow_detect);
        CHECK(a.kind == t.kind);
        if (t.kind == AgentAction::Kind::Move) CHECK(a.dir == t.dir);
        CHECK(a.parsed_ok == t.parsed_ok);
        CHECK(a.reasoning == t.text); // full text retained for the clock
    }
}

TEST_CASE("parse_action is total on arbitrary bytes") {
    Rng rng(321);
    for (int i = 0; i < 500; ++i) {
        std::string garbage;
        const int len = rng.range(0, 60);
        for (int k = 0; k < len; ++k)
            garbage += static_cast<char>(rng.range(1, 255));
        AgentAction a = parse_action(garbage, rng.range(0, 1) == 1);
        const bool valid = a.kind == AgentAction::Kind::Move ||
                           a.kind == AgentAction::Kind::Detect ||
                           a.kind == AgentAction::Kind::Stay;
        CHECK(valid);
    }
}
