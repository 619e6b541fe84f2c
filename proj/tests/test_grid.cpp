#include <doctest.h>

#include "tempo/grid.hpp"
#include "tempo/pathfind.hpp"

using namespace tempo;
using namespace tempo::grid;

TEST_CASE("signal distance and bearing") {
    SUBCASE("diagonal pair") {
        Signal s = emit_signal({0, 0}, {3, 4});
        CHECK(s.distance == 7);
        CHECK(s.bearing == Bearing::SE);
    }
    SUBCASE("identity") {
        Signal s = emit_signal({2, 2}, {2, 2});
        CHECK(s.distance == 0);
        CHECK(s.bearing == Bearing::Here);
    }
    SUBCASE("pure cardinal tie-break") {
        Signal s = emit_signal({2, 5}, {2, 1});
        CHECK(s.distance == 4);
        CHECK(s.bearing == Bearing::W);
        CHECK(emit_signal({0, 0}, {0, 3}).bearing == Bearing::E);
        CHECK(emit_signal({5, 2}, {1, 2}).bearing == Bearing::N);
        CHECK(emit_signal({1, 2}, {5, 2}).bearing == Bearing::S);
    }
    SUBCASE("all four diagonal octants") {
        CHECK(emit_signal({4, 4}, {1, 6}).bearing == Bearing::NE);
        CHECK(emit_signal({4, 4}, {1, 2}).bearing == Bearing::NW);
        CHECK(emit_signal({4, 4}, {6, 6}).bearing == Bearing::SE);
        CHECK(emit_signal({4, 4}, {6, 2}).bearing == Bearing::SW);
    }
}

TEST_CASE("signal distance equals an independent Manhattan oracle") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        Position a{rng.range(0, 7), rng.range(0, 7)};
        Position b{rng.range(0, 7), rng.range(0, 7)};
        int oracle = (a.row > b.row ? a.row - b.row : b.row - a.row) +
                     (a.col > b.col ? a.col - b.col : b.col - a.col);
        CHECK(emit_signal(a, b).distance == oracle);
    }
}

namespace {

EnvState state_on(GridMap map, Position agent, Position target,
                  SignalMode mode = SignalMode::Passive) {
    EnvState s;
    s.map = std::move(map);
    s.agent = agent;
    s.target = target;
    s.target_kind = TargetKind::Bomb;
    s.signal_mode = mode;
    return s;
}

GridMap empty_map(int n = 8) {
    GridMap m;
    m.size = n;
    m.agent_start = {0, 0};
    m.target_start = {n - 1, n - 1};
    return m;
}

} // namespace

TEST_CASE("apply_move semantics") {
    SUBCASE("off-map move blocks and still consumes the step") {
        EnvState s = state_on(empty_map(), {0, 0}, {7, 7});
        MoveOutcome out = apply_move(s, Direction::North);
        CHECK(out.blocked);
        CHECK(out.state.agent == Position{0, 0});
        CHECK(out.state.step_index == 1);
    }
    SUBCASE("north decreases row") {
        EnvState s = state_on(empty_map(), {3, 3}, {7, 7});
        MoveOutcome out = apply_move(s, Direction::North);
        CHECK_FALSE(out.blocked);
        CHECK(out.state.agent == Position{2, 3});
    }
    SUBCASE("wall blocks") {
        GridMap m = empty_map();
        m.walls.insert({3, 4});
        EnvState s = state_on(m, {3, 3}, {7, 7});
        MoveOutcome out = apply_move(s, Direction::East);
        CHECK(out.blocked);
        CHECK(out.state.agent == Position{3, 3});
        CHECK(out.state.step_index == 1);
    }
    SUBCASE("map cells never change") {
        GridMap m = empty_map();
        m.walls.insert({5, 5});
        EnvState s = state_on(m, {3, 3}, {7, 7});
        EnvState after = apply_move(s, Direction::South).state;
        CHECK(after.map.walls == s.map.walls);
        CHECK(after.target == s.target);
    }
}

TEST_CASE("apply_detect semantics") {
    SUBCASE("reads the instantaneous signal without moving") {
        EnvState s = state_on(empty_map(), {0, 0}, {0, 3}, SignalMode::ActiveDetect);
        DetectOutcome out = apply_detect(s);
        CHECK(out.signal == Signal{3, Bearing::E});
        CHECK(out.state.agent == Position{0, 0});
        CHECK(out.state.step_index == 1);
        REQUIRE(out.state.last_detection.has_value());
        CHECK(out.state.last_detection->step_index == 0);
    }
    SUBCASE("unavailable outside active settings") {
        EnvState s = state_on(empty_map(), {0, 0}, {0, 3}, SignalMode::Passive);
        CHECK_THROWS_AS(apply_detect(s), DetectUnavailable);
    }
    SUBCASE("consecutive detects on a stationary bomb agree") {
        EnvState s = state_on(empty_map(), {2, 2}, {6, 5}, SignalMode::ActiveDetect);
        DetectOutcome first = apply_detect(s);
        DetectOutcome second = apply_detect(first.state);
        CHECK(first.signal == second.signal);
    }
}

TEST_CASE("move_target stays off walls, edges and the agent") {
    SUBCASE("fully surrounded bomb never moves") {
        GridMap m = empty_map(4);
        m.walls.insert({0, 1});
        m.walls.insert({1, 0});
        EnvState s = state_on(m, {3, 3}, {0, 0});
        Rng rng(1);
        for (int i = 0; i < 32; ++i) {
            s = move_target(s, rng);
            CHECK(s.target == Position{0, 0});
        }
    }
    SUBCASE("same stream, same path") {
        EnvState a = state_on(empty_map(), {0, 0}, {4, 4});
        EnvState b = a;
        Rng ra(77), rb(77);
        for (int i = 0; i < 50; ++i) {
            a = move_target(a, ra);
            b = move_target(b, rb);
            CHECK(a.target == b.target);
        }
    }
    SUBCASE("never lands on the agent") {
        EnvState s = state_on(empty_map(4), {1, 1}, {1, 2});
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            s = move_target(s, rng);
            CHECK_FALSE(s.target == s.agent);
            CHECK(s.map.open(s.target));
        }
    }
}

TEST_CASE("generate_map honors the contract") {
    SUBCASE("density 0.15 on 8x8 gives exactly 9 walls") {
        GridMap m = generate_map(7, 8, 0.15);
        CHECK(m.walls.size() == 9);
        CHECK_FALSE(m.is_wall(m.agent_start));
        CHECK_FALSE(m.is_wall(m.target_start));
        CHECK_FALSE(m.agent_start == m.target_start);
    }
    SUBCASE("zero density gives no walls and distinct starts") {
        GridMap m = generate_map(7, 8, 0.0);
        CHECK(m.walls.empty());
        CHECK_FALSE(m.agent_start == m.target_start);
    }
    SUBCASE("same seed, bit-identical maps") {
        GridMap a = generate_map(7, 8, 0.15);
        GridMap b = generate_map(7, 8, 0.15);
        CHECK(a.walls == b.walls);
        CHECK(a.agent_start == b.agent_start);
        CHECK(a.target_start == b.target_start);
        CHECK(to_json(a).dump() == to_json(b).dump());
    }
    SUBCASE("reachability and separation over many seeds") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            GridMap m = generate_map(seed, 8, 0.15);
            CHECK(m.walls.size() == 9);
            CHECK(manhattan(m.agent_start, m.target_start) >= 4);
            auto d = analytics::bfs_dist(m, m.agent_start, m.target_start);
            CHECK(d.has_value());
        }
    }
    SUBCASE("small boards still generate") {
        GridMap m = generate_map(3, 2, 0.0);
        CHECK(m.size == 2);
        CHECK_FALSE(m.agent_start == m.target_start);
    }
    SUBCASE("pathological density is rejected") {
        CHECK_THROWS_AS(generate_map(1, 8, 0.99), GenerationExhausted);
    }
}

TEST_CASE("map render and state JSON shape") {
    GridMap m = empty_map(3);
    m.walls.insert({1, 1});
    EnvState s = state_on(m, {0, 0}, {2, 2});
    CHECK(render_map(s) == "A..\n.#.\n...\n");

    Json j = state_to_json(s, emit_signal(s.agent, s.target));
    CHECK(j["size"] == 3);
    CHECK(j["agent"] == Json::array({0, 0}));
    CHECK(j["walls"] == Json::array({Json::array({1, 1})}));
    CHECK(j["target_kind"] == "bomb");
    CHECK(j["signal"]["distance"] == 4);
    CHECK(j["signal"]["bearing"] == "SE");
    CHECK(j["step_index"] == 0);

    Json none = state_to_json(s, std::nullopt);
    CHECK(none["signal"].is_null());
}

TEST_CASE("map JSON round-trip") {
    GridMap m = generate_map(42, 8, 0.15);
    GridMap back = map_from_json(to_json(m));
    CHECK(back.walls == m.walls);
    CHECK(back.agent_start == m.agent_start);
    CHECK(back.target_start == m.target_start);
    CHECK(back.seed == m.seed);
}
