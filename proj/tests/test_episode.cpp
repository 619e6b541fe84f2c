#include <doctest.h>

#include <sstream>

#include "tempo/episode.hpp"
#include "tempo/pathfind.hpp"

using namespace tempo;
using namespace tempo::episode;
using agents::AgentAction;

namespace {

EpisodeOptions timed_options(double v_out = 0.01) {
    EpisodeOptions options;
    options.v_out = v_out;
    return options;
}

grid::EnvState state_for(const SettingSpec& setting, std::uint64_t seed = 9) {
    grid::GridMap map = grid::generate_map(seed, setting.n, setting.wall_density);
    grid::EnvState s;
    s.map = map;
    s.agent = map.agent_start;
    s.target = map.target_start;
    s.target_kind = setting.target_kind();
    s.signal_mode = setting.signal_mode();
    return s;
}

} // namespace

TEST_CASE("setting defaults") {
    CHECK(SettingSpec::from_id(SettingId::S1Treasure).step_limit == 20);
    CHECK_FALSE(SettingSpec::from_id(SettingId::S1Treasure).budget_seconds.has_value());
    CHECK(SettingSpec::from_id(SettingId::S2HintHurry).step_limit == 20);
    CHECK(SettingSpec::from_id(SettingId::S2HintHurry).budget_seconds == 300.0);
    CHECK(SettingSpec::from_id(SettingId::S3Active).step_limit == 30);
    CHECK(SettingSpec::from_id(SettingId::S3Passive).moving_target());
    CHECK(SettingSpec::from_id(SettingId::S3Active).signal_mode() ==
          grid::SignalMode::ActiveDetect);
    CHECK(SettingSpec::from_id(SettingId::S1Treasure).wall_density == 0.15);
    CHECK(SettingSpec::from_id(SettingId::S1Treasure).n == 8);
}

TEST_CASE("prompt rendering per setting") {
    SUBCASE("hint-hurry system prompt carries both sentences") {
        SettingSpec setting = SettingSpec::from_id(SettingId::S2HintHurry);
        grid::EnvState s = state_for(setting);
        PromptContext ctx;
        ctx.signal = grid::emit_signal(s.agent, s.target);
        ctx.remaining_seconds = 300.0;
        Prompts p = render_prompts(setting, s, ctx);
        CHECK(p.system.find("reasoning consumes time") != std::string::npos);
        CHECK(p.system.find("Hurry up! The bomb is going to explode soon.") != std::string::npos);
    }
    SUBCASE("plain hurry has the urgency line but no hint") {
        SettingSpec setting = SettingSpec::from_id(SettingId::S2Hurry);
        grid::EnvState s = state_for(setting);
        Prompts p = render_prompts(setting, s, {});
        CHECK(p.system.find("Hurry up! The bomb is going to explode soon.") != std::string::npos);
        CHECK(p.system.find("reasoning consumes time") == std::string::npos);
    }
    SUBCASE("s1 user prompt has no remaining-time field") {
        SettingSpec setting = SettingSpec::from_id(SettingId::S1Treasure);
        grid::EnvState s = state_for(setting);
        PromptContext ctx;
        ctx.signal = grid::emit_signal(s.agent, s.target);
        Prompts p = render_prompts(setting, s, ctx);
        CHECK(p.user.find("remaining_time_seconds") == std::string::npos);
        CHECK(p.user.find("treasure") != std::string::npos);
    }
    SUBCASE("hint variant reports the previous round's token count") {
        SettingSpec setting = SettingSpec::from_id(SettingId::S2Hint);
        grid::EnvState s = state_for(setting);
        PromptContext ctx;
        ctx.signal = grid::emit_signal(s.agent, s.target);
        ctx.remaining_seconds = 287.3;
        ctx.last_round_tokens = 57;
        ctx.last_round_seconds = 12.7;
        Prompts p = render_prompts(setting, s, ctx);
        CHECK(p.user.find("\"last_round_tokens\": 57") != std::string::npos);
        CHECK(p.user.find("\"remaining_time_seconds\": 287.3") != std::string::npos);
    }
    SUBCASE("missing template family") {
        TemplateSet empty;
        SettingSpec setting = SettingSpec::from_id(SettingId::S1Treasure);
        grid::EnvState s = state_for(setting);
        CHECK_THROWS_AS(render_prompts(setting, s, {}, empty), TemplateMissing);
    }
}

TEST_CASE("classify_outcome precedence") {
    CHECK(classify_outcome(true, false, 20, 20) == StepOutcome::Success);
    CHECK(classify_outcome(true, true, 20, 20) == StepOutcome::Success); // arrival wins
    CHECK(classify_outcome(false, true, 5, 20) == StepOutcome::TimeOut);
    CHECK(classify_outcome(false, true, 20, 20) == StepOutcome::TimeOut); // over steps too
    CHECK(classify_outcome(false, false, 20, 20) == StepOutcome::OverSteps);
    CHECK(classify_outcome(false, false, 7, 20) == StepOutcome::Continue);
}

TEST_CASE("bfs-oracle completes s1 episodes at the optimum") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S1Treasure);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto agent = agents::make_bfs_optimal_agent();
        EpisodeRecord record = run_episode(setting, *agent, seed, {});
        REQUIRE(record.outcome == Outcome::Success);
        const int optimal =
            *analytics::bfs_dist(record.map, record.map.agent_start, record.map.target_start);
        CHECK(record.steps_taken == optimal);
        CHECK_FALSE(record.remaining_at_end.has_value());
    }
}

TEST_CASE("a 40k-token response on step one detonates the clock") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
    auto agent = agents::make_fixed_reasoning_agent(agents::make_bfs_optimal_agent(),
                                                    agents::filler_reasoning(40000));
    EpisodeRecord record = run_episode(setting, *agent, 3, timed_options(0.01));
    REQUIRE(record.outcome == Outcome::TimeOut);
    CHECK(record.steps_taken == 1);
    REQUIRE(record.steps.size() == 1);
    CHECK(record.steps[0].voided);
    CHECK(record.steps[0].tokens_charged == 40000);
    CHECK(record.steps[0].seconds_charged == doctest::Approx(400.0));
    CHECK(record.steps[0].agent_after == record.steps[0].agent_before);
    CHECK(record.remaining_at_end == 0.0);
}

TEST_CASE("step limits trigger exactly at the boundary") {
    SUBCASE("s2 oversteps at step 20") {
        SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
        auto agent = agents::make_stay_agent();
        EpisodeRecord record = run_episode(setting, *agent, 5, timed_options());
        REQUIRE(record.outcome == Outcome::OverSteps);
        CHECK(record.steps_taken == 20);
        CHECK(record.steps.size() == 20);
    }
    SUBCASE("s3 oversteps at step 30") {
        SettingSpec setting = SettingSpec::from_id(SettingId::S3Passive);
        auto agent = agents::make_stay_agent();
        EpisodeRecord record = run_episode(setting, *agent, 5, timed_options());
        REQUIRE(record.outcome == Outcome::OverSteps);
        CHECK(record.steps_taken == 30);
    }
}

TEST_CASE("a wandering random agent eventually oversteps in s2") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
    bool seen_oversteps = false;
    for (std::uint64_t seed = 0; seed < 50 && !seen_oversteps; ++seed) {
        auto agent = agents::make_random_agent(derive_seed(seed, "wander"));
        EpisodeRecord record = run_episode(setting, *agent, seed, timed_options());
        if (record.outcome == Outcome::OverSteps) {
            seen_oversteps = true;
            CHECK(record.steps_taken == 20);
        }
    }
    CHECK(seen_oversteps);
}

TEST_CASE("episode invariants over mixed runs") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S3Passive);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto agent = agents::make_greedy_signal_agent();
        EpisodeRecord record = run_episode(setting, *agent, seed, timed_options(0.05));

        int target_moves = 0;
        double previous_remaining = *record.setting.budget_seconds;
        for (const StepRecord& step : record.steps) {
            // agent and target never stand inside walls
            CHECK_FALSE(record.map.is_wall(step.agent_after));
            CHECK_FALSE(record.map.is_wall(step.target_after));
            if (step.target_after != step.target_before) ++target_moves;
            // clock/trajectory consistency
            REQUIRE(step.remaining_after.has_value());
            REQUIRE(step.seconds_charged.has_value());
            const double expected = std::max(0.0, previous_remaining - *step.seconds_charged);
            CHECK(*step.remaining_after == doctest::Approx(expected).epsilon(1e-9));
            previous_remaining = *step.remaining_after;
        }
        // the bomb is slower than the agent
        CHECK(target_moves <= record.steps_taken / 3);
        CHECK(record.outcome.has_value());
    }
}

TEST_CASE("detect consumes a step and counts toward the bomb cadence") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S3Active);
    auto agent = agents::make_greedy_signal_agent();
    EpisodeRecord record = run_episode(setting, *agent, 11, timed_options(0.05));
    REQUIRE(!record.steps.empty());
    CHECK(record.steps[0].action.kind == AgentAction::Kind::Detect); // no reading yet
    CHECK(record.steps[0].agent_after == record.steps[0].agent_before);
    // the following observation surfaces the detect reading
    if (record.steps.size() > 1) CHECK(record.steps[1].observation.signal.has_value());
    CHECK(record.steps_taken <= setting.step_limit);
}

TEST_CASE("replay determinism: byte-identical serialization") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S3Active);
    auto run_once = [&](std::uint64_t seed) {
        auto agent = agents::make_greedy_signal_agent();
        EpisodeRecord record = run_episode(setting, *agent, seed, timed_options(0.037));
        std::ostringstream out;
        write_episode_jsonl(out, record);
        return out.str();
    };
    for (std::uint64_t seed = 40; seed < 44; ++seed) CHECK(run_once(seed) == run_once(seed));
}

TEST_CASE("s1 records carry no clock fields") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S1Treasure);
    auto agent = agents::make_fixed_reasoning_agent(agents::make_bfs_optimal_agent(),
                                                    agents::filler_reasoning(10));
    EpisodeRecord record = run_episode(setting, *agent, 2, {});
    std::ostringstream out;
    write_episode_jsonl(out, record);
    const std::string text = out.str();
    CHECK(text.find("remaining") == std::string::npos);
    CHECK(text.find("seconds_charged") == std::string::npos);
    CHECK(text.find("budget_seconds") == std::string::npos);
    CHECK(text.find("tokens_charged") != std::string::npos); // token stats stay
}

TEST_CASE("jsonl round-trip preserves the record") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S2Hint);
    auto agent = agents::make_fixed_reasoning_agent(agents::make_bfs_optimal_agent(),
                                                    agents::filler_reasoning(25));
    EpisodeRecord record = run_episode(setting, *agent, 21, timed_options(0.02));

    std::ostringstream out;
    write_episode_jsonl(out, record);
    std::istringstream in(out.str());
    std::vector<EpisodeRecord> loaded = read_episodes_jsonl(in);
    REQUIRE(loaded.size() == 1);
    const EpisodeRecord& back = loaded[0];
    CHECK(back.outcome == record.outcome);
    CHECK(back.steps_taken == record.steps_taken);
    CHECK(back.seed == record.seed);
    CHECK(back.setting.id == record.setting.id);
    CHECK(back.map.walls == record.map.walls);
    REQUIRE(back.steps.size() == record.steps.size());
    for (std::size_t i = 0; i < back.steps.size(); ++i) {
        CHECK(back.steps[i].agent_after == record.steps[i].agent_after);
        CHECK(back.steps[i].target_before == record.steps[i].target_before);
        CHECK(back.steps[i].tokens_charged == record.steps[i].tokens_charged);
        CHECK(back.steps[i].action.kind == record.steps[i].action.kind);
    }
    // serialization of the reloaded record is byte-identical
    std::ostringstream again;
    for (const EpisodeRecord& r : loaded) write_episode_jsonl(again, r);
    CHECK(again.str() == out.str());
}

TEST_CASE("outcome exclusivity over a mixed batch") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
    episode::AgentFactory factory = [](std::uint64_t seed) -> agents::AgentPtr {
        // alternate agent styles to cover all three outcomes
        switch (seed % 3) {
        case 0: return agents::make_bfs_optimal_agent();
        case 1: return agents::make_stay_agent();
        default:
            return agents::make_fixed_reasoning_agent(agents::make_bfs_optimal_agent(),
                                                      agents::filler_reasoning(40000));
        }
    };
    BatchResult batch = run_batch(setting, factory, 30, 77, timed_options(0.01));
    CHECK(batch.completed.size() == 30);
    int success = 0, oversteps = 0, timeout = 0;
    for (const auto& r : batch.completed) {
        switch (*r.outcome) {
        case Outcome::Success: ++success; break;
        case Outcome::OverSteps: ++oversteps; break;
        case Outcome::TimeOut: ++timeout; break;
        }
    }
    CHECK(success > 0);
    CHECK(oversteps > 0);
    CHECK(timeout > 0);
    CHECK(success + oversteps + timeout == 30);
}

TEST_CASE("agent failures abort the episode and are reported separately") {
    class FailingAgent final : public agents::Agent {
    public:
        std::string name() const override { return "failing"; }
        agents::AgentAction act(const agents::Observation&) override {
            throw AgentFailure("backend gone");
        }
    };
    SettingSpec setting = SettingSpec::from_id(SettingId::S1Treasure);
    episode::AgentFactory factory = [](std::uint64_t seed) -> agents::AgentPtr {
        if (seed % 2 == 0) return std::make_unique<FailingAgent>();
        return agents::make_bfs_optimal_agent();
    };
    BatchResult batch = run_batch(setting, factory, 10, 5, {});
    CHECK(batch.completed.size() + batch.aborted.size() == 10);
    CHECK(!batch.aborted.empty());
    for (const auto& r : batch.aborted) {
        CHECK(r.aborted);
        CHECK_FALSE(r.outcome.has_value());
    }
}

TEST_CASE("parallel batches reproduce the sequential result") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
    episode::AgentFactory factory = [](std::uint64_t) { return agents::make_bfs_optimal_agent(); };
    BatchResult seq = run_batch(setting, factory, 16, 123, timed_options(0.01), 1);
    BatchResult par = run_batch(setting, factory, 16, 123, timed_options(0.01), 4);
    REQUIRE(seq.completed.size() == par.completed.size());
    std::ostringstream a, b;
    for (const auto& r : seq.completed) write_episode_jsonl(a, r);
    for (const auto& r : par.completed) write_episode_jsonl(b, r);
    CHECK(a.str() == b.str());
}

TEST_CASE("llm agent honors the context policy") {
    class CapturingBackend final : public gateway::ChatBackend {
    public:
        gateway::ChatResponse complete_once(const gateway::ChatRequest& req) override {
            seen.push_back(req);
            gateway::ChatResponse resp;
            resp.text = "Going east toward the signal.\nAction: EAST";
            return resp;
        }
        std::vector<gateway::ChatRequest> seen;
    };

    SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
    auto run_with = [&](ContextPolicy policy) {
        auto backend = std::make_shared<CapturingBackend>();
        gateway::Gateway gw(backend, gateway::Mode::Live, "", {}, {},
                            [](std::chrono::milliseconds) {});
        auto agent = make_llm_agent(gw, "test-model", setting, policy, 0.0, 42);
        run_episode(setting, *agent, 8, timed_options(0.01));
        return backend->seen;
    };

    std::vector<gateway::ChatRequest> full = run_with(ContextPolicy::FullHistory);
    REQUIRE(full.size() >= 2);
    // request k: system + k prior exchanges + current user message
    CHECK(full[1].messages.size() == 4);
    CHECK(full[1].messages[2].role == "assistant");
    CHECK(full[1].messages[2].content.find("Going east") != std::string::npos);

    std::vector<gateway::ChatRequest> solution = run_with(ContextPolicy::SolutionOnly);
    REQUIRE(solution.size() >= 2);
    CHECK(solution[1].messages[2].role == "assistant");
    CHECK(solution[1].messages[2].content == "Action: EAST");
}

TEST_CASE("the bomb moves only after actions 3, 6, 9, ...") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S3Passive);
    auto agent = agents::make_stay_agent();
    EpisodeRecord record = run_episode(setting, *agent, 19, timed_options());
    REQUIRE(record.steps.size() == 30);
    bool moved_at_cadence = false;
    for (std::size_t i = 0; i < record.steps.size(); ++i) {
        const int action_number = static_cast<int>(i) + 1;
        if (record.steps[i].target_after != record.steps[i].target_before) {
            CHECK(action_number % 3 == 0);
            moved_at_cadence = true;
        }
    }
    CHECK(moved_at_cadence); // a fully pinned bomb over 30 steps would be a fluke
}

TEST_CASE("hint variants report the previous step's token charge") {
    SettingSpec setting = SettingSpec::from_id(SettingId::S2Hint);
    auto agent = agents::make_fixed_reasoning_agent(agents::make_stay_agent(),
                                                    agents::filler_reasoning(57));
    EpisodeRecord record = run_episode(setting, *agent, 4, timed_options(0.001));
    REQUIRE(record.steps.size() >= 3);
    CHECK_FALSE(record.steps[0].observation.last_round_tokens.has_value());
    for (std::size_t k = 1; k < record.steps.size(); ++k) {
        REQUIRE(record.steps[k].observation.last_round_tokens.has_value());
        CHECK(*record.steps[k].observation.last_round_tokens ==
              record.steps[k - 1].tokens_charged);
    }
}

TEST_CASE("the config-gated re-prompt retries a parse failure once") {
    class StubbornThenClear final : public agents::Agent {
    public:
        std::string name() const override { return "stubborn"; }
        agents::AgentAction act(const agents::Observation&) override {
            ++calls;
            if (calls % 2 == 1) {
                agents::AgentAction bad = agents::AgentAction::stay_fallback();
                bad.reasoning = "mumble mumble";
                return bad;
            }
            agents::AgentAction good = agents::AgentAction::move(grid::Direction::East);
            good.reasoning = "clearer now. Action: EAST";
            return good;
        }
        int calls = 0;
    };

    SettingSpec setting = SettingSpec::from_id(SettingId::S2Baseline);
    SUBCASE("disabled by default: the bad turn is a consumed no-op") {
        StubbornThenClear agent;
        EpisodeRecord record = run_episode(setting, agent, 6, timed_options(0.001));
        REQUIRE(!record.steps.empty());
        CHECK(record.steps[0].action.kind == AgentAction::Kind::Stay);
        CHECK_FALSE(record.steps[0].action.parsed_ok);
        CHECK(record.steps[0].agent_after == record.steps[0].agent_before);
    }
    SUBCASE("enabled: the retry's action is used and both texts are charged") {
        StubbornThenClear agent;
        EpisodeOptions options = timed_options(0.001);
        options.reprompt_on_parse_failure = true;
        EpisodeRecord record = run_episode(setting, agent, 6, options);
        REQUIRE(!record.steps.empty());
        CHECK(record.steps[0].action.kind == AgentAction::Kind::Move);
        const int both = chronometry::make_approx_counter()->count("mumble mumble") +
                         chronometry::make_approx_counter()->count("clearer now. Action: EAST");
        CHECK(record.steps[0].tokens_charged == both);
        CHECK(record.steps[0].raw_text.find("mumble") != std::string::npos);
        CHECK(record.steps[0].raw_text.find("clearer") != std::string::npos);
    }
}
