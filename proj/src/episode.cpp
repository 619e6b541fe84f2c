#include "tempo/episode.hpp"

#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <thread>

namespace tempo::episode {

std::string to_string(SettingId id) {
    switch (id) {
    case SettingId::S1Treasure: return "s1";
    case SettingId::S2Baseline: return "s2-baseline";
    case SettingId::S2Hint: return "s2-hint";
    case SettingId::S2Hurry: return "s2-hurry";
    case SettingId::S2HintHurry: return "s2-hint-hurry";
    case SettingId::S3Passive: return "s3-passive";
    case SettingId::S3Active: return "s3-active";
    }
    return "?";
}

std::optional<SettingId> setting_from_string(std::string_view name) {
    if (name == "s1" || name == "s1-treasure") return SettingId::S1Treasure;
    if (name == "s2" || name == "s2-baseline") return SettingId::S2Baseline;
    if (name == "s2-hint") return SettingId::S2Hint;
    if (name == "s2-hurry") return SettingId::S2Hurry;
    if (name == "s2-hint-hurry") return SettingId::S2HintHurry;
    if (name == "s3-passive") return SettingId::S3Passive;
    if (name == "s3-active" || name == "s3") return SettingId::S3Active;
    return std::nullopt;
}

SettingSpec SettingSpec::from_id(SettingId id) {
    SettingSpec spec;
    spec.id = id;
    const bool hard = id == SettingId::S3Passive || id == SettingId::S3Active;
    spec.step_limit = hard ? 30 : 20;
    if (id != SettingId::S1Treasure) spec.budget_seconds = 300.0;
    return spec;
}

std::string to_string(ContextPolicy policy) {
    return policy == ContextPolicy::FullHistory ? "full-history" : "solution-only";
}

std::optional<ContextPolicy> context_policy_from_string(std::string_view name) {
    if (name == "full-history" || name == "full") return ContextPolicy::FullHistory;
    if (name == "solution-only" || name == "solution") return ContextPolicy::SolutionOnly;
    return std::nullopt;
}

std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::Success: return "success";
    case Outcome::OverSteps: return "over_steps";
    case Outcome::TimeOut: return "time_out";
    }
    return "?";
}

namespace {

Outcome outcome_from_string(const std::string& s) {
    if (s == "success") return Outcome::Success;
    if (s == "over_steps") return Outcome::OverSteps;
    if (s == "time_out") return Outcome::TimeOut;
    throw IngestError("unknown outcome: " + s);
}

constexpr const char* kGridRules =
    "Rows count from 0 at the north edge and columns from 0 at the west edge. Each turn "
    "you move exactly one cell NORTH, SOUTH, EAST or WEST. Moving into a wall or off the "
    "map wastes the turn.";

const std::string kTreasureTemplate =
    std::string("You are an agent exploring an {n}x{n} grid. A treasure is hidden somewhere on "
                "the map: it never appears in the map drawing, but each turn you receive its "
                "signal - the distance in cells and a compass bearing (N, NE, E, SE, S, SW, W, "
                "NW). ") +
    kGridRules +
    " You have at most {steps} turns to stand on the treasure cell. Think briefly, then end "
    "your reply with a line of the form \"Action: <NORTH|SOUTH|EAST|WEST>\".";

const std::string kBombTemplate =
    std::string("You are an agent in an {n}x{n} grid. A timed bomb is hidden somewhere on the "
                "map: it never appears in the map drawing, but each turn you receive its signal "
                "- the distance in cells and a compass bearing (N, NE, E, SE, S, SW, W, NW). ") +
    kGridRules +
    " The state shows the remaining time in seconds; if it reaches zero before you stand on "
    "the bomb's cell, the bomb explodes and the episode is lost. You have at most {steps} "
    "turns. Think briefly, then end your reply with a line of the form \"Action: "
    "<NORTH|SOUTH|EAST|WEST>\".";

const std::string kBombHardPassiveTemplate =
    std::string("You are an agent in an {n}x{n} grid. A timed bomb is hidden somewhere on the "
                "map and it moves from time to time. It never appears in the map drawing, but "
                "each turn you receive its signal - the distance in cells and a compass bearing "
                "(N, NE, E, SE, S, SW, W, NW) taken at that moment. ") +
    kGridRules +
    " The state shows the remaining time in seconds; if it reaches zero before you stand on "
    "the bomb's cell, the bomb explodes and the episode is lost. You have at most {steps} "
    "turns. Think briefly, then end your reply with a line of the form \"Action: "
    "<NORTH|SOUTH|EAST|WEST>\".";

const std::string kBombHardDetectTemplate =
    std::string("You are an agent in an {n}x{n} grid. A timed bomb is hidden somewhere on the "
                "map and it moves from time to time. It emits no continuous signal: to locate "
                "it you must spend a turn on DETECT, which takes a fresh reading (distance in "
                "cells plus a compass bearing) but sacrifices that turn's movement. ") +
    kGridRules +
    " The state shows the remaining time in seconds; if it reaches zero before you stand on "
    "the bomb's cell, the bomb explodes and the episode is lost. You have at most {steps} "
    "turns. Think briefly, then end your reply with a line of the form \"Action: "
    "<NORTH|SOUTH|EAST|WEST>\" or \"Action: DETECT\".";

constexpr const char* kHintSentence =
    "Be aware that your reasoning consumes time: every token you generate advances the "
    "countdown, so longer replies leave you less time to act.";

constexpr const char* kHurrySentence = "Hurry up! The bomb is going to explode soon.";

std::string template_key(SettingId id) {
    switch (id) {
    case SettingId::S1Treasure: return "treasure";
    case SettingId::S2Baseline:
    case SettingId::S2Hint:
    case SettingId::S2Hurry:
    case SettingId::S2HintHurry: return "bomb";
    case SettingId::S3Passive: return "bomb_hard_passive";
    case SettingId::S3Active: return "bomb_hard_detect";
    }
    return "?";
}

void replace_all(std::string& text, const std::string& needle, const std::string& value) {
    std::size_t at = 0;
    while ((at = text.find(needle, at)) != std::string::npos) {
        text.replace(at, needle.size(), value);
        at += value.size();
    }
}

double round1(double x) { return std::round(x * 10.0) / 10.0; }

} // namespace

const TemplateSet& builtin_templates() {
    static const TemplateSet set{{
        {"treasure", kTreasureTemplate},
        {"bomb", kBombTemplate},
        {"bomb_hard_passive", kBombHardPassiveTemplate},
        {"bomb_hard_detect", kBombHardDetectTemplate},
    }};
    return set;
}

Prompts render_prompts(const SettingSpec& setting, const grid::EnvState& state,
                       const PromptContext& ctx, const TemplateSet& templates) {
    const std::string key = template_key(setting.id);
    auto it = templates.system_templates.find(key);
    if (it == templates.system_templates.end())
        throw TemplateMissing("no system template registered for '" + key + "'");

    Prompts prompts;
    prompts.system = it->second;
    replace_all(prompts.system, "{n}", std::to_string(setting.n));
    replace_all(prompts.system, "{steps}", std::to_string(setting.step_limit));
    if (setting.hint()) prompts.system += std::string(" ") + kHintSentence;
    if (setting.hurry()) prompts.system += std::string(" ") + kHurrySentence;

    Json state_json = grid::state_to_json(state, ctx.signal);
    if (ctx.remaining_seconds) state_json["remaining_time_seconds"] = round1(*ctx.remaining_seconds);
    if (ctx.last_round_seconds)
        state_json["last_round_reasoning_seconds"] = round1(*ctx.last_round_seconds);
    if (ctx.last_round_tokens) state_json["last_round_tokens"] = *ctx.last_round_tokens;

    prompts.user = "Map (A = you, # = wall, . = open):\n";
    prompts.user += grid::render_map(state);
    prompts.user += "State:\n";
    prompts.user += state_json.dump(2);
    prompts.user += "\n\nYour move?";
    return prompts;
}

StepOutcome classify_outcome(bool agent_at_target, bool detonated_this_step, int step_index,
                             int step_limit) {
    if (agent_at_target) return StepOutcome::Success;
    if (detonated_this_step) return StepOutcome::TimeOut;
    if (step_index >= step_limit) return StepOutcome::OverSteps;
    return StepOutcome::Continue;
}

int EpisodeRecord::total_tokens() const {
    int total = 0;
    for (const StepRecord& s : steps) total += s.tokens_charged;
    return total;
}

EpisodeRecord run_episode(const SettingSpec& setting, agents::Agent& agent, std::uint64_t seed,
                          const EpisodeOptions& options) {
    chronometry::CounterPtr counter =
        options.counter ? options.counter : chronometry::make_approx_counter();

    EpisodeRecord record;
    record.setting = setting;
    record.seed = seed;
    record.map = grid::generate_map(derive_seed(seed, "map"), setting.n, setting.wall_density,
                                    options.gen);

    std::optional<chronometry::TokenClock> clock;
    if (setting.timed()) {
        if (!options.v_out)
            throw ConfigError("timed setting " + to_string(setting.id) +
                              " needs a conversion rate (v_out)");
        clock.emplace(*setting.budget_seconds, chronometry::make_rate(*options.v_out), counter);
    }

    grid::EnvState state;
    state.map = record.map;
    state.agent = record.map.agent_start;
    state.target = record.map.target_start;
    state.target_kind = setting.target_kind();
    state.signal_mode = setting.signal_mode();

    Rng bomb_rng(derive_seed(seed, "bomb"));
    agent.begin_episode(record.map);

    std::optional<int> last_tokens;
    std::optional<double> last_seconds;

    while (true) {
        // Observation. Passive settings always see a signal; active detection
        // surfaces one only on the turn right after a DETECT.
        std::optional<grid::Signal> signal;
        if (state.signal_mode == grid::SignalMode::Passive) {
            signal = grid::emit_signal(state.agent, state.target);
        } else if (state.last_detection &&
                   state.last_detection->step_index == state.step_index - 1) {
            signal = state.last_detection->signal;
        }

        PromptContext ctx;
        ctx.signal = signal;
        if (clock) ctx.remaining_seconds = clock->remaining();
        if (setting.hint()) ctx.last_round_tokens = last_tokens;
        if (setting.timed()) ctx.last_round_seconds = last_seconds;
        Prompts prompts = render_prompts(setting, state, ctx);

        agents::Observation obs;
        obs.map_render = grid::render_map(state);
        obs.walls.assign(state.map.walls.begin(), state.map.walls.end());
        obs.agent = state.agent;
        obs.map_size = state.map.size;
        obs.signal = signal;
        obs.remaining_seconds = ctx.remaining_seconds;
        obs.last_round_tokens = ctx.last_round_tokens;
        obs.last_round_seconds = ctx.last_round_seconds;
        obs.step_index = state.step_index;
        obs.allow_detect = state.signal_mode == grid::SignalMode::ActiveDetect;
        obs.system_prompt = prompts.system;
        obs.user_prompt = prompts.user;

        agents::AgentAction action = agent.act(obs);
        std::string raw_text = action.reasoning;
        int step_tokens = counter->count(action.reasoning);
        double step_seconds = 0.0;
        if (clock) step_seconds = clock->charge(action.reasoning).charged_seconds;

        if (options.reprompt_on_parse_failure && !action.parsed_ok) {
            agents::AgentAction retry = agent.act(obs);
            step_tokens += counter->count(retry.reasoning);
            if (clock) step_seconds += clock->charge(retry.reasoning).charged_seconds;
            raw_text += "\n";
            raw_text += retry.reasoning;
            action = retry;
        }

        StepRecord step;
        step.observation = obs;
        step.raw_text = raw_text;
        step.action = action;
        step.tokens_charged = step_tokens;
        if (clock) {
            step.seconds_charged = step_seconds;
            step.remaining_after = clock->remaining();
        }
        step.agent_before = state.agent;
        step.target_before = state.target;

        if (clock && clock->detonated()) {
            // The response overran the clock: the action is void but the step
            // is still consumed.
            state = grid::apply_stay(state);
            step.voided = true;
            step.agent_after = state.agent;
            step.target_after = state.target;
            record.steps.push_back(std::move(step));
            record.outcome = Outcome::TimeOut;
            break;
        }

        switch (action.kind) {
        case agents::AgentAction::Kind::Move: {
            grid::MoveOutcome mo = grid::apply_move(state, action.dir);
            state = mo.state;
            step.blocked = mo.blocked;
            break;
        }
        case agents::AgentAction::Kind::Detect:
            if (state.signal_mode == grid::SignalMode::ActiveDetect) {
                state = grid::apply_detect(state).state;
            } else {
                // Detect outside an active setting is a parse-policy breach;
                // downgrade to the stationary fallback.
                state = grid::apply_stay(state);
                step.action.kind = agents::AgentAction::Kind::Stay;
                step.action.parsed_ok = false;
            }
            break;
        case agents::AgentAction::Kind::Stay:
            state = grid::apply_stay(state);
            break;
        }
        step.agent_after = state.agent;

        const bool arrived = state.agent == state.target;
        if (!arrived && setting.moving_target() && state.step_index % 3 == 0)
            state = grid::move_target(state, bomb_rng);
        step.target_after = state.target;
        record.steps.push_back(std::move(step));

        last_tokens = step_tokens;
        last_seconds = clock ? std::optional<double>(step_seconds) : std::nullopt;

        StepOutcome so = classify_outcome(arrived, false, state.step_index, setting.step_limit);
        if (so == StepOutcome::Success) {
            record.outcome = Outcome::Success;
            break;
        }
        if (so == StepOutcome::OverSteps) {
            record.outcome = Outcome::OverSteps;
            break;
        }
    }

    record.steps_taken = state.step_index;
    if (clock) record.remaining_at_end = clock->remaining();
    return record;
}

BatchResult run_batch(const SettingSpec& setting, const AgentFactory& factory, int runs,
                      std::uint64_t root_seed, const EpisodeOptions& options, int jobs) {
    std::vector<std::optional<EpisodeRecord>> slots(static_cast<std::size_t>(runs));

    auto run_one = [&](int i) {
        const std::uint64_t episode_seed = derive_seed(root_seed, "episode", static_cast<std::uint64_t>(i));
        agents::AgentPtr agent = factory(episode_seed);
        try {
            slots[static_cast<std::size_t>(i)] = run_episode(setting, *agent, episode_seed, options);
        } catch (const AgentFailure& e) {
            EpisodeRecord aborted;
            aborted.setting = setting;
            aborted.seed = episode_seed;
            aborted.aborted = true;
            aborted.abort_reason = e.what();
            slots[static_cast<std::size_t>(i)] = std::move(aborted);
        }
    };

    if (jobs <= 1) {
        for (int i = 0; i < runs; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int i = next.fetch_add(1); i < runs; i = next.fetch_add(1)) run_one(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const auto& err : errors)
            if (err) std::rethrow_exception(err);
    }

    BatchResult result;
    for (auto& slot : slots) {
        if (!slot) continue;
        if (slot->aborted)
            result.aborted.push_back(std::move(*slot));
        else
            result.completed.push_back(std::move(*slot));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Model-backed agent
// ---------------------------------------------------------------------------

namespace {

class LlmAgent final : public agents::Agent {
public:
    LlmAgent(gateway::Gateway& gw, std::string model_id, SettingSpec setting, ContextPolicy policy,
             double temperature, std::uint64_t agent_seed, std::optional<int> max_output_tokens)
        : gateway_(gw),
          model_id_(std::move(model_id)),
          setting_(setting),
          policy_(policy),
          temperature_(temperature),
          agent_seed_(agent_seed),
          max_output_tokens_(max_output_tokens) {}

    std::string name() const override { return "llm:" + model_id_; }

    void begin_episode(const grid::GridMap&) override { history_.clear(); }

    agents::AgentAction act(const agents::Observation& obs) override {
        gateway::ChatRequest req;
        req.model_id = model_id_;
        req.temperature = temperature_;
        req.max_output_tokens = max_output_tokens_;
        req.seed_hint = derive_seed(agent_seed_, "step", static_cast<std::uint64_t>(obs.step_index));
        req.messages.push_back({"system", obs.system_prompt});
        for (const gateway::ChatMessage& m : history_) req.messages.push_back(m);
        req.messages.push_back({"user", obs.user_prompt});

        gateway::ChatResponse resp;
        try {
            resp = gateway_.complete(req);
        } catch (const GatewayExhausted& e) {
            throw AgentFailure(e.what());
        }

        agents::AgentAction action = agents::parse_action(resp.text, obs.allow_detect);
        history_.push_back({"user", obs.user_prompt});
        history_.push_back({"assistant", policy_ == ContextPolicy::FullHistory
                                             ? resp.text
                                             : solution_portion(action)});
        return action;
    }

private:
    static std::string solution_portion(const agents::AgentAction& action) {
        switch (action.kind) {
        case agents::AgentAction::Kind::Move: {
            std::string d = grid::to_string(action.dir);
            for (char& c : d) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return "Action: " + d;
        }
        case agents::AgentAction::Kind::Detect: return "Action: DETECT";
        case agents::AgentAction::Kind::Stay: return "(no valid action)";
        }
        return "";
    }

    gateway::Gateway& gateway_;
    std::string model_id_;
    SettingSpec setting_;
    ContextPolicy policy_;
    double temperature_;
    std::uint64_t agent_seed_;
    std::optional<int> max_output_tokens_;
    std::vector<gateway::ChatMessage> history_;
};

} // namespace

agents::AgentPtr make_llm_agent(gateway::Gateway& gw, std::string model_id, SettingSpec setting,
                                ContextPolicy policy, double temperature, std::uint64_t agent_seed,
                                std::optional<int> max_output_tokens) {
    return std::make_unique<LlmAgent>(gw, std::move(model_id), setting, policy, temperature,
                                      agent_seed, max_output_tokens);
}

// ---------------------------------------------------------------------------
// JSONL serialization
// ---------------------------------------------------------------------------

namespace {

Json position_json(grid::Position p) { return Json::array({p.row, p.col}); }

grid::Position position_from(const Json& j) {
    return {j.at(0).get<int>(), j.at(1).get<int>()};
}

Json action_json(const agents::AgentAction& a) {
    Json j;
    switch (a.kind) {
    case agents::AgentAction::Kind::Move:
        j["kind"] = "move";
        j["dir"] = grid::to_string(a.dir);
        break;
    case agents::AgentAction::Kind::Detect: j["kind"] = "detect"; break;
    case agents::AgentAction::Kind::Stay: j["kind"] = "stay"; break;
    }
    j["parsed_ok"] = a.parsed_ok;
    return j;
}

agents::AgentAction action_from(const Json& j) {
    agents::AgentAction a;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "move") {
        a.kind = agents::AgentAction::Kind::Move;
        a.dir = *grid::direction_from_string(j.at("dir").get<std::string>());
    } else if (kind == "detect") {
        a.kind = agents::AgentAction::Kind::Detect;
    } else {
        a.kind = agents::AgentAction::Kind::Stay;
    }
    a.parsed_ok = j.at("parsed_ok").get<bool>();
    return a;
}

Json setting_json(const SettingSpec& s) {
    Json j{{"id", to_string(s.id)},
           {"step_limit", s.step_limit},
           {"wall_density", s.wall_density},
           {"n", s.n}};
    if (s.budget_seconds) j["budget_seconds"] = *s.budget_seconds;
    return j;
}

SettingSpec setting_from(const Json& j) {
    SettingSpec s = SettingSpec::from_id(*setting_from_string(j.at("id").get<std::string>()));
    s.step_limit = j.at("step_limit").get<int>();
    s.wall_density = j.at("wall_density").get<double>();
    s.n = j.at("n").get<int>();
    if (j.contains("budget_seconds"))
        s.budget_seconds = j.at("budget_seconds").get<double>();
    else
        s.budget_seconds.reset();
    return s;
}

} // namespace

void write_episode_jsonl(std::ostream& out, const EpisodeRecord& record) {
    int index = 0;
    for (const StepRecord& s : record.steps) {
        Json j;
        j["type"] = "step";
        j["schema_version"] = kEpisodeSchemaVersion;
        j["seed"] = record.seed;
        j["step"] = ++index;
        Json obs;
        obs["agent"] = position_json(s.observation.agent);
        obs["step_index"] = s.observation.step_index;
        if (s.observation.signal) {
            obs["signal"] = {{"distance", s.observation.signal->distance},
                             {"bearing", grid::to_string(s.observation.signal->bearing)}};
        } else {
            obs["signal"] = nullptr;
        }
        if (s.observation.remaining_seconds)
            obs["remaining_seconds"] = *s.observation.remaining_seconds;
        if (s.observation.last_round_tokens)
            obs["last_round_tokens"] = *s.observation.last_round_tokens;
        if (s.observation.last_round_seconds)
            obs["last_round_seconds"] = *s.observation.last_round_seconds;
        j["observation"] = obs;
        j["raw_text"] = s.raw_text;
        j["action"] = action_json(s.action);
        j["tokens_charged"] = s.tokens_charged;
        if (s.seconds_charged) j["seconds_charged"] = *s.seconds_charged;
        if (s.remaining_after) j["remaining_after"] = *s.remaining_after;
        j["agent_before"] = position_json(s.agent_before);
        j["agent_after"] = position_json(s.agent_after);
        j["target_before"] = position_json(s.target_before);
        j["target_after"] = position_json(s.target_after);
        j["blocked"] = s.blocked;
        j["voided"] = s.voided;
        out << j.dump() << "\n";
    }

    Json j;
    j["type"] = "summary";
    j["schema_version"] = kEpisodeSchemaVersion;
    j["seed"] = record.seed;
    j["setting"] = setting_json(record.setting);
    j["map"] = grid::to_json(record.map);
    if (record.aborted) {
        j["aborted"] = true;
        j["abort_reason"] = record.abort_reason;
    } else {
        j["aborted"] = false;
        j["outcome"] = to_string(*record.outcome);
    }
    j["steps_taken"] = record.steps_taken;
    if (record.remaining_at_end) j["remaining_at_end"] = *record.remaining_at_end;
    j["total_tokens"] = record.total_tokens();
    out << j.dump() << "\n";
}

std::vector<EpisodeRecord> read_episodes_jsonl(std::istream& in) {
    std::vector<EpisodeRecord> records;
    std::vector<StepRecord> pending;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "step") {
            StepRecord s;
            const Json& obs = j.at("observation");
            s.observation.agent = position_from(obs.at("agent"));
            s.observation.step_index = obs.at("step_index").get<int>();
            if (!obs.at("signal").is_null()) {
                grid::Signal sig;
                sig.distance = obs["signal"].at("distance").get<int>();
                const std::string b = obs["signal"].at("bearing").get<std::string>();
                for (int k = 0; k <= static_cast<int>(grid::Bearing::Here); ++k) {
                    if (grid::to_string(static_cast<grid::Bearing>(k)) == b)
                        sig.bearing = static_cast<grid::Bearing>(k);
                }
                s.observation.signal = sig;
            }
            if (obs.contains("remaining_seconds"))
                s.observation.remaining_seconds = obs["remaining_seconds"].get<double>();
            if (obs.contains("last_round_tokens"))
                s.observation.last_round_tokens = obs["last_round_tokens"].get<int>();
            if (obs.contains("last_round_seconds"))
                s.observation.last_round_seconds = obs["last_round_seconds"].get<double>();
            s.raw_text = j.at("raw_text").get<std::string>();
            s.action = action_from(j.at("action"));
            s.tokens_charged = j.at("tokens_charged").get<int>();
            if (j.contains("seconds_charged")) s.seconds_charged = j["seconds_charged"].get<double>();
            if (j.contains("remaining_after")) s.remaining_after = j["remaining_after"].get<double>();
            s.agent_before = position_from(j.at("agent_before"));
            s.agent_after = position_from(j.at("agent_after"));
            s.target_before = position_from(j.at("target_before"));
            s.target_after = position_from(j.at("target_after"));
            s.blocked = j.at("blocked").get<bool>();
            s.voided = j.at("voided").get<bool>();
            pending.push_back(std::move(s));
        } else if (type == "summary") {
            EpisodeRecord record;
            record.seed = j.at("seed").get<std::uint64_t>();
            record.setting = setting_from(j.at("setting"));
            record.map = grid::map_from_json(j.at("map"));
            record.steps = std::move(pending);
            pending.clear();
            record.aborted = j.at("aborted").get<bool>();
            if (record.aborted)
                record.abort_reason = j.value("abort_reason", "");
            else
                record.outcome = outcome_from_string(j.at("outcome").get<std::string>());
            record.steps_taken = j.at("steps_taken").get<int>();
            if (j.contains("remaining_at_end"))
                record.remaining_at_end = j["remaining_at_end"].get<double>();
            records.push_back(std::move(record));
        } else {
            throw IngestError("unknown record type in episode log: " + type);
        }
    }
    if (!pending.empty()) throw IngestError("episode log ends with steps but no summary line");
    return records;
}

} // namespace tempo::episode
