#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempo/agents.hpp"
#include "tempo/chronometry.hpp"
#include "tempo/gateway.hpp"
#include "tempo/grid.hpp"

namespace tempo::episode {

inline constexpr int kEpisodeSchemaVersion = 1;

enum class SettingId {
    S1Treasure,
    S2Baseline,
    S2Hint,
    S2Hurry,
    S2HintHurry,
    S3Passive,
    S3Active,
};

std::string to_string(SettingId id);
std::optional<SettingId> setting_from_string(std::string_view name);

struct SettingSpec {
    SettingId id = SettingId::S1Treasure;
    int step_limit = 20;                  // 30 for the hard settings
    std::optional<double> budget_seconds; // absent without a clock
    double wall_density = 0.15;
    int n = 8;

    bool timed() const { return budget_seconds.has_value(); }
    bool moving_target() const { return id == SettingId::S3Passive || id == SettingId::S3Active; }
    bool hint() const { return id == SettingId::S2Hint || id == SettingId::S2HintHurry; }
    bool hurry() const { return id == SettingId::S2Hurry || id == SettingId::S2HintHurry; }
    grid::TargetKind target_kind() const {
        return id == SettingId::S1Treasure ? grid::TargetKind::Treasure : grid::TargetKind::Bomb;
    }
    grid::SignalMode signal_mode() const {
        return id == SettingId::S3Active ? grid::SignalMode::ActiveDetect
                                         : grid::SignalMode::Passive;
    }

    static SettingSpec from_id(SettingId id);
};

enum class ContextPolicy { FullHistory, SolutionOnly };

std::string to_string(ContextPolicy policy);
std::optional<ContextPolicy> context_policy_from_string(std::string_view name);

// System prompts keyed by template family; replaceable so deployments can
// re-word them without a rebuild.
struct TemplateSet {
    std::map<std::string, std::string> system_templates; // treasure | bomb | bomb_hard
};

const TemplateSet& builtin_templates();

struct PromptContext {
    std::optional<grid::Signal> signal;
    std::optional<double> remaining_seconds;
    std::optional<int> last_round_tokens;
    std::optional<double> last_round_seconds;
};

struct Prompts {
    std::string system;
    std::string user;
};

Prompts render_prompts(const SettingSpec& setting, const grid::EnvState& state,
                       const PromptContext& ctx, const TemplateSet& templates = builtin_templates());

enum class Outcome { Success, OverSteps, TimeOut };

std::string to_string(Outcome o);

enum class StepOutcome { Success, TimeOut, OverSteps, Continue };

// Pure per-step classifier; precedence Success > TimeOut > OverSteps.
StepOutcome classify_outcome(bool agent_at_target, bool detonated_this_step, int step_index,
                             int step_limit);

struct StepRecord {
    agents::Observation observation;
    std::string raw_text;
    agents::AgentAction action;
    int tokens_charged = 0;
    std::optional<double> seconds_charged; // absent in untimed settings
    std::optional<double> remaining_after;
    grid::Position agent_before, agent_after;
    grid::Position target_before, target_after;
    bool blocked = false;
    bool voided = false; // detonation struck before the action applied
};

struct EpisodeRecord {
    SettingSpec setting;
    grid::GridMap map;
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
    std::optional<Outcome> outcome; // empty only for aborted episodes
    int steps_taken = 0;
    std::optional<double> remaining_at_end;
    bool aborted = false;
    std::string abort_reason;

    int total_tokens() const;
};

struct EpisodeOptions {
    std::optional<double> v_out; // required for timed settings
    chronometry::CounterPtr counter;
    grid::GenOptions gen;
    bool reprompt_on_parse_failure = false; // at most one retry, off by default
};

// One full simulation: observe -> act -> charge -> step, with the bomb moved
// after every 3rd action in moving-target settings. Fully deterministic for a
// deterministic agent; map/bomb randomness derives from `seed` via named
// streams.
EpisodeRecord run_episode(const SettingSpec& setting, agents::Agent& agent, std::uint64_t seed,
                          const EpisodeOptions& options);

using AgentFactory = std::function<agents::AgentPtr(std::uint64_t episode_seed)>;

struct BatchResult {
    std::vector<EpisodeRecord> completed; // sorted by episode index
    std::vector<EpisodeRecord> aborted;   // excluded from metrics, reported separately
};

BatchResult run_batch(const SettingSpec& setting, const AgentFactory& factory, int runs,
                      std::uint64_t root_seed, const EpisodeOptions& options, int jobs = 1);

// Model-backed agent funnelling through the gateway. FullHistory appends every
// exchange verbatim; SolutionOnly appends only the chosen action line.
agents::AgentPtr make_llm_agent(gateway::Gateway& gw, std::string model_id, SettingSpec setting,
                                ContextPolicy policy, double temperature,
                                std::uint64_t agent_seed,
                                std::optional<int> max_output_tokens = std::nullopt);

// JSONL: one step object per line plus a terminal summary line.
void write_episode_jsonl(std::ostream& out, const EpisodeRecord& record);
std::vector<EpisodeRecord> read_episodes_jsonl(std::istream& in);

} // namespace tempo::episode
