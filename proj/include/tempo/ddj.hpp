#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempo/chronometry.hpp"
#include "tempo/common.hpp"
#include "tempo/gateway.hpp"

namespace tempo::ddj {

enum class Setting { S1, S1Hint, S1Count, S2, S2M, S2MPlus };

std::string to_string(Setting s);
std::optional<Setting> setting_from_string(std::string_view name);
std::vector<Setting> all_settings();

inline bool uses_timestamps(Setting s) {
    return s == Setting::S2 || s == Setting::S2M || s == Setting::S2MPlus;
}
inline bool uses_token_counts(Setting s) {
    return s == Setting::S1Count || s == Setting::S2MPlus;
}
inline bool misleading(Setting s) { return s == Setting::S2M || s == Setting::S2MPlus; }

struct DialoguePair {
    std::string pair_id;
    std::string user_prompt;
    std::string response_a;
    std::string response_b;
    int prompt_tokens = 0;
    int tokens_a = 0; // shared counter, response text only
    int tokens_b = 0;
    std::string model_a;
    std::string model_b;
};

struct IngestFilters {
    double min_length_ratio = 1.5; // max(tokens)/min(tokens)
    std::vector<std::string> model_allowlist;
    std::optional<int> limit;
};

// Conversations JSONL: one {"prompt", "response_a", "response_b"} object per
// line, optionally with "pair_id" / "model_a" / "model_b". Pairs failing the
// length-ratio or allowlist filters are skipped; accepted pairs keep file
// order.
std::vector<DialoguePair> ingest_pairs(std::istream& in, const IngestFilters& filters,
                                       const chronometry::TokenCounter& counter);

// Per-dialogue temporal log, whole-second resolution, input_end == output_start.
struct Timestamps {
    std::int64_t a_input_start = 0, a_input_end = 0, a_output_start = 0, a_output_end = 0;
    std::int64_t b_input_start = 0, b_input_end = 0, b_output_start = 0, b_output_end = 0;

    std::int64_t displayed_duration_a() const { return a_output_end - a_output_start; }
    std::int64_t displayed_duration_b() const { return b_output_end - b_output_start; }
};

struct SynthesisParams {
    double generation_rate = 0.05; // displayed seconds per output token
    double typing_rate_lo = 0.2;   // input seconds per token band
    double typing_rate_hi = 1.0;
    std::int64_t window_start = 1704067200; // 2024-01-01 00:00:00
    std::int64_t window_end = 1735689600;   // 2025-01-01 00:00:00
};

// Start datetimes are drawn independently per dialogue. Consistent settings
// order the displayed output durations by token count; misleading settings
// swap the two durations so the longer response shows the shorter duration.
// Rounding ties are broken by one extra second so the order stays strict.
Timestamps synthesize_timestamps(const DialoguePair& pair, Setting setting, Rng& rng,
                                 const SynthesisParams& params = {});

enum class Gold { A, B };

inline Gold flip(Gold g) { return g == Gold::A ? Gold::B : Gold::A; }
std::string to_string(Gold g);

struct DdjCase {
    std::string case_id;
    DialoguePair pair;
    Setting setting = Setting::S1;
    std::optional<Timestamps> timestamps; // timestamp settings only
    bool token_annotations = false;       // S1-Count and S2-M+ only
    bool swapped = false;                 // presentation permutation (B shown first)
    Gold gold_canonical = Gold::A;        // in pair space
    Gold gold_presented = Gold::A;        // after the permutation
    std::string system_prompt;
    std::string user_prompt;
};

// Token settings: the dialogue with more output tokens. Timestamp settings:
// the dialogue whose displayed output duration is longer.
Gold gold_label(const DialoguePair& pair, Setting setting,
                const std::optional<Timestamps>& timestamps);

struct Prompts {
    std::string system;
    std::string user;
};

Prompts build_prompt(const DialoguePair& pair, Setting setting,
                     const std::optional<Timestamps>& timestamps, bool swapped);

// Assembles one case: timestamp synthesis, presentation permutation and gold
// labels all drawn from `rng`. Pass `force_swap` to pin the permutation.
DdjCase build_case(const DialoguePair& pair, Setting setting, Rng& rng,
                   const SynthesisParams& params = {},
                   std::optional<bool> force_swap = std::nullopt);

std::vector<DdjCase> build_cases(const std::vector<DialoguePair>& pairs,
                                 const std::vector<Setting>& settings, std::uint64_t root_seed,
                                 const SynthesisParams& params = {});

struct Verdict {
    std::optional<Gold> choice; // empty on parse failure
    std::string justification;
};

Verdict parse_verdict(const std::string& raw);

enum class Attribution { TextLength, Semantic, Time, Other };

std::string to_string(Attribution a);

// Offline keyword ruleset: timestamp/duration vocabulary wins, then token/
// length vocabulary, else Semantic. Blank input classifies as Other.
Attribution classify_attribution(const std::string& justification);

// Prompt for the model-backed classifier path.
std::string attribution_classifier_prompt(const std::string& justification);
Attribution parse_attribution_reply(const std::string& raw);

struct Judgment {
    std::string case_id;
    Setting setting = Setting::S1;
    int replication = 0;
    std::optional<Gold> choice;
    std::string justification;
    bool correct = false;
    bool parse_failed = false;
    std::optional<Attribution> attribution;
};

struct ScoreTable {
    // accuracy per setting per replication, plus the mean over replications
    std::map<Setting, std::vector<double>> per_replication;
    std::map<Setting, double> mean_accuracy;
};

struct JudgeRun {
    std::vector<Judgment> judgments;
    ScoreTable scores;
};

// Queries the judge for every case x replication through the gateway, parses
// verdicts, and reduces to per-replication accuracy vectors. Unparseable
// verdicts score incorrect and are flagged.
JudgeRun judge_and_score(const std::vector<DdjCase>& cases, gateway::Gateway& gw,
                         const std::string& model_id, double temperature, int replications,
                         std::uint64_t root_seed);

struct AttributionCell {
    int count = 0;
    double usage_pct = 0.0;
    double accuracy_pct = 0.0;
};

using AttributionTable = std::map<Setting, std::map<Attribution, AttributionCell>>;

AttributionTable attribution_table(const std::vector<Judgment>& judgments);

Json to_json(const DdjCase& c);
DdjCase case_from_json(const Json& j);
Json to_json(const Judgment& j);
Judgment judgment_from_json(const Json& j);
Json to_json(const ScoreTable& scores);
Json to_json(const AttributionTable& table);

} // namespace tempo::ddj
