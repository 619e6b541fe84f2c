#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempo/chronometry.hpp"
#include "tempo/common.hpp"
#include "tempo/gateway.hpp"

namespace tempo::uqa {

enum class DatasetTag { CommonsenseMc, MathWord, ScienceMc };
enum class Mode { Normal, Urgent };

std::string to_string(DatasetTag tag);
std::optional<DatasetTag> dataset_from_string(std::string_view name); // accepts common aliases
std::string to_string(Mode mode);

struct Choice {
    std::string label; // "A", "B", ...
    std::string text;
};

struct UqaItem {
    std::string item_id;
    DatasetTag tag = DatasetTag::CommonsenseMc;
    std::string question;
    std::vector<Choice> choices; // empty for math word problems
    std::string gold_answer;     // normalized at load time
};

// Dataset JSONL: {"question", "answer"} per line, with optional "id" and
// "choices" (array of strings, labelled A.., or of {"label","text"} objects).
std::vector<UqaItem> load_items(std::istream& in, DatasetTag tag);

// Default pool of urgency sentences appended in urgent mode.
const std::vector<std::string>& default_urgency_pool();

// Instruction header rendered ahead of the question; editable per run so the
// wording is a config asset rather than code.
const std::string& default_instruction();

struct BuiltPrompt {
    std::string text;
    std::optional<std::string> urgency_phrase; // recorded pick, urgent mode only
};

// Normal mode renders the step-by-step template; urgent mode appends one
// seeded pick from the pool. Throws EmptyPool when the pool has no entries.
BuiltPrompt build_qa_prompt(const UqaItem& item, Mode mode, Rng& rng,
                            const std::vector<std::string>& pool = default_urgency_pool(),
                            const std::string& instruction = default_instruction());

// Per-dataset extraction (extractor ids mc/v1 and math/v1): multiple choice
// takes the last standalone option letter, preferring boxed or "Answer:"
// labelled text; math takes the last number after stripping currency, commas
// and insignificant zeros. Absent = unanswered, which scores incorrect.
std::optional<std::string> extract_answer(const std::string& raw_output, DatasetTag tag);

std::string normalize_answer(const std::string& answer, DatasetTag tag);

struct UqaResult {
    std::string item_id;
    DatasetTag tag = DatasetTag::CommonsenseMc;
    Mode mode = Mode::Normal;
    int replication = 0;
    std::optional<std::string> extracted;
    bool correct = false;
    int tokens_shared = 0;
    std::optional<int> tokens_model_specific;
    std::optional<std::string> urgency_phrase;
};

// (urgent - normal) / normal * 100; requires a non-zero baseline
double delta_pct(double normal, double urgent);
double round2(double value);

struct ModeStats {
    int answers = 0;
    double accuracy_pct = 0.0;
    double mean_tokens_shared = 0.0;
    std::optional<double> mean_tokens_model;
    std::vector<double> per_replication_accuracy;
};

struct DatasetReport {
    ModeStats normal;
    ModeStats urgent;
    // absent when the normal-mode baseline is zero
    std::optional<double> delta_accuracy_pct;
    std::optional<double> delta_tokens_shared_pct;
    std::optional<double> delta_tokens_model_pct;
};

using UqaReport = std::map<DatasetTag, DatasetReport>;

// Reduces results into the per-dataset x per-mode table with relative changes.
// Throws IncompleteRun when any item is missing one of the two modes in any
// replication.
UqaReport score_run(const std::vector<UqaResult>& results);

struct RunOptions {
    std::string model_id = "mock";
    double temperature = 0.0;
    int replications = 5;
    std::uint64_t root_seed = 1;
    std::vector<std::string> urgency_pool = default_urgency_pool();
    std::string instruction = default_instruction();
    chronometry::CounterPtr shared_counter;         // defaults to approx
    chronometry::CounterPtr model_counter;          // optional second accounting
    std::optional<int> max_output_tokens;
};

std::vector<UqaResult> run_items(const std::vector<UqaItem>& items, gateway::Gateway& gw,
                                 const RunOptions& options);

Json to_json(const UqaResult& result);
UqaResult result_from_json(const Json& j);
Json to_json(const UqaReport& report);

} // namespace tempo::uqa
