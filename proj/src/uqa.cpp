#include "tempo/uqa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <set>

namespace tempo::uqa {

std::string to_string(DatasetTag tag) {
    switch (tag) {
    case DatasetTag::CommonsenseMc: return "commonsense_mc";
    case DatasetTag::MathWord: return "math_word";
    case DatasetTag::ScienceMc: return "science_mc";
    }
    return "?";
}

std::optional<DatasetTag> dataset_from_string(std::string_view name) {
    if (name == "commonsense_mc" || name == "commonsense" || name == "openbookqa" ||
        name == "obqa")
        return DatasetTag::CommonsenseMc;
    if (name == "math_word" || name == "math" || name == "gsm8k") return DatasetTag::MathWord;
    if (name == "science_mc" || name == "science" || name == "gpqa") return DatasetTag::ScienceMc;
    return std::nullopt;
}

std::string to_string(Mode mode) { return mode == Mode::Normal ? "normal" : "urgent"; }

std::vector<UqaItem> load_items(std::istream& in, DatasetTag tag) {
    std::vector<UqaItem> items;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw IngestError("line " + std::to_string(line_no) + " is not JSON: " + e.what());
        }
        if (!j.contains("question") || !j.contains("answer"))
            throw IngestError("line " + std::to_string(line_no) + " is missing question/answer");

        UqaItem item;
        item.item_id = j.value("id", to_string(tag) + "-" + std::to_string(line_no));
        item.tag = tag;
        item.question = j.at("question").get<std::string>();
        if (j.contains("choices")) {
            char next_label = 'A';
            for (const auto& c : j["choices"]) {
                Choice choice;
                if (c.is_string()) {
                    choice.label = std::string(1, next_label++);
                    choice.text = c.get<std::string>();
                } else {
                    choice.label = c.at("label").get<std::string>();
                    choice.text = c.at("text").get<std::string>();
                }
                item.choices.push_back(std::move(choice));
            }
        }
        item.gold_answer = normalize_answer(j.at("answer").get<std::string>(), tag);
        if (item.gold_answer.empty())
            throw IngestError("line " + std::to_string(line_no) + " has an empty gold answer");
        items.push_back(std::move(item));
    }
    return items;
}

const std::vector<std::string>& default_urgency_pool() {
    static const std::vector<std::string> pool = {
        "I'm in a big hurry right now. Please give me the answer quickly!!!",
        "Quick, I need this answer right now!",
        "Please hurry, I only have a moment to read your reply.",
        "I'm about to walk into a meeting - answer as fast as you can!",
        "No time to spare, please be quick!",
        "Hurry! I need the answer immediately.",
    };
    return pool;
}

const std::string& default_instruction() {
    static const std::string instruction =
        "Answer the following question. Think step by step, then give your final answer on "
        "a line formatted as \"Answer: <answer>\".";
    return instruction;
}

BuiltPrompt build_qa_prompt(const UqaItem& item, Mode mode, Rng& rng,
                            const std::vector<std::string>& pool,
                            const std::string& instruction) {
    BuiltPrompt built;
    std::string& text = built.text;
    text = instruction;
    text += "\n\nQuestion: ";
    text += item.question;
    if (!item.choices.empty()) {
        text += "\nChoices:";
        for (const Choice& c : item.choices) {
            text += "\n(" + c.label + ") " + c.text;
        }
    }
    if (mode == Mode::Urgent) {
        if (pool.empty()) throw EmptyPool("urgency phrase pool is empty");
        const std::string& phrase = pool[rng.below(pool.size())];
        text += "\n\n" + phrase;
        built.urgency_phrase = phrase;
    }
    return built;
}

// ---------------------------------------------------------------------------
// Answer extraction
// ---------------------------------------------------------------------------

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Canonical decimal string: no sign for zero, no commas, no leading zeros, no
// trailing fraction zeros.
std::string canonical_number(const std::string& raw) {
    std::string cleaned;
    for (char c : raw) {
        if (c == ',' || c == '$' || c == ' ') continue;
        cleaned += c;
    }
    bool negative = false;
    std::size_t i = 0;
    if (i < cleaned.size() && (cleaned[i] == '+' || cleaned[i] == '-')) {
        negative = cleaned[i] == '-';
        ++i;
    }
    std::string integer, fraction;
    bool seen_dot = false;
    for (; i < cleaned.size(); ++i) {
        if (cleaned[i] == '.' && !seen_dot) {
            seen_dot = true;
        } else if (is_digit(cleaned[i])) {
            (seen_dot ? fraction : integer) += cleaned[i];
        } else {
            return ""; // not a plain number
        }
    }
    while (integer.size() > 1 && integer.front() == '0') integer.erase(integer.begin());
    while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
    if (integer.empty()) integer = "0";
    std::string out = integer;
    if (!fraction.empty()) out += "." + fraction;
    if (out == "0") return out;
    return negative ? "-" + out : out;
}

// Last numeric token ([+-]?digits with commas, optional decimal part).
std::optional<std::string> last_number(const std::string& text) {
    std::optional<std::string> found;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        // a leading decimal point belongs to the number unless it trails one
        if (start > 0 && text[start - 1] == '.' && (start < 2 || !is_digit(text[start - 2])))
            --start;
        if (start > 0 && (text[start - 1] == '-' || text[start - 1] == '+')) --start;
        std::size_t end = i;
        bool seen_dot = false;
        while (end < text.size()) {
            char c = text[end];
            if (is_digit(c)) {
                ++end;
            } else if (c == ',' && end + 1 < text.size() && is_digit(text[end + 1])) {
                ++end;
            } else if (c == '.' && !seen_dot && end + 1 < text.size() && is_digit(text[end + 1])) {
                seen_dot = true;
                ++end;
            } else {
                break;
            }
        }
        std::string canonical = canonical_number(text.substr(start, end - start));
        if (!canonical.empty()) found = canonical;
        i = end;
    }
    return found;
}

// Last standalone option letter. Lowercase letters only count inside labelled
// text, where `loose` is set; a bare lowercase "a" in prose is an article.
std::optional<std::string> last_option_letter(const std::string& text, bool loose) {
    std::optional<std::string> found;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        char upper = c;
        if (loose && c >= 'a' && c <= 'e') upper = static_cast<char>(c - 'a' + 'A');
        if (upper < 'A' || upper > 'E') continue;
        if (!loose && !(c >= 'A' && c <= 'E')) continue;
        const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        const bool right_ok =
            i + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (left_ok && right_ok) found = std::string(1, upper);
    }
    return found;
}

// Contents of the last \boxed{...}, if any.
std::optional<std::string> last_boxed(const std::string& text) {
    const std::string needle = "\\boxed{";
    std::size_t at = text.rfind(needle);
    if (at == std::string::npos) return std::nullopt;
    std::size_t close = text.find('}', at + needle.size());
    if (close == std::string::npos) return std::nullopt;
    return text.substr(at + needle.size(), close - at - needle.size());
}

// Text after the last "Answer:"-style label, up to end of line.
std::optional<std::string> last_labelled(const std::string& text) {
    std::optional<std::string> found;
    std::string low = text;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::size_t from = 0;
    while (true) {
        std::size_t at = low.find("answer", from);
        if (at == std::string::npos) break;
        from = at + 6;
        std::size_t colon = text.find_first_of(":=", at + 6);
        if (colon == std::string::npos) continue;
        std::size_t eol = text.find('\n', colon);
        std::string segment =
            text.substr(colon + 1, eol == std::string::npos ? std::string::npos : eol - colon - 1);
        if (segment.find_first_not_of(" \t\r") != std::string::npos) found = segment;
    }
    return found;
}

} // namespace

std::string normalize_answer(const std::string& answer, DatasetTag tag) {
    if (tag == DatasetTag::MathWord) {
        std::string canonical = canonical_number(answer);
        if (!canonical.empty()) return canonical;
        if (auto number = last_number(answer)) return *number;
        return "";
    }
    if (auto letter = last_option_letter(answer, true)) return *letter;
    return "";
}

std::optional<std::string> extract_answer(const std::string& raw_output, DatasetTag tag) {
    const bool math = tag == DatasetTag::MathWord;
    if (auto boxed = last_boxed(raw_output)) {
        std::string norm = normalize_answer(*boxed, tag);
        if (!norm.empty()) return norm;
    }
    if (auto labelled = last_labelled(raw_output)) {
        std::string norm;
        if (math) {
            if (auto number = last_number(*labelled)) norm = *number;
        } else if (auto letter = last_option_letter(*labelled, true)) {
            norm = *letter;
        }
        if (!norm.empty()) return norm;
    }
    if (math) {
        if (auto number = last_number(raw_output)) return *number;
        return std::nullopt;
    }
    if (auto letter = last_option_letter(raw_output, false)) return *letter;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

double delta_pct(double normal, double urgent) {
    if (normal == 0.0) throw ConfigError("relative change needs a non-zero baseline");
    return (urgent - normal) / normal * 100.0;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

UqaReport score_run(const std::vector<UqaResult>& results) {
    // Completeness: every (item, replication) must appear in both modes.
    std::set<std::tuple<std::string, int, Mode>> seen;
    int max_rep = 0;
    for (const UqaResult& r : results) {
        seen.insert({r.item_id, r.replication, r.mode});
        max_rep = std::max(max_rep, r.replication);
    }
    for (const UqaResult& r : results) {
        const Mode other = r.mode == Mode::Normal ? Mode::Urgent : Mode::Normal;
        if (!seen.count({r.item_id, r.replication, other}))
            throw IncompleteRun("item " + r.item_id + " replication " +
                                std::to_string(r.replication) + " is missing its " +
                                to_string(other) + " mode");
    }

    struct Accumulator {
        int n = 0;
        int correct = 0;
        long long tokens_shared = 0;
        long long tokens_model = 0;
        int tokens_model_n = 0;
        std::vector<int> rep_n, rep_correct;
    };
    std::map<DatasetTag, std::map<Mode, Accumulator>> acc;
    for (const UqaResult& r : results) {
        Accumulator& a = acc[r.tag][r.mode];
        if (static_cast<int>(a.rep_n.size()) <= max_rep) {
            a.rep_n.resize(static_cast<std::size_t>(max_rep) + 1, 0);
            a.rep_correct.resize(static_cast<std::size_t>(max_rep) + 1, 0);
        }
        ++a.n;
        ++a.rep_n[static_cast<std::size_t>(r.replication)];
        if (r.correct) {
            ++a.correct;
            ++a.rep_correct[static_cast<std::size_t>(r.replication)];
        }
        a.tokens_shared += r.tokens_shared;
        if (r.tokens_model_specific) {
            a.tokens_model += *r.tokens_model_specific;
            ++a.tokens_model_n;
        }
    }

    auto to_stats = [](const Accumulator& a) {
        ModeStats stats;
        stats.answers = a.n;
        stats.accuracy_pct = a.n > 0 ? 100.0 * a.correct / a.n : 0.0;
        stats.mean_tokens_shared = a.n > 0 ? static_cast<double>(a.tokens_shared) / a.n : 0.0;
        if (a.tokens_model_n > 0)
            stats.mean_tokens_model = static_cast<double>(a.tokens_model) / a.tokens_model_n;
        for (std::size_t rep = 0; rep < a.rep_n.size(); ++rep)
            if (a.rep_n[rep] > 0)
                stats.per_replication_accuracy.push_back(100.0 * a.rep_correct[rep] / a.rep_n[rep]);
        return stats;
    };

    UqaReport report;
    for (const auto& [tag, modes] : acc) {
        auto normal_it = modes.find(Mode::Normal);
        auto urgent_it = modes.find(Mode::Urgent);
        if (normal_it == modes.end() || urgent_it == modes.end())
            throw IncompleteRun("dataset " + to_string(tag) + " lacks one of the two modes");
        DatasetReport dr;
        dr.normal = to_stats(normal_it->second);
        dr.urgent = to_stats(urgent_it->second);
        if (dr.normal.accuracy_pct != 0.0)
            dr.delta_accuracy_pct = delta_pct(dr.normal.accuracy_pct, dr.urgent.accuracy_pct);
        if (dr.normal.mean_tokens_shared != 0.0)
            dr.delta_tokens_shared_pct =
                delta_pct(dr.normal.mean_tokens_shared, dr.urgent.mean_tokens_shared);
        if (dr.normal.mean_tokens_model && dr.urgent.mean_tokens_model &&
            *dr.normal.mean_tokens_model != 0.0)
            dr.delta_tokens_model_pct =
                delta_pct(*dr.normal.mean_tokens_model, *dr.urgent.mean_tokens_model);
        report[tag] = std::move(dr);
    }
    return report;
}

std::vector<UqaResult> run_items(const std::vector<UqaItem>& items, gateway::Gateway& gw,
                                 const RunOptions& options) {
    chronometry::CounterPtr shared =
        options.shared_counter ? options.shared_counter : chronometry::make_approx_counter();

    std::vector<UqaResult> results;
    results.reserve(items.size() * 2 * static_cast<std::size_t>(options.replications));
    for (int rep = 0; rep < options.replications; ++rep) {
        for (const UqaItem& item : items) {
            for (Mode mode : {Mode::Normal, Mode::Urgent}) {
                Rng phrase_rng(derive_seed(options.root_seed, "phrase/" + item.item_id,
                                           static_cast<std::uint64_t>(rep)));
                BuiltPrompt prompt = build_qa_prompt(item, mode, phrase_rng, options.urgency_pool,
                                                     options.instruction);

                gateway::ChatRequest req;
                req.model_id = options.model_id;
                req.temperature = options.temperature;
                req.max_output_tokens = options.max_output_tokens;
                req.seed_hint = derive_seed(options.root_seed,
                                            "uqa/" + item.item_id + "/" + to_string(mode),
                                            static_cast<std::uint64_t>(rep));
                req.messages.push_back({"user", prompt.text});
                gateway::ChatResponse resp = gw.complete(req);

                UqaResult result;
                result.item_id = item.item_id;
                result.tag = item.tag;
                result.mode = mode;
                result.replication = rep;
                result.extracted = extract_answer(resp.text, item.tag);
                result.correct = result.extracted && *result.extracted == item.gold_answer;
                result.tokens_shared = shared->count(resp.text);
                if (options.model_counter)
                    result.tokens_model_specific = options.model_counter->count(resp.text);
                result.urgency_phrase = prompt.urgency_phrase;
                results.push_back(std::move(result));
            }
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const UqaResult& result) {
    Json j;
    j["item_id"] = result.item_id;
    j["dataset"] = to_string(result.tag);
    j["mode"] = to_string(result.mode);
    j["replication"] = result.replication;
    if (result.extracted)
        j["extracted"] = *result.extracted;
    else
        j["extracted"] = nullptr;
    j["correct"] = result.correct;
    j["tokens_shared"] = result.tokens_shared;
    if (result.tokens_model_specific) j["tokens_model_specific"] = *result.tokens_model_specific;
    if (result.urgency_phrase) j["urgency_phrase"] = *result.urgency_phrase;
    return j;
}

UqaResult result_from_json(const Json& j) {
    UqaResult result;
    result.item_id = j.at("item_id").get<std::string>();
    result.tag = *dataset_from_string(j.at("dataset").get<std::string>());
    result.mode = j.at("mode").get<std::string>() == "normal" ? Mode::Normal : Mode::Urgent;
    result.replication = j.at("replication").get<int>();
    if (!j.at("extracted").is_null()) result.extracted = j["extracted"].get<std::string>();
    result.correct = j.at("correct").get<bool>();
    result.tokens_shared = j.at("tokens_shared").get<int>();
    if (j.contains("tokens_model_specific"))
        result.tokens_model_specific = j["tokens_model_specific"].get<int>();
    if (j.contains("urgency_phrase")) result.urgency_phrase = j["urgency_phrase"].get<std::string>();
    return result;
}

Json to_json(const UqaReport& report) {
    Json j;
    for (const auto& [tag, dr] : report) {
        auto mode_json = [](const ModeStats& stats) {
            Json m{{"answers", stats.answers},
                   {"accuracy_pct", stats.accuracy_pct},
                   {"mean_tokens_shared", stats.mean_tokens_shared},
                   {"per_replication_accuracy", stats.per_replication_accuracy}};
            if (stats.mean_tokens_model) m["mean_tokens_model"] = *stats.mean_tokens_model;
            return m;
        };
        Json entry;
        entry["normal"] = mode_json(dr.normal);
        entry["urgent"] = mode_json(dr.urgent);
        entry["delta_pct"] = Json::object();
        entry["delta_pct"]["accuracy"] =
            dr.delta_accuracy_pct ? Json(round2(*dr.delta_accuracy_pct)) : Json(nullptr);
        entry["delta_pct"]["tokens_shared"] =
            dr.delta_tokens_shared_pct ? Json(round2(*dr.delta_tokens_shared_pct)) : Json(nullptr);
        if (dr.delta_tokens_model_pct)
            entry["delta_pct"]["tokens_model"] = round2(*dr.delta_tokens_model_pct);
        j[to_string(tag)] = entry;
    }
    return j;
}

} // namespace tempo::uqa
