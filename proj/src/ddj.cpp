#include "tempo/ddj.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>

#include "tempo/datetime.hpp"

namespace tempo::ddj {

std::string to_string(Setting s) {
    switch (s) {
    case Setting::S1: return "s1";
    case Setting::S1Hint: return "s1-hint";
    case Setting::S1Count: return "s1-count";
    case Setting::S2: return "s2";
    case Setting::S2M: return "s2-m";
    case Setting::S2MPlus: return "s2-m-plus";
    }
    return "?";
}

std::optional<Setting> setting_from_string(std::string_view name) {
    if (name == "s1") return Setting::S1;
    if (name == "s1-hint") return Setting::S1Hint;
    if (name == "s1-count") return Setting::S1Count;
    if (name == "s2") return Setting::S2;
    if (name == "s2-m") return Setting::S2M;
    if (name == "s2-m-plus" || name == "s2-m+") return Setting::S2MPlus;
    return std::nullopt;
}

std::vector<Setting> all_settings() {
    return {Setting::S1, Setting::S1Hint, Setting::S1Count,
            Setting::S2, Setting::S2M, Setting::S2MPlus};
}

std::string to_string(Gold g) { return g == Gold::A ? "A" : "B"; }

std::vector<DialoguePair> ingest_pairs(std::istream& in, const IngestFilters& filters,
                                       const chronometry::TokenCounter& counter) {
    std::vector<DialoguePair> accepted;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (filters.limit && static_cast<int>(accepted.size()) >= *filters.limit) break;

        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw IngestError("line " + std::to_string(line_no) + " is not JSON: " + e.what());
        }
        if (!j.contains("prompt") || !j.contains("response_a") || !j.contains("response_b"))
            throw IngestError("line " + std::to_string(line_no) +
                              " is missing prompt/response_a/response_b");

        DialoguePair pair;
        pair.pair_id = j.value("pair_id", "pair-" + std::to_string(line_no));
        pair.user_prompt = j.at("prompt").get<std::string>();
        pair.response_a = j.at("response_a").get<std::string>();
        pair.response_b = j.at("response_b").get<std::string>();
        pair.model_a = j.value("model_a", "");
        pair.model_b = j.value("model_b", "");
        pair.prompt_tokens = counter.count(pair.user_prompt);
        pair.tokens_a = counter.count(pair.response_a);
        pair.tokens_b = counter.count(pair.response_b);

        if (!filters.model_allowlist.empty()) {
            auto allowed = [&](const std::string& m) {
                return std::find(filters.model_allowlist.begin(), filters.model_allowlist.end(),
                                 m) != filters.model_allowlist.end();
            };
            if (!allowed(pair.model_a) || !allowed(pair.model_b)) continue;
        }
        if (pair.tokens_a == 0 || pair.tokens_b == 0) continue;
        if (pair.tokens_a == pair.tokens_b) continue; // equal lengths carry no gold label
        const double ratio = static_cast<double>(std::max(pair.tokens_a, pair.tokens_b)) /
                             static_cast<double>(std::min(pair.tokens_a, pair.tokens_b));
        if (ratio < filters.min_length_ratio) continue;
        accepted.push_back(std::move(pair));
    }
    return accepted;
}

Timestamps synthesize_timestamps(const DialoguePair& pair, Setting setting, Rng& rng,
                                 const SynthesisParams& params) {
    if (!uses_timestamps(setting))
        throw ConfigError("setting " + to_string(setting) + " carries no timestamps");

    // Start points sampled independently so the two dialogues live in
    // unrelated temporal contexts.
    const std::int64_t span = params.window_end - params.window_start;
    const std::int64_t start_a =
        params.window_start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
    const std::int64_t start_b =
        params.window_start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));

    auto round_s = [](double seconds) {
        return static_cast<std::int64_t>(std::llround(seconds));
    };
    const std::int64_t input_a =
        std::max<std::int64_t>(1, round_s(pair.prompt_tokens * rng.uniform(params.typing_rate_lo,
                                                                           params.typing_rate_hi)));
    const std::int64_t input_b =
        std::max<std::int64_t>(1, round_s(pair.prompt_tokens * rng.uniform(params.typing_rate_lo,
                                                                           params.typing_rate_hi)));

    std::int64_t dur_a, dur_b;
    if (misleading(setting)) {
        dur_a = round_s(pair.tokens_b * params.generation_rate);
        dur_b = round_s(pair.tokens_a * params.generation_rate);
        if (dur_a == dur_b) { // keep the reversal strict after rounding
            (pair.tokens_a > pair.tokens_b ? dur_b : dur_a) += 1;
        }
    } else {
        dur_a = round_s(pair.tokens_a * params.generation_rate);
        dur_b = round_s(pair.tokens_b * params.generation_rate);
        if (dur_a == dur_b) {
            (pair.tokens_a > pair.tokens_b ? dur_a : dur_b) += 1;
        }
    }

    Timestamps t;
    t.a_input_start = start_a;
    t.a_input_end = start_a + input_a;
    t.a_output_start = t.a_input_end;
    t.a_output_end = t.a_output_start + dur_a;
    t.b_input_start = start_b;
    t.b_input_end = start_b + input_b;
    t.b_output_start = t.b_input_end;
    t.b_output_end = t.b_output_start + dur_b;
    return t;
}

Gold gold_label(const DialoguePair& pair, Setting setting,
                const std::optional<Timestamps>& timestamps) {
    if (uses_timestamps(setting)) {
        if (!timestamps) throw ConfigError("timestamp setting without synthesized timestamps");
        return timestamps->displayed_duration_a() > timestamps->displayed_duration_b() ? Gold::A
                                                                                       : Gold::B;
    }
    return pair.tokens_a > pair.tokens_b ? Gold::A : Gold::B;
}

namespace {

constexpr const char* kJudgeSystemBase =
    "You compare two user-assistant dialogues and decide which response is likely to have "
    "required more time to complete. Reply with \"Answer: A\" or \"Answer: B\" on the first "
    "line, then briefly justify your choice.";

constexpr const char* kConstantSpeedSentence =
    "Both responses were generated by an identical model with constant inference speed.";

constexpr const char* kProportionalHint =
    "Hint: Generation time is proportional to number of tokens.";

void append_dialogue(std::string& out, char label, const std::string& prompt,
                     const std::string& response) {
    out += "=== Dialogue ";
    out += label;
    out += " ===\n[User]\n";
    out += prompt;
    out += "\n[Assistant]\n";
    out += response;
    out += "\n";
}

void append_temporal_log(std::string& out, char label, std::int64_t in_start, std::int64_t in_end,
                         std::int64_t out_start, std::int64_t out_end) {
    out += "[Dialogue ";
    out += label;
    out += " temporal log]\n";
    out += "input_start:  " + datetime::format_utc(in_start) + "\n";
    out += "input_end:    " + datetime::format_utc(in_end) + "\n";
    out += "output_start: " + datetime::format_utc(out_start) + "\n";
    out += "output_end:   " + datetime::format_utc(out_end) + "\n";
}

} // namespace

Prompts build_prompt(const DialoguePair& pair, Setting setting,
                     const std::optional<Timestamps>& timestamps, bool swapped) {
    if (uses_timestamps(setting) && !timestamps)
        throw ConfigError("timestamp setting without synthesized timestamps");

    Prompts prompts;
    prompts.system = kJudgeSystemBase;
    if (!uses_timestamps(setting)) {
        prompts.system += std::string(" ") + kConstantSpeedSentence;
    }
    if (setting == Setting::S1Hint) prompts.system += std::string(" ") + kProportionalHint;

    // Presentation space: when swapped, pair-B is shown as "Dialogue A".
    const std::string& first = swapped ? pair.response_b : pair.response_a;
    const std::string& second = swapped ? pair.response_a : pair.response_b;
    const int first_tokens = swapped ? pair.tokens_b : pair.tokens_a;
    const int second_tokens = swapped ? pair.tokens_a : pair.tokens_b;

    std::string& user = prompts.user;
    user = "Which dialogue's response took longer to generate?\n\n";
    append_dialogue(user, 'A', pair.user_prompt, first);
    append_dialogue(user, 'B', pair.user_prompt, second);
    user += "=== End ===\n";

    if (uses_token_counts(setting)) {
        user += "\nToken counts (user prompt + response, shared tokenizer):\n";
        user += "Dialogue A: " + std::to_string(pair.prompt_tokens + first_tokens) +
                " tokens (prompt " + std::to_string(pair.prompt_tokens) + ", response " +
                std::to_string(first_tokens) + ")\n";
        user += "Dialogue B: " + std::to_string(pair.prompt_tokens + second_tokens) +
                " tokens (prompt " + std::to_string(pair.prompt_tokens) + ", response " +
                std::to_string(second_tokens) + ")\n";
    }
    if (uses_timestamps(setting)) {
        const Timestamps& t = *timestamps;
        user += "\n";
        if (!swapped) {
            append_temporal_log(user, 'A', t.a_input_start, t.a_input_end, t.a_output_start,
                                t.a_output_end);
            append_temporal_log(user, 'B', t.b_input_start, t.b_input_end, t.b_output_start,
                                t.b_output_end);
        } else {
            append_temporal_log(user, 'A', t.b_input_start, t.b_input_end, t.b_output_start,
                                t.b_output_end);
            append_temporal_log(user, 'B', t.a_input_start, t.a_input_end, t.a_output_start,
                                t.a_output_end);
        }
    }
    user += "\nWhich one took longer? Answer with \"Answer: A\" or \"Answer: B\" first.";
    return prompts;
}

DdjCase build_case(const DialoguePair& pair, Setting setting, Rng& rng,
                   const SynthesisParams& params, std::optional<bool> force_swap) {
    DdjCase c;
    c.case_id = pair.pair_id + "/" + to_string(setting);
    c.pair = pair;
    c.setting = setting;
    // One draw per case whether or not it is pinned, to keep streams aligned.
    const bool drawn_swap = rng.below(2) == 1;
    c.swapped = force_swap.value_or(drawn_swap);
    if (uses_timestamps(setting)) c.timestamps = synthesize_timestamps(pair, setting, rng, params);
    c.token_annotations = uses_token_counts(setting);
    c.gold_canonical = gold_label(pair, setting, c.timestamps);
    c.gold_presented = c.swapped ? flip(c.gold_canonical) : c.gold_canonical;
    Prompts prompts = build_prompt(pair, setting, c.timestamps, c.swapped);
    c.system_prompt = std::move(prompts.system);
    c.user_prompt = std::move(prompts.user);
    return c;
}

std::vector<DdjCase> build_cases(const std::vector<DialoguePair>& pairs,
                                 const std::vector<Setting>& settings, std::uint64_t root_seed,
                                 const SynthesisParams& params) {
    std::vector<DdjCase> cases;
    cases.reserve(pairs.size() * settings.size());
    for (Setting setting : settings) {
        for (const DialoguePair& pair : pairs) {
            Rng rng(derive_seed(root_seed, "ddj-case/" + pair.pair_id + "/" + to_string(setting)));
            cases.push_back(build_case(pair, setting, rng, params));
        }
    }
    return cases;
}

Verdict parse_verdict(const std::string& raw) {
    Verdict verdict;
    verdict.justification = raw;

    auto find_choice = [](const std::string& text, bool uppercase_only) -> std::optional<Gold> {
        std::optional<Gold> found;
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            if (!uppercase_only && (c == 'a' || c == 'b')) c = static_cast<char>(c - 'a' + 'A');
            if (c != 'A' && c != 'B') continue;
            const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
            const bool right_ok =
                i + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
            if (left_ok && right_ok) found = c == 'A' ? Gold::A : Gold::B;
        }
        return found;
    };

    // Labelled "Answer:" lines take priority, last one wins.
    std::size_t start = 0;
    std::optional<Gold> labelled;
    std::size_t labelled_end = 0;
    while (start <= raw.size()) {
        std::size_t nl = raw.find('\n', start);
        const std::string line =
            raw.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        std::string low = line;
        std::transform(low.begin(), low.end(), low.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        std::size_t at = low.find("answer");
        if (at != std::string::npos) {
            std::size_t colon = line.find_first_of(":=", at);
            if (colon != std::string::npos) {
                if (auto g = find_choice(line.substr(colon + 1), false)) {
                    labelled = g;
                    labelled_end = nl == std::string::npos ? raw.size() : nl;
                }
            }
        }
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    if (labelled) {
        verdict.choice = labelled;
        if (labelled_end < raw.size()) {
            std::string rest = raw.substr(labelled_end);
            while (!rest.empty() && (rest.front() == '\n' || rest.front() == ' '))
                rest.erase(rest.begin());
            if (!rest.empty()) verdict.justification = rest;
        }
        return verdict;
    }
    verdict.choice = find_choice(raw, true);
    return verdict;
}

// ---------------------------------------------------------------------------
// Attribution
// ---------------------------------------------------------------------------

namespace {

bool has_clock_pattern(const std::string& text) {
    for (std::size_t i = 0; i + 4 < text.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(text[i])) &&
            std::isdigit(static_cast<unsigned char>(text[i + 1])) && text[i + 2] == ':' &&
            std::isdigit(static_cast<unsigned char>(text[i + 3])) &&
            std::isdigit(static_cast<unsigned char>(text[i + 4])))
            return true;
    }
    return false;
}

bool contains_any_of(const std::string& text, std::initializer_list<const char*> terms) {
    for (const char* term : terms)
        if (text.find(term) != std::string::npos) return true;
    return false;
}

} // namespace

std::string to_string(Attribution a) {
    switch (a) {
    case Attribution::TextLength: return "text_length";
    case Attribution::Semantic: return "semantic";
    case Attribution::Time: return "time";
    case Attribution::Other: return "other";
    }
    return "?";
}

Attribution classify_attribution(const std::string& justification) {
    std::string text = justification;
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    const bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
    if (blank) return Attribution::Other;

    if (contains_any_of(text, {"timestamp", "time stamp", "temporal log", "output_start",
                               "output_end", "duration", "seconds", "minutes", "hours", "elapsed",
                               "clock", "started at", "ended at", "finished at", "later than",
                               "earlier than", "start time", "end time"}) ||
        has_clock_pattern(text))
        return Attribution::Time;

    if (contains_any_of(text, {"token", "length", "longer", "shorter", "lengthy", "word count",
                               "words", "character", "verbose", "concise", "more text",
                               "long response", "short response"}))
        return Attribution::TextLength;

    return Attribution::Semantic;
}

std::string attribution_classifier_prompt(const std::string& justification) {
    return "A judge explained how it decided which of two responses took longer to generate. "
           "Classify the explanation's primary basis into exactly one category:\n"
           "- time: it cites timestamps, durations or other explicit temporal records\n"
           "- text_length: it cites response length, token or word counts\n"
           "- semantic: it reasons from content, complexity or topic\n"
           "- other: none of the above\n"
           "Reply with the single category word.\n\nExplanation:\n" +
           justification;
}

Attribution parse_attribution_reply(const std::string& raw) {
    std::string text = raw;
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (text.find("text_length") != std::string::npos ||
        text.find("text length") != std::string::npos)
        return Attribution::TextLength;
    if (text.find("semantic") != std::string::npos) return Attribution::Semantic;
    if (text.find("time") != std::string::npos) return Attribution::Time;
    return Attribution::Other;
}

// ---------------------------------------------------------------------------
// Judging
// ---------------------------------------------------------------------------

JudgeRun judge_and_score(const std::vector<DdjCase>& cases, gateway::Gateway& gw,
                         const std::string& model_id, double temperature, int replications,
                         std::uint64_t root_seed) {
    JudgeRun run;
    std::map<Setting, std::vector<int>> correct_by_rep;
    std::map<Setting, int> case_counts;
    for (const DdjCase& c : cases) ++case_counts[c.setting];
    for (auto& [setting, count] : case_counts)
        correct_by_rep[setting].assign(static_cast<std::size_t>(replications), 0);

    for (int rep = 0; rep < replications; ++rep) {
        for (const DdjCase& c : cases) {
            gateway::ChatRequest req;
            req.model_id = model_id;
            req.temperature = temperature;
            req.seed_hint =
                derive_seed(root_seed, "judge/" + c.case_id, static_cast<std::uint64_t>(rep));
            req.messages.push_back({"system", c.system_prompt});
            req.messages.push_back({"user", c.user_prompt});
            gateway::ChatResponse resp = gw.complete(req);

            Verdict verdict = parse_verdict(resp.text);
            Judgment judgment;
            judgment.case_id = c.case_id;
            judgment.setting = c.setting;
            judgment.replication = rep;
            judgment.choice = verdict.choice;
            judgment.justification = verdict.justification;
            judgment.parse_failed = !verdict.choice.has_value();
            judgment.correct = verdict.choice && *verdict.choice == c.gold_presented;
            if (judgment.correct)
                ++correct_by_rep[c.setting][static_cast<std::size_t>(rep)];
            run.judgments.push_back(std::move(judgment));
        }
    }

    for (const auto& [setting, correct] : correct_by_rep) {
        std::vector<double>& acc = run.scores.per_replication[setting];
        double sum = 0.0;
        for (int rep = 0; rep < replications; ++rep) {
            const double a =
                static_cast<double>(correct[static_cast<std::size_t>(rep)]) / case_counts[setting];
            acc.push_back(a);
            sum += a;
        }
        run.scores.mean_accuracy[setting] = sum / replications;
    }
    return run;
}

AttributionTable attribution_table(const std::vector<Judgment>& judgments) {
    AttributionTable table;
    std::map<Setting, int> totals;
    std::map<Setting, std::map<Attribution, int>> correct;
    for (const Judgment& j : judgments) {
        const Attribution a = j.attribution.value_or(classify_attribution(j.justification));
        ++table[j.setting][a].count;
        ++totals[j.setting];
        if (j.correct) ++correct[j.setting][a];
    }
    for (auto& [setting, cells] : table) {
        for (auto& [attribution, cell] : cells) {
            cell.usage_pct = 100.0 * cell.count / totals[setting];
            cell.accuracy_pct =
                cell.count > 0 ? 100.0 * correct[setting][attribution] / cell.count : 0.0;
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

Json to_json(const DdjCase& c) {
    Json j;
    j["case_id"] = c.case_id;
    j["setting"] = to_string(c.setting);
    j["pair"] = {{"pair_id", c.pair.pair_id},
                 {"prompt", c.pair.user_prompt},
                 {"response_a", c.pair.response_a},
                 {"response_b", c.pair.response_b},
                 {"prompt_tokens", c.pair.prompt_tokens},
                 {"tokens_a", c.pair.tokens_a},
                 {"tokens_b", c.pair.tokens_b},
                 {"model_a", c.pair.model_a},
                 {"model_b", c.pair.model_b}};
    if (c.timestamps) {
        const Timestamps& t = *c.timestamps;
        j["timestamps"] = {{"a_input_start", t.a_input_start},
                           {"a_input_end", t.a_input_end},
                           {"a_output_start", t.a_output_start},
                           {"a_output_end", t.a_output_end},
                           {"b_input_start", t.b_input_start},
                           {"b_input_end", t.b_input_end},
                           {"b_output_start", t.b_output_start},
                           {"b_output_end", t.b_output_end}};
    }
    j["token_annotations"] = c.token_annotations;
    j["swapped"] = c.swapped;
    j["gold_canonical"] = to_string(c.gold_canonical);
    j["gold_presented"] = to_string(c.gold_presented);
    j["system_prompt"] = c.system_prompt;
    j["user_prompt"] = c.user_prompt;
    return j;
}

DdjCase case_from_json(const Json& j) {
    DdjCase c;
    c.case_id = j.at("case_id").get<std::string>();
    c.setting = *setting_from_string(j.at("setting").get<std::string>());
    const Json& p = j.at("pair");
    c.pair.pair_id = p.at("pair_id").get<std::string>();
    c.pair.user_prompt = p.at("prompt").get<std::string>();
    c.pair.response_a = p.at("response_a").get<std::string>();
    c.pair.response_b = p.at("response_b").get<std::string>();
    c.pair.prompt_tokens = p.at("prompt_tokens").get<int>();
    c.pair.tokens_a = p.at("tokens_a").get<int>();
    c.pair.tokens_b = p.at("tokens_b").get<int>();
    c.pair.model_a = p.value("model_a", "");
    c.pair.model_b = p.value("model_b", "");
    if (j.contains("timestamps")) {
        const Json& t = j["timestamps"];
        Timestamps ts;
        ts.a_input_start = t.at("a_input_start").get<std::int64_t>();
        ts.a_input_end = t.at("a_input_end").get<std::int64_t>();
        ts.a_output_start = t.at("a_output_start").get<std::int64_t>();
        ts.a_output_end = t.at("a_output_end").get<std::int64_t>();
        ts.b_input_start = t.at("b_input_start").get<std::int64_t>();
        ts.b_input_end = t.at("b_input_end").get<std::int64_t>();
        ts.b_output_start = t.at("b_output_start").get<std::int64_t>();
        ts.b_output_end = t.at("b_output_end").get<std::int64_t>();
        c.timestamps = ts;
    }
    c.token_annotations = j.at("token_annotations").get<bool>();
    c.swapped = j.at("swapped").get<bool>();
    c.gold_canonical = j.at("gold_canonical").get<std::string>() == "A" ? Gold::A : Gold::B;
    c.gold_presented = j.at("gold_presented").get<std::string>() == "A" ? Gold::A : Gold::B;
    c.system_prompt = j.at("system_prompt").get<std::string>();
    c.user_prompt = j.at("user_prompt").get<std::string>();
    return c;
}

Json to_json(const Judgment& judgment) {
    Json j;
    j["case_id"] = judgment.case_id;
    j["setting"] = to_string(judgment.setting);
    j["replication"] = judgment.replication;
    if (judgment.choice)
        j["choice"] = to_string(*judgment.choice);
    else
        j["choice"] = nullptr;
    j["justification"] = judgment.justification;
    j["correct"] = judgment.correct;
    j["parse_failed"] = judgment.parse_failed;
    if (judgment.attribution) j["attribution"] = to_string(*judgment.attribution);
    return j;
}

Judgment judgment_from_json(const Json& j) {
    Judgment judgment;
    judgment.case_id = j.at("case_id").get<std::string>();
    judgment.setting = *setting_from_string(j.at("setting").get<std::string>());
    judgment.replication = j.at("replication").get<int>();
    if (!j.at("choice").is_null())
        judgment.choice = j["choice"].get<std::string>() == "A" ? Gold::A : Gold::B;
    judgment.justification = j.at("justification").get<std::string>();
    judgment.correct = j.at("correct").get<bool>();
    judgment.parse_failed = j.at("parse_failed").get<bool>();
    if (j.contains("attribution")) {
        const std::string a = j["attribution"].get<std::string>();
        if (a == "text_length") judgment.attribution = Attribution::TextLength;
        else if (a == "semantic") judgment.attribution = Attribution::Semantic;
        else if (a == "time") judgment.attribution = Attribution::Time;
        else judgment.attribution = Attribution::Other;
    }
    return judgment;
}

Json to_json(const ScoreTable& scores) {
    Json j;
    for (const auto& [setting, accs] : scores.per_replication) {
        Json entry;
        entry["per_replication"] = accs;
        entry["mean"] = scores.mean_accuracy.at(setting);
        j[to_string(setting)] = entry;
    }
    return j;
}

Json to_json(const AttributionTable& table) {
    Json j;
    for (const auto& [setting, cells] : table) {
        Json row;
        for (const auto& [attribution, cell] : cells) {
            row[to_string(attribution)] = {{"count", cell.count},
                                           {"usage_pct", cell.usage_pct},
                                           {"accuracy_pct", cell.accuracy_pct}};
        }
        j[to_string(setting)] = row;
    }
    return j;
}

} // namespace tempo::ddj
