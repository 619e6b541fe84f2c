#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tempo/uqa.hpp"

using namespace tempo;
using namespace tempo::uqa;

namespace {

UqaItem mc_item(const std::string& id = "mc1") {
    UqaItem item;
    item.item_id = id;
    item.tag = DatasetTag::CommonsenseMc;
    item.question = "Which conducts electricity?";
    item.choices = {{"A", "copper"}, {"B", "wood"}, {"C", "glass"}, {"D", "wool"}};
    item.gold_answer = "A";
    return item;
}

UqaItem math_item(const std::string& id = "m1") {
    UqaItem item;
    item.item_id = id;
    item.tag = DatasetTag::MathWord;
    item.question = "Tom has 3 boxes of 5 apples. How many apples?";
    item.gold_answer = "15";
    return item;
}

} // namespace

TEST_CASE("prompt construction") {
    SUBCASE("urgent mode appends one pool phrase and records it") {
        Rng rng(1);
        BuiltPrompt p = build_qa_prompt(mc_item(), Mode::Urgent, rng);
        REQUIRE(p.urgency_phrase.has_value());
        CHECK(p.text.find(*p.urgency_phrase) != std::string::npos);
        CHECK(p.text.rfind(*p.urgency_phrase) + p.urgency_phrase->size() == p.text.size());
    }
    SUBCASE("normal mode has no pool phrase") {
        Rng rng(1);
        BuiltPrompt p = build_qa_prompt(mc_item(), Mode::Normal, rng);
        CHECK_FALSE(p.urgency_phrase.has_value());
        for (const std::string& phrase : default_urgency_pool())
            CHECK(p.text.find(phrase) == std::string::npos);
    }
    SUBCASE("the verbatim flagship phrase is in the default pool") {
        const auto& pool = default_urgency_pool();
        CHECK(std::find(pool.begin(), pool.end(),
                        "I'm in a big hurry right now. Please give me the answer quickly!!!") !=
              pool.end());
    }
    SUBCASE("same seed, same phrase") {
        Rng a(77), b(77);
        CHECK(*build_qa_prompt(mc_item(), Mode::Urgent, a).urgency_phrase ==
              *build_qa_prompt(mc_item(), Mode::Urgent, b).urgency_phrase);
    }
    SUBCASE("empty pool") {
        Rng rng(1);
        CHECK_THROWS_AS(build_qa_prompt(mc_item(), Mode::Urgent, rng, {}), EmptyPool);
    }
    SUBCASE("choices are rendered with labels") {
        Rng rng(1);
        BuiltPrompt p = build_qa_prompt(mc_item(), Mode::Normal, rng);
        CHECK(p.text.find("(A) copper") != std::string::npos);
        CHECK(p.text.find("(D) wool") != std::string::npos);
    }
}

TEST_CASE("answer extraction: multiple choice") {
    auto mc = [](const std::string& raw) { return extract_answer(raw, DatasetTag::ScienceMc); };
    CHECK(mc("after much thought, the answer is (C)") == "C");
    CHECK(mc("Answer: b") == "B");
    CHECK(mc("I waver between A and B. Answer: A") == "A");
    CHECK(mc("\\boxed{D}") == "D");
    CHECK(mc("first B, finally C") == "C"); // last standalone letter wins
    CHECK_FALSE(mc("").has_value());
    CHECK_FALSE(mc("no letter here").has_value());
    // a lone lowercase article never counts
    CHECK_FALSE(mc("it is a tricky one").has_value());
}

TEST_CASE("answer extraction: math normalization oracle strings") {
    auto math = [](const std::string& raw) { return extract_answer(raw, DatasetTag::MathWord); };
    struct Fixture {
        const char* raw;
        const char* want; // nullptr = absent
    };
    // hand-built normalization set: strip currency/commas/whitespace,
    // canonical zeros, last number wins
    const Fixture fixtures[] = {
        {"total = 1,250 dollars", "1250"},
        {"the sum is $42", "42"},
        {"Answer: 3.50", "3.5"},
        {"12 plus 13 gives 25", "25"},
        {"roughly 0.500", "0.5"},
        {"count: 007", "7"},
        {"-12 is the net change", "-12"},
        {"+8 total", "8"},
        {"about 1,000,000 grains", "1000000"},
        {"answer = 16.0", "16"},
        {"\\boxed{128}", "128"},
        {"0", "0"},
        {"-0", "0"},
        {"5.", "5"},
        {".75 of the tank", "0.75"},
        {"first 10 then 20 then Answer: 30", "30"},
        {"Answer: none", nullptr},
        {"", nullptr},
        {"no digits at all", nullptr},
        {"3,5 keeps the comma-grouping reading", "35"},
    };
    for (const Fixture& f : fixtures) {
        CAPTURE(f.raw);
        auto got = math(f.raw);
        if (f.want == nullptr) {
            CHECK_FALSE(got.has_value());
        } else {
            CHECK(got == f.want);
        }
    }
}

TEST_CASE("normalize_answer mirrors the extractor") {
    CHECK(normalize_answer("(c)", DatasetTag::CommonsenseMc) == "C");
    CHECK(normalize_answer("B", DatasetTag::ScienceMc) == "B");
    CHECK(normalize_answer("1,250", DatasetTag::MathWord) == "1250");
    CHECK(normalize_answer("$3.40", DatasetTag::MathWord) == "3.4");
}

TEST_CASE("dataset loading") {
    std::istringstream in(
        R"({"id":"q1","question":"Pick one.","choices":["x","y"],"answer":"b"})" "\n"
        R"({"question":"Pick again.","choices":[{"label":"A","text":"x"},{"label":"B","text":"y"}],"answer":"A"})" "\n");
    std::vector<UqaItem> items = load_items(in, DatasetTag::CommonsenseMc);
    REQUIRE(items.size() == 2);
    CHECK(items[0].gold_answer == "B");
    CHECK(items[0].choices[1].label == "B");
    CHECK(items[1].item_id == "commonsense_mc-2");
    CHECK(items[1].choices[0].text == "x");

    std::istringstream bad(R"({"question":"no answer"})" "\n");
    CHECK_THROWS_AS(load_items(bad, DatasetTag::MathWord), IngestError);
}

TEST_CASE("delta percentages reproduce the published fixture rows to 2 decimals") {
    struct Row {
        double normal;
        double urgent;
        double want;
    };
    // token-mean and accuracy rows that reproduce exactly from their
    // displayed two-decimal values
    const Row rows[] = {
        {206.49, 163.70, -20.72}, {48.18, 52.12, 8.18},   {202.72, 185.72, -8.39},
        {288.98, 258.93, -10.40}, {759.07, 654.74, -13.74}, {5105.93, 5064.82, -0.81},
        {84.60, 84.24, -0.43},    {482.47, 439.45, -8.92},  {793.32, 695.39, -12.34},
        {784.31, 683.38, -12.87},
    };
    for (const Row& row : rows) {
        CAPTURE(row.normal);
        CHECK(round2(delta_pct(row.normal, row.urgent)) == doctest::Approx(row.want).epsilon(1e-12));
    }
}

namespace {

UqaResult result_for(const std::string& id, DatasetTag tag, Mode mode, int rep, bool correct,
                     int tokens) {
    UqaResult r;
    r.item_id = id;
    r.tag = tag;
    r.mode = mode;
    r.replication = rep;
    r.correct = correct;
    if (correct) r.extracted = "x";
    r.tokens_shared = tokens;
    return r;
}

} // namespace

TEST_CASE("score_run") {
    SUBCASE("identical outputs in both modes mean zero deltas") {
        std::vector<UqaResult> results;
        for (int rep = 0; rep < 2; ++rep)
            for (int i = 0; i < 4; ++i) {
                results.push_back(result_for("q" + std::to_string(i), DatasetTag::MathWord,
                                             Mode::Normal, rep, i % 2 == 0, 100));
                results.push_back(result_for("q" + std::to_string(i), DatasetTag::MathWord,
                                             Mode::Urgent, rep, i % 2 == 0, 100));
            }
        UqaReport report = score_run(results);
        const DatasetReport& dr = report[DatasetTag::MathWord];
        CHECK(dr.normal.accuracy_pct == doctest::Approx(50.0));
        CHECK(*dr.delta_accuracy_pct == doctest::Approx(0.0));
        CHECK(*dr.delta_tokens_shared_pct == doctest::Approx(0.0));
        REQUIRE(dr.normal.per_replication_accuracy.size() == 2);
        CHECK(dr.normal.per_replication_accuracy[0] == doctest::Approx(50.0));
    }
    SUBCASE("token reduction shows up as a negative delta") {
        std::vector<UqaResult> results;
        for (int i = 0; i < 10; ++i) {
            results.push_back(
                result_for("q" + std::to_string(i), DatasetTag::CommonsenseMc, Mode::Normal, 0,
                           true, 206));
            results.push_back(
                result_for("q" + std::to_string(i), DatasetTag::CommonsenseMc, Mode::Urgent, 0,
                           true, 164));
        }
        UqaReport report = score_run(results);
        CHECK(*report[DatasetTag::CommonsenseMc].delta_tokens_shared_pct ==
              doctest::Approx(delta_pct(206.0, 164.0)));
    }
    SUBCASE("a missing mode raises IncompleteRun") {
        std::vector<UqaResult> results;
        results.push_back(result_for("q0", DatasetTag::MathWord, Mode::Normal, 0, true, 10));
        CHECK_THROWS_AS(score_run(results), IncompleteRun);
    }
}

TEST_CASE("run_items is deterministic and complete") {
    std::vector<UqaItem> items = {mc_item("a"), mc_item("b"), math_item("c")};
    gateway::Gateway gw(gateway::make_mock_backend(), gateway::Mode::Live);
    RunOptions options;
    options.replications = 2;
    options.root_seed = 9;

    std::vector<UqaResult> first = run_items(items, gw, options);
    std::vector<UqaResult> second = run_items(items, gw, options);
    REQUIRE(first.size() == items.size() * 2 * 2);
    REQUIRE(second.size() == first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].item_id == second[i].item_id);
        CHECK(first[i].correct == second[i].correct);
        CHECK(first[i].tokens_shared == second[i].tokens_shared);
        CHECK(to_json(first[i]).dump() == to_json(second[i]).dump());
    }
    CHECK_NOTHROW(score_run(first));

    // every urgent result records its sampled phrase
    for (const UqaResult& r : first)
        CHECK(r.urgency_phrase.has_value() == (r.mode == Mode::Urgent));
}

TEST_CASE("result serialization round-trips") {
    UqaResult r = result_for("q9", DatasetTag::ScienceMc, Mode::Urgent, 4, true, 321);
    r.urgency_phrase = "Quick, I need this answer right now!";
    r.tokens_model_specific = 340;
    UqaResult back = result_from_json(to_json(r));
    CHECK(back.item_id == r.item_id);
    CHECK(back.tag == r.tag);
    CHECK(back.mode == Mode::Urgent);
    CHECK(back.tokens_model_specific == 340);
    CHECK(to_json(back).dump() == to_json(r).dump());
}

TEST_CASE("dual token accounting with a model-specific counter") {
    const std::string merges =
        (std::filesystem::temp_directory_path() / "tempo_uqa_merges.txt").string();
    {
        std::ofstream out(merges);
        out << "t h\n";
    }
    std::vector<UqaItem> items = {mc_item("dual")};
    gateway::Gateway gw(gateway::make_mock_backend(), gateway::Mode::Live);
    RunOptions options;
    options.replications = 1;
    options.model_counter = chronometry::load_bpe_counter(merges);
    std::vector<UqaResult> results = run_items(items, gw, options);
    REQUIRE(results.size() == 2);
    for (const UqaResult& r : results) {
        REQUIRE(r.tokens_model_specific.has_value());
        CHECK(*r.tokens_model_specific > 0);
        CHECK(r.tokens_shared > 0);
    }
    UqaReport report = score_run(results);
    const DatasetReport& dr = report[DatasetTag::CommonsenseMc];
    REQUIRE(dr.normal.mean_tokens_model.has_value());
    REQUIRE(dr.delta_tokens_model_pct.has_value());
    std::filesystem::remove(merges);
}

TEST_CASE("the instruction header is an editable asset") {
    Rng rng(1);
    BuiltPrompt p = build_qa_prompt(mc_item(), Mode::Normal, rng, default_urgency_pool(),
                                    "Reply with the option letter only.");
    CHECK(p.text.rfind("Reply with the option letter only.", 0) == 0);
    CHECK(p.text.find("step by step") == std::string::npos);
    CHECK(p.text.find("Question:") != std::string::npos);
}
