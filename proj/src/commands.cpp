#include "tempo/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tempo/analytics.hpp"
#include "tempo/datetime.hpp"
#include "tempo/ddj.hpp"
#include "tempo/episode.hpp"
#include "tempo/uqa.hpp"

namespace fs = std::filesystem;

namespace tempo::commands {

std::string make_run_id(const std::string& experiment, const Json& config, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(experiment);
    h = fnv1a64(config.dump(), h);
    h = splitmix64(h ^ seed);
    return hex64(h).substr(0, 12);
}

void append_manifest(const std::string& path, const RunManifest& manifest) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::app);
    if (!out) throw ConfigError("cannot append to manifest: " + path);
    Json j{{"run_id", manifest.run_id},
           {"experiment", manifest.experiment},
           {"config", manifest.config},
           {"seed", manifest.seed},
           {"code_version", manifest.code_version},
           {"schema_version", manifest.schema_version},
           {"started_at", manifest.started_at},
           {"finished_at", manifest.finished_at},
           {"artifacts", manifest.artifacts}};
    out << j.dump() << "\n";
}

std::unique_ptr<gateway::Gateway> make_gateway(const GatewaySetup& setup) {
    if (!setup.record_path.empty() && !setup.replay_path.empty())
        throw ConfigError("choose either --record or --replay, not both");

    gateway::Mode mode = gateway::Mode::Live;
    std::string fixture;
    if (!setup.record_path.empty()) {
        mode = gateway::Mode::Record;
        fixture = setup.record_path;
        fs::path p(fixture);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
    } else if (!setup.replay_path.empty()) {
        mode = gateway::Mode::Replay;
        fixture = setup.replay_path;
    }

    gateway::BackendPtr backend;
    if (mode != gateway::Mode::Replay) {
        if (setup.backend == "http") {
            if (setup.endpoint.empty())
                throw ConfigError("http backend needs --endpoint");
            gateway::HttpConfig http;
            http.endpoint = setup.endpoint;
            http.api_key_env = setup.api_key_env;
            http.timeout_seconds = setup.timeout_seconds;
            backend = gateway::make_http_backend(http);
        } else if (setup.backend == "mock" || setup.backend == "judge-length" ||
                   setup.backend == "judge-time") {
            backend = gateway::make_mock_backend(setup.backend);
        } else {
            throw ConfigError("unknown backend '" + setup.backend + "'");
        }
    }

    gateway::RetryPolicy retry;
    retry.max_attempts = setup.max_attempts;
    gateway::GatewayLimits limits;
    limits.max_in_flight = setup.max_in_flight;
    limits.per_minute = setup.per_minute;
    return std::make_unique<gateway::Gateway>(backend, mode, fixture, retry, limits);
}

chronometry::CounterPtr make_counter(const CounterSetup& setup) {
    if (setup.kind == "approx") return chronometry::make_approx_counter();
    if (setup.kind == "bpe") {
        if (setup.merges_path.empty()) throw ConfigError("bpe counter needs --merges");
        return chronometry::load_bpe_counter(setup.merges_path);
    }
    throw ConfigError("unknown counter kind '" + setup.kind + "'");
}

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

std::string now_iso() { return datetime::format_iso8601(static_cast<std::int64_t>(std::time(nullptr))); }

episode::SettingSpec resolve_setting(const std::string& name) {
    auto id = episode::setting_from_string(name);
    if (!id) throw ConfigError("unknown setting '" + name + "'");
    return episode::SettingSpec::from_id(*id);
}

episode::ContextPolicy resolve_policy(const std::string& name) {
    auto policy = episode::context_policy_from_string(name);
    if (!policy) throw ConfigError("unknown context policy '" + name + "'");
    return *policy;
}

struct AgentSetup {
    std::string kind;
    int reasoning_tokens = 0;
    gateway::Gateway* gw = nullptr;
    std::string model_id;
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
    episode::SettingSpec setting;
    episode::ContextPolicy policy = episode::ContextPolicy::FullHistory;
};

episode::AgentFactory make_agent_factory(const AgentSetup& setup) {
    return [setup](std::uint64_t episode_seed) -> agents::AgentPtr {
        agents::AgentPtr inner;
        if (setup.kind == "bfs-oracle") {
            inner = agents::make_bfs_optimal_agent();
        } else if (setup.kind == "greedy-signal") {
            inner = agents::make_greedy_signal_agent();
        } else if (setup.kind == "random") {
            inner = agents::make_random_agent(derive_seed(episode_seed, "agent"));
        } else if (setup.kind == "stay") {
            inner = agents::make_stay_agent();
        } else if (setup.kind == "llm") {
            if (!setup.gw) throw ConfigError("llm agent needs a gateway");
            return episode::make_llm_agent(*setup.gw, setup.model_id, setup.setting, setup.policy,
                                           setup.temperature, episode_seed,
                                           setup.max_output_tokens);
        } else {
            throw ConfigError("unknown agent '" + setup.kind + "'");
        }
        if (setup.reasoning_tokens > 0)
            inner = agents::make_fixed_reasoning_agent(
                std::move(inner), agents::filler_reasoning(setup.reasoning_tokens));
        return inner;
    };
}

Json metrics_json(const analytics::MetricReport& m) {
    Json j{{"completed", m.completed},
           {"aborted", m.aborted},
           {"success_pct", m.success_pct},
           {"oversteps_pct", m.oversteps_pct},
           {"timeout_pct", m.timeout_pct},
           {"mean_steps", m.mean_steps},
           {"mean_tokens_per_step", m.mean_tokens_per_step}};
    if (m.navigation_accuracy_pct) j["navigation_accuracy_pct"] = *m.navigation_accuracy_pct;
    if (m.time_efficiency_pct) j["time_efficiency_pct"] = *m.time_efficiency_pct;
    return j;
}

Json buckets_json(const analytics::BucketAccuracy& buckets) {
    Json acc = Json::array();
    for (const auto& a : buckets.acc) {
        if (a)
            acc.push_back(*a);
        else
            acc.push_back(nullptr);
    }
    return Json{{"t_buckets", buckets.t_buckets}, {"acc", acc}, {"counts", buckets.counts}};
}

void print_metric_row(std::ostream& log, const std::string& label,
                      const analytics::MetricReport& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-16s %8.1f %10.1f %9.1f %8.2f %9.1f", label.c_str(),
                  m.success_pct, m.oversteps_pct, m.timeout_pct, m.mean_steps,
                  m.mean_tokens_per_step);
    log << buf;
    if (m.navigation_accuracy_pct) {
        std::snprintf(buf, sizeof(buf), " %9.1f", *m.navigation_accuracy_pct);
        log << buf;
    } else {
        log << "         -";
    }
    if (m.time_efficiency_pct) {
        std::snprintf(buf, sizeof(buf), " %9.1f", *m.time_efficiency_pct);
        log << buf;
    } else {
        log << "         -";
    }
    log << "\n";
}

void print_metric_header(std::ostream& log) {
    log << "setting          %success %oversteps  %timeout   #steps   #tokens   %navacc  "
           "%timeeff\n";
}

std::vector<std::string> timed_reasoning_texts(const std::vector<episode::EpisodeRecord>& records) {
    std::vector<std::string> texts;
    for (const auto& r : records) {
        if (!r.setting.timed()) continue;
        for (const auto& s : r.steps) texts.push_back(s.raw_text);
    }
    return texts;
}

} // namespace

int cmd_bombrush(const BombrushArgs& args, std::ostream& log) {
    const std::string started = now_iso();
    episode::SettingSpec setting = resolve_setting(args.setting);
    if (setting.timed() && !args.v_out)
        throw ConfigError("setting " + args.setting + " is timed and needs --v-out");

    std::unique_ptr<gateway::Gateway> gw;
    if (args.agent == "llm") gw = make_gateway(args.gateway);

    AgentSetup agent_setup;
    agent_setup.kind = args.agent;
    agent_setup.reasoning_tokens = args.reasoning_tokens;
    agent_setup.gw = gw.get();
    agent_setup.model_id = args.model_id;
    agent_setup.temperature = args.temperature;
    agent_setup.max_output_tokens = args.max_output_tokens;
    agent_setup.setting = setting;
    agent_setup.policy = resolve_policy(args.context_policy);

    episode::EpisodeOptions options;
    options.v_out = args.v_out;
    options.counter = make_counter(args.counter);
    options.reprompt_on_parse_failure = args.reprompt_on_parse_failure;

    episode::BatchResult batch = episode::run_batch(setting, make_agent_factory(agent_setup),
                                                    args.runs, args.seed, options, args.jobs);

    const fs::path out_dir(args.out_dir);
    const fs::path episodes_path = out_dir / "episodes.jsonl";
    {
        std::ofstream out = open_output(episodes_path);
        for (const auto& record : batch.completed) episode::write_episode_jsonl(out, record);
        for (const auto& record : batch.aborted) episode::write_episode_jsonl(out, record);
    }

    analytics::MetricReport metrics =
        analytics::compute_metrics(batch.completed, static_cast<int>(batch.aborted.size()));
    analytics::BucketAccuracy buckets =
        analytics::stepwise_accuracy(batch.completed, args.t_buckets);

    Json summary;
    summary["setting"] = to_string(setting.id);
    summary["agent"] = args.agent;
    summary["runs"] = args.runs;
    summary["seed"] = args.seed;
    if (args.v_out) summary["v_out"] = *args.v_out;
    summary["metrics"] = metrics_json(metrics);
    summary["bucket_accuracy"] = buckets_json(buckets);
    if (setting.timed()) {
        analytics::AuditReport audit =
            analytics::reasoning_audit(timed_reasoning_texts(batch.completed));
        summary["reasoning_audit"] = {{"texts", audit.texts},
                                      {"urgency_mention_pct", audit.urgency_mention_pct},
                                      {"tw_mapping_pct", audit.tw_mapping_pct}};
    }
    const fs::path summary_path = out_dir / "summary.json";
    open_output(summary_path) << summary.dump(2) << "\n";

    print_metric_header(log);
    print_metric_row(log, to_string(setting.id), metrics);
    if (!batch.aborted.empty())
        log << batch.aborted.size() << " episode(s) aborted and excluded from metrics\n";

    Json config_snapshot{{"setting", args.setting}, {"agent", args.agent},
                         {"runs", args.runs},      {"reasoning_tokens", args.reasoning_tokens},
                         {"model_id", args.model_id}, {"context_policy", args.context_policy}};
    if (args.v_out) config_snapshot["v_out"] = *args.v_out;
    RunManifest manifest;
    manifest.run_id = make_run_id("bombrush", config_snapshot, args.seed);
    manifest.experiment = "bombrush";
    manifest.config = config_snapshot;
    manifest.seed = args.seed;
    manifest.schema_version = episode::kEpisodeSchemaVersion;
    manifest.started_at = started;
    manifest.finished_at = now_iso();
    manifest.artifacts = {episodes_path.string(), summary_path.string()};
    append_manifest((out_dir / "manifest.jsonl").string(), manifest);
    return 0;
}

int cmd_calibrate(const CalibrateArgs& args, std::ostream& log) {
    const std::string started = now_iso();
    episode::SettingSpec setting = episode::SettingSpec::from_id(episode::SettingId::S1Treasure);

    std::unique_ptr<gateway::Gateway> gw;
    if (args.agent == "llm") gw = make_gateway(args.gateway);

    AgentSetup agent_setup;
    agent_setup.kind = args.agent;
    agent_setup.reasoning_tokens = args.reasoning_tokens;
    agent_setup.gw = gw.get();
    agent_setup.model_id = args.model_id;
    agent_setup.temperature = args.temperature;
    agent_setup.setting = setting;
    agent_setup.policy = resolve_policy(args.context_policy);

    episode::EpisodeOptions options;
    options.counter = make_counter(args.counter);

    episode::BatchResult batch = episode::run_batch(setting, make_agent_factory(agent_setup),
                                                    args.runs, args.seed, options, args.jobs);

    long long tokens = 0, steps = 0;
    for (const auto& record : batch.completed) {
        tokens += record.total_tokens();
        steps += record.steps_taken;
    }
    if (steps == 0 || tokens == 0)
        throw InvalidCalibration("batch produced no reasoning tokens to calibrate from");

    chronometry::CalibrationReport report;
    report.model_id = args.model_id;
    report.avg_tokens_per_step = static_cast<double>(tokens) / static_cast<double>(steps);
    report.horizon = args.horizon;
    report.budget_seconds = args.budget_seconds;
    report.v_out = chronometry::calibrate_vout(report.avg_tokens_per_step, args.horizon,
                                               args.budget_seconds)
                       .v_out;

    Json j = chronometry::to_json(report);
    Json refs = Json::array();
    for (const auto& ref : chronometry::calibration_references()) {
        refs.push_back({{"model_id", ref.model_id},
                        {"avg_tokens_per_step", ref.avg_tokens_per_step},
                        {"published_v_out", ref.published_v_out},
                        {"computed_v_out", ref.computed_v_out},
                        {"consistent", ref.consistent}});
    }
    j["published_references"] = refs;

    const fs::path out_dir(args.out_dir);
    const fs::path report_path = out_dir / "calibration.json";
    open_output(report_path) << j.dump(2) << "\n";

    char buf[160];
    std::snprintf(buf, sizeof(buf), "avg tokens/step %.2f over %lld steps -> v_out %.6f\n",
                  report.avg_tokens_per_step, steps, report.v_out);
    log << buf;

    Json config_snapshot{{"agent", args.agent},
                         {"runs", args.runs},
                         {"reasoning_tokens", args.reasoning_tokens},
                         {"horizon", args.horizon},
                         {"budget_seconds", args.budget_seconds},
                         {"model_id", args.model_id}};
    RunManifest manifest;
    manifest.run_id = make_run_id("calibrate", config_snapshot, args.seed);
    manifest.experiment = "calibrate";
    manifest.config = config_snapshot;
    manifest.seed = args.seed;
    manifest.schema_version = 1;
    manifest.started_at = started;
    manifest.finished_at = now_iso();
    manifest.artifacts = {report_path.string()};
    append_manifest((out_dir / "manifest.jsonl").string(), manifest);
    return 0;
}

namespace {

std::vector<ddj::Setting> resolve_ddj_settings(const std::string& spec) {
    if (spec == "all") return ddj::all_settings();
    std::vector<ddj::Setting> out;
    std::stringstream ss(spec);
    std::string token;
    while (std::getline(ss, token, ',')) {
        auto s = ddj::setting_from_string(token);
        if (!s) throw ConfigError("unknown ddj setting '" + token + "'");
        out.push_back(*s);
    }
    if (out.empty()) throw ConfigError("no ddj settings selected");
    return out;
}

} // namespace

int cmd_ddj_build(const DdjBuildArgs& args, std::ostream& log) {
    const std::string started = now_iso();
    std::ifstream in(args.conversations);
    if (!in) throw IngestError("cannot open conversations file: " + args.conversations);

    ddj::IngestFilters filters;
    filters.min_length_ratio = args.min_ratio;
    filters.model_allowlist = args.allowlist;
    filters.limit = args.pairs;
    chronometry::CounterPtr counter = make_counter(args.counter);
    std::vector<ddj::DialoguePair> pairs = ddj::ingest_pairs(in, filters, *counter);

    std::vector<ddj::Setting> settings = resolve_ddj_settings(args.settings);
    std::vector<ddj::DdjCase> cases = ddj::build_cases(pairs, settings, args.seed);

    const fs::path out_dir(args.out_dir);
    const fs::path cases_path = out_dir / "cases.jsonl";
    {
        std::ofstream out = open_output(cases_path);
        for (const auto& c : cases) out << ddj::to_json(c).dump() << "\n";
    }
    log << "ingested " << pairs.size() << " pairs, built " << cases.size() << " cases across "
        << settings.size() << " settings\n";

    Json config_snapshot{{"conversations", args.conversations},
                         {"settings", args.settings},
                         {"pairs", args.pairs},
                         {"min_ratio", args.min_ratio}};
    RunManifest manifest;
    manifest.run_id = make_run_id("ddj-build", config_snapshot, args.seed);
    manifest.experiment = "ddj-build";
    manifest.config = config_snapshot;
    manifest.seed = args.seed;
    manifest.schema_version = 1;
    manifest.started_at = started;
    manifest.finished_at = now_iso();
    manifest.artifacts = {cases_path.string()};
    append_manifest((out_dir / "manifest.jsonl").string(), manifest);
    return 0;
}

namespace {

// One-sided paired t-tests over the per-replication accuracy vectors for the
// standard setting comparisons. Degenerate vectors (e.g. a deterministic
// judge) report null rather than a number.
Json ddj_significance(const ddj::ScoreTable& scores) {
    struct Comparison {
        const char* label;
        ddj::Setting lhs;
        ddj::Setting rhs;
        analytics::Alternative alternative; // H_a: lhs (alt) rhs
    };
    const Comparison comparisons[] = {
        {"s1-hint>s1", ddj::Setting::S1Hint, ddj::Setting::S1, analytics::Alternative::Greater},
        {"s1-count>s1", ddj::Setting::S1Count, ddj::Setting::S1, analytics::Alternative::Greater},
        {"s2>s1", ddj::Setting::S2, ddj::Setting::S1, analytics::Alternative::Greater},
        {"s2-m<s2", ddj::Setting::S2M, ddj::Setting::S2, analytics::Alternative::Less},
        {"s2-m-plus<s2", ddj::Setting::S2MPlus, ddj::Setting::S2, analytics::Alternative::Less},
    };
    Json out = Json::object();
    for (const Comparison& cmp : comparisons) {
        auto lhs = scores.per_replication.find(cmp.lhs);
        auto rhs = scores.per_replication.find(cmp.rhs);
        if (lhs == scores.per_replication.end() || rhs == scores.per_replication.end()) continue;
        try {
            out[cmp.label] = analytics::paired_ttest(lhs->second, rhs->second, cmp.alternative);
        } catch (const DegenerateSample&) {
            out[cmp.label] = nullptr;
        }
    }
    return out;
}

} // namespace

int cmd_ddj_run(const DdjRunArgs& args, std::ostream& log) {
    const std::string started = now_iso();
    std::ifstream in(args.cases_path);
    if (!in) throw IngestError("cannot open cases file: " + args.cases_path);
    std::vector<ddj::DdjCase> cases;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        cases.push_back(ddj::case_from_json(Json::parse(line)));
    }
    if (cases.empty()) throw IngestError("cases file is empty: " + args.cases_path);

    std::unique_ptr<gateway::Gateway> gw = make_gateway(args.gateway);
    ddj::JudgeRun run = ddj::judge_and_score(cases, *gw, args.model_id, args.temperature,
                                             args.replications, args.seed);

    const fs::path out_dir(args.out_dir);
    const fs::path judgments_path = out_dir / "judgments.jsonl";
    {
        std::ofstream out = open_output(judgments_path);
        for (const auto& j : run.judgments) out << ddj::to_json(j).dump() << "\n";
    }
    Json accuracy = ddj::to_json(run.scores);
    accuracy["significance"] = ddj_significance(run.scores);
    const fs::path accuracy_path = out_dir / "accuracy.json";
    open_output(accuracy_path) << accuracy.dump(2) << "\n";

    for (const auto& [setting, mean] : run.scores.mean_accuracy) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%-10s accuracy %6.2f%%\n", ddj::to_string(setting).c_str(),
                      100.0 * mean);
        log << buf;
    }

    Json config_snapshot{{"cases", args.cases_path},
                         {"replications", args.replications},
                         {"model_id", args.model_id},
                         {"temperature", args.temperature}};
    RunManifest manifest;
    manifest.run_id = make_run_id("ddj-run", config_snapshot, args.seed);
    manifest.experiment = "ddj-run";
    manifest.config = config_snapshot;
    manifest.seed = args.seed;
    manifest.schema_version = 1;
    manifest.started_at = started;
    manifest.finished_at = now_iso();
    manifest.artifacts = {judgments_path.string(), accuracy_path.string()};
    append_manifest((out_dir / "manifest.jsonl").string(), manifest);
    return 0;
}

int cmd_ddj_attribute(const DdjAttributeArgs& args, std::ostream& log) {
    const std::string started = now_iso();
    std::ifstream in(args.judgments_path);
    if (!in) throw IngestError("cannot open judgments file: " + args.judgments_path);
    std::vector<ddj::Judgment> judgments;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        judgments.push_back(ddj::judgment_from_json(Json::parse(line)));
    }
    if (judgments.empty()) throw IngestError("judgments file is empty: " + args.judgments_path);

    if (args.rules == "offline") {
        for (auto& j : judgments) j.attribution = ddj::classify_attribution(j.justification);
    } else if (args.rules == "llm") {
        std::unique_ptr<gateway::Gateway> gw = make_gateway(args.gateway);
        for (auto& j : judgments) {
            gateway::ChatRequest req;
            req.model_id = args.model_id;
            req.messages.push_back(
                {"user", ddj::attribution_classifier_prompt(j.justification)});
            j.attribution = ddj::parse_attribution_reply(gw->complete(req).text);
        }
    } else {
        throw ConfigError("unknown attribution rules '" + args.rules + "'");
    }

    ddj::AttributionTable table = ddj::attribution_table(judgments);
    const fs::path out_dir(args.out_dir);
    const fs::path table_path = out_dir / "attribution.json";
    open_output(table_path) << ddj::to_json(table).dump(2) << "\n";

    for (const auto& [setting, cells] : table) {
        log << ddj::to_string(setting) << ":";
        for (const auto& [attribution, cell] : cells) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), " %s %.1f%% (acc %.1f%%)",
                          ddj::to_string(attribution).c_str(), cell.usage_pct, cell.accuracy_pct);
            log << buf;
        }
        log << "\n";
    }

    Json config_snapshot{{"judgments", args.judgments_path}, {"rules", args.rules}};
    RunManifest manifest;
    manifest.run_id = make_run_id("ddj-attribute", config_snapshot, 0);
    manifest.experiment = "ddj-attribute";
    manifest.config = config_snapshot;
    manifest.schema_version = 1;
    manifest.started_at = started;
    manifest.finished_at = now_iso();
    manifest.artifacts = {table_path.string()};
    append_manifest((out_dir / "manifest.jsonl").string(), manifest);
    return 0;
}

int cmd_uqa_run(const UqaRunArgs& args, std::ostream& log) {
    const std::string started = now_iso();

    std::vector<uqa::UqaResult> results;
    const fs::path out_dir(args.out_dir);
    const fs::path results_path = out_dir / "results.jsonl";

    if (!args.from_results.empty()) {
        std::ifstream in(args.from_results);
        if (!in) throw IngestError("cannot open results file: " + args.from_results);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            results.push_back(uqa::result_from_json(Json::parse(line)));
        }
    } else {
        if (args.datasets.empty())
            throw ConfigError("uqa run needs at least one --data tag=path");
        std::vector<uqa::UqaItem> items;
        for (const std::string& spec : args.datasets) {
            std::size_t eq = spec.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--data expects tag=path, got '" + spec + "'");
            auto tag = uqa::dataset_from_string(spec.substr(0, eq));
            if (!tag) throw ConfigError("unknown dataset tag '" + spec.substr(0, eq) + "'");
            std::ifstream in(spec.substr(eq + 1));
            if (!in) throw IngestError("cannot open dataset file: " + spec.substr(eq + 1));
            std::vector<uqa::UqaItem> loaded = uqa::load_items(in, *tag);
            items.insert(items.end(), loaded.begin(), loaded.end());
        }
        if (items.empty()) throw IngestError("no items loaded");

        std::unique_ptr<gateway::Gateway> gw = make_gateway(args.gateway);
        uqa::RunOptions options;
        options.model_id = args.model_id;
        options.temperature = args.temperature;
        options.replications = args.replications;
        options.root_seed = args.seed;
        if (!args.template_path.empty()) {
            std::ifstream tmpl(args.template_path);
            if (!tmpl) throw ConfigError("cannot open template file: " + args.template_path);
            std::ostringstream buf;
            buf << tmpl.rdbuf();
            options.instruction = buf.str();
            while (!options.instruction.empty() && options.instruction.back() == '\n')
                options.instruction.pop_back();
        }
        if (!args.urgency_pool.empty()) options.urgency_pool = args.urgency_pool;
        options.shared_counter = make_counter(args.counter);
        if (!args.counter.model_merges_path.empty())
            options.model_counter = chronometry::load_bpe_counter(args.counter.model_merges_path);
        options.max_output_tokens = args.max_output_tokens;
        results = uqa::run_items(items, *gw, options);
    }

    {
        std::ofstream out = open_output(results_path);
        for (const auto& r : results) out << uqa::to_json(r).dump() << "\n";
    }

    uqa::UqaReport report = uqa::score_run(results);
    const fs::path summary_path = out_dir / "summary.json";
    open_output(summary_path) << uqa::to_json(report).dump(2) << "\n";

    log << "dataset          normal%  urgent%   d-acc%  ntokens  utokens  d-tok%\n";
    for (const auto& [tag, dr] : report) {
        char buf[160];
        auto fmt_delta = [](const std::optional<double>& d) {
            char out[24];
            if (d)
                std::snprintf(out, sizeof(out), "%8.2f", uqa::round2(*d));
            else
                std::snprintf(out, sizeof(out), "%8s", "-");
            return std::string(out);
        };
        std::snprintf(buf, sizeof(buf), "%-16s %7.2f %8.2f %s %8.1f %8.1f %s\n",
                      uqa::to_string(tag).c_str(), dr.normal.accuracy_pct, dr.urgent.accuracy_pct,
                      fmt_delta(dr.delta_accuracy_pct).c_str(), dr.normal.mean_tokens_shared,
                      dr.urgent.mean_tokens_shared, fmt_delta(dr.delta_tokens_shared_pct).c_str());
        log << buf;
    }

    Json config_snapshot{{"datasets", args.datasets},
                         {"replications", args.replications},
                         {"model_id", args.model_id},
                         {"from_results", args.from_results}};
    RunManifest manifest;
    manifest.run_id = make_run_id("uqa-run", config_snapshot, args.seed);
    manifest.experiment = "uqa-run";
    manifest.config = config_snapshot;
    manifest.seed = args.seed;
    manifest.schema_version = 1;
    manifest.started_at = started;
    manifest.finished_at = now_iso();
    manifest.artifacts = {results_path.string(), summary_path.string()};
    append_manifest((out_dir / "manifest.jsonl").string(), manifest);
    return 0;
}

int cmd_report(const ReportArgs& args, std::ostream& log) {
    std::ifstream in(args.episodes_path);
    if (!in) throw IngestError("cannot open episodes file: " + args.episodes_path);
    std::vector<episode::EpisodeRecord> records = episode::read_episodes_jsonl(in);

    std::map<std::string, std::vector<episode::EpisodeRecord>> by_setting;
    int aborted = 0;
    for (auto& record : records) {
        if (record.aborted) {
            ++aborted;
            continue;
        }
        by_setting[to_string(record.setting.id)].push_back(std::move(record));
    }
    if (by_setting.empty()) throw IngestError("no completed episodes in log");

    Json summary;
    print_metric_header(log);
    std::string csv = "setting,success_pct,oversteps_pct,timeout_pct,mean_steps,"
                      "mean_tokens_per_step,navigation_accuracy_pct,time_efficiency_pct\n";
    for (const auto& [name, group] : by_setting) {
        analytics::MetricReport metrics = analytics::compute_metrics(group, 0);
        print_metric_row(log, name, metrics);
        Json entry;
        entry["metrics"] = metrics_json(metrics);
        entry["bucket_accuracy"] = buckets_json(analytics::stepwise_accuracy(group, args.t_buckets));
        if (args.audit && group.front().setting.timed()) {
            analytics::AuditReport audit =
                analytics::reasoning_audit(timed_reasoning_texts(group));
            entry["reasoning_audit"] = {{"texts", audit.texts},
                                        {"urgency_mention_pct", audit.urgency_mention_pct},
                                        {"tw_mapping_pct", audit.tw_mapping_pct}};
        }
        summary[name] = entry;

        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f,%.4f,%.4f,", name.c_str(),
                      metrics.success_pct, metrics.oversteps_pct, metrics.timeout_pct,
                      metrics.mean_steps, metrics.mean_tokens_per_step);
        csv += buf;
        if (metrics.navigation_accuracy_pct)
            csv += std::to_string(*metrics.navigation_accuracy_pct);
        csv += ",";
        if (metrics.time_efficiency_pct) csv += std::to_string(*metrics.time_efficiency_pct);
        csv += "\n";
    }
    if (aborted > 0) log << aborted << " aborted episode(s) excluded\n";

    if (!args.out_path.empty()) open_output(args.out_path) << summary.dump(2) << "\n";
    if (!args.csv_path.empty()) open_output(args.csv_path) << csv;
    return 0;
}

} // namespace tempo::commands
