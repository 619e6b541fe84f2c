#include <iostream>

#include <CLI11.hpp>

#include "tempo/commands.hpp"

namespace {

using tempo::Json;
namespace cmds = tempo::commands;

// Config file values sit between built-in defaults and explicit flags:
// flags > file > defaults. The file is applied to the argument structs before
// CLI11 parses, so any flag the user passes simply overwrites it.
Json load_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) throw tempo::ConfigError(std::string("cannot open config: ") + argv[i + 1]);
            return Json::parse(in);
        }
    }
    return Json::object();
}

template <typename T>
void from_config(const Json& cfg, const char* section, const char* key, T& value) {
    if (cfg.contains(section) && cfg[section].contains(key)) value = cfg[section][key].get<T>();
}

void apply_gateway_config(const Json& cfg, cmds::GatewaySetup& gw) {
    from_config(cfg, "gateway", "backend", gw.backend);
    from_config(cfg, "gateway", "endpoint", gw.endpoint);
    from_config(cfg, "gateway", "api_key_env", gw.api_key_env);
    from_config(cfg, "gateway", "timeout_seconds", gw.timeout_seconds);
    from_config(cfg, "gateway", "max_attempts", gw.max_attempts);
    from_config(cfg, "gateway", "max_in_flight", gw.max_in_flight);
    from_config(cfg, "gateway", "per_minute", gw.per_minute);
}

void apply_counter_config(const Json& cfg, cmds::CounterSetup& counter) {
    from_config(cfg, "counter", "kind", counter.kind);
    from_config(cfg, "counter", "merges_path", counter.merges_path);
    from_config(cfg, "counter", "model_merges_path", counter.model_merges_path);
}

void add_gateway_flags(CLI::App* app, cmds::GatewaySetup& gw) {
    app->add_option("--backend", gw.backend, "mock | judge-length | judge-time | http");
    app->add_option("--endpoint", gw.endpoint, "chat-completions endpoint URL");
    app->add_option("--api-key-env", gw.api_key_env, "env var holding the API key");
    app->add_option("--timeout", gw.timeout_seconds, "HTTP timeout seconds");
    app->add_option("--record", gw.record_path, "record responses to this fixture file");
    app->add_option("--replay", gw.replay_path, "serve responses from this fixture file");
    app->add_option("--max-attempts", gw.max_attempts, "retry budget per request");
    app->add_option("--max-in-flight", gw.max_in_flight, "concurrent request cap");
    app->add_option("--per-minute", gw.per_minute, "request rate cap (0 = off)");
}

void add_counter_flags(CLI::App* app, cmds::CounterSetup& counter) {
    app->add_option("--counter", counter.kind, "approx | bpe");
    app->add_option("--merges", counter.merges_path, "BPE merges file for the shared counter");
    app->add_option("--model-merges", counter.model_merges_path,
                    "optional merges file for model-specific accounting");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic harness for token-time experiments"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");

    Json cfg;
    try {
        cfg = load_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    // bombrush
    cmds::BombrushArgs bombrush;
    apply_gateway_config(cfg, bombrush.gateway);
    apply_counter_config(cfg, bombrush.counter);
    from_config(cfg, "bombrush", "setting", bombrush.setting);
    from_config(cfg, "bombrush", "agent", bombrush.agent);
    from_config(cfg, "bombrush", "runs", bombrush.runs);
    from_config(cfg, "bombrush", "seed", bombrush.seed);
    from_config(cfg, "bombrush", "reasoning_tokens", bombrush.reasoning_tokens);
    from_config(cfg, "bombrush", "context_policy", bombrush.context_policy);
    from_config(cfg, "bombrush", "model_id", bombrush.model_id);
    from_config(cfg, "bombrush", "temperature", bombrush.temperature);
    from_config(cfg, "bombrush", "reprompt_on_parse_failure", bombrush.reprompt_on_parse_failure);
    from_config(cfg, "bombrush", "jobs", bombrush.jobs);
    from_config(cfg, "bombrush", "out", bombrush.out_dir);
    if (cfg.contains("bombrush") && cfg["bombrush"].contains("v_out"))
        bombrush.v_out = cfg["bombrush"]["v_out"].get<double>();
    double v_out_flag = -1.0;
    int max_tokens_flag = -1;
    CLI::App* cmd_bombrush = app.add_subcommand("bombrush", "run a batch of navigation episodes");
    cmd_bombrush->add_option("--setting", bombrush.setting,
                             "s1 | s2-baseline | s2-hint | s2-hurry | s2-hint-hurry | "
                             "s3-passive | s3-active");
    cmd_bombrush->add_option("--agent", bombrush.agent,
                             "bfs-oracle | greedy-signal | random | stay | llm");
    cmd_bombrush->add_option("--runs", bombrush.runs, "episodes in the batch");
    cmd_bombrush->add_option("--seed", bombrush.seed, "root seed");
    cmd_bombrush->add_option("--v-out", v_out_flag, "seconds per token for the clock");
    cmd_bombrush->add_option("--reasoning-tokens", bombrush.reasoning_tokens,
                             "fixed token charge for scripted agents");
    cmd_bombrush->add_option("--context-policy", bombrush.context_policy,
                             "full-history | solution-only");
    cmd_bombrush->add_option("--model", bombrush.model_id, "model id for the llm agent");
    cmd_bombrush->add_option("--temperature", bombrush.temperature, "sampling temperature");
    cmd_bombrush->add_option("--max-output-tokens", max_tokens_flag, "completion token cap");
    cmd_bombrush->add_flag("--reprompt", bombrush.reprompt_on_parse_failure,
                           "retry once when a reply fails to parse (both replies charged)");
    cmd_bombrush->add_option("--jobs", bombrush.jobs, "worker threads");
    cmd_bombrush->add_option("--buckets", bombrush.t_buckets, "progress buckets for ACC_t");
    cmd_bombrush->add_option("--out", bombrush.out_dir, "output directory");
    add_gateway_flags(cmd_bombrush, bombrush.gateway);
    add_counter_flags(cmd_bombrush, bombrush.counter);

    // calibrate
    cmds::CalibrateArgs calibrate;
    apply_gateway_config(cfg, calibrate.gateway);
    apply_counter_config(cfg, calibrate.counter);
    from_config(cfg, "calibrate", "agent", calibrate.agent);
    from_config(cfg, "calibrate", "runs", calibrate.runs);
    from_config(cfg, "calibrate", "seed", calibrate.seed);
    from_config(cfg, "calibrate", "reasoning_tokens", calibrate.reasoning_tokens);
    from_config(cfg, "calibrate", "horizon", calibrate.horizon);
    from_config(cfg, "calibrate", "budget_seconds", calibrate.budget_seconds);
    from_config(cfg, "calibrate", "model_id", calibrate.model_id);
    from_config(cfg, "calibrate", "out", calibrate.out_dir);
    CLI::App* cmd_calibrate =
        app.add_subcommand("calibrate", "derive v_out from an untimed batch");
    cmd_calibrate->add_option("--agent", calibrate.agent, "agent spec");
    cmd_calibrate->add_option("--runs", calibrate.runs, "episodes in the batch");
    cmd_calibrate->add_option("--seed", calibrate.seed, "root seed");
    cmd_calibrate->add_option("--reasoning-tokens", calibrate.reasoning_tokens,
                              "fixed token charge for scripted agents");
    cmd_calibrate->add_option("--horizon", calibrate.horizon, "step horizon");
    cmd_calibrate->add_option("--budget", calibrate.budget_seconds, "time budget seconds");
    cmd_calibrate->add_option("--model", calibrate.model_id, "model id for the llm agent");
    cmd_calibrate->add_option("--temperature", calibrate.temperature, "sampling temperature");
    cmd_calibrate->add_option("--context-policy", calibrate.context_policy,
                              "full-history | solution-only");
    cmd_calibrate->add_option("--jobs", calibrate.jobs, "worker threads");
    cmd_calibrate->add_option("--out", calibrate.out_dir, "output directory");
    add_gateway_flags(cmd_calibrate, calibrate.gateway);
    add_counter_flags(cmd_calibrate, calibrate.counter);

    // ddj
    CLI::App* cmd_ddj = app.add_subcommand("ddj", "dialogue duration judgment pipeline");
    cmd_ddj->require_subcommand(1);

    cmds::DdjBuildArgs ddj_build;
    apply_counter_config(cfg, ddj_build.counter);
    from_config(cfg, "ddj", "conversations", ddj_build.conversations);
    from_config(cfg, "ddj", "settings", ddj_build.settings);
    from_config(cfg, "ddj", "pairs", ddj_build.pairs);
    from_config(cfg, "ddj", "seed", ddj_build.seed);
    from_config(cfg, "ddj", "min_ratio", ddj_build.min_ratio);
    from_config(cfg, "ddj", "allowlist", ddj_build.allowlist);
    from_config(cfg, "ddj", "out", ddj_build.out_dir);
    CLI::App* cmd_ddj_build = cmd_ddj->add_subcommand("build", "construct judgment cases");
    cmd_ddj_build->add_option("--conversations", ddj_build.conversations,
                              "conversations JSONL file");
    cmd_ddj_build->add_option("--settings", ddj_build.settings, "all or comma-separated list");
    cmd_ddj_build->add_option("--pairs", ddj_build.pairs, "pairs to accept");
    cmd_ddj_build->add_option("--seed", ddj_build.seed, "root seed");
    cmd_ddj_build->add_option("--min-ratio", ddj_build.min_ratio, "length-ratio threshold");
    cmd_ddj_build->add_option("--allow-model", ddj_build.allowlist,
                              "model allowlist entry (repeatable)");
    cmd_ddj_build->add_option("--out", ddj_build.out_dir, "output directory");
    add_counter_flags(cmd_ddj_build, ddj_build.counter);

    cmds::DdjRunArgs ddj_run;
    apply_gateway_config(cfg, ddj_run.gateway);
    from_config(cfg, "ddj", "replications", ddj_run.replications);
    from_config(cfg, "ddj", "model_id", ddj_run.model_id);
    from_config(cfg, "ddj", "temperature", ddj_run.temperature);
    from_config(cfg, "ddj", "out", ddj_run.out_dir);
    CLI::App* cmd_ddj_run = cmd_ddj->add_subcommand("run", "judge built cases and score");
    cmd_ddj_run->add_option("--cases", ddj_run.cases_path, "cases JSONL from ddj build");
    cmd_ddj_run->add_option("--replications", ddj_run.replications, "judge replications");
    cmd_ddj_run->add_option("--seed", ddj_run.seed, "root seed");
    cmd_ddj_run->add_option("--model", ddj_run.model_id, "judge model id");
    cmd_ddj_run->add_option("--temperature", ddj_run.temperature, "sampling temperature");
    cmd_ddj_run->add_option("--out", ddj_run.out_dir, "output directory");
    add_gateway_flags(cmd_ddj_run, ddj_run.gateway);

    cmds::DdjAttributeArgs ddj_attr;
    apply_gateway_config(cfg, ddj_attr.gateway);
    from_config(cfg, "ddj", "out", ddj_attr.out_dir);
    CLI::App* cmd_ddj_attr =
        cmd_ddj->add_subcommand("attribute", "classify judgment justifications");
    cmd_ddj_attr->add_option("--judgments", ddj_attr.judgments_path, "judgments JSONL");
    cmd_ddj_attr->add_option("--rules", ddj_attr.rules, "offline | llm");
    cmd_ddj_attr->add_option("--model", ddj_attr.model_id, "classifier model id");
    cmd_ddj_attr->add_option("--out", ddj_attr.out_dir, "output directory");
    add_gateway_flags(cmd_ddj_attr, ddj_attr.gateway);

    // uqa
    CLI::App* cmd_uqa = app.add_subcommand("uqa", "urgency-aware QA pipeline");
    cmd_uqa->require_subcommand(1);
    cmds::UqaRunArgs uqa_run;
    apply_gateway_config(cfg, uqa_run.gateway);
    apply_counter_config(cfg, uqa_run.counter);
    from_config(cfg, "uqa", "datasets", uqa_run.datasets);
    from_config(cfg, "uqa", "replications", uqa_run.replications);
    from_config(cfg, "uqa", "seed", uqa_run.seed);
    from_config(cfg, "uqa", "model_id", uqa_run.model_id);
    from_config(cfg, "uqa", "temperature", uqa_run.temperature);
    from_config(cfg, "uqa", "out", uqa_run.out_dir);
    from_config(cfg, "uqa", "template_path", uqa_run.template_path);
    from_config(cfg, "uqa", "urgency_pool", uqa_run.urgency_pool);
    int uqa_max_tokens_flag = -1;
    CLI::App* cmd_uqa_run = cmd_uqa->add_subcommand("run", "answer items in both modes and score");
    cmd_uqa_run->add_option("--data", uqa_run.datasets, "dataset spec tag=path (repeatable)");
    cmd_uqa_run->add_option("--replications", uqa_run.replications, "replications per mode");
    cmd_uqa_run->add_option("--seed", uqa_run.seed, "root seed");
    cmd_uqa_run->add_option("--model", uqa_run.model_id, "model id");
    cmd_uqa_run->add_option("--temperature", uqa_run.temperature, "sampling temperature");
    cmd_uqa_run->add_option("--max-output-tokens", uqa_max_tokens_flag, "completion token cap");
    cmd_uqa_run->add_option("--template", uqa_run.template_path,
                            "file overriding the instruction header");
    cmd_uqa_run->add_option("--from-results", uqa_run.from_results,
                            "re-score an existing results JSONL instead of querying");
    cmd_uqa_run->add_option("--out", uqa_run.out_dir, "output directory");
    add_gateway_flags(cmd_uqa_run, uqa_run.gateway);
    add_counter_flags(cmd_uqa_run, uqa_run.counter);

    // report
    cmds::ReportArgs report;
    CLI::App* cmd_report = app.add_subcommand("report", "summarize an episodes log");
    cmd_report->add_option("--episodes", report.episodes_path, "episodes JSONL")->required();
    cmd_report->add_option("--buckets", report.t_buckets, "progress buckets for ACC_t");
    cmd_report->add_flag("--audit", report.audit, "include the reasoning audit");
    cmd_report->add_option("--csv", report.csv_path, "also write a CSV table");
    cmd_report->add_option("--out", report.out_path, "also write a JSON summary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_bombrush) {
            if (v_out_flag > 0) bombrush.v_out = v_out_flag;
            if (max_tokens_flag > 0) bombrush.max_output_tokens = max_tokens_flag;
            return cmds::cmd_bombrush(bombrush, std::cout);
        }
        if (*cmd_calibrate) return cmds::cmd_calibrate(calibrate, std::cout);
        if (*cmd_ddj_build) return cmds::cmd_ddj_build(ddj_build, std::cout);
        if (*cmd_ddj_run) return cmds::cmd_ddj_run(ddj_run, std::cout);
        if (*cmd_ddj_attr) return cmds::cmd_ddj_attribute(ddj_attr, std::cout);
        if (*cmd_uqa_run) {
            if (uqa_max_tokens_flag > 0) uqa_run.max_output_tokens = uqa_max_tokens_flag;
            return cmds::cmd_uqa_run(uqa_run, std::cout);
        }
        if (*cmd_report) return cmds::cmd_report(report, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
