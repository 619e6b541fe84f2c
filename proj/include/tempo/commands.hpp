#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tempo/chronometry.hpp"
#include "tempo/common.hpp"
#include "tempo/gateway.hpp"

namespace tempo::commands {

inline constexpr const char* kVersion = "0.1.0";

// Append-only run ledger: every command writes one entry referencing all of
// its artifacts, so any report can be traced back to config and seed.
struct RunManifest {
    std::string run_id; // deterministic hash of (experiment, config, seed)
    std::string experiment;
    Json config;
    std::uint64_t seed = 0;
    std::string code_version = kVersion;
    int schema_version = 1;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> artifacts;
};

std::string make_run_id(const std::string& experiment, const Json& config, std::uint64_t seed);
void append_manifest(const std::string& path, const RunManifest& manifest);

struct GatewaySetup {
    std::string backend = "mock"; // mock | judge-length | judge-time | http
    std::string endpoint;
    std::string api_key_env = "TEMPO_API_KEY";
    int timeout_seconds = 60;
    std::string record_path; // non-empty -> Record mode
    std::string replay_path; // non-empty -> Replay mode
    int max_attempts = 5;
    int max_in_flight = 4;
    int per_minute = 0;
};

std::unique_ptr<gateway::Gateway> make_gateway(const GatewaySetup& setup);

struct CounterSetup {
    std::string kind = "approx"; // approx | bpe
    std::string merges_path;
    std::string model_merges_path; // optional second accounting for uqa
};

chronometry::CounterPtr make_counter(const CounterSetup& setup);

struct BombrushArgs {
    std::string setting = "s1";
    std::string agent = "bfs-oracle"; // bfs-oracle | greedy-signal | random | stay | llm
    int runs = 100;
    std::uint64_t seed = 7;
    std::optional<double> v_out;
    int reasoning_tokens = 0; // pad scripted agents to a fixed token charge
    std::string context_policy = "full-history";
    std::string model_id = "mock";
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
    bool reprompt_on_parse_failure = false;
    int jobs = 1;
    int t_buckets = 15;
    std::string out_dir = "out/bombrush";
    GatewaySetup gateway;
    CounterSetup counter;
};

int cmd_bombrush(const BombrushArgs& args, std::ostream& log);

struct CalibrateArgs {
    std::string agent = "bfs-oracle";
    int runs = 100;
    std::uint64_t seed = 7;
    int reasoning_tokens = 0;
    int horizon = 30;
    double budget_seconds = 300.0;
    std::string model_id = "mock";
    double temperature = 0.0;
    std::string context_policy = "full-history";
    int jobs = 1;
    std::string out_dir = "out/calibrate";
    GatewaySetup gateway;
    CounterSetup counter;
};

int cmd_calibrate(const CalibrateArgs& args, std::ostream& log);

struct DdjBuildArgs {
    std::string conversations;
    std::string settings = "all"; // "all" or comma-separated setting names
    int pairs = 300;
    std::uint64_t seed = 1;
    double min_ratio = 1.5;
    std::vector<std::string> allowlist;
    std::string out_dir = "out/ddj";
    CounterSetup counter;
};

int cmd_ddj_build(const DdjBuildArgs& args, std::ostream& log);

struct DdjRunArgs {
    std::string cases_path;
    int replications = 5;
    std::uint64_t seed = 1;
    std::string model_id = "mock";
    double temperature = 0.0;
    std::string out_dir = "out/ddj";
    GatewaySetup gateway;
};

int cmd_ddj_run(const DdjRunArgs& args, std::ostream& log);

struct DdjAttributeArgs {
    std::string judgments_path;
    std::string rules = "offline"; // offline | llm
    std::string model_id = "mock";
    std::string out_dir = "out/ddj";
    GatewaySetup gateway;
};

int cmd_ddj_attribute(const DdjAttributeArgs& args, std::ostream& log);

struct UqaRunArgs {
    std::vector<std::string> datasets; // "tag=path"
    std::string template_path;         // optional instruction-header override
    std::vector<std::string> urgency_pool; // empty -> built-in pool
    int replications = 5;
    std::uint64_t seed = 1;
    std::string model_id = "mock";
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
    std::string from_results; // re-score an existing results file instead of querying
    std::string out_dir = "out/uqa";
    GatewaySetup gateway;
    CounterSetup counter;
};

int cmd_uqa_run(const UqaRunArgs& args, std::ostream& log);

struct ReportArgs {
    std::string episodes_path;
    int t_buckets = 15;
    bool audit = false;
    std::string csv_path;
    std::string out_path; // optional JSON summary destination
};

int cmd_report(const ReportArgs& args, std::ostream& log);

} // namespace tempo::commands
