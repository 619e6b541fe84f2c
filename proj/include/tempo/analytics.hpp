#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tempo/episode.hpp"
#include "tempo/pathfind.hpp"

namespace tempo::analytics {

// Outcome-table row over one batch. Percentages cover completed episodes only;
// aborted runs are carried as a separate count.
struct MetricReport {
    int completed = 0;
    int aborted = 0;
    double success_pct = 0.0;
    double oversteps_pct = 0.0;
    double timeout_pct = 0.0;
    double mean_steps = 0.0;
    double mean_tokens_per_step = 0.0;
    std::optional<double> navigation_accuracy_pct; // successful static-target episodes only
    std::optional<double> time_efficiency_pct;     // successful timed episodes only
};

MetricReport compute_metrics(std::span<const episode::EpisodeRecord> completed, int aborted = 0);

// Optimal steps / actual steps, capped at 1. Absent for moving-target settings
// and for anything but a Success.
std::optional<double> navigation_accuracy(const episode::EpisodeRecord& record);

// Remaining budget percentage at arrival. Absent for untimed settings and for
// anything but a Success.
std::optional<double> time_efficiency(const episode::EpisodeRecord& record);

struct BucketAccuracy {
    int t_buckets = 15;
    std::vector<std::optional<double>> acc; // absent for empty buckets
    std::vector<int> counts;

    int total_actions() const;
};

// Per-progress-bucket fraction of actions that strictly shorten the BFS path
// to the target (taken at the position the target held when the action ran).
// Progress is elapsed/total time in timed settings and step/step-limit
// otherwise. Detect turns and voided turns are not scored.
BucketAccuracy stepwise_accuracy(std::span<const episode::EpisodeRecord> records,
                                 int t_buckets = 15);

bool mentions_urgency(std::string_view reasoning);
bool mentions_token_time_tradeoff(std::string_view reasoning);

struct AuditReport {
    int texts = 0;
    double urgency_mention_pct = 0.0;
    double tw_mapping_pct = 0.0;
};

// Keyword-rule audit of reasoning texts: explicit time-pressure mentions and
// explicit token-vs-time trade-off statements.
AuditReport reasoning_audit(const std::vector<std::string>& reasoning_texts);

// Prompt for the model-backed audit path; the reply is one category per line.
std::string audit_classifier_prompt(const std::string& reasoning);

enum class Alternative { Greater, Less };

// One-sided paired t-test on d = x - y. Throws DegenerateSample for n < 2,
// length mismatch, or zero-variance differences.
double paired_ttest(std::span<const double> x, std::span<const double> y, Alternative alternative);

struct TTestResult {
    double t_statistic = 0.0;
    double p_value = 0.0;
    int dof = 0;
};

TTestResult paired_ttest_full(std::span<const double> x, std::span<const double> y,
                              Alternative alternative);

// Regularized incomplete beta and the Student-t CDF built on it, exposed for
// verification against external references.
double incomplete_beta_reg(double a, double b, double x);
double student_t_cdf(double t, double dof);

} // namespace tempo::analytics
