#include "tempo/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace tempo::analytics {

MetricReport compute_metrics(std::span<const episode::EpisodeRecord> completed, int aborted) {
    MetricReport report;
    report.completed = static_cast<int>(completed.size());
    report.aborted = aborted;
    if (completed.empty()) return report;

    int success = 0, oversteps = 0, timeout = 0;
    long long steps = 0, tokens = 0;
    double nav_sum = 0.0;
    int nav_n = 0;
    double eff_sum = 0.0;
    int eff_n = 0;
    for (const auto& record : completed) {
        switch (*record.outcome) {
        case episode::Outcome::Success: ++success; break;
        case episode::Outcome::OverSteps: ++oversteps; break;
        case episode::Outcome::TimeOut: ++timeout; break;
        }
        steps += record.steps_taken;
        tokens += record.total_tokens();
        if (auto nav = navigation_accuracy(record)) {
            nav_sum += *nav;
            ++nav_n;
        }
        if (auto eff = time_efficiency(record)) {
            eff_sum += *eff;
            ++eff_n;
        }
    }
    const double n = static_cast<double>(report.completed);
    report.success_pct = 100.0 * success / n;
    report.oversteps_pct = 100.0 * oversteps / n;
    report.timeout_pct = 100.0 * timeout / n;
    report.mean_steps = static_cast<double>(steps) / n;
    report.mean_tokens_per_step =
        steps > 0 ? static_cast<double>(tokens) / static_cast<double>(steps) : 0.0;
    if (nav_n > 0) report.navigation_accuracy_pct = 100.0 * nav_sum / nav_n;
    if (eff_n > 0) report.time_efficiency_pct = eff_sum / eff_n;
    return report;
}

std::optional<double> navigation_accuracy(const episode::EpisodeRecord& record) {
    if (record.aborted || record.outcome != episode::Outcome::Success) return std::nullopt;
    if (record.setting.moving_target()) return std::nullopt;
    auto optimal = bfs_dist(record.map, record.map.agent_start, record.map.target_start);
    if (!optimal || record.steps_taken <= 0) return std::nullopt;
    return std::min(1.0, static_cast<double>(*optimal) / record.steps_taken);
}

std::optional<double> time_efficiency(const episode::EpisodeRecord& record) {
    if (record.aborted || record.outcome != episode::Outcome::Success) return std::nullopt;
    if (!record.setting.timed() || !record.remaining_at_end) return std::nullopt;
    return *record.remaining_at_end / *record.setting.budget_seconds * 100.0;
}

int BucketAccuracy::total_actions() const {
    int total = 0;
    for (int c : counts) total += c;
    return total;
}

BucketAccuracy stepwise_accuracy(std::span<const episode::EpisodeRecord> records, int t_buckets) {
    BucketAccuracy out;
    out.t_buckets = t_buckets;
    out.counts.assign(static_cast<std::size_t>(t_buckets), 0);
    std::vector<int> hits(static_cast<std::size_t>(t_buckets), 0);

    for (const auto& record : records) {
        if (record.aborted) continue;
        PathOracle oracle(record.map);
        for (const auto& step : record.steps) {
            if (step.voided) continue;
            if (step.action.kind == agents::AgentAction::Kind::Detect) continue;

            double progress;
            if (record.setting.timed()) {
                const double budget = *record.setting.budget_seconds;
                const double remaining = step.remaining_after.value_or(budget);
                progress = (budget - remaining) / budget;
            } else {
                progress = static_cast<double>(step.observation.step_index) /
                           record.setting.step_limit;
            }
            int bucket = static_cast<int>(progress * t_buckets);
            bucket = std::clamp(bucket, 0, t_buckets - 1);

            auto before = oracle.dist(step.agent_before, step.target_before);
            auto after = oracle.dist(step.agent_after, step.target_before);
            const bool closer = before && after && *after < *before;
            ++out.counts[static_cast<std::size_t>(bucket)];
            if (closer) ++hits[static_cast<std::size_t>(bucket)];
        }
    }

    out.acc.assign(static_cast<std::size_t>(t_buckets), std::nullopt);
    for (int b = 0; b < t_buckets; ++b)
        if (out.counts[static_cast<std::size_t>(b)] > 0)
            out.acc[static_cast<std::size_t>(b)] =
                static_cast<double>(hits[static_cast<std::size_t>(b)]) /
                out.counts[static_cast<std::size_t>(b)];
    return out;
}

// ---------------------------------------------------------------------------
// Reasoning audit
// ---------------------------------------------------------------------------

namespace {

std::string lowered(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool contains_any(const std::string& haystack, std::initializer_list<const char*> needles) {
    for (const char* needle : needles)
        if (haystack.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

bool mentions_urgency(std::string_view reasoning) {
    const std::string text = lowered(reasoning);
    return contains_any(text, {"urgent", "urgency", "hurry", "time pressure",
                               "time is limited", "time is short", "running out of time",
                               "running low on time", "out of time", "no time",
                               "little time", "low on time", "seconds remaining",
                               "seconds left", "almost no time", "act fast",
                               "before it explodes", "time is ticking"});
}

bool mentions_token_time_tradeoff(std::string_view reasoning) {
    const std::string text = lowered(reasoning);
    if (contains_any(text, {"reasoning consumes time", "tokens consume time",
                            "token consumes time", "thinking costs time",
                            "reasoning costs time", "tokens cost time"}))
        return true;
    const bool length_term =
        contains_any(text, {"concise", "brief", "brevity", "shorter", "short reply",
                            "short response", "short reasoning", "fewer tokens", "token",
                            "verbose", "verbosity", "reasoning length", "length of my reasoning",
                            "keep my reasoning", "less reasoning"});
    const bool time_term =
        contains_any(text, {"time", "seconds", "clock", "countdown", "deadline"});
    return length_term && time_term;
}

AuditReport reasoning_audit(const std::vector<std::string>& reasoning_texts) {
    AuditReport report;
    report.texts = static_cast<int>(reasoning_texts.size());
    if (reasoning_texts.empty()) return report;
    int urgency = 0, mapping = 0;
    for (const std::string& text : reasoning_texts) {
        if (mentions_urgency(text)) ++urgency;
        if (mentions_token_time_tradeoff(text)) ++mapping;
    }
    report.urgency_mention_pct = 100.0 * urgency / report.texts;
    report.tw_mapping_pct = 100.0 * mapping / report.texts;
    return report;
}

std::string audit_classifier_prompt(const std::string& reasoning) {
    return "Read the agent reasoning below and answer two yes/no questions.\n"
           "1. Does it explicitly acknowledge time pressure or urgency?\n"
           "2. Does it explicitly connect the length of its own output (tokens, verbosity, "
           "conciseness) with time passing or being saved?\n"
           "Reply with exactly two lines: \"urgency: yes|no\" and \"mapping: yes|no\".\n\n"
           "Reasoning:\n" +
           reasoning;
}

// ---------------------------------------------------------------------------
// Paired t-test
// ---------------------------------------------------------------------------

namespace {

// Continued-fraction evaluation of the regularized incomplete beta (Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = dof / (dof + t * t);
    const double tail = 0.5 * incomplete_beta_reg(dof / 2.0, 0.5, x);
    return t > 0 ? 1.0 - tail : tail;
}

TTestResult paired_ttest_full(std::span<const double> x, std::span<const double> y,
                              Alternative alternative) {
    if (x.size() != y.size())
        throw DegenerateSample("replication vectors differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw DegenerateSample("need at least two paired observations");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i] - y[i];
    mean /= static_cast<double>(n);

    double ss = 0.0;
    bool any_nonzero = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        if (d != 0.0) any_nonzero = true;
        ss += (d - mean) * (d - mean);
    }
    if (!any_nonzero) throw DegenerateSample("all paired differences are zero");
    const double var = ss / static_cast<double>(n - 1); // sample variance
    if (var == 0.0) throw DegenerateSample("paired differences have zero variance");

    TTestResult result;
    result.dof = static_cast<int>(n) - 1;
    result.t_statistic = mean / std::sqrt(var / static_cast<double>(n));
    const double cdf = student_t_cdf(result.t_statistic, static_cast<double>(result.dof));
    result.p_value = alternative == Alternative::Greater ? 1.0 - cdf : cdf;
    return result;
}

double paired_ttest(std::span<const double> x, std::span<const double> y,
                    Alternative alternative) {
    return paired_ttest_full(x, y, alternative).p_value;
}

} // namespace tempo::analytics
