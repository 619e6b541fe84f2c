#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tempo/common.hpp"

namespace tempo::chronometry {

// Output conversion rate: wall-clock seconds per generated token. The slope
// that maps a token count onto elapsed physical time.
struct ConversionRate {
    double v_out = 0.0;
};

ConversionRate make_rate(double v_out); // validates > 0 and finite

class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual const std::string& id() const = 0;
    virtual int count(std::string_view text) const = 0;
};

using CounterPtr = std::shared_ptr<const TokenCounter>;

// Deterministic offline stand-in: ceil(bytes / 4). count("") == 0.
CounterPtr make_approx_counter();

// Byte-pair-encoding counter driven by a merges file: one "LEFT RIGHT" pair
// per line, rank = line order, '#'-prefixed lines skipped. Words are split on
// whitespace, decomposed into UTF-8 code points with a </w> marker fused onto
// the final one, then merged greedily by rank. The token count is the number
// of symbols left over all words.
CounterPtr load_bpe_counter(const std::string& merges_path);

struct ChargeResult {
    double charged_seconds = 0.0;
    int tokens = 0;
    bool detonated = false;
};

// Countdown clock. Charges are applied in full; detonation fires when the
// balance reaches zero or below, after which remaining reports 0.
class TokenClock {
public:
    TokenClock(double budget_seconds, ConversionRate rate, CounterPtr counter);

    ChargeResult charge(std::string_view text);

    double initial_budget() const { return initial_budget_; }
    double remaining() const { return remaining_ < 0.0 ? 0.0 : remaining_; }
    bool detonated() const { return detonated_; }
    const ConversionRate& rate() const { return rate_; }
    const std::string& counter_id() const { return counter_->id(); }
    const TokenCounter& counter() const { return *counter_; }

private:
    double initial_budget_;
    double remaining_;
    ConversionRate rate_;
    CounterPtr counter_;
    bool detonated_ = false;
};

double estimate_wall_time(int tokens, ConversionRate rate);

// v_out = budget / (avg tokens per step x horizon). The horizon defaults to 30
// wherever a caller does not say otherwise; see calibration_references().
ConversionRate calibrate_vout(double avg_tokens_per_step, int horizon_steps,
                              double budget_seconds);

struct CalibrationReport {
    std::string model_id;
    double avg_tokens_per_step = 0.0;
    int horizon = 30;
    double budget_seconds = 300.0;
    double v_out = 0.0;
};

Json to_json(const CalibrationReport& report);

// Published per-model conversion rates alongside the step-token averages they
// were derived from. `computed` is re-derived here; `consistent` flags whether
// it matches the published 3-decimal figure within rounding (rounded or
// truncated). One entry does not reconcile (qwq-32b) and is reported as-is
// rather than silently adjusted.
struct CalibrationReference {
    std::string model_id;
    double avg_tokens_per_step;
    double published_v_out;
    double computed_v_out;
    bool consistent; // published == computed at 3 decimals, either rounding
};

std::vector<CalibrationReference> calibration_references();

} // namespace tempo::chronometry
