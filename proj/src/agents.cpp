#include "tempo/agents.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "tempo/pathfind.hpp"

namespace tempo::agents {

namespace {

constexpr grid::Direction kTieOrder[] = {grid::Direction::North, grid::Direction::East,
                                         grid::Direction::South, grid::Direction::West};

bool cell_open(const Observation& obs, grid::Position p) {
    if (p.row < 0 || p.row >= obs.map_size || p.col < 0 || p.col >= obs.map_size) return false;
    return std::find(obs.walls.begin(), obs.walls.end(), p) == obs.walls.end();
}

AgentAction first_open_move(const Observation& obs) {
    for (grid::Direction d : kTieOrder)
        if (cell_open(obs, grid::step_towards(obs.agent, d))) return AgentAction::move(d);
    return AgentAction::stay_fallback();
}

class BfsOptimalAgent final : public Agent {
public:
    std::string name() const override { return "bfs-oracle"; }

    void begin_episode(const grid::GridMap& map) override {
        oracle_.emplace(map);
        target_ = map.target_start;
    }

    AgentAction act(const Observation& obs) override {
        if (!oracle_) throw AgentFailure("bfs-oracle used without begin_episode");
        auto here = oracle_->dist(obs.agent, target_);
        if (!here) return first_open_move(obs);
        for (grid::Direction d : kTieOrder) {
            grid::Position next = grid::step_towards(obs.agent, d);
            if (!oracle_->map().open(next)) continue;
            auto dist = oracle_->dist(next, target_);
            if (dist && *dist + 1 == *here) return AgentAction::move(d);
        }
        return first_open_move(obs);
    }

private:
    std::optional<analytics::PathOracle> oracle_;
    grid::Position target_;
};

class GreedySignalAgent final : public Agent {
public:
    explicit GreedySignalAgent(int redetect_every) : redetect_every_(redetect_every) {}

    std::string name() const override { return "greedy-signal"; }

    void begin_episode(const grid::GridMap&) override { anchor_.reset(); }

    AgentAction act(const Observation& obs) override {
        if (obs.signal)
            anchor_ = Anchor{obs.agent, *obs.signal, obs.step_index};

        if (!anchor_)
            return obs.allow_detect ? AgentAction::detect() : first_open_move(obs);
        if (obs.allow_detect && obs.step_index - anchor_->taken_at >= redetect_every_)
            return AgentAction::detect();

        grid::Position goal = estimate_target(*anchor_);
        if (goal == obs.agent)
            return obs.allow_detect ? AgentAction::detect() : first_open_move(obs);

        grid::Signal towards = grid::emit_signal(obs.agent, goal);
        for (grid::Direction d : kTieOrder) {
            if (!component_of(towards.bearing, d)) continue;
            if (cell_open(obs, grid::step_towards(obs.agent, d))) return AgentAction::move(d);
        }
        return first_open_move(obs);
    }

private:
    struct Anchor {
        grid::Position at;
        grid::Signal signal;
        int taken_at = 0;
    };

    // Cardinal bearings pin the cell exactly; diagonals split the distance
    // with the row component taking the ceil half.
    static grid::Position estimate_target(const Anchor& a) {
        const int d = a.signal.distance;
        const int half_r = (d + 1) / 2;
        const int half_c = d / 2;
        grid::Position p = a.at;
        switch (a.signal.bearing) {
        case grid::Bearing::Here: return p;
        case grid::Bearing::N: p.row -= d; break;
        case grid::Bearing::S: p.row += d; break;
        case grid::Bearing::E: p.col += d; break;
        case grid::Bearing::W: p.col -= d; break;
        case grid::Bearing::NE: p.row -= half_r; p.col += half_c; break;
        case grid::Bearing::NW: p.row -= half_r; p.col -= half_c; break;
        case grid::Bearing::SE: p.row += half_r; p.col += half_c; break;
        case grid::Bearing::SW: p.row += half_r; p.col -= half_c; break;
        }
        return p;
    }

    static bool component_of(grid::Bearing b, grid::Direction d) {
        using B = grid::Bearing;
        switch (d) {
        case grid::Direction::North: return b == B::N || b == B::NE || b == B::NW;
        case grid::Direction::South: return b == B::S || b == B::SE || b == B::SW;
        case grid::Direction::East: return b == B::E || b == B::NE || b == B::SE;
        case grid::Direction::West: return b == B::W || b == B::NW || b == B::SW;
        }
        return false;
    }

    int redetect_every_;
    std::optional<Anchor> anchor_;
};

class RandomAgent final : public Agent {
public:
    explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}

    std::string name() const override { return "random"; }

    AgentAction act(const Observation& obs) override {
        const std::uint64_t n = obs.allow_detect ? 5 : 4;
        std::uint64_t pick = rng_.below(n);
        if (pick == 4) return AgentAction::detect();
        return AgentAction::move(grid::kDirections[pick]);
    }

private:
    Rng rng_;
};

class StayAgent final : public Agent {
public:
    std::string name() const override { return "stay"; }
    AgentAction act(const Observation&) override {
        AgentAction a;
        a.kind = AgentAction::Kind::Stay;
        a.parsed_ok = true;
        return a;
    }
};

class FixedReasoningAgent final : public Agent {
public:
    FixedReasoningAgent(AgentPtr inner, std::string reasoning)
        : inner_(std::move(inner)), reasoning_(std::move(reasoning)) {}

    std::string name() const override { return inner_->name() + "+fixed-reasoning"; }
    void begin_episode(const grid::GridMap& map) override { inner_->begin_episode(map); }

    AgentAction act(const Observation& obs) override {
        AgentAction a = inner_->act(obs);
        a.reasoning = reasoning_;
        return a;
    }

private:
    AgentPtr inner_;
    std::string reasoning_;
};

} // namespace

AgentPtr make_bfs_optimal_agent() { return std::make_unique<BfsOptimalAgent>(); }
AgentPtr make_greedy_signal_agent(int redetect_every) {
    return std::make_unique<GreedySignalAgent>(redetect_every);
}
AgentPtr make_random_agent(std::uint64_t seed) { return std::make_unique<RandomAgent>(seed); }
AgentPtr make_stay_agent() { return std::make_unique<StayAgent>(); }
AgentPtr make_fixed_reasoning_agent(AgentPtr inner, std::string reasoning) {
    return std::make_unique<FixedReasoningAgent>(std::move(inner), std::move(reasoning));
}

std::string filler_reasoning(int tokens) {
    std::string out;
    out.reserve(static_cast<std::size_t>(tokens) * 4);
    for (int i = 0; i < tokens; ++i) out += "xxxx";
    return out;
}

namespace {

struct TokenHit {
    std::size_t pos;
    AgentAction action;
};

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Last word-bounded occurrence of any action keyword within `text`.
std::optional<AgentAction> last_token(const std::string& text, bool allow_detect) {
    struct Keyword {
        const char* word;
        AgentAction action;
    };
    const Keyword keywords[] = {
        {"north", AgentAction::move(grid::Direction::North)},
        {"up", AgentAction::move(grid::Direction::North)},
        {"south", AgentAction::move(grid::Direction::South)},
        {"down", AgentAction::move(grid::Direction::South)},
        {"east", AgentAction::move(grid::Direction::East)},
        {"right", AgentAction::move(grid::Direction::East)},
        {"west", AgentAction::move(grid::Direction::West)},
        {"left", AgentAction::move(grid::Direction::West)},
        {"detect", AgentAction::detect()},
    };

    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });

    std::optional<TokenHit> best;
    for (const Keyword& kw : keywords) {
        if (kw.action.kind == AgentAction::Kind::Detect && !allow_detect) continue;
        const std::string word = kw.word;
        std::size_t from = 0;
        while (true) {
            std::size_t at = lower.find(word, from);
            if (at == std::string::npos) break;
            from = at + 1;
            bool left_ok = at == 0 || !word_char(lower[at - 1]);
            std::size_t end = at + word.size();
            bool right_ok = end >= lower.size() || !word_char(lower[end]);
            if (!left_ok || !right_ok) continue;
            if (!best || at > best->pos) best = TokenHit{at, kw.action};
        }
    }
    if (!best) return std::nullopt;
    return best->action;
}

// A line counts as labelled when it carries a word-bounded "action" label
// followed by ':' or '=' anywhere on the line (markdown decoration allowed).
bool labelled_line(const std::string& line) {
    static const std::string label = "action";
    for (std::size_t i = 0; i + label.size() <= line.size(); ++i) {
        if (i > 0 && word_char(line[i - 1])) continue;
        bool match = true;
        for (std::size_t k = 0; k < label.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(line[i + k])) != label[k]) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        std::size_t j = i + label.size();
        while (j < line.size() && (line[j] == ' ' || line[j] == '*')) ++j;
        if (j < line.size() && (line[j] == ':' || line[j] == '=')) return true;
    }
    return false;
}

} // namespace

AgentAction parse_action(const std::string& raw_text, bool allow_detect) {
    // Labelled lines win: scan them last-to-first for a usable token.
    std::size_t start = 0;
    std::vector<std::string> lines;
    while (start <= raw_text.size()) {
        std::size_t nl = raw_text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(raw_text.substr(start));
            break;
        }
        lines.push_back(raw_text.substr(start, nl - start));
        start = nl + 1;
    }
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (!labelled_line(*it)) continue;
        if (auto action = last_token(*it, allow_detect)) {
            action->reasoning = raw_text;
            return *action;
        }
    }
    if (auto action = last_token(raw_text, allow_detect)) {
        action->reasoning = raw_text;
        return *action;
    }
    AgentAction fallback = AgentAction::stay_fallback();
    fallback.reasoning = raw_text;
    return fallback;
}

} // namespace tempo::agents
