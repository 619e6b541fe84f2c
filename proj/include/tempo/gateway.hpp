#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tempo/common.hpp"

namespace tempo::gateway {

struct ChatMessage {
    std::string role; // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<int> max_output_tokens;
    std::optional<std::uint64_t> seed_hint;
};

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    std::optional<Usage> reported_usage;
    int latency_ms = 0;
    int attempt_count = 1;
};

// Canonical serialization: nlohmann objects emit sorted keys, and message
// order is preserved inside the array, so the hash is stable.
Json to_json(const ChatRequest& req);
ChatRequest request_from_json(const Json& j);
Json to_json(const ChatResponse& resp);
ChatResponse response_from_json(const Json& j);
std::string request_hash(const ChatRequest& req);

// Transport-level failure worth retrying (5xx, timeouts, connection resets).
struct TransientBackendError : Error {
    using Error::Error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete_once(const ChatRequest& req) = 0;
};

using BackendPtr = std::shared_ptr<ChatBackend>;

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_seconds = 1.0;
    double factor = 2.0;
};

struct GatewayLimits {
    int max_in_flight = 4;
    int per_minute = 0; // 0 = unlimited
};

enum class Mode { Live, Record, Replay };

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Shared across concurrent episodes. Record persists request-hash -> response
// pairs to a JSONL fixture; Replay serves from the fixture only and throws
// FixtureMiss on unknown requests.
class Gateway {
public:
    Gateway(BackendPtr backend, Mode mode, std::string fixture_path = "",
            RetryPolicy retry = {}, GatewayLimits limits = {}, Sleeper sleeper = nullptr);

    ChatResponse complete(const ChatRequest& req);

    Mode mode() const { return mode_; }

private:
    ChatResponse complete_with_retry(const ChatRequest& req);

    BackendPtr backend_;
    Mode mode_;
    std::string fixture_path_;
    RetryPolicy retry_;
    GatewayLimits limits_;
    Sleeper sleeper_;

    std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
    std::vector<std::chrono::steady_clock::time_point> recent_;
    std::unordered_map<std::string, ChatResponse> cache_;
};

struct HttpConfig {
    std::string endpoint; // e.g. http://localhost:8000/v1
    std::string api_key_env = "TEMPO_API_KEY";
    int timeout_seconds = 60;
};

// OpenAI-compatible chat completions over HTTP JSON.
BackendPtr make_http_backend(const HttpConfig& config);

// Deterministic offline stand-ins. "mock" inspects the prompt and produces a
// plausible reply for each pipeline (navigation, duration judging, QA);
// "judge-length" answers duration questions by comparing response lengths;
// "judge-time" answers them from the temporal logs.
BackendPtr make_mock_backend(const std::string& kind = "mock");

// Test helper: fails with TransientBackendError `failures` times, then
// delegates to `inner`.
BackendPtr make_flaky_backend(BackendPtr inner, int failures);

// Test helper: always throws TransientBackendError.
BackendPtr make_unavailable_backend();

} // namespace tempo::gateway
