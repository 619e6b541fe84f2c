#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tempo {

using Json = nlohmann::json; // object keys serialize sorted -> canonical output

// ---------------------------------------------------------------------------
// Error taxonomy. Each named failure mode gets its own type so callers can
// catch exactly what they can handle.
// ---------------------------------------------------------------------------
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define TEMPO_DEFINE_ERROR(Name)                                               \
    struct Name : Error {                                                      \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {}     \
    }

TEMPO_DEFINE_ERROR(GenerationExhausted);
TEMPO_DEFINE_ERROR(DetectUnavailable);
TEMPO_DEFINE_ERROR(InvalidCalibration);
TEMPO_DEFINE_ERROR(InvalidCell);
TEMPO_DEFINE_ERROR(AgentFailure);
TEMPO_DEFINE_ERROR(GatewayExhausted);
TEMPO_DEFINE_ERROR(AuthError);
TEMPO_DEFINE_ERROR(MalformedResponse);
TEMPO_DEFINE_ERROR(FixtureMiss);
TEMPO_DEFINE_ERROR(TemplateMissing);
TEMPO_DEFINE_ERROR(IngestError);
TEMPO_DEFINE_ERROR(IncompleteRun);
TEMPO_DEFINE_ERROR(EmptyPool);
TEMPO_DEFINE_ERROR(DegenerateSample);
TEMPO_DEFINE_ERROR(ConfigError);

#undef TEMPO_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Hashing (FNV-1a 64) used for seed derivation and request fingerprints.
// ---------------------------------------------------------------------------
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// All randomness in a run flows from one root seed split into named streams,
// so each component is reproducible in isolation.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
    return splitmix64(root ^ fnv1a64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index) {
    return splitmix64(derive_seed(root, stream) ^ splitmix64(index + 0x51ed2701u));
}

// ---------------------------------------------------------------------------
// Rng: mt19937_64 with hand-rolled bounded draws. std::uniform_int_distribution
// is implementation-defined, which would break cross-toolchain reproducibility,
// so we never use it.
// ---------------------------------------------------------------------------
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n). Rejection-free modulo; bias is < 2^-53 for our n.
    std::uint64_t below(std::uint64_t n) {
        return n == 0 ? 0 : engine_() % n;
    }

    int range(int lo, int hi) { // inclusive
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double uniform01() {
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 engine_;
};

} // namespace tempo
