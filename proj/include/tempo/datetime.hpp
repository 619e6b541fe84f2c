#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace tempo::datetime {

// Civil <-> epoch conversion without any timezone or locale dependence.
// Timestamps are displayed and parsed as UTC "YYYY-MM-DD HH:MM:SS".
std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second);
std::string format_utc(std::int64_t epoch_seconds);
std::optional<std::int64_t> parse_utc(const std::string& text);

// ISO-8601 with trailing Z, for manifests.
std::string format_iso8601(std::int64_t epoch_seconds);

} // namespace tempo::datetime
