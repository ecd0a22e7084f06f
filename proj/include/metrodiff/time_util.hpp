#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace metrodiff {

// Parses "YYYY-MM-DDTHH:MM:SSZ" to UTC seconds since the Unix epoch.
std::optional<int64_t> parse_iso8601_utc(const std::string& text);

// Inverse of parse_iso8601_utc.
std::string format_iso8601_utc(int64_t epoch_seconds);

}  // namespace metrodiff
