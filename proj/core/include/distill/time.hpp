#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace distill {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

/// ISO-8601 instant with optional fraction and offset ("Z", "+0000", "+02:00");
/// everything is normalized to UTC. A bare number is read as epoch seconds.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SS.ffffffZ"
std::string format_timestamp(Timestamp ts);

}  // namespace distill
