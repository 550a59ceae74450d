#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace mfmine {

/// UTC instant at second precision.
using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM:SSZ`. Throws std::invalid_argument otherwise.
Timestamp parse_timestamp(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`; parse_timestamp(format_timestamp(t)) == t.
std::string format_timestamp(Timestamp t);

Timestamp now_utc();

}  // namespace mfmine
