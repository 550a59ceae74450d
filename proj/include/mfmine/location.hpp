#pragma once

#include <compare>
#include <cstddef>
#include <string>

namespace mfmine {

/// A source line, 1-based, in some version's coordinates.
struct FaultLocation {
    std::string path;
    std::size_t line = 0;

    friend auto operator<=>(const FaultLocation&, const FaultLocation&) = default;
    friend bool operator==(const FaultLocation&, const FaultLocation&) = default;
};

/// `path:line`
std::string to_string(const FaultLocation& loc);

/// Parses `path:line` (splitting at the last ':'). Throws std::invalid_argument.
FaultLocation parse_location(const std::string& text);

/// line >= 1 and a normalized relative path.
bool is_valid(const FaultLocation& loc);

}  // namespace mfmine
