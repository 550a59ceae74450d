#include "mfmine/location.hpp"

#include "mfmine/file_tree.hpp"

#include <charconv>
#include <stdexcept>

namespace mfmine {

std::string to_string(const FaultLocation& loc) {
    return loc.path + ":" + std::to_string(loc.line);
}

FaultLocation parse_location(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw std::invalid_argument("expected path:line, got '" + text + "'");
    }
    FaultLocation loc;
    loc.path = text.substr(0, colon);
    const char* first = text.data() + colon + 1;
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, loc.line);
    if (res.ec != std::errc() || res.ptr != last || loc.line == 0) {
        throw std::invalid_argument("bad line number in '" + text + "'");
    }
    return loc;
}

bool is_valid(const FaultLocation& loc) {
    return loc.line >= 1 && is_normalized_relative(loc.path);
}

}  // namespace mfmine
