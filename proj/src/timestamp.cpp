#include "mfmine/timestamp.hpp"

#include <cstdio>
#include <stdexcept>

namespace mfmine {

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
    int value = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') {
            throw std::invalid_argument("bad timestamp '" + std::string(text) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    // 2020-01-31T12:34:56Z
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
        text[16] != ':' || text[19] != 'Z') {
        throw std::invalid_argument("bad timestamp '" + std::string(text) + "', expected YYYY-MM-DDTHH:MM:SSZ");
    }
    using namespace std::chrono;
    const year_month_day date{year{parse_digits(text, 0, 4)}, month{static_cast<unsigned>(parse_digits(text, 5, 2))},
                              day{static_cast<unsigned>(parse_digits(text, 8, 2))}};
    if (!date.ok()) {
        throw std::invalid_argument("bad calendar date in '" + std::string(text) + "'");
    }
    const int hh = parse_digits(text, 11, 2);
    const int mm = parse_digits(text, 14, 2);
    const int ss = parse_digits(text, 17, 2);
    if (hh > 23 || mm > 59 || ss > 59) {
        throw std::invalid_argument("bad time of day in '" + std::string(text) + "'");
    }
    return sys_days{date} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day_start = floor<days>(t);
    const year_month_day date{day_start};
    const hh_mm_ss tod{t - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

Timestamp now_utc() {
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace mfmine
