#include "corrstruct/date.hpp"

#include "corrstruct/error.hpp"

#include <charconv>
#include <cstdio>

namespace corrstruct {

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw InputError("invalid calendar date");
    }
    days_ = std::chrono::sys_days{ymd};
}

std::string Date::iso() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

namespace {

bool parse_fixed(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char ch : text) {
        if (ch < '0' || ch > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

bool try_parse_iso_date(std::string_view text, Date& out) {
    // Accept a trailing time component ("2012-03-01T00:00:00") by ignoring it.
    if (auto t = text.find_first_of("T "); t != std::string_view::npos) {
        text = text.substr(0, t);
    }
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    int y = 0, m = 0, d = 0;
    if (!parse_fixed(text.substr(0, 4), y) || !parse_fixed(text.substr(5, 2), m) ||
        !parse_fixed(text.substr(8, 2), d)) {
        return false;
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return false;
    out = Date(std::chrono::sys_days{ymd});
    return true;
}

Date parse_iso_date(std::string_view text) {
    Date out;
    if (!try_parse_iso_date(text, out)) {
        throw InputError("unparseable date '" + std::string(text) + "'");
    }
    return out;
}

}  // namespace corrstruct
