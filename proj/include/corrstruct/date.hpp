#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace corrstruct {

/// Calendar date with day resolution.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    std::chrono::sys_days days() const { return days_; }
    Date operator+(int n) const { return Date(days_ + std::chrono::days(n)); }

    /// YYYY-MM-DD
    std::string iso() const;

    friend auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

/// Parses YYYY-MM-DD (ISO-8601 calendar date). Throws InputError.
Date parse_iso_date(std::string_view text);

/// Same as parse_iso_date but returns false instead of throwing.
bool try_parse_iso_date(std::string_view text, Date& out);

}  // namespace corrstruct
