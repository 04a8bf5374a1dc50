#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace irtime {

// ISO-8601 calendar date (YYYY-MM-DD).
struct Date {
    int year = 1970;
    unsigned month = 1; // 1..12
    unsigned day = 1;   // 1..31

    auto operator<=>(const Date&) const = default;
};

// Throws ValidationError on anything that is not a valid YYYY-MM-DD date.
Date parse_date(std::string_view iso);

std::string format_date(const Date& d);

// Days since 1970-01-01.
std::int64_t days_since_epoch(const Date& d);

Date date_from_days(std::int64_t days);

// Calendar-month addition; day-of-month clamps to the target month's length
// (2024-01-31 + 1 month = 2024-02-29).
Date add_months(const Date& d, int months);

} // namespace irtime
