#include "irtime/dates.hpp"

#include <cstdio>

#include "irtime/common.hpp"

namespace irtime {

namespace {

std::chrono::year_month_day to_ymd(const Date& d) {
    return std::chrono::year_month_day{std::chrono::year{d.year},
                                       std::chrono::month{d.month},
                                       std::chrono::day{d.day}};
}

Date from_ymd(const std::chrono::year_month_day& ymd) {
    return Date{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

} // namespace

Date parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
        throw ValidationError("invalid date '" + std::string(iso) + "': expected YYYY-MM-DD");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (iso[i] < '0' || iso[i] > '9')
            throw ValidationError("invalid date '" + std::string(iso) + "': expected YYYY-MM-DD");
    auto num = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (iso[i] - '0');
        return v;
    };
    Date d{num(0, 4), unsigned(num(5, 2)), unsigned(num(8, 2))};
    if (!to_ymd(d).ok())
        throw ValidationError("invalid date '" + std::string(iso) + "': no such calendar day");
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

std::int64_t days_since_epoch(const Date& d) {
    using namespace std::chrono;
    return sys_days{to_ymd(d)}.time_since_epoch().count();
}

Date date_from_days(std::int64_t days) {
    using namespace std::chrono;
    return from_ymd(year_month_day{sys_days{std::chrono::days{days}}});
}

Date add_months(const Date& d, int months) {
    using namespace std::chrono;
    year_month_day ymd = to_ymd(d) + std::chrono::months{months};
    if (!ymd.ok()) ymd = ymd.year() / ymd.month() / std::chrono::last;
    return from_ymd(ymd);
}

} // namespace irtime
