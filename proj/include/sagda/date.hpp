#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "sagda/error.hpp"

namespace sagda {

/// Proleptic Gregorian calendar date. Stored as civil fields, converted to a
/// day count for arithmetic so that date math never touches time zones.
struct date {
    int32_t year = 1970;
    int32_t month = 1;  // 1..12
    int32_t day = 1;    // 1..31

    auto operator<=>(const date&) const = default;
};

namespace detail {

constexpr bool is_leap(int32_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

constexpr int32_t days_in_month(int32_t y, int32_t m) {
    constexpr int32_t lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

// Days since 1970-01-01 (Howard Hinnant's civil-from-days algorithm family).
constexpr int64_t days_from_civil(int32_t y, int32_t m, int32_t d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

constexpr date civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    const int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const int64_t m = mp + (mp < 10 ? 3 : -9);
    return date{static_cast<int32_t>(y + (m <= 2)), static_cast<int32_t>(m),
                static_cast<int32_t>(d)};
}

}  // namespace detail

inline bool valid_date(const date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
           d.day <= detail::days_in_month(d.year, d.month);
}

inline int64_t to_epoch_days(const date& d) {
    return detail::days_from_civil(d.year, d.month, d.day);
}

inline date from_epoch_days(int64_t days) { return detail::civil_from_days(days); }

inline date add_days(const date& d, int64_t n) { return from_epoch_days(to_epoch_days(d) + n); }

inline int64_t days_between(const date& a, const date& b) {
    return to_epoch_days(b) - to_epoch_days(a);
}

inline std::string to_iso(const date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

inline std::optional<date> try_parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [](std::string_view t) -> std::optional<int32_t> {
        int32_t v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size()) return std::nullopt;
        return v;
    };
    auto y = num(s.substr(0, 4));
    auto m = num(s.substr(5, 2));
    auto d = num(s.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    date out{*y, *m, *d};
    if (!valid_date(out)) return std::nullopt;
    return out;
}

inline date parse_date(std::string_view s) {
    auto d = try_parse_date(s);
    if (!d) fail(errc::type_coercion, "not an ISO-8601 date: '" + std::string(s) + "'");
    return *d;
}

}  // namespace sagda
