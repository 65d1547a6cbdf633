#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace foehn {

/// UTC instant at one-second resolution. Local time never appears internally.
using Instant = std::chrono::sys_seconds;

inline constexpr std::chrono::seconds kTenMinutes{600};
inline constexpr std::chrono::seconds kHour{3600};
inline constexpr std::chrono::seconds kDay{86400};

struct CivilTime {
    int year = 1970;
    int month = 1;   // 1..12
    int day = 1;     // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
};

Instant make_instant(int year, int month, int day, int hour = 0, int minute = 0, int second = 0);
CivilTime to_civil(Instant t);

/// Accepts `YYYY-MM-DDTHH:MM[:SS][Z]` (a space may replace `T`). Throws
/// ParseError on anything else, including out-of-range calendar fields.
Instant parse_iso(std::string_view text);

/// Always `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso(Instant t);

int days_in_month(int year, int month);
bool is_leap_year(int year);

/// Number of hourly instants in [first, last], both ends inclusive and
/// hour-aligned.
std::int64_t hour_count(Instant first, Instant last);

/// Fractional day of the year, 0 at Jan 1 00:00 UTC.
double day_of_year_fraction(Instant t);

inline std::int64_t to_seconds(Instant t) { return t.time_since_epoch().count(); }
inline Instant from_seconds(std::int64_t s) { return Instant{std::chrono::seconds{s}}; }

inline bool is_aligned(Instant t, std::chrono::seconds step) {
    auto s = to_seconds(t);
    auto k = step.count();
    return ((s % k) + k) % k == 0;
}

} // namespace foehn
