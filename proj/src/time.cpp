#include "foehn/time.hpp"

#include "foehn/errors.hpp"

#include <charconv>
#include <cstdio>

namespace foehn {

using namespace std::chrono;

Instant make_instant(int y, int m, int d, int hh, int mm, int ss) {
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

CivilTime to_civil(Instant t) {
    auto dp = floor<days>(t);
    year_month_day ymd{dp};
    hh_mm_ss hms{t - dp};
    return {int(ymd.year()), int(unsigned(ymd.month())), int(unsigned(ymd.day())),
            int(hms.hours().count()), int(hms.minutes().count()), int(hms.seconds().count())};
}

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    auto first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && ptr == first + len;
}

} // namespace

Instant parse_iso(std::string_view text) {
    auto fail = [&] { return ParseError("malformed timestamp '" + std::string(text) + "'"); };
    int y, mo, d, h, mi, se = 0;
    if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':')
        throw fail();
    if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d) ||
        !read_int(text, 11, 2, h) || !read_int(text, 14, 2, mi))
        throw fail();
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!read_int(text, pos + 1, 2, se)) throw fail();
        pos += 3;
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) throw fail();
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || se > 59 || h < 0 || mi < 0 || se < 0) throw fail();
    return make_instant(y, mo, d, h, mi, se);
}

std::string format_iso(Instant t) {
    auto c = to_civil(t);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day, c.hour,
                  c.minute, c.second);
    return buf;
}

bool is_leap_year(int y) { return year{y}.is_leap(); }

int days_in_month(int y, int m) {
    return int(unsigned(year_month_day_last{year{y}, month_day_last{month{static_cast<unsigned>(m)}}}.day()));
}

std::int64_t hour_count(Instant first, Instant last) {
    if (last < first) return 0;
    return (last - first) / kHour + 1;
}

double day_of_year_fraction(Instant t) {
    auto c = to_civil(t);
    auto jan1 = make_instant(c.year, 1, 1);
    return double((t - jan1).count()) / double(kDay.count());
}

} // namespace foehn
