#include "foehn/aggregate.hpp"

#include "foehn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

namespace foehn {

HourLabel hourly_label(std::span<const double> posteriors) {
    if (posteriors.size() > 6)
        throw ContractError("an hour has at most 6 ten-minute slots, got " + std::to_string(posteriors.size()));
    int available = 0, high = 0;
    for (double p : posteriors) {
        if (is_missing(p)) continue;
        ++available;
        if (p >= 0.5) ++high;
    }
    if (available < 4) return HourLabel::missing;
    return 2 * high >= available ? HourLabel::foehn : HourLabel::no_foehn;
}

namespace {

Instant ceil_hour(Instant t) {
    auto s = to_seconds(t);
    auto h = kHour.count();
    auto r = ((s % h) + h) % h;
    return from_seconds(r == 0 ? s : s + (h - r));
}

Instant floor_hour(Instant t) {
    auto s = to_seconds(t);
    auto h = kHour.count();
    return from_seconds(s - (((s % h) + h) % h));
}

Instant floor_day(Instant t) { return std::chrono::floor<std::chrono::days>(t); }

} // namespace

HourlyLabelSeries hourly_labels(const PosteriorSeries& post) {
    HourlyLabelSeries out;
    if (post.size() == 0) return out;
    Instant first_slot = post.start;
    Instant last_slot = post.time(post.size() - 1);
    // First hour whose window (T-50, T] touches the series.
    Instant first = ceil_hour(first_slot);
    Instant last = floor_hour(last_slot + kHour - kTenMinutes);
    if (last < first) return out;
    out.start = first;
    auto n = static_cast<std::size_t>(hour_count(first, last));
    out.label.resize(n, HourLabel::missing);
    for (std::size_t h = 0; h < n; ++h) {
        Instant T = out.time(h);
        std::array<double, 6> window;
        for (int k = 0; k < 6; ++k) {
            Instant slot = T - kTenMinutes * (5 - k);
            double v = kMissing;
            if (slot >= first_slot && slot <= last_slot)
                v = post.p[static_cast<std::size_t>((slot - first_slot) / kTenMinutes)];
            window[static_cast<std::size_t>(k)] = v;
        }
        out.label[h] = hourly_label(window);
    }
    return out;
}

HourlySeries as_probabilities(const HourlyLabelSeries& labels) {
    HourlySeries out;
    out.start = labels.start;
    out.p.reserve(labels.size());
    for (auto l : labels.label)
        out.p.push_back(l == HourLabel::missing ? kMissing : (l == HourLabel::foehn ? 1.0 : 0.0));
    return out;
}

AggregateSeries daily_max(const HourlySeries& hourly) {
    AggregateSeries out;
    out.period = Period::daily_max;
    if (hourly.size() == 0) return out;
    if (!is_aligned(hourly.start, kHour)) throw ContractError("hourly series must start on a full hour");
    // Hour T belongs to the day of T - 1h.
    Instant first_day = floor_day(hourly.start - kHour);
    Instant last_day = floor_day(hourly.time(hourly.size() - 1) - kHour);
    auto ndays = static_cast<std::size_t>((last_day - first_day) / kDay) + 1;
    out.period_start.resize(ndays);
    out.value.assign(ndays, kMissing);
    out.availability.assign(ndays, 0.0);
    std::vector<int> counts(ndays, 0);
    for (std::size_t d = 0; d < ndays; ++d) out.period_start[d] = first_day + kDay * static_cast<std::int64_t>(d);
    for (std::size_t i = 0; i < hourly.size(); ++i) {
        double v = hourly.p[i];
        if (is_missing(v)) continue;
        auto d = static_cast<std::size_t>((floor_day(hourly.time(i) - kHour) - first_day) / kDay);
        ++counts[d];
        out.value[d] = is_missing(out.value[d]) ? v : std::max(out.value[d], v);
    }
    for (std::size_t d = 0; d < ndays; ++d) out.availability[d] = counts[d] / 24.0;
    return out;
}

AggregateSeries periodic_mean(const AggregateSeries& daily, PeriodUnit unit, double min_availability) {
    AggregateSeries out;
    out.period = unit == PeriodUnit::month ? Period::monthly_mean_of_daily_max : Period::annual_mean_of_daily_max;
    struct Acc {
        double sum = 0.0;
        int n = 0;
        double avail = 0.0;
    };
    std::map<Instant, Acc> groups;
    for (std::size_t d = 0; d < daily.size(); ++d) {
        auto c = to_civil(daily.period_start[d]);
        Instant key = unit == PeriodUnit::month ? make_instant(c.year, c.month, 1) : make_instant(c.year, 1, 1);
        auto& g = groups[key];
        g.avail += daily.availability[d];
        if (!is_missing(daily.value[d])) {
            g.sum += daily.value[d];
            ++g.n;
        }
    }
    for (const auto& [key, g] : groups) {
        auto c = to_civil(key);
        int days = unit == PeriodUnit::month ? days_in_month(c.year, c.month) : (is_leap_year(c.year) ? 366 : 365);
        double avail = g.avail / double(days);
        out.period_start.push_back(key);
        out.availability.push_back(avail);
        bool ok = g.n > 0 && avail >= min_availability;
        out.value.push_back(ok ? g.sum / double(g.n) : kMissing);
    }
    return out;
}

std::vector<HovmollerMatrix> hovmoller(const HourlySeries& hourly) {
    std::map<int, HovmollerMatrix> acc;
    for (std::size_t i = 0; i < hourly.size(); ++i) {
        double v = hourly.p[i];
        if (is_missing(v)) continue;
        auto c = to_civil(hourly.time(i));
        int decade = c.year - ((c.year % 10) + 10) % 10;
        auto& m = acc[decade];
        m.decade = decade;
        auto mi = static_cast<std::size_t>(c.month - 1);
        auto hi = static_cast<std::size_t>(c.hour);
        m.mean[mi][hi] += v;
        ++m.count[mi][hi];
    }
    std::vector<HovmollerMatrix> out;
    for (auto& [decade, m] : acc) {
        for (std::size_t mi = 0; mi < 12; ++mi)
            for (std::size_t hi = 0; hi < 24; ++hi)
                m.mean[mi][hi] = m.count[mi][hi] ? m.mean[mi][hi] / double(m.count[mi][hi]) : kMissing;
        out.push_back(m);
    }
    return out;
}

void write_aggregate_csv(std::ostream& out, const AggregateSeries& s) {
    out << "period_start,value,availability\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_iso(s.period_start[i]) << ',' << format_number(s.value[i]) << ','
            << format_number(s.availability[i]) << '\n';
}

void write_hovmoller_csv(std::ostream& out, const HovmollerMatrix& m) {
    out << "month";
    for (int h = 0; h < 24; ++h) out << ",h" << (h < 10 ? "0" : "") << h;
    out << '\n';
    for (std::size_t mi = 0; mi < 12; ++mi) {
        out << mi + 1;
        for (std::size_t hi = 0; hi < 24; ++hi) out << ',' << format_number(m.mean[mi][hi]);
        out << '\n';
    }
}

void write_hourly_csv(std::ostream& out, const HourlySeries& s) {
    out << "timestamp,p\n";
    for (std::size_t i = 0; i < s.size(); ++i) out << format_iso(s.time(i)) << ',' << format_number(s.p[i]) << '\n';
}

namespace {

// Reads a two-column hourly CSV and places the rows on a uniform hourly grid.
template <class Value, class Parse>
std::pair<Instant, std::vector<Value>> read_hourly_table(const std::filesystem::path& path,
                                                         const std::string& header, Value missing, Parse parse) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw ParseError("expected header '" + header + "' in " + path.string(), 1);
    std::vector<std::pair<Instant, Value>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) throw ParseError("expected 2 fields", lineno);
        Instant t;
        try {
            t = parse_iso(f[0]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        if (!is_aligned(t, kHour)) throw ParseError("timestamp not on a full hour", lineno);
        if (!rows.empty() && t <= rows.back().first)
            throw IntegrityError("line " + std::to_string(lineno) + ": timestamps must be strictly increasing");
        rows.emplace_back(t, parse(f[1], lineno));
    }
    if (rows.empty()) return {Instant{}, {}};
    std::vector<Value> values(static_cast<std::size_t>(hour_count(rows.front().first, rows.back().first)), missing);
    for (const auto& [t, v] : rows) values[static_cast<std::size_t>((t - rows.front().first) / kHour)] = v;
    return {rows.front().first, std::move(values)};
}

} // namespace

HourlySeries read_hourly_csv(const std::filesystem::path& path) {
    auto [start, values] = read_hourly_table<double>(path, "timestamp,p", kMissing, [](std::string_view f, std::size_t l) {
        double v = parse_number(f, l);
        if (!is_missing(v) && !(v >= 0.0 && v <= 1.0)) throw ValueError("line " + std::to_string(l) + ": probability outside [0, 1]");
        return v;
    });
    return {start, std::move(values)};
}

void write_labels_csv(std::ostream& out, const HourlyLabelSeries& s) {
    out << "timestamp,label\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_iso(s.time(i)) << ',';
        if (s.label[i] != HourLabel::missing) out << (s.label[i] == HourLabel::foehn ? 1 : 0);
        out << '\n';
    }
}

HourlyLabelSeries read_labels_csv(const std::filesystem::path& path) {
    auto [start, values] =
        read_hourly_table<HourLabel>(path, "timestamp,label", HourLabel::missing, [](std::string_view f, std::size_t l) {
            if (f.empty()) return HourLabel::missing;
            if (f == "1") return HourLabel::foehn;
            if (f == "0") return HourLabel::no_foehn;
            throw ParseError("label must be 0, 1 or empty", l);
        });
    return {start, std::move(values)};
}

} // namespace foehn
