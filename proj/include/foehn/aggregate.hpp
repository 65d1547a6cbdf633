#pragma once

#include "foehn/classify.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace foehn {

enum class HourLabel : std::uint8_t { missing, no_foehn, foehn };

/// Four-out-of-six rule: an hour needs at least 4 available 10-min
/// posteriors (NaN = missing) and is foehn when at least half of the
/// available ones are >= 0.5. More than 6 inputs is a contract error.
HourLabel hourly_label(std::span<const double> posteriors);

struct HourlyLabelSeries {
    Instant start{};
    std::vector<HourLabel> label;

    std::size_t size() const { return label.size(); }
    Instant time(std::size_t i) const { return start + kHour * static_cast<std::int64_t>(i); }
};

/// Hour T summarizes the 10-min slots in (T-50min, T].
HourlyLabelSeries hourly_labels(const PosteriorSeries& posteriors);

/// Hourly probabilities on a uniform grid; NaN marks a missing hour.
struct HourlySeries {
    Instant start{};
    std::vector<double> p;

    std::size_t size() const { return p.size(); }
    Instant time(std::size_t i) const { return start + kHour * static_cast<std::int64_t>(i); }
};

/// foehn -> 1, no_foehn -> 0, missing -> NaN.
HourlySeries as_probabilities(const HourlyLabelSeries& labels);

enum class Period { daily_max, monthly_mean_of_daily_max, annual_mean_of_daily_max };
enum class PeriodUnit { month, year };

struct AggregateSeries {
    Period period = Period::daily_max;
    std::vector<Instant> period_start;
    std::vector<double> value;         // NaN when missing
    std::vector<double> availability;  // fraction in [0, 1]

    std::size_t size() const { return value.size(); }
};

/// A day d owns the hours stamped (d 00:00, d+1 00:00].
AggregateSeries daily_max(const HourlySeries& hourly);

inline constexpr double kObservedMinAvailability = 0.8;

/// Mean of the available daily maxima per calendar month or year. Period
/// availability is the mean daily availability over all calendar days of the
/// period; below `min_availability` the value is missing.
AggregateSeries periodic_mean(const AggregateSeries& daily, PeriodUnit unit, double min_availability);

struct HovmollerMatrix {
    int decade = 0;  // 1940 covers 1940-1949
    std::array<std::array<double, 24>, 12> mean{};
    std::array<std::array<std::size_t, 24>, 12> count{};
};

/// Month x hour-of-day means per decade, NaN for cells without data.
std::vector<HovmollerMatrix> hovmoller(const HourlySeries& hourly);

void write_aggregate_csv(std::ostream& out, const AggregateSeries& series);
void write_hovmoller_csv(std::ostream& out, const HovmollerMatrix& m);
void write_hourly_csv(std::ostream& out, const HourlySeries& series);
HourlySeries read_hourly_csv(const std::filesystem::path& path);
void write_labels_csv(std::ostream& out, const HourlyLabelSeries& labels);
HourlyLabelSeries read_labels_csv(const std::filesystem::path& path);

} // namespace foehn
