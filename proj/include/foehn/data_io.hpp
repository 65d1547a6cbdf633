#pragma once

#include "foehn/time.hpp"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace foehn {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

enum class StationRole { valley, crest };
enum class FoehnType { south, north };

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

struct StationMeta {
    std::string id;
    StationRole role = StationRole::valley;
    double lat = 0.0;
    double lon = 0.0;
    double altitude = 0.0;
    FoehnType foehn_type = FoehnType::south;

    LatLon position() const { return {lat, lon}; }
};

/// Checks coordinate ranges and finiteness; throws ValueError.
void validate(const StationMeta& s);

/// Regular 10-min series. Every channel carries its own missing markers
/// (NaN) since the precondition mask needs per-channel availability.
struct ObservationSeries {
    std::string station;
    Instant start{};
    std::vector<double> ff;
    std::vector<double> dd;
    std::vector<double> t;
    std::vector<double> rh;

    std::size_t size() const { return ff.size(); }
    bool empty() const { return ff.empty(); }
    Instant time(std::size_t i) const { return start + kTenMinutes * static_cast<std::int64_t>(i); }
    Instant end() const { return time(size() - 1); }
    void resize(std::size_t n);
};

/// Reads the observation CSV (`timestamp,ff,dd,t,rh`) and regularizes it onto
/// the full 10-min grid spanning its first..last timestamp.
ObservationSeries load_observations(const std::filesystem::path& path, const StationMeta& station);
ObservationSeries parse_observations(std::istream& in, const std::string& station_id);
void write_observations(std::ostream& out, const ObservationSeries& series);
void write_observations(const std::filesystem::path& path, const ObservationSeries& series);

/// Restricts two series to their common 10-min span. Throws IntegrityError
/// when the spans do not overlap.
std::pair<ObservationSeries, ObservationSeries> intersect(const ObservationSeries& a,
                                                          const ObservationSeries& b);

struct Grid {
    double lat0 = 0.0;
    double lon0 = 0.0;
    double dlat = 0.25;
    double dlon = 0.25;
    std::size_t nlat = 0;
    std::size_t nlon = 0;

    std::size_t cells() const { return nlat * nlon; }
    double lat(std::size_t i) const { return lat0 + dlat * double(i); }
    double lon(std::size_t j) const { return lon0 + dlon * double(j); }
};

/// Read-only 2-D view (lat-major) over one time step of a field.
struct FieldSlice {
    const Grid* grid;
    std::span<const double> values;

    double at(std::size_t ilat, std::size_t ilon) const { return values[ilat * grid->nlon + ilon]; }
};

/// Hourly gridded fields sharing one grid and one time axis. Data arrays are
/// shared and immutable once loaded.
class GriddedFieldSet {
public:
    GriddedFieldSet() = default;
    GriddedFieldSet(Grid grid, Instant start, std::size_t ntimes);

    const Grid& grid() const { return grid_; }
    Instant start() const { return start_; }
    std::size_t ntimes() const { return ntimes_; }
    Instant time(std::size_t i) const { return start_ + kHour * static_cast<std::int64_t>(i); }

    /// Index of `t` on the time axis, or -1 when outside / not aligned.
    std::ptrdiff_t time_index(Instant t) const;

    void add_field(const std::string& name, std::vector<double> values);
    bool has(const std::string& name) const { return fields_.count(name) != 0; }
    std::span<const double> field(const std::string& name) const;
    FieldSlice slice(const std::string& name, std::size_t time_index) const;
    std::vector<std::string> field_names() const;

private:
    Grid grid_;
    Instant start_{};
    std::size_t ntimes_ = 0;
    std::map<std::string, std::shared_ptr<const std::vector<double>>> fields_;
};

/// Reads `manifest.json` plus one little-endian float64 `.bin` per field.
GriddedFieldSet load_gridded(const std::filesystem::path& dir);
void write_gridded(const std::filesystem::path& dir, const GriddedFieldSet& set);

/// Pressure levels (hPa) a field name may carry as a `_<level>` suffix.
inline constexpr int kPressureLevels[] = {500, 700, 750, 800, 850, 900};

/// Splits `temperature_850` into ("temperature", 850); level 0 for
/// single-level names.
std::pair<std::string, int> split_level(const std::string& name);
std::string level_name(const std::string& base, int level);

// Shared CSV helpers.
std::vector<std::string_view> split_csv_line(std::string_view line);
double parse_number(std::string_view field, std::size_t line);
std::string format_number(double v);

} // namespace foehn
