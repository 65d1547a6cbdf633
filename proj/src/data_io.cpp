#include "foehn/data_io.hpp"

#include "foehn/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace foehn {

namespace fs = std::filesystem;
using nlohmann::json;

void validate(const StationMeta& s) {
    if (s.id.empty()) throw ValueError("station id must not be empty");
    if (!(s.lat >= -90.0 && s.lat <= 90.0)) throw ValueError("station " + s.id + ": latitude out of range");
    if (!(s.lon >= -180.0 && s.lon <= 180.0)) throw ValueError("station " + s.id + ": longitude out of range");
    if (!std::isfinite(s.altitude)) throw ValueError("station " + s.id + ": altitude not finite");
}

void ObservationSeries::resize(std::size_t n) {
    ff.assign(n, kMissing);
    dd.assign(n, kMissing);
    t.assign(n, kMissing);
    rh.assign(n, kMissing);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

double parse_number(std::string_view field, std::size_t line) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (field.empty()) return kMissing;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError("malformed number '" + std::string(field) + "'", line);
    return v;
}

std::string format_number(double v) {
    if (is_missing(v)) return {};
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

struct RawRow {
    Instant time;
    double ff, dd, t, rh;
    std::size_t line;
};

} // namespace

ObservationSeries parse_observations(std::istream& in, const std::string& station_id) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty observation file", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,ff,dd,t,rh")
        throw ParseError("expected header 'timestamp,ff,dd,t,rh', got '" + line + "'", 1);

    std::vector<RawRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), lineno);
        Instant ts;
        try {
            ts = parse_iso(f[0]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
        if (!is_aligned(ts, kTenMinutes)) throw ParseError("timestamp not on the 10-min grid", lineno);
        RawRow r{ts, parse_number(f[1], lineno), parse_number(f[2], lineno), parse_number(f[3], lineno),
                 parse_number(f[4], lineno), lineno};
        auto where = "line " + std::to_string(lineno) + ": ";
        if (!is_missing(r.dd) && !(r.dd >= 0.0 && r.dd < 360.0))
            throw ValueError(where + "wind direction " + format_number(r.dd) + " outside [0, 360)");
        if (!is_missing(r.ff) && !(r.ff >= 0.0)) throw ValueError(where + "negative wind speed");
        if (!is_missing(r.rh) && !(r.rh >= 0.0 && r.rh <= 100.0))
            throw ValueError(where + "relative humidity outside [0, 100]");
        if (!is_missing(r.t) && !std::isfinite(r.t)) throw ValueError(where + "temperature not finite");
        if (!is_missing(r.ff) && !std::isfinite(r.ff)) throw ValueError(where + "wind speed not finite");
        rows.push_back(r);
    }

    ObservationSeries s;
    s.station = station_id;
    if (rows.empty()) return s;
    std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].time == rows[i - 1].time)
            throw IntegrityError("line " + std::to_string(rows[i].line) + ": duplicate timestamp " +
                                 format_iso(rows[i].time) + " (first seen on line " +
                                 std::to_string(rows[i - 1].line) + ")");
    s.start = rows.front().time;
    s.resize(static_cast<std::size_t>((rows.back().time - s.start) / kTenMinutes) + 1);
    for (const auto& r : rows) {
        auto i = static_cast<std::size_t>((r.time - s.start) / kTenMinutes);
        s.ff[i] = r.ff;
        s.dd[i] = r.dd;
        s.t[i] = r.t;
        s.rh[i] = r.rh;
    }
    return s;
}

ObservationSeries load_observations(const fs::path& path, const StationMeta& station) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open observation file " + path.string());
    return parse_observations(in, station.id);
}

void write_observations(std::ostream& out, const ObservationSeries& s) {
    out << "timestamp,ff,dd,t,rh\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_missing(s.ff[i]) && is_missing(s.dd[i]) && is_missing(s.t[i]) && is_missing(s.rh[i]) && i != 0 &&
            i + 1 != s.size())
            continue;
        out << format_iso(s.time(i)) << ',' << format_number(s.ff[i]) << ',' << format_number(s.dd[i]) << ','
            << format_number(s.t[i]) << ',' << format_number(s.rh[i]) << '\n';
    }
}

void write_observations(const fs::path& path, const ObservationSeries& s) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    write_observations(out, s);
}

std::pair<ObservationSeries, ObservationSeries> intersect(const ObservationSeries& a, const ObservationSeries& b) {
    if (a.empty() || b.empty()) throw IntegrityError("cannot intersect an empty series");
    auto first = std::max(a.start, b.start);
    auto last = std::min(a.end(), b.end());
    if (last < first)
        throw IntegrityError("series " + a.station + " and " + b.station + " have disjoint time ranges");
    auto n = static_cast<std::size_t>((last - first) / kTenMinutes) + 1;
    auto cut = [&](const ObservationSeries& s) {
        ObservationSeries out;
        out.station = s.station;
        out.start = first;
        auto off = static_cast<std::size_t>((first - s.start) / kTenMinutes);
        auto take = [&](const std::vector<double>& v) {
            return std::vector<double>(v.begin() + off, v.begin() + off + n);
        };
        out.ff = take(s.ff);
        out.dd = take(s.dd);
        out.t = take(s.t);
        out.rh = take(s.rh);
        return out;
    };
    return {cut(a), cut(b)};
}

GriddedFieldSet::GriddedFieldSet(Grid grid, Instant start, std::size_t ntimes)
    : grid_(grid), start_(start), ntimes_(ntimes) {
    if (grid.nlat < 2 || grid.nlon < 2) throw IntegrityError("grid needs at least 2x2 cells");
    if (!(grid.dlat > 0.0) || !(grid.dlon > 0.0)) throw IntegrityError("grid spacing must be positive");
    if (!is_aligned(start, kHour)) throw IntegrityError("gridded time axis must start on a full hour");
}

std::ptrdiff_t GriddedFieldSet::time_index(Instant t) const {
    if (t < start_ || (t - start_) % kHour != std::chrono::seconds{0}) return -1;
    auto i = (t - start_) / kHour;
    return i < static_cast<std::int64_t>(ntimes_) ? static_cast<std::ptrdiff_t>(i) : -1;
}

void GriddedFieldSet::add_field(const std::string& name, std::vector<double> values) {
    if (values.size() != ntimes_ * grid_.cells())
        throw IntegrityError("field " + name + " has " + std::to_string(values.size()) + " values, expected " +
                             std::to_string(ntimes_ * grid_.cells()));
    for (double v : values)
        if (!std::isfinite(v)) throw IntegrityError("field " + name + " contains a missing or non-finite cell");
    fields_[name] = std::make_shared<const std::vector<double>>(std::move(values));
}

std::span<const double> GriddedFieldSet::field(const std::string& name) const {
    auto it = fields_.find(name);
    if (it == fields_.end()) throw RecipeError("gridded set has no field '" + name + "'");
    return *it->second;
}

FieldSlice GriddedFieldSet::slice(const std::string& name, std::size_t ti) const {
    auto all = field(name);
    return {&grid_, all.subspan(ti * grid_.cells(), grid_.cells())};
}

std::vector<std::string> GriddedFieldSet::field_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : fields_) out.push_back(k);
    return out;
}

GriddedFieldSet load_gridded(const fs::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw ParseError("cannot open " + (dir / "manifest.json").string());
    json m;
    try {
        m = json::parse(mf);
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest.json: ") + e.what());
    }
    try {
        const auto& g = m.at("grid");
        Grid grid{g.at("lat0").get<double>(), g.at("lon0").get<double>(), g.at("dlat").get<double>(),
                  g.at("dlon").get<double>(), g.at("nlat").get<std::size_t>(), g.at("nlon").get<std::size_t>()};
        const auto& t = m.at("times");
        GriddedFieldSet set(grid, parse_iso(t.at("start").get<std::string>()), t.at("count").get<std::size_t>());
        for (const auto& [name, spec] : m.at("fields").items()) {
            std::string file;
            std::string dtype = "<f8";
            if (spec.is_string()) {
                file = spec.get<std::string>();
            } else {
                file = spec.at("file").get<std::string>();
                dtype = spec.value("dtype", dtype);
            }
            if (dtype != "<f8" && dtype != "float64")
                throw IntegrityError("field " + name + ": unsupported dtype " + dtype);
            std::ifstream bin(dir / file, std::ios::binary | std::ios::ate);
            if (!bin) throw IntegrityError("field " + name + ": cannot open " + file);
            auto bytes = static_cast<std::size_t>(bin.tellg());
            auto expected = set.ntimes() * grid.cells() * sizeof(double);
            if (bytes != expected)
                throw IntegrityError("field " + name + ": " + std::to_string(bytes) + " bytes, expected " +
                                     std::to_string(expected) + " (time x lat x lon float64)");
            std::vector<double> values(set.ntimes() * grid.cells());
            bin.seekg(0);
            bin.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
            static_assert(std::endian::native == std::endian::little, "big-endian hosts not supported");
            set.add_field(name, std::move(values));
        }
        return set;
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest.json: ") + e.what());
    }
}

void write_gridded(const fs::path& dir, const GriddedFieldSet& set) {
    fs::create_directories(dir);
    const auto& g = set.grid();
    json m;
    m["grid"] = {{"lat0", g.lat0}, {"lon0", g.lon0}, {"dlat", g.dlat},
                 {"dlon", g.dlon}, {"nlat", g.nlat}, {"nlon", g.nlon}};
    m["times"] = {{"start", format_iso(set.start())}, {"count", set.ntimes()}};
    m["fields"] = json::object();
    for (const auto& name : set.field_names()) {
        auto file = name + ".bin";
        m["fields"][name] = {{"file", file}, {"dtype", "<f8"}};
        auto data = set.field(name);
        std::ofstream bin(dir / file, std::ios::binary);
        bin.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
        if (!bin) throw Error("cannot write " + (dir / file).string());
    }
    std::ofstream mf(dir / "manifest.json");
    mf << m.dump(2) << '\n';
}

std::pair<std::string, int> split_level(const std::string& name) {
    auto us = name.rfind('_');
    if (us == std::string::npos) return {name, 0};
    int level = 0;
    auto tail = std::string_view(name).substr(us + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), level);
    if (ec != std::errc{} || ptr != tail.data() + tail.size()) return {name, 0};
    for (int l : kPressureLevels)
        if (l == level) return {name.substr(0, us), level};
    return {name, 0};
}

std::string level_name(const std::string& base, int level) {
    return level == 0 ? base : base + "_" + std::to_string(level);
}

} // namespace foehn
