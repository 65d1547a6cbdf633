#include "foehn/features.hpp"

#include "foehn/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>

namespace foehn {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 9> kNodeNames{"C", "U", "UU", "D", "DD", "UR", "UL", "DR", "DL"};
constexpr double kGravity = 9.80665;
constexpr double kKappa = 0.2857;  // R_d / c_p

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

} // namespace

std::string node_name(Node n) { return kNodeNames[static_cast<std::size_t>(n)]; }

Node parse_node(const std::string& name) {
    for (std::size_t i = 0; i < kNodeNames.size(); ++i)
        if (name == kNodeNames[i]) return static_cast<Node>(i);
    throw RecipeError("unknown star node '" + name + "'");
}

double plane_bearing(LatLon from, LatLon to) {
    double b = rad2deg(std::atan2(to.lon - from.lon, to.lat - from.lat));
    if (b < 0) b += 360.0;
    if (b >= 360.0) b -= 360.0;
    return b;
}

LatLon offset(LatLon o, double bearing, double r) {
    return {o.lat + r * std::cos(deg2rad(bearing)), o.lon + r * std::sin(deg2rad(bearing))};
}

NodeStar build_star(const StationMeta& station, std::span<const LatLon> ridge) {
    if (ridge.size() < 2) throw ValueError("ridge polyline needs at least two vertices");
    LatLon c = station.position();
    double best = std::numeric_limits<double>::infinity();
    LatLon nearest{};
    for (std::size_t k = 0; k + 1 < ridge.size(); ++k) {
        LatLon a = ridge[k], b = ridge[k + 1];
        double ex = b.lon - a.lon, ey = b.lat - a.lat;
        double len2 = ex * ex + ey * ey;
        double s = len2 > 0 ? ((c.lon - a.lon) * ex + (c.lat - a.lat) * ey) / len2 : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        LatLon q{a.lat + s * ey, a.lon + s * ex};
        double d = std::hypot(q.lat - c.lat, q.lon - c.lon);
        if (d < best) {
            best = d;
            nearest = q;
        }
    }
    if (best < 1e-12) throw ValueError("station " + station.id + " lies on the ridge");

    NodeStar star;
    double up = plane_bearing(c, nearest);
    // South-foehn stations sit north of the ridge, so upwind must not point north.
    double north_component = std::cos(deg2rad(up));
    if (station.foehn_type == FoehnType::south && north_component > 1e-9)
        throw ValueError("station " + station.id + " is a south-foehn station but the ridge lies to its north");
    if (station.foehn_type == FoehnType::north && north_component < -1e-9)
        throw ValueError("station " + station.id + " is a north-foehn station but the ridge lies to its south");
    star.upwind_bearing = up;
    double down = std::fmod(up + 180.0, 360.0);
    auto set = [&](Node n, LatLon p) { star.nodes[static_cast<std::size_t>(n)] = p; };
    set(Node::C, c);
    set(Node::U, offset(c, up, 1.0));
    set(Node::UU, offset(c, up, 2.0));
    set(Node::D, offset(c, down, 1.0));
    set(Node::DD, offset(c, down, 2.0));
    // Right/left as seen facing downwind.
    set(Node::UR, offset(c, up - 45.0, 2.0));
    set(Node::UL, offset(c, up + 45.0, 2.0));
    set(Node::DR, offset(c, down + 45.0, 2.0));
    set(Node::DL, offset(c, down - 45.0, 2.0));
    return star;
}

double bilinear(const FieldSlice& f, LatLon p) {
    const Grid& g = *f.grid;
    double fi = (p.lat - g.lat0) / g.dlat;
    double fj = (p.lon - g.lon0) / g.dlon;
    constexpr double eps = 1e-9;
    if (!(fi >= -eps && fi <= double(g.nlat - 1) + eps && fj >= -eps && fj <= double(g.nlon - 1) + eps))
        throw RangeError("point (" + format_number(p.lat) + ", " + format_number(p.lon) + ") outside the grid");
    fi = std::clamp(fi, 0.0, double(g.nlat - 1));
    fj = std::clamp(fj, 0.0, double(g.nlon - 1));
    auto i0 = std::min(static_cast<std::size_t>(fi), g.nlat - 2);
    auto j0 = std::min(static_cast<std::size_t>(fj), g.nlon - 2);
    double wi = fi - double(i0), wj = fj - double(j0);
    return (1 - wi) * (1 - wj) * f.at(i0, j0) + (1 - wi) * wj * f.at(i0, j0 + 1) + wi * (1 - wj) * f.at(i0 + 1, j0) +
           wi * wj * f.at(i0 + 1, j0 + 1);
}

std::array<double, 4> harmonics(Instant t) {
    double w = 2.0 * std::numbers::pi * day_of_year_fraction(t) / kYearPeriodDays;
    return {std::sin(w), std::cos(w), std::sin(2 * w), std::cos(2 * w)};
}

std::string to_string(VariableSet s) { return s == VariableSet::direct ? "direct" : "full"; }

VariableSet parse_variable_set(const std::string& s) {
    if (s == "direct") return VariableSet::direct;
    if (s == "full") return VariableSet::full;
    throw ConfigError("unknown variable set '" + s + "' (expected direct or full)");
}

namespace {

const std::map<RecipeKind, std::string> kKindNames{
    {RecipeKind::raw, "raw"},
    {RecipeKind::harmonic, "harmonic"},
    {RecipeKind::vertical_gradient, "vertical_gradient"},
    {RecipeKind::thickness, "thickness"},
    {RecipeKind::spatial_diff, "spatial_diff"},
    {RecipeKind::group_sum, "group_sum"},
    {RecipeKind::group_mean, "group_mean"},
    {RecipeKind::group_diff, "group_diff"},
    {RecipeKind::temporal_diff, "temporal_diff"},
    {RecipeKind::spatiotemporal, "spatiotemporal"},
};

const std::map<Quantity, std::string> kQuantityNames{
    {Quantity::value, "value"},
    {Quantity::vertical_gradient, "vertical_gradient"},
    {Quantity::thickness, "thickness"},
    {Quantity::potential_temperature, "potential_temperature"},
};

template <class E>
E parse_enum(const std::map<E, std::string>& names, const std::string& s, const char* what) {
    for (const auto& [k, v] : names)
        if (v == s) return k;
    throw RecipeError(std::string("unknown ") + what + " '" + s + "'");
}

Quantity effective_quantity(const FeatureRecipe& r) {
    if (r.kind == RecipeKind::vertical_gradient) return Quantity::vertical_gradient;
    if (r.kind == RecipeKind::thickness) return Quantity::thickness;
    return r.quantity;
}

bool is_temporal(RecipeKind k) { return k == RecipeKind::temporal_diff || k == RecipeKind::spatiotemporal; }

std::vector<std::string> nodes_to_strings(const std::vector<Node>& v) {
    std::vector<std::string> out;
    for (auto n : v) out.push_back(node_name(n));
    return out;
}

std::vector<Node> nodes_from(const json& j) {
    std::vector<Node> out;
    for (const auto& s : j) out.push_back(parse_node(s.get<std::string>()));
    return out;
}

void validate_shape(const FeatureRecipe& r) {
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) throw RecipeError("recipe " + r.name + ": " + msg);
    };
    need(!r.name.empty(), "missing name");
    switch (r.kind) {
    case RecipeKind::harmonic: need(r.harmonic >= 0 && r.harmonic < 4, "harmonic index must be 0..3"); return;
    case RecipeKind::raw:
    case RecipeKind::vertical_gradient:
    case RecipeKind::thickness:
    case RecipeKind::temporal_diff: need(r.nodes.size() == 1, "needs exactly one node"); break;
    case RecipeKind::spatial_diff:
    case RecipeKind::spatiotemporal: need(r.nodes.size() == 2, "needs exactly two nodes"); break;
    case RecipeKind::group_sum:
    case RecipeKind::group_mean: need(!r.nodes.empty(), "needs at least one node"); break;
    case RecipeKind::group_diff: need(!r.nodes.empty() && !r.nodes_b.empty(), "needs two node groups"); break;
    }
    need(!r.field.empty(), "missing field");
    auto q = effective_quantity(r);
    if (q == Quantity::vertical_gradient || q == Quantity::thickness)
        need(r.levels[0] > r.levels[1] && r.levels[1] > 0, "levels must be {lower, upper} with lower > upper hPa");
    if (q == Quantity::potential_temperature) need(split_level(r.field).second > 0, "needs a pressure-level field");
    if (is_temporal(r.kind)) need(r.lag_hours != 0, "temporal recipes need a non-zero lag");
}

} // namespace

bool FeatureRecipe::is_direct() const {
    if (kind == RecipeKind::harmonic) return true;
    bool at_center = nodes.size() == 1 && nodes[0] == Node::C;
    return at_center && (kind == RecipeKind::raw || kind == RecipeKind::vertical_gradient ||
                         kind == RecipeKind::thickness);
}

void to_json(json& j, const FeatureRecipe& r) {
    j = {{"name", r.name}, {"kind", kKindNames.at(r.kind)}};
    if (r.kind == RecipeKind::harmonic) {
        j["harmonic"] = r.harmonic;
        return;
    }
    j["field"] = r.field;
    auto q = effective_quantity(r);
    if (r.kind != RecipeKind::vertical_gradient && r.kind != RecipeKind::thickness && q != Quantity::value)
        j["quantity"] = kQuantityNames.at(q);
    if (q == Quantity::vertical_gradient || q == Quantity::thickness) j["levels"] = r.levels;
    j["nodes"] = nodes_to_strings(r.nodes);
    if (!r.nodes_b.empty()) j["nodes_b"] = nodes_to_strings(r.nodes_b);
    if (r.kind == RecipeKind::group_diff) j["reduce"] = r.group_mean ? "mean" : "sum";
    if (is_temporal(r.kind)) j["lag"] = r.lag_hours;
}

void from_json(const json& j, FeatureRecipe& r) {
    try {
        r = FeatureRecipe{};
        r.name = j.at("name").get<std::string>();
        r.kind = parse_enum(kKindNames, j.at("kind").get<std::string>(), "recipe kind");
        r.harmonic = j.value("harmonic", 0);
        r.field = j.value("field", std::string{});
        r.quantity = parse_enum(kQuantityNames, j.value("quantity", std::string("value")), "quantity");
        if (j.contains("levels")) r.levels = j.at("levels").get<std::array<int, 2>>();
        if (j.contains("nodes")) r.nodes = nodes_from(j.at("nodes"));
        if (j.contains("nodes_b")) r.nodes_b = nodes_from(j.at("nodes_b"));
        auto reduce = j.value("reduce", std::string("sum"));
        if (reduce != "sum" && reduce != "mean") throw RecipeError("recipe " + r.name + ": reduce must be sum or mean");
        r.group_mean = reduce == "mean";
        r.lag_hours = j.value("lag", 0);
    } catch (const json::exception& e) {
        throw RecipeError(std::string("malformed recipe: ") + e.what());
    }
    validate_shape(r);
}

std::vector<FeatureRecipe> load_recipes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RecipeError("cannot open recipe file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    auto recipes = j.at("recipes").get<std::vector<FeatureRecipe>>();
    std::set<std::string> names;
    for (const auto& r : recipes)
        if (!names.insert(r.name).second) throw RecipeError("duplicate recipe name " + r.name);
    return recipes;
}

void save_recipes(const std::filesystem::path& path, const std::vector<FeatureRecipe>& recipes) {
    std::ofstream out(path);
    out << json{{"recipes", recipes}}.dump(1) << '\n';
}

std::vector<std::string> era5_field_catalog() {
    std::vector<std::string> out{"100m_u_component_of_wind",
                                 "100m_v_component_of_wind",
                                 "10m_u_component_of_wind",
                                 "10m_v_component_of_wind",
                                 "10m_wind_gust_since_previous_post_processing",
                                 "instantaneous_10m_wind_gust",
                                 "2m_dewpoint_temperature",
                                 "2m_temperature",
                                 "surface_pressure",
                                 "mean_sea_level_pressure",
                                 "eastward_gravity_wave_surface_stress",
                                 "northward_gravity_wave_surface_stress",
                                 "convective_precipitation",
                                 "large_scale_precipitation",
                                 "total_precipitation",
                                 "boundary_layer_dissipation",
                                 "boundary_layer_height",
                                 "charnock",
                                 "friction_velocity",
                                 "gravity_wave_dissipation",
                                 "high_cloud_cover",
                                 "low_cloud_cover",
                                 "medium_cloud_cover",
                                 "total_cloud_cover",
                                 "total_column_cloud_liquid_water",
                                 "surface_net_solar_radiation",
                                 "surface_net_thermal_radiation",
                                 "surface_sensible_heat_flux",
                                 "surface_solar_radiation_downwards",
                                 "surface_thermal_radiation_downwards"};
    for (const char* base : {"divergence", "geopotential", "potential_vorticity", "specific_humidity", "temperature",
                             "u_component_of_wind", "v_component_of_wind", "vertical_velocity",
                             "specific_cloud_liquid_water_content", "vorticity"})
        for (int level : kPressureLevels) out.push_back(level_name(base, level));
    return out;
}

std::vector<FeatureRecipe> default_recipes(const std::vector<std::string>& available) {
    std::set<std::string> have(available.begin(), available.end());
    std::vector<FeatureRecipe> out;
    auto add = [&](FeatureRecipe r) { out.push_back(std::move(r)); };

    for (int h = 0; h < 4; ++h) {
        static constexpr const char* names[] = {"doy_sin1", "doy_cos1", "doy_sin2", "doy_cos2"};
        FeatureRecipe r;
        r.name = names[h];
        r.kind = RecipeKind::harmonic;
        r.harmonic = h;
        add(r);
    }
    for (const auto& f : available) {
        FeatureRecipe r;
        r.name = f;
        r.kind = RecipeKind::raw;
        r.field = f;
        add(r);
    }

    // Levels present per pressure-level base field, highest pressure first.
    std::map<std::string, std::vector<int>> levels;
    for (const auto& f : available) {
        auto [base, level] = split_level(f);
        if (level) levels[base].push_back(level);
    }
    for (auto& [base, ls] : levels) std::sort(ls.rbegin(), ls.rend());
    auto adjacent_pairs = [&](const std::string& base) {
        std::vector<std::array<int, 2>> pairs;
        auto it = levels.find(base);
        if (it == levels.end()) return pairs;
        for (std::size_t k = 0; k + 1 < it->second.size(); ++k) pairs.push_back({it->second[k], it->second[k + 1]});
        return pairs;
    };
    for (auto lv : adjacent_pairs("temperature")) {
        FeatureRecipe r;
        r.kind = RecipeKind::vertical_gradient;
        r.field = "temperature";
        r.levels = lv;
        r.name = "dT_" + std::to_string(lv[0]) + "_" + std::to_string(lv[1]);
        add(r);
    }
    for (auto lv : adjacent_pairs("geopotential")) {
        FeatureRecipe r;
        r.kind = RecipeKind::thickness;
        r.field = "geopotential";
        r.levels = lv;
        r.name = "thickness_" + std::to_string(lv[0]) + "_" + std::to_string(lv[1]);
        add(r);
    }

    // Spatial differences between star nodes.
    const std::vector<std::pair<Node, Node>> pairs{{Node::C, Node::U},   {Node::U, Node::UU}, {Node::C, Node::D},
                                                   {Node::D, Node::DD},  {Node::U, Node::D},  {Node::UU, Node::DD},
                                                   {Node::UL, Node::DR}, {Node::UR, Node::DL}};
    auto pair_name = [](Node a, Node b) { return node_name(a) + "_" + node_name(b); };
    auto spatial = [&](const std::string& stem, const std::string& field, Quantity q, std::array<int, 2> lv) {
        for (auto [a, b] : pairs) {
            FeatureRecipe r;
            r.kind = RecipeKind::spatial_diff;
            r.field = field;
            r.quantity = q;
            r.levels = lv;
            r.nodes = {a, b};
            r.name = "sd_" + stem + "_" + pair_name(a, b);
            add(r);
        }
    };
    for (const char* f : {"surface_pressure", "mean_sea_level_pressure", "2m_temperature"})
        if (have.count(f)) spatial(f, f, Quantity::value, {0, 0});
    if (levels.count("temperature"))
        for (int l : levels["temperature"])
            spatial("theta_" + std::to_string(l), level_name("temperature", l), Quantity::potential_temperature,
                    {0, 0});
    for (auto lv : adjacent_pairs("temperature"))
        spatial("dT_" + std::to_string(lv[0]) + "_" + std::to_string(lv[1]), "temperature",
                Quantity::vertical_gradient, lv);

    // Upwind/downwind aggregates.
    const std::vector<Node> upwind{Node::U, Node::UU, Node::UR, Node::UL};
    const std::vector<Node> downwind{Node::D, Node::DD, Node::DR, Node::DL};
    auto groups = [&](const std::string& f, bool mean) {
        if (!have.count(f)) return;
        for (int side = 0; side < 2; ++side) {
            FeatureRecipe r;
            r.kind = mean ? RecipeKind::group_mean : RecipeKind::group_sum;
            r.field = f;
            r.nodes = side == 0 ? upwind : downwind;
            r.name = std::string(mean ? "mean_" : "sum_") + f + (side == 0 ? "_upwind" : "_downwind");
            add(r);
        }
        FeatureRecipe d;
        d.kind = RecipeKind::group_diff;
        d.field = f;
        d.nodes = upwind;
        d.nodes_b = downwind;
        d.group_mean = mean;
        d.name = std::string(mean ? "mean_" : "sum_") + f + "_up_minus_down";
        add(d);
    };
    for (const char* f : {"total_precipitation", "convective_precipitation", "large_scale_precipitation"})
        groups(f, false);
    for (const char* f : {"total_cloud_cover", "low_cloud_cover", "medium_cloud_cover", "high_cloud_cover"})
        groups(f, true);

    // Temporal changes over the past and next three hours.
    auto temporal = [&](const std::string& f) {
        if (!have.count(f)) return;
        for (int lag : {-3, 3}) {
            FeatureRecipe r;
            r.kind = RecipeKind::temporal_diff;
            r.field = f;
            r.lag_hours = lag;
            r.name = "td_" + f + (lag < 0 ? "_past3h" : "_next3h");
            add(r);
        }
    };
    for (const char* f : {"surface_pressure", "mean_sea_level_pressure", "2m_temperature", "2m_dewpoint_temperature"})
        temporal(f);
    for (const char* base : {"geopotential", "temperature", "specific_humidity"})
        if (levels.count(base))
            for (int l : levels[base]) temporal(level_name(base, l));

    // Temporal changes of spatial differences.
    const std::vector<std::pair<Node, Node>> st_pairs{{Node::C, Node::U}, {Node::U, Node::D}, {Node::UL, Node::DR}};
    for (const char* f : {"surface_pressure", "mean_sea_level_pressure"}) {
        if (!have.count(f)) continue;
        for (auto [a, b] : st_pairs)
            for (int lag : {-3, 3}) {
                FeatureRecipe r;
                r.kind = RecipeKind::spatiotemporal;
                r.field = f;
                r.nodes = {a, b};
                r.lag_hours = lag;
                r.name = std::string("std_") + f + "_" + pair_name(a, b) + (lag < 0 ? "_past3h" : "_next3h");
                add(r);
            }
    }
    return out;
}

std::ptrdiff_t FeatureTable::row_of(Instant t) const {
    if (t < start || (t - start) % kHour != std::chrono::seconds{0}) return -1;
    auto i = (t - start) / kHour;
    return i < static_cast<std::int64_t>(rows) ? static_cast<std::ptrdiff_t>(i) : -1;
}

std::ptrdiff_t FeatureTable::column(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : it - names.begin();
}

namespace {

// Evaluates point quantities at star nodes over the whole time axis, caching
// by (quantity, field, levels, node).
class NodeSeriesCache {
public:
    NodeSeriesCache(const GriddedFieldSet& g, const NodeStar& star) : g_(g), star_(star) {}

    const std::vector<double>& get(const FeatureRecipe& r, Quantity q, Node n) {
        std::string key = std::to_string(int(q)) + "|" + r.field + "|" + std::to_string(r.levels[0]) + "|" +
                          std::to_string(r.levels[1]) + "|" + node_name(n);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        return cache_[key] = compute(r, q, n);
    }

private:
    std::vector<double> interpolate(const std::string& field, Node n) {
        if (!g_.has(field)) throw RecipeError("gridded set has no field '" + field + "'");
        std::vector<double> out(g_.ntimes());
        for (std::size_t t = 0; t < g_.ntimes(); ++t) out[t] = bilinear(g_.slice(field, t), star_.at(n));
        return out;
    }

    std::vector<double> compute(const FeatureRecipe& r, Quantity q, Node n) {
        switch (q) {
        case Quantity::value: return interpolate(r.field, n);
        case Quantity::potential_temperature: {
            auto v = interpolate(r.field, n);
            double factor = std::pow(1000.0 / double(split_level(r.field).second), kKappa);
            for (auto& x : v) x *= factor;
            return v;
        }
        case Quantity::vertical_gradient:
        case Quantity::thickness: {
            auto lower = interpolate(level_name(r.field, r.levels[0]), n);
            auto upper = interpolate(level_name(r.field, r.levels[1]), n);
            double scale = q == Quantity::thickness ? 1.0 / kGravity : 1.0;
            for (std::size_t t = 0; t < lower.size(); ++t) upper[t] = (upper[t] - lower[t]) * scale;
            return upper;
        }
        }
        return {};
    }

    const GriddedFieldSet& g_;
    const NodeStar& star_;
    std::map<std::string, std::vector<double>> cache_;
};

} // namespace

FeatureTable assemble(const GriddedFieldSet& gridded, const NodeStar& star, const std::vector<FeatureRecipe>& recipes,
                      VariableSet variable_set) {
    std::vector<const FeatureRecipe*> chosen;
    std::set<std::string> names;
    int back = 0, ahead = 0;
    for (const auto& r : recipes) {
        validate_shape(r);
        if (variable_set == VariableSet::direct && !r.is_direct()) continue;
        if (!names.insert(r.name).second) throw RecipeError("duplicate recipe name " + r.name);
        chosen.push_back(&r);
        if (is_temporal(r.kind)) {
            if (r.lag_hours < 0) back = std::max(back, -r.lag_hours);
            else ahead = std::max(ahead, r.lag_hours);
        }
    }
    const auto n = gridded.ntimes();
    if (std::size_t(back + ahead) >= n) throw RecipeError("time axis too short for the temporal lags");

    FeatureTable table;
    table.variable_set = variable_set;
    table.start = gridded.time(static_cast<std::size_t>(back));
    table.rows = n - static_cast<std::size_t>(back + ahead);
    table.dropped_rows = static_cast<std::size_t>(back + ahead);

    NodeSeriesCache cache(gridded, star);
    for (const auto* rp : chosen) {
        const auto& r = *rp;
        std::vector<double> full(n, 0.0);
        auto q = effective_quantity(r);
        switch (r.kind) {
        case RecipeKind::harmonic:
            for (std::size_t t = 0; t < n; ++t) full[t] = harmonics(gridded.time(t))[static_cast<std::size_t>(r.harmonic)];
            break;
        case RecipeKind::raw:
        case RecipeKind::vertical_gradient:
        case RecipeKind::thickness: full = cache.get(r, q, r.nodes[0]); break;
        case RecipeKind::spatial_diff:
        case RecipeKind::spatiotemporal: {
            const auto& a = cache.get(r, q, r.nodes[0]);
            const auto& b = cache.get(r, q, r.nodes[1]);
            for (std::size_t t = 0; t < n; ++t) full[t] = a[t] - b[t];
            break;
        }
        case RecipeKind::group_sum:
        case RecipeKind::group_mean:
            for (auto node : r.nodes) {
                const auto& v = cache.get(r, q, node);
                for (std::size_t t = 0; t < n; ++t) full[t] += v[t];
            }
            if (r.kind == RecipeKind::group_mean)
                for (auto& x : full) x /= double(r.nodes.size());
            break;
        case RecipeKind::group_diff: {
            std::vector<double> b(n, 0.0);
            for (auto node : r.nodes) {
                const auto& v = cache.get(r, q, node);
                for (std::size_t t = 0; t < n; ++t) full[t] += v[t];
            }
            for (auto node : r.nodes_b) {
                const auto& v = cache.get(r, q, node);
                for (std::size_t t = 0; t < n; ++t) b[t] += v[t];
            }
            double sa = r.group_mean ? double(r.nodes.size()) : 1.0, sb = r.group_mean ? double(r.nodes_b.size()) : 1.0;
            for (std::size_t t = 0; t < n; ++t) full[t] = full[t] / sa - b[t] / sb;
            break;
        }
        case RecipeKind::temporal_diff: full = cache.get(r, q, r.nodes[0]); break;
        }

        std::vector<double> col(table.rows);
        if (is_temporal(r.kind)) {
            double sign = r.lag_hours > 0 ? 1.0 : -1.0;
            for (std::size_t i = 0; i < table.rows; ++i) {
                auto t = i + static_cast<std::size_t>(back);
                auto u = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(t) + r.lag_hours);
                col[i] = sign * (full[u] - full[t]);
            }
        } else {
            std::copy(full.begin() + back, full.begin() + back + static_cast<std::ptrdiff_t>(table.rows), col.begin());
        }
        table.names.push_back(r.name);
        table.columns.push_back(std::move(col));
        table.provenance.push_back(r);
    }
    return table;
}

void write_feature_csv(std::ostream& out, const FeatureTable& t) {
    out << "timestamp";
    for (const auto& n : t.names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < t.rows; ++i) {
        out << format_iso(t.time(i));
        for (const auto& c : t.columns) out << ',' << format_number(c[i]);
        out << '\n';
    }
}

void write_feature_manifest(std::ostream& out, const FeatureTable& t) {
    json cols = json::array();
    for (std::size_t k = 0; k < t.names.size(); ++k) cols.push_back({{"name", t.names[k]}, {"recipe", t.provenance[k]}});
    json m{{"variable_set", to_string(t.variable_set)},
           {"start", format_iso(t.start)},
           {"rows", t.rows},
           {"dropped_rows", t.dropped_rows},
           {"columns", cols}};
    out << m.dump(1) << '\n';
}

FeatureTable read_feature_table(const std::filesystem::path& csv, const std::filesystem::path& manifest) {
    std::ifstream mf(manifest);
    if (!mf) throw ParseError("cannot open " + manifest.string());
    json m = json::parse(mf);
    FeatureTable t;
    t.variable_set = parse_variable_set(m.at("variable_set").get<std::string>());
    t.dropped_rows = m.value("dropped_rows", std::size_t{0});
    for (const auto& c : m.at("columns")) {
        t.names.push_back(c.at("name").get<std::string>());
        t.provenance.push_back(c.at("recipe").get<FeatureRecipe>());
    }
    std::ifstream in(csv);
    if (!in) throw ParseError("cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    auto header = split_csv_line(line);
    if (header.size() != t.names.size() + 1) throw SchemaError("feature CSV header does not match its manifest");
    for (std::size_t k = 0; k < t.names.size(); ++k)
        if (header[k + 1] != t.names[k]) throw SchemaError("feature CSV column " + t.names[k] + " out of order");
    t.columns.assign(t.names.size(), {});
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != header.size()) throw ParseError("wrong field count", lineno);
        Instant ts = parse_iso(f[0]);
        if (t.rows == 0) t.start = ts;
        else if (ts != t.time(t.rows)) throw IntegrityError("feature rows must be hourly and gap-free");
        for (std::size_t k = 0; k < t.names.size(); ++k) t.columns[k].push_back(parse_number(f[k + 1], lineno));
        ++t.rows;
    }
    return t;
}

} // namespace foehn
