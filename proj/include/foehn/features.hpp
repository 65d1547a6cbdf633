#pragma once

#include "foehn/data_io.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace foehn {

enum class Node { C, U, UU, D, DD, UR, UL, DR, DL };
inline constexpr std::array<Node, 9> kAllNodes{Node::C,  Node::U,  Node::UU, Node::D, Node::DD,
                                               Node::UR, Node::UL, Node::DR, Node::DL};
std::string node_name(Node n);
Node parse_node(const std::string& name);

/// Nine points around a station, placed in plate-carree degree space along
/// the axis from the station to its nearest ridge point.
struct NodeStar {
    std::array<LatLon, 9> nodes{};
    double upwind_bearing = 0.0;  // degrees clockwise from north

    const LatLon& at(Node n) const { return nodes[static_cast<std::size_t>(n)]; }
};

/// Bearing (degrees, [0, 360)) from `from` to `to` in lat/lon degree space.
double plane_bearing(LatLon from, LatLon to);
LatLon offset(LatLon origin, double bearing_deg, double radius_deg);

/// Upwind axis points at the nearest point of the ridge polyline; on
/// distance ties the earlier segment wins. Throws ValueError for a ridge with
/// fewer than two vertices, a station on the ridge, or a ridge on the wrong
/// side for the station's foehn type.
NodeStar build_star(const StationMeta& station, std::span<const LatLon> ridge);

/// Bilinear interpolation inside the grid's bounding box; RangeError outside.
double bilinear(const FieldSlice& field, LatLon point);

inline constexpr double kYearPeriodDays = 365.25;

/// First and second harmonics of the fractional day of the year:
/// sin/cos(2 pi d / P), sin/cos(4 pi d / P).
std::array<double, 4> harmonics(Instant t);

enum class VariableSet { direct, full };
std::string to_string(VariableSet s);
VariableSet parse_variable_set(const std::string& s);

enum class RecipeKind {
    raw,
    harmonic,
    vertical_gradient,
    thickness,
    spatial_diff,
    group_sum,
    group_mean,
    group_diff,
    temporal_diff,
    spatiotemporal
};

/// What is evaluated at a node before spatial or temporal differencing.
enum class Quantity { value, vertical_gradient, thickness, potential_temperature };

/// One derived covariate. Vertical quantities use `levels = {lower, upper}`
/// (hPa, lower = higher pressure) and evaluate upper minus lower; thickness
/// is expressed in geopotential meters.
struct FeatureRecipe {
    std::string name;
    RecipeKind kind = RecipeKind::raw;
    std::string field;
    Quantity quantity = Quantity::value;
    std::array<int, 2> levels{0, 0};
    std::vector<Node> nodes{Node::C};
    std::vector<Node> nodes_b;        // second group for group_diff
    bool group_mean = false;          // group_diff reduces by mean instead of sum
    int lag_hours = 0;                // temporal kinds: +/-3 by default
    int harmonic = 0;                 // 0..3

    /// Belongs to the `direct` set: station-location raws, vertical
    /// quantities, and harmonics.
    bool is_direct() const;
};

void to_json(nlohmann::json& j, const FeatureRecipe& r);
void from_json(const nlohmann::json& j, FeatureRecipe& r);

std::vector<FeatureRecipe> load_recipes(const std::filesystem::path& path);
void save_recipes(const std::filesystem::path& path, const std::vector<FeatureRecipe>& recipes);

/// The shipped recipe catalog restricted to the fields that exist in
/// `available_fields`.
std::vector<FeatureRecipe> default_recipes(const std::vector<std::string>& available_fields);

/// The ERA5 single-level and pressure-level field catalog (pressure-level
/// names carry their level suffix).
std::vector<std::string> era5_field_catalog();

struct FeatureTable {
    Instant start{};
    std::size_t rows = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;  // one vector per column
    std::vector<FeatureRecipe> provenance;
    VariableSet variable_set = VariableSet::full;
    std::size_t dropped_rows = 0;  // edge hours lost to temporal lags

    Instant time(std::size_t i) const { return start + kHour * static_cast<std::int64_t>(i); }
    std::ptrdiff_t row_of(Instant t) const;
    std::ptrdiff_t column(const std::string& name) const;
};

FeatureTable assemble(const GriddedFieldSet& gridded, const NodeStar& star, const std::vector<FeatureRecipe>& recipes,
                      VariableSet variable_set);

void write_feature_csv(std::ostream& out, const FeatureTable& table);
void write_feature_manifest(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_table(const std::filesystem::path& csv, const std::filesystem::path& manifest);

} // namespace foehn
