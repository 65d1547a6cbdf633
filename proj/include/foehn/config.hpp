#pragma once

#include "foehn/classify.hpp"
#include "foehn/decompose.hpp"
#include "foehn/features.hpp"
#include "foehn/learners.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace foehn {

inline constexpr std::uint64_t kDefaultSeed = 20240101;

struct StationConfig {
    StationMeta meta;
    std::filesystem::path observations;  // resolved against the config directory
    // Valley stations only.
    std::string crest;
    WindSector valley_sector;
    WindSector crest_sector;
};

/// Pipeline configuration. Relative paths are resolved against the directory
/// of the config file. See docs/config.md for the schema.
struct Config {
    std::filesystem::path base_dir;
    std::uint64_t seed = kDefaultSeed;
    std::vector<StationConfig> stations;
    std::vector<LatLon> ridge;
    std::filesystem::path gridded;
    std::optional<std::filesystem::path> recipes;
    int cv_first_year = 2011;
    int cv_last_year = 2022;
    std::vector<LearnerKind> learners{LearnerKind::lasso, LearnerKind::stabsel, LearnerKind::gbt};
    LearnerOptions learner_options;
    std::vector<VariableSet> variable_sets{VariableSet::direct, VariableSet::full};
    EmOptions em;
    std::optional<Instant> reconstruct_first, reconstruct_last;
    StrOptions decompose;
    int threads = 1;

    const StationConfig& station(const std::string& id) const;
    std::vector<const StationConfig*> valley_stations() const;
    StationPair pair(const StationConfig& valley) const;
};

Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const Config& c);

} // namespace foehn
