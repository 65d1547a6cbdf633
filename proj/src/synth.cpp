#include "foehn/synth.hpp"

#include "foehn/atomic_file.hpp"
#include "foehn/errors.hpp"
#include "foehn/features.hpp"
#include "foehn/random.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>

namespace foehn {

using json = nlohmann::json;
namespace fs = std::filesystem;

void SynthSpec::validate() const {
    if (years < 1) throw ConfigError("synth: years must be >= 1");
    if (first_year < 1900 || first_year + years > 2200) throw ConfigError("synth: years outside 1900..2200");
    for (double p : {p_enter, p_exit})
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synth: transition probabilities must lie in [0, 1]");
    for (double a : {diurnal_amplitude, seasonal_amplitude})
        if (!(a >= 0.0 && a < 1.0)) throw ConfigError("synth: modulation amplitudes must lie in [0, 1)");
    for (double s : {dtheta_foehn_sd, dtheta_calm_sd, rh_foehn_sd, rh_calm_sd, ff_foehn_sd, ff_calm_sd, gradient_noise})
        if (!(s > 0.0)) throw ConfigError("synth: standard deviations must be positive");
    if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw ConfigError("synth: missing_rate must lie in [0, 1)");
    if (!(coupling >= 0.0)) throw ConfigError("synth: coupling must be non-negative");
}

#define FOEHN_SYNTH_FIELDS(X)                                                                                         \
    X(seed) X(first_year) X(years) X(p_enter) X(p_exit) X(start_foehn) X(diurnal_amplitude) X(seasonal_amplitude)     \
        X(dtheta_foehn_mean) X(dtheta_foehn_sd) X(dtheta_calm_mean) X(dtheta_calm_sd) X(rh_foehn_mean) X(rh_foehn_sd) \
            X(rh_calm_mean) X(rh_calm_sd) X(ff_foehn_mean) X(ff_foehn_sd) X(ff_calm_mean) X(ff_calm_sd)               \
                X(missing_rate) X(coupling) X(gradient_noise) X(direct_signal)

void to_json(json& j, const SynthSpec& s) {
    j = json::object();
#define X(f) j[#f] = s.f;
    FOEHN_SYNTH_FIELDS(X)
#undef X
}

void from_json(const json& j, SynthSpec& s) {
    if (!j.is_object()) throw ConfigError("synth spec must be a JSON object");
    SynthSpec d;
    for (const auto& [k, v] : j.items()) {
        bool known = false;
#define X(f) known |= k == #f;
        FOEHN_SYNTH_FIELDS(X)
#undef X
        if (!known) throw ConfigError("unknown synth spec key '" + k + "'");
    }
    try {
#define X(f) d.f = j.value(#f, d.f);
        FOEHN_SYNTH_FIELDS(X)
#undef X
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid synth spec: ") + e.what());
    }
    d.validate();
    s = d;
}

#undef FOEHN_SYNTH_FIELDS

double stationary_foehn_probability(const SynthSpec& s) {
    double d = s.p_enter + s.p_exit;
    return d > 0 ? s.p_enter / d : (s.start_foehn ? 1.0 : 0.0);
}

namespace {

// Fixed synthetic geometry: a valley station north of an east-west ridge.
Config synth_config(const SynthSpec& spec) {
    Config c;
    c.seed = spec.seed;
    StationConfig v, k;
    v.meta = {"SYN_V", StationRole::valley, 46.88, 8.64, 438.0, FoehnType::south};
    k.meta = {"SYN_C", StationRole::crest, 46.58, 8.60, 2286.0, FoehnType::south};
    v.observations = "valley.csv";
    k.observations = "crest.csv";
    v.crest = "SYN_C";
    v.valley_sector = {60.0, 240.0};
    v.crest_sector = {105.0, 285.0};
    c.stations = {v, k};
    c.ridge = {{46.40, 7.00}, {46.40, 10.50}};
    c.gridded = "gridded";
    c.cv_first_year = spec.first_year;
    c.cv_last_year = spec.first_year + spec.years - 1;
    return c;
}

double draw_in_sector(const WindSector& s, Rng& rng) {
    double width = std::fmod(s.to_deg - s.from_deg + 360.0, 360.0);
    double margin = std::min(10.0, width / 4);
    double dd = s.from_deg + margin + std::uniform_real_distribution<double>(0.0, width - 2 * margin)(rng);
    return std::fmod(dd, 360.0);
}

double round_to(double v, double step) { return std::round(v / step) * step; }

} // namespace

SynthData generate(const SynthSpec& spec) {
    spec.validate();
    SynthData out;
    out.config = synth_config(spec);
    const auto& vcfg = out.config.stations[0];
    const auto& ccfg = out.config.stations[1];

    const Instant g0 = make_instant(spec.first_year, 1, 1);
    const Instant g1 = make_instant(spec.first_year + spec.years, 1, 1);
    const auto nhours = static_cast<std::size_t>(hour_count(g0, g1));

    // Latent chain.
    Rng chain(derive_seed(spec.seed, {hash_tag("chain")}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::uint8_t> state(nhours);
    bool x = spec.start_foehn;
    for (std::size_t h = 0; h < nhours; ++h) {
        if (h > 0) {
            Instant t = g0 + kHour * std::int64_t(h);
            auto c = to_civil(t);
            double diurnal = std::cos(2 * std::numbers::pi * (c.hour - 14) / 24.0);
            double seasonal = std::cos(2 * std::numbers::pi * (day_of_year_fraction(t) - 105.0) / 365.25);
            double enter = spec.p_enter * (1 + spec.diurnal_amplitude * diurnal) *
                           (1 + spec.seasonal_amplitude * seasonal);
            double u = unif(chain);
            x = x ? !(u < spec.p_exit) : (u < std::min(1.0, enter));
        }
        state[h] = x;
    }
    out.truth.start = g0;
    out.truth.label.resize(nhours);
    for (std::size_t h = 0; h < nhours; ++h) out.truth.label[h] = state[h] ? HourLabel::foehn : HourLabel::no_foehn;

    // 10-min observations: slot s belongs to the hour ending at or after s.
    const std::size_t nslots = (nhours - 1) * 6;
    auto& V = out.valley;
    auto& C = out.crest;
    V.station = vcfg.meta.id;
    C.station = ccfg.meta.id;
    V.start = C.start = g0 + kTenMinutes;
    V.resize(nslots);
    C.resize(nslots);
    Rng emit(derive_seed(spec.seed, {hash_tag("emit")}));
    Rng gaps(derive_seed(spec.seed, {hash_tag("missing")}));
    std::normal_distribution<double> z(0.0, 1.0);
    const double dh = ccfg.meta.altitude - vcfg.meta.altitude;
    double crest_noise = 0.0;
    for (std::size_t i = 0; i < nslots; ++i) {
        Instant t = V.time(i);
        std::size_t h = i / 6 + 1;
        bool f = state[h] != 0;
        auto c = to_civil(t);
        double doy = day_of_year_fraction(t);
        crest_noise = 0.995 * crest_noise + 0.1 * z(emit);
        double tc = -2.0 + 7.0 * std::cos(2 * std::numbers::pi * (doy - 200.0) / 365.25) +
                    1.5 * std::cos(2 * std::numbers::pi * (c.hour + c.minute / 60.0 - 14.0) / 24.0) + crest_noise;
        double dtheta = f ? spec.dtheta_foehn_mean + spec.dtheta_foehn_sd * z(emit)
                          : spec.dtheta_calm_mean + spec.dtheta_calm_sd * z(emit);
        double tv = tc + 0.01 * dh + dtheta;
        double rh = f ? spec.rh_foehn_mean + spec.rh_foehn_sd * z(emit) : spec.rh_calm_mean + spec.rh_calm_sd * z(emit);
        double ff = f ? spec.ff_foehn_mean + spec.ff_foehn_sd * z(emit) : spec.ff_calm_mean + spec.ff_calm_sd * z(emit);
        double ddv = f ? draw_in_sector(vcfg.valley_sector, emit) : 360.0 * unif(emit);
        double ddc = f ? draw_in_sector(vcfg.crest_sector, emit) : 360.0 * unif(emit);
        double ffc = std::abs((f ? 14.0 : 6.0) + 3.0 * z(emit));
        double rhc = std::clamp(70.0 + 15.0 * z(emit), 1.0, 100.0);

        V.t[i] = round_to(tv, 0.1);
        V.rh[i] = std::clamp(round_to(rh, 0.1), 1.0, 100.0);
        V.ff[i] = round_to(std::abs(ff), 0.1);
        V.dd[i] = std::fmod(round_to(ddv, 1.0), 360.0);
        C.t[i] = round_to(tc, 0.1);
        C.rh[i] = round_to(rhc, 0.1);
        C.ff[i] = round_to(ffc, 0.1);
        C.dd[i] = std::fmod(round_to(ddc, 1.0), 360.0);
        for (auto* ch : {&V.t, &V.rh, &V.ff, &V.dd, &C.t, &C.rh, &C.ff, &C.dd})
            if (unif(gaps) < spec.missing_rate) (*ch)[i] = kMissing;
    }

    // Gridded fields on a 3x3 grid with 2 degree spacing around the valley station.
    Grid grid{vcfg.meta.lat - 2.0, vcfg.meta.lon - 2.0, 2.0, 2.0, 3, 3};
    const auto star = build_star(vcfg.meta, out.config.ridge);
    const double up = star.upwind_bearing * std::numbers::pi / 180.0;
    std::vector<double> proj(grid.cells());
    for (std::size_t i = 0; i < grid.nlat; ++i)
        for (std::size_t j = 0; j < grid.nlon; ++j)
            proj[i * grid.nlon + j] =
                (grid.lat(i) - vcfg.meta.lat) * std::cos(up) + (grid.lon(j) - vcfg.meta.lon) * std::sin(up);

    const std::size_t cells = grid.cells();
    const std::vector<std::string> names{"surface_pressure",  "mean_sea_level_pressure", "2m_temperature",
                                         "total_precipitation", "total_cloud_cover",     "temperature_850",
                                         "temperature_700",   "geopotential_850",        "geopotential_700"};
    std::vector<std::vector<double>> fields(names.size(), std::vector<double>(nhours * cells));
    Rng field_rng(derive_seed(spec.seed, {hash_tag("gridded")}));
    double common = 0.0, warm = 0.0;
    constexpr double g = 9.80665;
    for (std::size_t h = 0; h < nhours; ++h) {
        Instant t = g0 + kHour * std::int64_t(h);
        auto c = to_civil(t);
        double doy = day_of_year_fraction(t);
        double xs = state[h];
        common = 0.99 * common + 0.7 * z(field_rng);
        warm = 0.98 * warm + 0.3 * z(field_rng);
        double grad = spec.coupling * xs + spec.gradient_noise * z(field_rng);
        double msl_extra = 0.3 * z(field_rng);
        double season = std::cos(2 * std::numbers::pi * (doy - 200.0) / 365.25);
        double diurnal = std::cos(2 * std::numbers::pi * (c.hour - 14.0) / 24.0);
        for (std::size_t k = 0; k < cells; ++k) {
            const double p = proj[k];
            const std::size_t at = h * cells + k;
            double t2m = 283.0 + 8.0 * season + 3.0 * diurnal + spec.direct_signal * xs + warm + 0.1 * z(field_rng);
            double t850 = t2m - 10.0 + 0.5 * z(field_rng);
            fields[0][at] = 950.0 + common + grad * p + 0.05 * z(field_rng);
            fields[1][at] = 1013.0 + 1.02 * common + 0.9 * grad * p + msl_extra + 0.05 * z(field_rng);
            fields[2][at] = t2m;
            fields[3][at] = std::max(0.0, 0.05 * spec.coupling * xs * std::max(p, 0.0) + 0.5 * z(field_rng));
            fields[4][at] = std::clamp(0.5 + 0.02 * spec.coupling * xs * p + 0.2 * z(field_rng), 0.0, 1.0);
            fields[5][at] = t850;
            fields[6][at] = t850 - 8.0 + 0.5 * z(field_rng);
            fields[7][at] = g * (1500.0 + 8.0 * common) + 5.0 * z(field_rng);
            fields[8][at] = fields[7][at] + g * (1550.0 + 0.5 * (t850 - 273.15)) + 5.0 * z(field_rng);
        }
    }
    out.gridded = GriddedFieldSet(grid, g0, nhours);
    for (std::size_t f = 0; f < names.size(); ++f) out.gridded.add_field(names[f], std::move(fields[f]));
    return out;
}

void write_synth(const fs::path& dir, const SynthSpec& spec, const SynthData& data) {
    fs::create_directories(dir);
    Config c = data.config;
    c.base_dir = dir;
    for (auto& s : c.stations) s.observations = dir / s.observations;
    c.gridded = dir / c.gridded;
    write_directory_atomic(dir / "gridded", [&](const fs::path& tmp) { write_gridded(tmp, data.gridded); });
    write_file_atomic(dir / "valley.csv", [&](std::ostream& o) { write_observations(o, data.valley); });
    write_file_atomic(dir / "crest.csv", [&](std::ostream& o) { write_observations(o, data.crest); });
    write_file_atomic(dir / "truth.csv", [&](std::ostream& o) { write_labels_csv(o, data.truth); });
    write_file_atomic(dir / "spec.json", [&](std::ostream& o) { o << json(spec).dump(2) << '\n'; });
    write_file_atomic(dir / "config.json", [&](std::ostream& o) { o << config_to_json(c).dump(2) << '\n'; });
}

} // namespace foehn
