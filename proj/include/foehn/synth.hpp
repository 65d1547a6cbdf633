#pragma once

#include "foehn/aggregate.hpp"
#include "foehn/classify.hpp"
#include "foehn/config.hpp"
#include "foehn/data_io.hpp"

#include <nlohmann/json_fwd.hpp>

#include <filesystem>

namespace foehn {

/// Parameters of the synthetic generator. The latent hourly state follows a
/// two-state Markov chain; every 10-min slot of an hour emits from that
/// hour's state.
struct SynthSpec {
    std::uint64_t seed = 42;
    int first_year = 2011;
    int years = 12;

    double p_enter = 0.02;  // P(no foehn -> foehn) per hour
    double p_exit = 0.10;   // P(foehn -> no foehn) per hour
    bool start_foehn = false;
    /// Relative modulation of p_enter by time of day (peak 14 UTC) and season (peak in spring).
    double diurnal_amplitude = 0.3;
    double seasonal_amplitude = 0.3;

    double dtheta_foehn_mean = 0.0, dtheta_foehn_sd = 1.5;
    double dtheta_calm_mean = -8.0, dtheta_calm_sd = 2.0;
    double rh_foehn_mean = 35.0, rh_foehn_sd = 10.0;
    double rh_calm_mean = 75.0, rh_calm_sd = 12.0;
    double ff_foehn_mean = 9.0, ff_foehn_sd = 3.0;
    double ff_calm_mean = 2.5, ff_calm_sd = 1.5;
    double missing_rate = 0.01;  // per channel and slot

    /// Strength of the latent state in the gridded cross-ridge gradient
    /// (hPa per degree); 0 makes the gridded fields uninformative.
    double coupling = 4.0;
    double gradient_noise = 1.0;
    /// Shift of the station 2m temperature under foehn (K), the weak signal
    /// available to the direct variable set.
    double direct_signal = 1.0;

    void validate() const;
};

void to_json(nlohmann::json& j, const SynthSpec& s);
void from_json(const nlohmann::json& j, SynthSpec& s);

struct SynthData {
    ObservationSeries valley, crest;
    GriddedFieldSet gridded;
    HourlyLabelSeries truth;
    Config config;  // stations, sectors and ridge of the synthetic setup
};

/// Deterministic given the spec.
SynthData generate(const SynthSpec& spec);

/// Stationary foehn frequency of the unmodulated chain, p_enter / (p_enter + p_exit).
double stationary_foehn_probability(const SynthSpec& spec);

/// Writes config.json, valley.csv, crest.csv, gridded/, truth.csv and spec.json into `dir`.
void write_synth(const std::filesystem::path& dir, const SynthSpec& spec, const SynthData& data);

} // namespace foehn
