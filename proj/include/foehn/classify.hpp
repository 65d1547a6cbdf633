#pragma once

#include "foehn/data_io.hpp"

#include <nlohmann/json_fwd.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace foehn {

/// Closed clockwise arc from `from_deg` to `to_deg`; wraps through north
/// when from > to.
struct WindSector {
    double from_deg = 0.0;
    double to_deg = 0.0;
};

bool sector_contains(double dd, const WindSector& sector);

/// Dry-adiabatic potential temperature difference valley minus crest, with
/// dh = altitude(crest) - altitude(valley) in meters.
double delta_theta(double t_valley, double t_crest, double dh);

enum class Precondition : std::uint8_t { missing, outside, inside };

/// Per-slot wind-sector precondition. Both series must share one 10-min grid
/// (see `intersect`).
std::vector<Precondition> precondition_mask(const ObservationSeries& valley, const ObservationSeries& crest,
                                            const WindSector& valley_sector, const WindSector& crest_sector);

struct EmOptions {
    std::size_t min_sample = 500;
    double tol = 1e-6;          // relative log-likelihood gain
    int max_iter = 1000;
    double sigma_floor = 1e-3;  // below this a component has collapsed
    bool swap_init = false;     // start with the halves assigned the other way round
};

/// Two-component Gaussian mixture on the potential temperature difference
/// with a logistic concomitant model on standardized (rh, ff). Component 2
/// is foehn and always has the larger mean.
struct MixtureParams {
    double mu1 = 0.0, sigma1 = 1.0;
    double mu2 = 0.0, sigma2 = 1.0;
    std::array<double, 3> alpha{};  // intercept, z(rh), z(ff)
    double rh_mean = 0.0, rh_sd = 1.0;
    double ff_mean = 0.0, ff_sd = 1.0;
    std::vector<double> loglik_trace;
    std::size_t n_used = 0;
    int iterations = 0;
    bool converged = false;
    /// Standardized distance between the component means.
    double separation = 0.0;
    /// Set when the fit does not describe two distinct regimes.
    bool degenerate = false;

    double prior(double rh, double ff) const;
};

MixtureParams em_fit(std::span<const double> dtheta, std::span<const double> rh, std::span<const double> ff,
                     const EmOptions& opts = {});

/// Posterior foehn probability for prior weight `pi` of component 2.
double posterior_from_prior(double y, double pi, double mu1, double sigma1, double mu2, double sigma2);
double posterior(double y, double rh, double ff, const MixtureParams& params);

struct PosteriorSeries {
    Instant start{};
    std::vector<double> p;  // NaN where inputs are missing
    std::vector<Precondition> precondition;

    std::size_t size() const { return p.size(); }
    Instant time(std::size_t i) const { return start + kTenMinutes * static_cast<std::int64_t>(i); }
};

struct StationPair {
    StationMeta valley;
    StationMeta crest;
    WindSector valley_sector;
    WindSector crest_sector;
};

struct Classification {
    PosteriorSeries series;
    MixtureParams params;
    bool fitted = false;  // false when no slot passed the precondition
    std::size_t n_inside = 0, n_outside = 0, n_missing = 0;
};

Classification classify_series(const ObservationSeries& valley, const ObservationSeries& crest,
                               const StationPair& pair, const EmOptions& opts = {});

void write_posterior_csv(std::ostream& out, const PosteriorSeries& series);
void to_json(nlohmann::json& j, const MixtureParams& p);
void from_json(const nlohmann::json& j, MixtureParams& p);

} // namespace foehn
