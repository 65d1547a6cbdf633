#pragma once

#include "foehn/aggregate.hpp"
#include "foehn/features.hpp"
#include "foehn/learners.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace foehn {

/// Slot h holds the model for hour-of-day h (UTC).
using HourlyModels = std::vector<std::optional<LearnerModel>>;

/// Hourly probabilities over [first, last], each from the model whose hour
/// of day matches. Missing models, schema mismatches (SchemaError) and spans
/// the features do not cover (RangeError) are rejected before predicting.
HourlySeries reconstruct(const HourlyModels& models, const FeatureTable& features, Instant first, Instant last,
                         int threads = 1);

struct ReconstructionYear {
    int year = 0;
    double recon_mean = 0.0;       // annual mean of daily maxima
    double obs_mean = 0.0;         // NaN below 80% availability or without labels
    double obs_availability = 0.0; // NaN without labels
    double obs_foehn_hours = 0.0;  // NaN without labels
};

/// Per calendar year: reconstruction annual mean of daily maxima next to the
/// observation-based one. Edge years the reconstruction covers for less than
/// half the year are left out.
std::vector<ReconstructionYear> reconstruction_report(const HourlySeries& recon, const HourlyLabelSeries* observed);

/// Drops leading and trailing periods with availability below `min_availability`.
AggregateSeries trim_partial(const AggregateSeries& series, double min_availability);

void write_reconstruction_report_csv(std::ostream& out, const std::vector<ReconstructionYear>& rows);

} // namespace foehn
