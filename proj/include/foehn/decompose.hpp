#pragma once

#include "foehn/aggregate.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace foehn {

struct StrOptions {
    /// Fixed penalties; when either is absent both are chosen by GCV on `grid`.
    std::optional<double> lambda_trend;
    std::optional<double> lambda_seasonal;
    std::vector<double> grid{1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3, 1e4};
};

/// Monthly series split into trend, seasonal and remainder.
struct StrFit {
    int start_year = 0;
    int start_month = 1;  // 1..12
    std::vector<double> y, trend, seasonal, remainder;
    std::vector<double> ci_lower, ci_upper;  // 95% pointwise band for the trend
    double lambda_trend = 0.0, lambda_seasonal = 0.0;
    double sigma2 = 0.0;
    double edf = 0.0;  // trace of the smoother matrix
    double gcv = 0.0;
    /// Seasonal coefficients per calendar year covered (12 months each, sum 0).
    int first_year = 0;
    std::vector<std::array<double, 12>> seasonal_by_year;

    std::size_t size() const { return y.size(); }
    int year(std::size_t t) const { return start_year + (start_month - 1 + int(t)) / 12; }
    int month(std::size_t t) const { return (start_month - 1 + int(t)) % 12 + 1; }
};

/// Penalized least squares: one trend value per month with a squared
/// second-difference penalty, and per calendar month a seasonal sequence over
/// years with its own second-difference penalty, summing to zero over the 12
/// months of each year. Needs at least 36 values and no NaN.
StrFit fit_str(std::span<const double> y, int start_year, int start_month, const StrOptions& opts = {});
StrFit fit_str(const AggregateSeries& monthly, const StrOptions& opts = {});

/// True when no horizontal line fits inside the trend band.
bool trend_significance(const StrFit& fit);
bool trend_significance(std::span<const double> ci_lower, std::span<const double> ci_upper);

struct DecadeSeasonal {
    std::vector<int> decades;  // 1940 covers 1940-1949
    std::vector<std::array<double, 12>> mean;
    std::array<double, 12> overall{};
};

/// Mean seasonal value per month over each decade's years.
DecadeSeasonal decade_seasonal(const StrFit& fit);

void write_str_csv(std::ostream& out, const StrFit& fit);
void write_decade_csv(std::ostream& out, const DecadeSeasonal& d);

} // namespace foehn
