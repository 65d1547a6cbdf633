#include "foehn/decompose.hpp"
#include "foehn/errors.hpp"
#include "foehn/random.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace foehn;

namespace {

std::vector<double> series(int months, double slope, double noise, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> y(static_cast<std::size_t>(months));
    for (int t = 0; t < months; ++t) y[std::size_t(t)] = slope * t + std::sin(2 * M_PI * t / 12.0) + noise * z(rng);
    return y;
}

} // namespace

TEST_CASE("components add up and seasonal sums vanish per year") {
    auto y = series(120, 0.01, 0.3, 1);
    auto f = fit_str(y, 2000, 1);
    for (std::size_t t = 0; t < f.size(); ++t)
        CHECK(f.trend[t] + f.seasonal[t] + f.remainder[t] == doctest::Approx(y[t]).epsilon(1e-12));
    for (const auto& yr : f.seasonal_by_year) {
        double s = 0;
        for (double v : yr) s += v;
        CHECK(std::abs(s) < 1e-8);
    }
    for (std::size_t t = 0; t < f.size(); ++t) CHECK(f.ci_lower[t] <= f.trend[t]);
}

TEST_CASE("a very stiff trend is the least-squares line") {
    auto y = series(96, 0.02, 0.5, 2);
    StrOptions o;
    o.lambda_trend = 1e12;
    o.lambda_seasonal = 1.0;
    auto f = fit_str(y, 2000, 1, o);
    // Second differences of the trend vanish.
    for (std::size_t t = 2; t < f.size(); ++t) CHECK(std::abs(f.trend[t] - 2 * f.trend[t - 1] + f.trend[t - 2]) < 1e-6);
}

TEST_CASE("the band widens with the noise level") {
    StrOptions o;
    o.lambda_trend = 100.0;
    o.lambda_seasonal = 10.0;
    auto a = fit_str(series(120, 0.0, 0.2, 3), 2000, 1, o);
    auto b = fit_str(series(120, 0.0, 0.8, 3), 2000, 1, o);
    double wa = a.ci_upper[60] - a.ci_lower[60], wb = b.ci_upper[60] - b.ci_lower[60];
    // Same smoother and noise realization scaled by 4: width scales with sigma.
    CHECK(wb / wa == doctest::Approx(std::sqrt(b.sigma2 / a.sigma2)).epsilon(1e-6));
}

TEST_CASE("significance means no horizontal line fits in the band") {
    const double lo1[] = {0, 1, 2}, hi1[] = {0.5, 1.5, 2.5};
    CHECK(trend_significance(lo1, hi1));
    const double lo2[] = {0, 0.2, 0.4}, hi2[] = {1, 1.2, 1.4};
    CHECK_FALSE(trend_significance(lo2, hi2));
}

TEST_CASE("decade seasonal means") {
    auto f = fit_str(series(240, 0.0, 0.1, 4), 1995, 1);
    auto d = decade_seasonal(f);
    CHECK(d.decades == std::vector<int>{1990, 2000, 2010});
    double s = 0;
    for (double v : d.overall) s += v;
    CHECK(std::abs(s) < 1e-8);
}

TEST_CASE("input validation") {
    std::vector<double> shortie(30, 1.0);
    CHECK_THROWS_AS(fit_str(shortie, 2000, 1), Error);
    auto y = series(60, 0, 0.1, 5);
    y[10] = std::nan("");
    CHECK_THROWS_AS(fit_str(y, 2000, 1), Error);
}
