#include "foehn/classify.hpp"
#include "foehn/errors.hpp"
#include "foehn/random.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace foehn;

TEST_CASE("wind sectors wrap through north") {
    WindSector plain{100, 200}, wrap{330, 30};
    CHECK(sector_contains(100, plain));
    CHECK(sector_contains(200, plain));
    CHECK_FALSE(sector_contains(201, plain));
    CHECK(sector_contains(350, wrap));
    CHECK(sector_contains(0, wrap));
    CHECK(sector_contains(30, wrap));
    CHECK_FALSE(sector_contains(180, wrap));
    CHECK_THROWS_AS(sector_contains(360, plain), ValueError);
}

TEST_CASE("potential temperature difference") {
    // theta = T + 0.01 z at each site.
    double tv = 10.0, tc = -2.0, zv = 450.0, zc = 2100.0;
    CHECK(delta_theta(tv, tc, zc - zv) == doctest::Approx((tv + 0.01 * zv) - (tc + 0.01 * zc)));
}

TEST_CASE("posterior is Bayes' rule") {
    auto pdf = [](double y, double m, double s) {
        return std::exp(-0.5 * (y - m) * (y - m) / (s * s)) / (s * std::sqrt(2 * M_PI));
    };
    for (double y : {-8.0, -3.0, 0.0, 2.0}) {
        for (double pi : {0.1, 0.5, 0.9}) {
            double a = pi * pdf(y, 0.0, 1.5), b = (1 - pi) * pdf(y, -6.0, 2.0);
            CHECK(posterior_from_prior(y, pi, -6.0, 2.0, 0.0, 1.5) == doctest::Approx(a / (a + b)).epsilon(1e-12));
        }
    }
    CHECK(posterior_from_prior(0.0, 0.0, -6, 2, 0, 1.5) == 0.0);
    CHECK(posterior_from_prior(0.0, 1.0, -6, 2, 0, 1.5) == 1.0);
}

namespace {

struct Draws {
    std::vector<double> y, rh, ff;
};

Draws mixture(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    Draws d;
    for (std::size_t i = 0; i < n; ++i) {
        double zr = z(rng), zf = z(rng);
        bool f = u(rng) < 1.0 / (1.0 + std::exp(-(-0.5 - 1.2 * zr + 0.8 * zf)));
        d.y.push_back(f ? z(rng) : -6.0 + 2.0 * z(rng));
        d.rh.push_back(60 + 10 * zr);
        d.ff.push_back(4 + 2 * zf);
    }
    return d;
}

} // namespace

TEST_CASE("EM orders components and does not depend on the initial split") {
    auto d = mixture(5000, 3);
    auto a = em_fit(d.y, d.rh, d.ff);
    EmOptions swapped;
    swapped.swap_init = true;
    auto b = em_fit(d.y, d.rh, d.ff, swapped);
    CHECK(a.mu2 > a.mu1);
    CHECK(b.mu2 > b.mu1);
    CHECK(a.mu1 == doctest::Approx(b.mu1).epsilon(1e-3));
    CHECK(a.mu2 == doctest::Approx(b.mu2).epsilon(1e-3));
    CHECK(a.loglik_trace.back() == doctest::Approx(b.loglik_trace.back()).epsilon(1e-6));
    for (std::size_t i = 1; i < a.loglik_trace.size(); ++i) CHECK(a.loglik_trace[i] >= a.loglik_trace[i - 1] - 1e-10);
    CHECK_FALSE(a.degenerate);
}

TEST_CASE("EM rejects small samples") {
    auto d = mixture(100, 4);
    CHECK_THROWS_AS(em_fit(d.y, d.rh, d.ff), EstimationError);
}

TEST_CASE("EM flags a single-regime sample") {
    Rng rng(9);
    std::normal_distribution<double> z;
    std::vector<double> y, rh, ff;
    for (int i = 0; i < 3000; ++i) y.push_back(z(rng)), rh.push_back(50 + z(rng)), ff.push_back(3 + z(rng));
    bool flagged = false;
    try {
        flagged = em_fit(y, rh, ff).degenerate;
    } catch (const EstimationError&) {
        flagged = true;
    }
    CHECK(flagged);
}

TEST_CASE("precondition mask") {
    ObservationSeries v, c;
    v.start = c.start = make_instant(2020, 1, 1);
    v.resize(3);
    c.resize(3);
    v.dd = {180, 10, kMissing};
    c.dd = {170, 170, 170};
    v.t = v.rh = v.ff = c.t = {1, 1, 1};
    auto m = precondition_mask(v, c, {90, 270}, {135, 225});
    CHECK(m[0] == Precondition::inside);
    CHECK(m[1] == Precondition::outside);
    CHECK(m[2] == Precondition::missing);
    v.rh[0] = kMissing;
    CHECK(precondition_mask(v, c, {90, 270}, {135, 225})[0] == Precondition::missing);
}
