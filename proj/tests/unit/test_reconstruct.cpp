#include "foehn/errors.hpp"
#include "foehn/reconstruct.hpp"

#include <doctest.h>

#include <cmath>

using namespace foehn;

namespace {

FeatureTable table(Instant start, std::size_t rows) {
    FeatureTable t;
    t.start = start;
    t.rows = rows;
    t.names = {"x"};
    t.columns = {std::vector<double>(rows)};
    for (std::size_t i = 0; i < rows; ++i) t.columns[0][i] = double(i % 7) - 3.0;
    return t;
}

HourlyModels models() {
    HourlyModels m(24);
    for (int h = 0; h < 24; ++h) {
        LassoModel l;
        l.names = {"x"};
        l.beta = {0.1 * h};
        l.beta0 = -0.5;
        m[std::size_t(h)] = l;
    }
    return m;
}

} // namespace

TEST_CASE("each hour uses the model of its hour of day") {
    auto start = make_instant(2000, 1, 1);
    auto t = table(start, 24 * 10);
    auto r = reconstruct(models(), t, start, t.time(t.rows - 1), 2);
    REQUIRE(r.size() == t.rows);
    for (std::size_t i = 0; i < r.size(); ++i) {
        int h = to_civil(r.time(i)).hour;
        CHECK(r.p[i] == doctest::Approx(logistic(-0.5 + 0.1 * h * t.columns[0][i])));
    }
}

TEST_CASE("reconstruction rejects bad inputs up front") {
    auto start = make_instant(2000, 1, 1);
    auto t = table(start, 48);
    auto m = models();
    m[5].reset();
    CHECK_THROWS_AS(reconstruct(m, t, start, t.time(47)), Error);
    CHECK_THROWS_AS(reconstruct(models(), t, start, t.time(47) + kHour), RangeError);
    auto renamed = t;
    renamed.names = {"y"};
    CHECK_THROWS_AS(reconstruct(models(), renamed, start, t.time(47)), SchemaError);
}

TEST_CASE("partial edge periods are trimmed") {
    AggregateSeries s;
    s.period = Period::monthly_mean_of_daily_max;
    for (int m = 1; m <= 6; ++m) s.period_start.push_back(make_instant(2000, m, 1));
    s.value = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    s.availability = {0.2, 0.9, 0.3, 1.0, 1.0, 0.4};
    auto t = trim_partial(s, 0.5);
    REQUIRE(t.size() == 4);
    CHECK(t.value.front() == 0.2);
    CHECK(t.value.back() == 0.5);
}

TEST_CASE("annual report drops thin edge years") {
    HourlySeries r;
    r.start = make_instant(2000, 10, 1);
    r.p.assign(std::size_t(hour_count(r.start, make_instant(2002, 2, 1))), 0.25);
    auto rows = reconstruction_report(r, nullptr);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].year == 2001);
    CHECK(rows[0].recon_mean == doctest::Approx(0.25));
    CHECK(std::isnan(rows[0].obs_mean));
}
