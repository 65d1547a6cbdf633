#include "foehn/aggregate.hpp"
#include "foehn/errors.hpp"
#include "foehn/random.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <fstream>
#include <sstream>

using namespace foehn;

TEST_CASE("hourly label properties over random slot sets") {
    Rng rng(5);
    std::uniform_real_distribution<double> u;
    std::uniform_int_distribution<int> len(0, 6);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<double> p(std::size_t(len(rng)));
        for (auto& x : p) x = u(rng) < 0.3 ? kMissing : u(rng);
        auto l = hourly_label(p);
        std::size_t avail = 0, high = 0;
        for (double x : p) avail += !is_missing(x), high += !is_missing(x) && x >= 0.5;
        CHECK((l == HourLabel::missing) == (avail < 4));
        // Raising any available posterior never turns foehn into no foehn.
        if (l == HourLabel::foehn)
            for (auto& x : p)
                if (!is_missing(x)) x = 1.0;
        if (l == HourLabel::foehn) CHECK(hourly_label(p) == HourLabel::foehn);
    }
    std::vector<double> seven(7, 1.0);
    CHECK_THROWS_AS(hourly_label(seven), ContractError);
}

TEST_CASE("hour T summarizes the slots in (T-50min, T]") {
    PosteriorSeries s;
    s.start = make_instant(2020, 1, 1, 0, 10);
    // Slots 00:10..01:00 form hour 01; 01:10..02:00 hour 02.
    s.p = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
    s.precondition.assign(s.p.size(), Precondition::inside);
    auto h = hourly_labels(s);
    REQUIRE(h.size() >= 2);
    CHECK(h.time(0) == make_instant(2020, 1, 1, 1));
    CHECK(h.label[0] == HourLabel::foehn);
    CHECK(h.label[1] == HourLabel::no_foehn);
}

TEST_CASE("daily maxima own the hours (d 00:00, d+1 00:00]") {
    HourlySeries h;
    h.start = make_instant(2020, 1, 1, 1);
    h.p.assign(48, 0.0);
    h.p[23] = 1.0;  // 2020-01-02T00:00 belongs to Jan 1
    auto d = daily_max(h);
    REQUIRE(d.size() >= 2);
    CHECK(d.period_start[0] == make_instant(2020, 1, 1));
    CHECK(d.value[0] == 1.0);
    CHECK(d.value[1] == 0.0);
    CHECK(d.availability[0] == doctest::Approx(1.0));
}

TEST_CASE("periodic means honour the availability threshold") {
    AggregateSeries daily;
    daily.period = Period::daily_max;
    for (int day = 1; day <= 31; ++day) {
        daily.period_start.push_back(make_instant(2021, 1, day));
        bool have = day <= 25;
        daily.value.push_back(have ? double(day % 2) : kMissing);
        daily.availability.push_back(have ? 1.0 : 0.0);
    }
    auto m = periodic_mean(daily, PeriodUnit::month, 0.8);
    REQUIRE(m.size() == 1);
    CHECK(m.availability[0] == doctest::Approx(25.0 / 31.0));
    CHECK(m.value[0] == doctest::Approx(13.0 / 25.0));
    auto strict = periodic_mean(daily, PeriodUnit::month, 0.9);
    CHECK(is_missing(strict.value[0]));
}

TEST_CASE("Hovmoller means match a closed form") {
    // p = hour/23 in January, 0.5 in July, across two decades.
    HourlySeries h;
    h.start = make_instant(2018, 1, 1);
    auto last = make_instant(2021, 12, 31, 23);
    h.p.resize(std::size_t(hour_count(h.start, last)));
    for (std::size_t i = 0; i < h.size(); ++i) {
        auto c = to_civil(h.time(i));
        h.p[i] = c.month == 1 ? c.hour / 23.0 : c.month == 7 ? 0.5 : (c.month == 3 && c.hour == 5 ? kMissing : 0.0);
    }
    auto hv = hovmoller(h);
    REQUIRE(hv.size() == 2);
    CHECK(hv[0].decade == 2010);
    CHECK(hv[1].decade == 2020);
    for (const auto& m : hv) {
        for (std::size_t hr = 0; hr < 24; ++hr) {
            CHECK(m.mean[0][hr] == doctest::Approx(hr / 23.0));
            CHECK(m.mean[6][hr] == doctest::Approx(0.5));
        }
        CHECK(std::isnan(m.mean[2][5]));
        CHECK(m.count[0][0] == 31 * 2);
    }
}

TEST_CASE("labels CSV round trip") {
    HourlyLabelSeries l;
    l.start = make_instant(2020, 5, 1);
    l.label = {HourLabel::foehn, HourLabel::missing, HourLabel::no_foehn};
    std::ostringstream out;
    write_labels_csv(out, l);
    auto path = std::filesystem::temp_directory_path() / "foehn_unit_labels.csv";
    std::ofstream(path) << out.str();
    auto back = read_labels_csv(path);
    CHECK(back.start == l.start);
    CHECK(back.label == l.label);
    auto p = as_probabilities(back);
    CHECK(p.p[0] == 1.0);
    CHECK(std::isnan(p.p[1]));
    CHECK(p.p[2] == 0.0);
    std::filesystem::remove(path);
}
