#include "foehn/data_io.hpp"
#include "foehn/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace foehn;

TEST_CASE("observations are regularized onto the 10-min grid") {
    std::istringstream in("timestamp,ff,dd,t,rh\n"
                          "2020-01-01T00:20,3,180,5,40\n"
                          "2020-01-01T00:00,1,170,4,50\n"
                          "2020-01-01T00:30,,190,6,\n");
    auto s = parse_observations(in, "X");
    REQUIRE(s.size() == 4);
    CHECK(s.start == make_instant(2020, 1, 1));
    CHECK(s.ff[0] == 1.0);
    CHECK(is_missing(s.ff[1]));
    CHECK(is_missing(s.t[1]));
    CHECK(s.ff[2] == 3.0);
    CHECK(is_missing(s.ff[3]));
    CHECK(s.dd[3] == 190.0);
    CHECK(is_missing(s.rh[3]));
}

TEST_CASE("observation parse errors") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_observations(in, "X");
    };
    CHECK_THROWS_AS(parse("time,ff\n"), ParseError);
    CHECK_THROWS_AS(parse("timestamp,ff,dd,t,rh\n2020-01-01T00:05,1,1,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse("timestamp,ff,dd,t,rh\n2020-01-01T00:00,1,360,1,1\n"), ValueError);
    CHECK_THROWS_AS(parse("timestamp,ff,dd,t,rh\n2020-01-01T00:00,1,1,1,101\n"), ValueError);
    CHECK_THROWS_AS(parse("timestamp,ff,dd,t,rh\n2020-01-01T00:00,1,1,1,1\n2020-01-01T00:00,1,1,1,1\n"),
                    IntegrityError);
}

TEST_CASE("observation CSV round trip") {
    std::istringstream in("timestamp,ff,dd,t,rh\n2020-01-01T00:00,1.5,170,4.25,50\n2020-01-01T00:10,2,,3,60\n");
    auto s = parse_observations(in, "X");
    std::ostringstream out;
    write_observations(out, s);
    std::istringstream back(out.str());
    auto r = parse_observations(back, "X");
    CHECK(r.size() == s.size());
    CHECK(r.t[0] == 4.25);
    CHECK(is_missing(r.dd[1]));
}

TEST_CASE("intersect keeps the common span") {
    ObservationSeries a, b;
    a.start = make_instant(2020, 1, 1);
    a.resize(10);
    b.start = make_instant(2020, 1, 1, 0, 30);
    b.resize(10);
    for (std::size_t i = 0; i < 10; ++i) a.t[i] = double(i), b.t[i] = 100.0 + double(i);
    auto [x, y] = intersect(a, b);
    CHECK(x.start == b.start);
    CHECK(x.size() == 7);
    CHECK(y.size() == 7);
    CHECK(x.t[0] == 3.0);
    CHECK(y.t[0] == 100.0);
    ObservationSeries c;
    c.start = make_instant(2021, 1, 1);
    c.resize(3);
    CHECK_THROWS_AS(intersect(a, c), IntegrityError);
}

TEST_CASE("gridded fields round trip through disk") {
    Grid g{46.0, 8.0, 0.25, 0.25, 3, 4};
    GriddedFieldSet set(g, make_instant(2020, 1, 1), 2);
    std::vector<double> v(24);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * double(i);
    set.add_field("temperature_850", v);
    auto dir = std::filesystem::temp_directory_path() / "foehn_unit_gridded";
    std::filesystem::remove_all(dir);
    write_gridded(dir, set);
    auto back = load_gridded(dir);
    CHECK(back.ntimes() == 2);
    CHECK(back.grid().nlon == 4);
    CHECK(back.slice("temperature_850", 1).at(2, 3) == v[12 + 2 * 4 + 3]);
    CHECK(back.time_index(make_instant(2020, 1, 1, 1)) == 1);
    CHECK(back.time_index(make_instant(2020, 1, 1, 2)) == -1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("level names") {
    CHECK(split_level("temperature_850") == std::pair<std::string, int>{"temperature", 850});
    CHECK(split_level("surface_pressure") == std::pair<std::string, int>{"surface_pressure", 0});
    CHECK(level_name("geopotential", 500) == "geopotential_500");
}

TEST_CASE("station metadata validation") {
    StationMeta s{"A", StationRole::valley, 46.8, 8.6, 440.0, FoehnType::south};
    CHECK_NOTHROW(validate(s));
    s.lat = 95.0;
    CHECK_THROWS_AS(validate(s), ValueError);
}
