#include "foehn/errors.hpp"
#include "foehn/svg.hpp"

#include <doctest.h>

#include <cmath>

using namespace foehn;

namespace {

std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
}

std::size_t legend_entries(const std::string& svg) {
    auto a = svg.find("<g class=\"legend\">");
    auto b = svg.find("</g>", a);
    return count(svg.substr(a, b - a), "<text");
}

} // namespace

TEST_CASE("empty inputs are rejected") {
    CHECK_THROWS_AS(render_annual_svg({}, "t"), ValueError);
    CHECK_THROWS_AS(render_trend_svg(StrFit{}, "t"), ValueError);
    CHECK_THROWS_AS(render_decade_svg(DecadeSeasonal{}, "t"), ValueError);
    HovmollerMatrix empty;
    for (auto& row : empty.mean) row.fill(std::nan(""));
    CHECK_THROWS_AS(render_hovmoller_svg(empty, "t"), ValueError);
    CHECK_THROWS_AS(render_brier_svg(ScoreReport{}, "t"), ValueError);
}

TEST_CASE("constant Hovmoller matrix has a single legend entry") {
    HovmollerMatrix m;
    m.decade = 2010;
    for (auto& row : m.mean) row.fill(0.3);
    auto svg = render_hovmoller_svg(m, "const");
    CHECK(legend_entries(svg) == 1);
    CHECK(count(svg, "<rect") >= 12 * 24);
}

TEST_CASE("trend band is drawn before the trend line") {
    std::vector<double> y(48);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 0.01 * double(t) + std::sin(double(t));
    auto fit = fit_str(y, 2000, 1);
    auto svg = render_trend_svg(fit, "trend & <band>");
    auto band = svg.find("class=\"band\"");
    auto line = svg.find("class=\"trend\"");
    REQUIRE(band != std::string::npos);
    REQUIRE(line != std::string::npos);
    CHECK(band < line);
    CHECK(svg.find("trend &amp; &lt;band&gt;") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
}

TEST_CASE("rendering is deterministic") {
    std::vector<ReconstructionYear> rows;
    for (int y = 2000; y < 2010; ++y) rows.push_back({y, 0.1 + 0.01 * (y - 2000), y % 2 ? 0.12 : std::nan(""), 0.9, 100});
    auto a = render_annual_svg(rows, "annual");
    auto b = render_annual_svg(rows, "annual");
    CHECK(a == b);
    CHECK(a.find("<svg") != std::string::npos);
}

TEST_CASE("Brier chart draws one bar per mean test row") {
    ScoreReport r;
    for (auto s : {VariableSet::direct, VariableSet::full}) {
        ScoreRow row;
        row.station = "A";
        row.set = s;
        row.fold = "mean";
        row.split = "test";
        row.brier = s == VariableSet::full ? 0.03 : 0.08;
        r.rows.push_back(row);
    }
    auto svg = render_brier_svg(r, "brier");
    CHECK(count(svg, "class=\"bar\"") == 2);
}
