#include "foehn/errors.hpp"
#include "foehn/evaluate.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace foehn;

TEST_CASE("Brier score arithmetic") {
    const double p[] = {0.9, 0.2, 0.5, 0.0};
    const double o[] = {1, 0, 1, 0};
    CHECK(brier(p, o) == doctest::Approx((0.01 + 0.04 + 0.25 + 0.0) / 4.0));
    const double perfect[] = {1, 0, 1, 0};
    CHECK(brier(perfect, o) == 0.0);
}

TEST_CASE("confusion metrics in percent") {
    auto m = confusion_metrics(30, 10, 5, 55);
    CHECK(m.fnr == doctest::Approx(25.0));
    CHECK(m.fpr == doctest::Approx(100.0 * 5 / 60));
    CHECK(m.pc == doctest::Approx(85.0));
    CHECK(m.n() == 100);
    auto none = confusion_metrics(0, 0, 1, 9);
    CHECK(std::isnan(none.fnr));
}

TEST_CASE("event metrics threshold at 0.5 inclusive") {
    const double p[] = {0.5, 0.49, 0.7, 0.1};
    const double o[] = {1, 1, 0, 0};
    auto m = event_metrics(p, o);
    CHECK(m.tp == 1);
    CHECK(m.fn == 1);
    CHECK(m.fp == 1);
    CHECK(m.tn == 1);
}

TEST_CASE("six two-year folds partition twelve years") {
    auto plan = make_folds(2011, 2022);
    REQUIRE(plan.folds.size() == 6);
    std::multiset<int> tested;
    for (const auto& f : plan.folds) {
        CHECK(f.test_last - f.test_first == 1);
        CHECK(f.train_years.size() == 10);
        for (int y : f.train_years) CHECK_FALSE(f.is_test(y));
        tested.insert(f.test_first);
        tested.insert(f.test_last);
    }
    CHECK(tested.size() == 12);
    CHECK(std::set<int>(tested.begin(), tested.end()).size() == 12);
    CHECK_THROWS_AS(make_folds(2011, 2021), ConfigError);
}

TEST_CASE("folds without labeled test hours are infeasible") {
    HourlyLabelSeries l;
    l.start = make_instant(2011, 1, 1);
    l.label.assign(std::size_t(hour_count(l.start, make_instant(2022, 12, 31, 23))), HourLabel::no_foehn);
    for (std::size_t i = 0; i < l.size(); ++i)
        if (to_civil(l.time(i)).year <= 2012) l.label[i] = HourLabel::missing;
    auto plan = make_folds(2011, 2022, &l);
    CHECK_FALSE(plan.folds[0].feasible);
    for (std::size_t k = 1; k < 6; ++k) CHECK(plan.folds[k].feasible);
}

TEST_CASE("train layout enumerates every job once") {
    auto jobs = train_layout({"A", "B"}, {LearnerKind::lasso, LearnerKind::gbt},
                             {VariableSet::direct, VariableSet::full});
    CHECK(jobs.size() == 2 * 24 * 2 * 2);
    std::set<std::uint64_t> seeds;
    for (const auto& j : jobs) seeds.insert(job_seed(1, j.station, j.hour, j.learner, j.set, 0));
    CHECK(seeds.size() == jobs.size());
    CHECK(job_seed(1, "A", 3, LearnerKind::lasso, VariableSet::full, 2) ==
          job_seed(1, "A", 3, LearnerKind::lasso, VariableSet::full, 2));
}

TEST_CASE("join keeps labeled hours with features") {
    FeatureTable f;
    f.start = make_instant(2011, 1, 1);
    f.rows = 48;
    f.names = {"x"};
    f.columns = {std::vector<double>(48)};
    for (std::size_t i = 0; i < 48; ++i) f.columns[0][i] = double(i);
    HourlyLabelSeries l;
    l.start = make_instant(2011, 1, 1, 12);
    l.label.assign(48, HourLabel::foehn);
    l.label[0] = HourLabel::missing;
    auto j = join(f, l);
    CHECK(j.data.rows() == 35);
    CHECK(j.time.front() == make_instant(2011, 1, 1, 13));
    CHECK(j.hour.front() == 13);
    CHECK(j.data.X(0, 0) == 13.0);
}

TEST_CASE("summary lists the reference values") {
    ScoreReport r;
    std::ostringstream out;
    write_score_summary(out, r);
    for (const char* v : {"0.0261", "0.0276", "0.0283"}) CHECK(out.str().find(v) != std::string::npos);
}
