#include "foehn/errors.hpp"
#include "foehn/learners.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

using namespace foehn;

namespace {

Dataset logistic_data(int n, int k, std::uint64_t seed, double effect = 1.5) {
    Rng rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    Dataset d;
    d.X.resize(n, k);
    d.y.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) d.X(i, j) = z(rng) * (1.0 + j);
    for (int i = 0; i < n; ++i) d.y[i] = u(rng) < logistic(effect * d.X(i, 0) - 0.3) ? 1.0 : 0.0;
    for (int j = 0; j < k; ++j) d.names.push_back("x" + std::to_string(j));
    return d;
}

// Minimizes a unimodal function on [a, b].
template <class F>
double golden(F f, double a, double b) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return 0.5 * (a + b);
}

} // namespace

TEST_CASE("one-column lasso matches a nested golden-section search") {
    auto d = logistic_data(300, 1, 11);
    auto st = Standardization::fit(d.X);
    Eigen::MatrixXd Z = st.apply(d.X);
    const double lmax = lambda_max(Z, d.y);
    for (double frac : {0.8, 0.4, 0.1}) {
        const double lambda = frac * lmax;
        auto obj = [&](double b0, double b) {
            Eigen::VectorXd beta(1);
            beta << b;
            return lasso_objective(Z, d.y, b0, beta, lambda);
        };
        auto best_b0 = [&](double b) { return golden([&](double b0) { return obj(b0, b); }, -5, 5); };
        double b = golden([&](double bb) { return obj(best_b0(bb), bb); }, -5, 5);
        const double grid[] = {lambda};
        auto path = lasso_path(Z, d.y, grid, LassoOptions{});
        REQUIRE(path.size() == 1);
        CHECK(path[0].beta[0] == doctest::Approx(b).epsilon(1e-5));
        CHECK(path[0].beta0 == doctest::Approx(best_b0(b)).epsilon(1e-5));
    }
}

TEST_CASE("lambda_max is the largest intercept-only gradient") {
    auto d = logistic_data(200, 4, 12);
    Eigen::MatrixXd Z = Standardization::fit(d.X).apply(d.X);
    double ybar = d.y.mean();
    double expect = ((Z.transpose() * (d.y.array() - ybar).matrix()) / 200.0).cwiseAbs().maxCoeff();
    CHECK(lambda_max(Z, d.y) == doctest::Approx(expect));
    auto g = lambda_grid(2.0, 5, 1e-4);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(2.0));
    CHECK(g.back() == doctest::Approx(2e-4));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
}

TEST_CASE("standardization drops constant columns") {
    Eigen::MatrixXd X(4, 3);
    X << 1, 5, 2, 2, 5, 4, 3, 5, 6, 4, 5, 8;
    auto st = Standardization::fit(X);
    CHECK(st.kept == std::vector<std::size_t>{0, 2});
    CHECK(st.dropped == std::vector<std::size_t>{1});
    auto Z = st.apply(X);
    CHECK(Z.cols() == 2);
    CHECK(Z.col(0).mean() == doctest::Approx(0.0));
    CHECK(Z.col(1).squaredNorm() / 4.0 == doctest::Approx(1.0));
}

TEST_CASE("learner probabilities do not depend on column scale") {
    auto d = logistic_data(400, 3, 13);
    Dataset scaled = d;
    scaled.X.col(1) *= 1000.0;
    scaled.X.col(2) = scaled.X.col(2).array() * 0.001 + 50.0;
    LearnerOptions o;
    o.lasso.folds = 5;
    o.lasso.n_lambda = 30;
    o.stabsel.runs = 20;
    o.gbt.cv_folds = 2;
    o.gbt.grid = GbtGrid{{0.2}, {3}, {2}, {2}};
    for (auto k : {LearnerKind::lasso, LearnerKind::stabsel, LearnerKind::gbt}) {
        auto a = fit_learner(k, d, o, 7);
        auto b = fit_learner(k, scaled, o, 7);
        auto pa = predict(a, d.X, d.names);
        auto pb = predict(b, scaled.X, scaled.names);
        CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("model JSON round trip preserves predictions") {
    auto d = logistic_data(300, 3, 14);
    LearnerOptions o;
    o.lasso.folds = 3;
    o.lasso.n_lambda = 20;
    o.stabsel.runs = 10;
    o.gbt.cv_folds = 2;
    o.gbt.grid = GbtGrid{{0.2}, {3}, {2}, {2}};
    for (auto k : {LearnerKind::lasso, LearnerKind::stabsel, LearnerKind::gbt}) {
        auto m = fit_learner(k, d, o, 3);
        nlohmann::json j = m;
        auto back = j.get<LearnerModel>();
        CHECK(nlohmann::json(back).dump() == j.dump());
        CHECK((predict(m, d.X, d.names) - predict(back, d.X, d.names)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("prediction requires every model column") {
    auto d = logistic_data(200, 2, 15);
    LearnerOptions o;
    o.lasso.folds = 3;
    o.lasso.n_lambda = 10;
    auto m = fit_learner(LearnerKind::lasso, d, o, 1);
    CHECK_THROWS_AS(predict(m, d.X.leftCols(1), {"x0"}), SchemaError);
}

TEST_CASE("single-class data is rejected") {
    auto d = logistic_data(100, 2, 16);
    d.y.setZero();
    CHECK_THROWS_AS(fit_learner(LearnerKind::lasso, d, LearnerOptions{}, 1), EstimationError);
}

TEST_CASE("stratified folds balance each class") {
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) y[i] = i < 20 ? 1.0 : 0.0;
    Rng rng(1);
    auto f = stratified_folds(y, 5, rng);
    std::vector<int> pos(5), all(5);
    for (int i = 0; i < 100; ++i) ++all[std::size_t(f[std::size_t(i)])], pos[std::size_t(f[std::size_t(i)])] += y[i] > 0;
    for (int k = 0; k < 5; ++k) {
        CHECK(all[std::size_t(k)] == 20);
        CHECK(pos[std::size_t(k)] == 4);
    }
}

TEST_CASE("unpenalized logistic regression satisfies the score equations") {
    auto d = logistic_data(500, 2, 17);
    Eigen::MatrixXd Z = Standardization::fit(d.X).apply(d.X);
    auto f = fit_logistic(Z, d.y);
    REQUIRE(f.converged);
    Eigen::VectorXd r(500);
    for (int i = 0; i < 500; ++i) r[i] = d.y[i] - logistic(f.beta0 + Z.row(i).dot(f.beta));
    CHECK(std::abs(r.sum()) < 1e-8);
    CHECK((Z.transpose() * r).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("stability selection keeps the informative column") {
    auto d = logistic_data(800, 10, 18, 2.0);
    StabselOptions o;
    o.runs = 50;
    o.first_k = 3;
    auto m = fit_stabsel(d, o);
    CHECK(m.selection_freq[0] > 0.9);
    REQUIRE(!m.selected.empty());
    CHECK(m.selected[0] == 0);
    CHECK(m.beta.size() == m.selected.size());
}

TEST_CASE("leaf weight and split gain closed forms") {
    CHECK(leaf_weight(3.0, 2.0, 1.0) == doctest::Approx(-1.0));
    double GL = -2, HL = 1.5, GR = 3, HR = 2.5, lam = 1.0;
    double expect = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - (GL + GR) * (GL + GR) / (HL + HR + lam));
    CHECK(split_gain(GL, HL, GR, HR, lam) == doctest::Approx(expect));
}

TEST_CASE("boosting respects depth and a prohibitive gamma") {
    auto d = logistic_data(500, 3, 19);
    GbtParams p;
    p.max_depth = 2;
    p.nrounds = 5;
    auto m = train_gbt(d, p, 1);
    for (const auto& t : m.trees) CHECK(t.depth() <= 2);
    p.gamma = 1e9;
    auto flat = train_gbt(d, p, 1);
    CHECK(flat.no_splits);
}

TEST_CASE("boosting grid has 108 distinct combinations") {
    auto c = GbtGrid{}.combinations(GbtParams{});
    CHECK(c.size() == 108);
}
