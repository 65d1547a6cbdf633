// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "foehn/aggregate.hpp"
#include "foehn/classify.hpp"
#include "foehn/cli.hpp"
#include "foehn/decompose.hpp"
#include "foehn/evaluate.hpp"
#include "foehn/learners.hpp"
#include "foehn/random.hpp"
#include "foehn/reconstruct.hpp"
#include "foehn/time.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace foehn;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path g_root;

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "foehn");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(int(argv.size()), argv.data());
}

double logistic_fn(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------- 1

Outcome criterion_hourly_label() {
    auto t0 = Clock::now();
    // Slot states: missing, just below the threshold, exactly at the threshold.
    const double states[3] = {std::nan(""), std::nextafter(0.5, 0.0), 0.5};
    int matches = 0, total = 0;
    for (int code = 0; code < 729; ++code) {
        std::vector<double> slots;
        int c = code;
        for (int s = 0; s < 6; ++s, c /= 3) slots.push_back(states[c % 3]);
        // Oracle: the fraction of available slots at or above 0.5.
        int n = 0;
        double hits = 0.0;
        for (double p : slots)
            if (!std::isnan(p)) ++n, hits += p >= 0.5 ? 1.0 : 0.0;
        HourLabel expect = n < 4 ? HourLabel::missing : (hits / n >= 0.5 ? HourLabel::foehn : HourLabel::no_foehn);
        matches += hourly_label(slots) == expect;
        ++total;
    }
    double dt = seconds_since(t0);
    return {matches == 729 && total == 729 && dt < 1.0,
            std::to_string(matches) + "/" + std::to_string(total) + " configurations match, " + fmt("%.4f s", dt)};
}

// ---------------------------------------------------------------- 2

Outcome criterion_em() {
    auto t0 = Clock::now();
    const double mu1 = -6.0, s1 = 2.0, mu2 = 0.5, s2 = 1.2;
    const double a0 = -0.5, a1 = -1.5, a2 = 1.0;
    Rng rng(2024);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    const std::size_t n = 50000;
    std::vector<double> y(n), rh(n), ff(n);
    for (std::size_t i = 0; i < n; ++i) {
        double zr = z(rng), zf = z(rng);
        rh[i] = 60.0 + 15.0 * zr;
        ff[i] = 5.0 + 3.0 * zf;
        // Standardized covariates drive the component weight.
        bool foehn = u(rng) < logistic_fn(a0 + a1 * zr + a2 * zf);
        y[i] = foehn ? mu2 + s2 * z(rng) : mu1 + s1 * z(rng);
    }
    auto p = em_fit(y, rh, ff);
    double dt = seconds_since(t0);
    bool monotone = true;
    for (std::size_t i = 1; i < p.loglik_trace.size(); ++i)
        monotone &= p.loglik_trace[i] >= p.loglik_trace[i - 1] - 1e-10;
    double e_mu = std::max(std::abs(p.mu1 - mu1), std::abs(p.mu2 - mu2));
    double e_sd = std::max(std::abs(p.sigma1 - s1), std::abs(p.sigma2 - s2));
    bool pass = e_mu <= 0.3 && e_sd <= 0.2 && monotone && p.converged && dt < 30.0;
    return {pass, "max |mean error| " + fmt("%.4f", e_mu) + ", max |sigma error| " + fmt("%.4f", e_sd) +
                      ", trace " + (monotone ? "non-decreasing" : "DECREASES") + " over " +
                      std::to_string(p.loglik_trace.size()) + " values, " + fmt("%.2f s", dt)};
}

// ---------------------------------------------------------------- 3

// KKT residual computed from scratch: intercept gradient, inactive
// |g| <= lambda, active g = lambda * sign(beta).
double kkt_residual(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double b0, const Eigen::VectorXd& b,
                    double lambda) {
    const auto n = Z.rows();
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = y[i] - logistic_fn(b0 + Z.row(i).dot(b));
    double worst = std::abs(r.sum() / double(n));
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        double g = Z.col(j).dot(r) / double(n);
        worst = std::max(worst, b[j] == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                            : std::abs(g - lambda * (b[j] > 0 ? 1.0 : -1.0)));
    }
    return worst;
}

Outcome criterion_lasso_kkt() {
    auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t points = 0;
    bool null_ok = true;
    for (int seed = 1; seed <= 20; ++seed) {
        Rng rng{std::uint64_t(seed)};
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> u;
        const int n = 500, k = 100;
        Eigen::MatrixXd X(n, k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) X(i, j) = z(rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            double eta = -0.5 + 1.2 * X(i, 0) - 0.8 * X(i, 1) + 0.5 * X(i, 2);
            y[i] = u(rng) < logistic_fn(eta) ? 1.0 : 0.0;
        }
        auto st = Standardization::fit(X);
        Eigen::MatrixXd Z = st.apply(X);
        LassoOptions opts;
        const double lmax = lambda_max(Z, y);
        auto grid = lambda_grid(lmax, opts.n_lambda, opts.lambda_min_ratio);
        auto path = lasso_path(Z, y, grid, opts);
        for (const auto& pt : path) {
            worst = std::max(worst, kkt_residual(Z, y, pt.beta0, pt.beta, pt.lambda));
            ++points;
        }
        const double above[2] = {lmax, 2.0 * lmax};
        auto null_path = lasso_path(Z, y, above, opts);
        const double ybar = y.mean();
        for (const auto& pt : null_path)
            null_ok &= (pt.beta.array() == 0.0).all() && std::abs(pt.beta0 - std::log(ybar / (1 - ybar))) < 1e-8;
    }
    double dt = seconds_since(t0);
    return {worst <= 1e-6 && null_ok && dt < 120.0,
            "max KKT residual " + fmt("%.2e", worst) + " over " + std::to_string(points) +
                " path points, lambda >= lambda_max intercept-only: " + (null_ok ? "yes" : "NO") + ", " +
                fmt("%.1f s", dt)};
}

// ---------------------------------------------------------------- 4

Outcome criterion_stabsel() {
    auto t0 = Clock::now();
    int hits = 0;
    std::string freqs;
    for (int rep = 0; rep < 10; ++rep) {
        Rng rng(derive_seed(77, {std::uint64_t(rep)}));
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> u;
        const int n = 2000, k = 100, informative = 37;
        Dataset d;
        d.X.resize(n, k);
        d.y.resize(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) d.X(i, j) = z(rng);
        for (int i = 0; i < n; ++i) d.y[i] = u(rng) < logistic_fn(1.5 * d.X(i, informative)) ? 1.0 : 0.0;
        for (int j = 0; j < k; ++j) d.names.push_back("x" + std::to_string(j));
        StabselOptions opts;
        opts.runs = 200;
        opts.first_k = 40;
        opts.threshold = 0.6;
        opts.seed = std::uint64_t(rep + 1);
        auto m = fit_stabsel(d, opts);
        double f = m.selection_freq[informative];
        hits += f > 0.6;
        freqs += (rep ? " " : "") + fmt("%.2f", f);
    }
    return {hits >= 9, std::to_string(hits) + "/10 repetitions above 0.6 (frequencies " + freqs + "), " +
                           fmt("%.1f s", seconds_since(t0))};
}

// ---------------------------------------------------------------- 5

Outcome criterion_gbt() {
    // Training logloss per round at subsample = 1.
    bool monotone = true;
    for (int seed = 1; seed <= 5; ++seed) {
        Rng rng{std::uint64_t(seed)};
        std::normal_distribution<double> z;
        std::uniform_real_distribution<double> u;
        Dataset d;
        const int n = 1000, k = 5;
        d.X.resize(n, k);
        d.y.resize(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) d.X(i, j) = z(rng);
        for (int i = 0; i < n; ++i)
            d.y[i] = u(rng) < logistic_fn(d.X(i, 0) - d.X(i, 1) * d.X(i, 2) + 0.5 * std::sin(3 * d.X(i, 3))) ? 1 : 0;
        for (int j = 0; j < k; ++j) d.names.push_back("x" + std::to_string(j));
        GbtParams p;
        p.subsample = 1.0;
        p.nrounds = 20;
        p.eta = 0.3;
        p.max_depth = 4;
        p.min_child_weight = 1.0;
        p.gamma = 0.0;
        std::vector<double> trace;
        train_gbt(d, p, 1, &trace);
        for (std::size_t i = 1; i < trace.size(); ++i) monotone &= trace[i] <= trace[i - 1] + 1e-12;
    }

    // Two-leaf trees: leaf outputs against -G / (H + lambda) by hand.
    double worst = 0.0;
    const std::vector<double> xs{0, 0, 0, 1, 1, 1, 1};
    const std::vector<double> ys{0, 0, 1, 1, 1, 0, 1};
    for (double lambda_reg : {0.0, 1.0, 3.5}) {
        for (double eta : {1.0, 0.3}) {
            Dataset d;
            d.X.resize(Eigen::Index(xs.size()), 1);
            d.y.resize(Eigen::Index(xs.size()));
            for (std::size_t i = 0; i < xs.size(); ++i) d.X(Eigen::Index(i), 0) = xs[i], d.y[Eigen::Index(i)] = ys[i];
            d.names = {"x"};
            GbtParams p;
            p.eta = eta;
            p.max_depth = 1;
            p.min_child_weight = 0.0;
            p.gamma = 0.0;
            p.subsample = 1.0;
            p.nrounds = 1;
            p.lambda_reg = lambda_reg;
            auto m = train_gbt(d, p, 1);
            double ybar = 4.0 / 7.0, p0 = ybar;
            double GL = 0, HL = 0, GR = 0, HR = 0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                double g = p0 - ys[i], h = p0 * (1 - p0);
                (xs[i] < 0.5 ? GL : GR) += g;
                (xs[i] < 0.5 ? HL : HR) += h;
            }
            const auto& t = m.trees.at(0);
            if (t.nodes.size() != 3) return {false, "expected a two-leaf tree"};
            const auto& root = t.nodes[0];
            double left = t.nodes[std::size_t(root.left)].value, right = t.nodes[std::size_t(root.right)].value;
            worst = std::max(worst, std::abs(left - eta * (-GL / (HL + lambda_reg))));
            worst = std::max(worst, std::abs(right - eta * (-GR / (HR + lambda_reg))));
            worst = std::max(worst, std::abs(std::log(ybar / (1 - ybar)) - m.base_score));
        }
    }

    GbtGrid grid;
    auto combos = grid.combinations(GbtParams{});
    std::set<std::tuple<double, int, double, double>> unique;
    for (const auto& c : combos) unique.insert({c.eta, c.max_depth, c.min_child_weight, c.gamma});
    bool grid_ok = combos.size() == 108 && unique.size() == 108;
    return {monotone && worst <= 1e-10 && grid_ok,
            std::string("logloss ") + (monotone ? "non-increasing" : "INCREASES") + ", max leaf deviation " +
                fmt("%.1e", worst) + ", grid " + std::to_string(combos.size()) + " combinations (" +
                std::to_string(unique.size()) + " unique)"};
}

// ---------------------------------------------------------------- 6

struct ScoreLine {
    std::string station, learner, set, fold, split;
    double brier, fnr, fpr, pc, n;
};

std::vector<ScoreLine> read_scores(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<ScoreLine> out;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        ScoreLine s;
        std::string f[10];
        for (auto& x : f) std::getline(ss, x, ',');
        auto num = [](const std::string& v) { return v == "NA" || v.empty() ? std::nan("") : std::stod(v); };
        s = {f[0], f[1], f[2], f[3], f[4], num(f[5]), num(f[6]), num(f[7]), num(f[8]), num(f[9])};
        out.push_back(s);
    }
    return out;
}

// Shrinks the learner settings so the synthetic pipeline stays within the
// time budget on a single core.
void lighten_config(const fs::path& config) {
    json j;
    std::ifstream(config) >> j;
    j["learners"]["lasso"]["folds"] = 5;
    j["learners"]["lasso"]["n_lambda"] = 50;
    j["learners"]["stabsel"]["runs"] = 10;
    j["learners"]["stabsel"]["n_lambda"] = 30;
    j["learners"]["gbt"]["cv_folds"] = 2;
    j["learners"]["gbt"]["max_rounds"] = 5;
    j["learners"]["gbt"]["grid"] = {{"eta", {0.2}}, {"max_depth", {5}}, {"min_child_weight", {4}}, {"gamma", {2}}};
    std::ofstream(config) << j.dump(2) << '\n';
}

Outcome criterion_end_to_end() {
    auto t0 = Clock::now();
    const fs::path dir = g_root / "e2e";
    const std::string config = (dir / "config.json").string();
    if (cli({"synth", "--seed", "42", "--years", "12", "--out", dir.string()}) != 0) return {false, "synth failed"};
    lighten_config(config);
    if (cli({"classify", "--config", config}) != 0) return {false, "classify failed"};
    if (cli({"aggregate", "--config", config}) != 0) return {false, "aggregate failed"};
    if (cli({"cv", "--config", config, "--learner", "lasso"}) != 0) return {false, "cv failed"};
    double dt = seconds_since(t0);

    auto rows = read_scores(dir / "out" / "scores_cv_lasso.csv");
    // Pooled test Brier from the per-fold rows (each a mean over its hours).
    std::map<std::string, std::pair<double, double>> pooled;  // set -> (sum of squared errors, n)
    std::map<std::string, double> mean_brier, pc;
    for (const auto& r : rows) {
        if (r.split != "test") continue;
        if (r.fold == "mean") {
            mean_brier[r.set] = r.brier;
            pc[r.set] = r.pc;
        } else {
            pooled[r.set].first += r.brier * r.n;
            pooled[r.set].second += r.n;
        }
    }
    // Base rate over the labeled test hours of the CV period.
    auto labels = read_labels_csv(dir / "out" / "labels_SYN_V.csv");
    double pos = 0, cnt = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto y = to_civil(labels.time(i)).year;
        if (y < 2011 || y > 2022 || labels.label[i] == HourLabel::missing) continue;
        pos += labels.label[i] == HourLabel::foehn;
        cnt += 1;
    }
    if (cnt == 0 || !pooled.count("full") || !mean_brier.count("direct")) return {false, "missing score rows"};
    double base = pos / cnt;
    double base_brier = base * (1 - base);
    double full_brier = pooled["full"].first / pooled["full"].second;
    bool pass = full_brier < 0.5 * base_brier && pc["full"] > 95.0 && mean_brier["full"] < mean_brier["direct"] &&
                dt < 600.0;
    return {pass, "pooled test Brier " + fmt("%.4f", full_brier) + " vs base-rate " + fmt("%.4f", base_brier) +
                      ", PC " + fmt("%.2f%%", pc["full"]) + ", mean Brier full " + fmt("%.4f", mean_brier["full"]) +
                      " vs direct " + fmt("%.4f", mean_brier["direct"]) + ", " + fmt("%.0f s", dt)};
}

// ---------------------------------------------------------------- 7

Outcome criterion_calendar() {
    // Oracle: days per year from the leap-year rule times 24.
    long expected = 0;
    for (int y = 1940; y <= 2022; ++y) expected += 24L * ((y % 4 == 0 && (y % 100 != 0 || y % 400 == 0)) ? 366 : 365);

    const Instant first = make_instant(1940, 1, 1, 0), last = make_instant(2022, 12, 31, 23);
    FeatureTable t;
    t.start = first;
    t.rows = std::size_t(hour_count(first, last));
    t.names = {"x"};
    t.columns = {std::vector<double>(t.rows)};
    for (std::size_t i = 0; i < t.rows; ++i) t.columns[0][i] = std::sin(double(i) * 1e-3);
    HourlyModels models(24);
    for (int h = 0; h < 24; ++h) {
        LassoModel m;
        m.names = {"x"};
        m.beta = {0.5};
        m.beta0 = -1.0;
        models[std::size_t(h)] = m;
    }
    auto recon = reconstruct(models, t, first, last);
    bool ends = recon.start == first && recon.time(recon.size() - 1) == last;
    bool pass = expected == 727584 && long(recon.size()) == 727584 && ends;
    return {pass, "reconstruction 1940-01-01T00 to 2022-12-31T23 has " + std::to_string(recon.size()) +
                      " hourly values (calendar oracle " + std::to_string(expected) + ")"};
}

// ---------------------------------------------------------------- 8

double rms(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s / double(v.size()));
}

Outcome criterion_str() {
    const int years = 30, J = years * 12;
    Rng rng(8);
    std::normal_distribution<double> z;
    std::vector<double> y(J), line(J), cycle(J);
    for (int t = 0; t < J; ++t) {
        line[std::size_t(t)] = -1.0 + 2.0 * t / (J - 1);
        cycle[std::size_t(t)] = std::sin(2 * M_PI * (t % 12) / 12.0) + 0.4 * std::cos(4 * M_PI * (t % 12) / 12.0);
        y[std::size_t(t)] = line[std::size_t(t)] + cycle[std::size_t(t)] + 0.01 * z(rng);
    }
    auto fit = fit_str(y, 1990, 1);
    double add = 0, zero_sum = 0;
    for (int t = 0; t < J; ++t) {
        auto i = std::size_t(t);
        add = std::max(add, std::abs(fit.y[i] - (fit.trend[i] + fit.seasonal[i] + fit.remainder[i])));
    }
    for (const auto& yr : fit.seasonal_by_year) {
        double s = 0;
        for (double v : yr) s += v;
        zero_sum = std::max(zero_sum, std::abs(s));
    }
    std::vector<double> et, es, tt, ss;
    for (int t = 12; t < J - 12; ++t) {
        auto i = std::size_t(t);
        et.push_back(fit.trend[i] - line[i]);
        es.push_back(fit.seasonal[i] - cycle[i]);
        tt.push_back(line[i]);
        ss.push_back(cycle[i]);
    }
    double rel_t = rms(et) / rms(tt), rel_s = rms(es) / rms(ss);

    // Strong trend against white noise.
    int strong_hits = 0, noise_hits = 0;
    for (int seed = 1; seed <= 10; ++seed) {
        Rng r{std::uint64_t(seed)};
        std::vector<double> a(J), b(J);
        for (int t = 0; t < J; ++t) {
            double e = z(r);
            a[std::size_t(t)] = 3.0 * t / (J - 1) + e;
            b[std::size_t(t)] = e;
        }
        strong_hits += trend_significance(fit_str(a, 1990, 1));
        noise_hits += trend_significance(fit_str(b, 1990, 1));
    }
    bool pass = add <= 1e-12 && zero_sum <= 1e-8 && rel_t <= 0.02 && rel_s <= 0.02 && strong_hits == 10 &&
                noise_hits == 0;
    return {pass, "additivity " + fmt("%.1e", add) + ", yearly seasonal sum " + fmt("%.1e", zero_sum) +
                      ", RMS error trend " + fmt("%.2f%%", 100 * rel_t) + " seasonal " + fmt("%.2f%%", 100 * rel_s) +
                      ", significant: strong trend " + std::to_string(strong_hits) + "/10, white noise " +
                      std::to_string(noise_hits) + "/10"};
}

// ---------------------------------------------------------------- 9

Outcome criterion_reference_targets() {
    ScoreReport rep;
    ScoreRow r;
    r.station = "S";
    r.fold = "mean";
    r.split = "test";
    r.brier = 0.1;
    rep.rows.push_back(r);
    std::ostringstream summary;
    write_score_summary(summary, rep);

    std::string report;
    const fs::path dir = g_root / "e2e" / "out";
    if (cli({"report", "--out", dir.string()}) == 0) {
        std::ifstream in(dir / "report.md");
        report.assign(std::istreambuf_iterator<char>(in), {});
    }
    const char* targets[] = {"0.0261", "0.0276", "0.0283", "15.7", "0.4", "98.8", "482.4"};
    int in_summary = 0, in_report = 0;
    for (const char* t : targets) {
        in_summary += summary.str().find(t) != std::string::npos;
        in_report += report.find(t) != std::string::npos;
    }
    return {in_summary == 7 && in_report == 7,
            "reference values listed in the CV summary (" + std::to_string(in_summary) + "/7) and report (" +
                std::to_string(in_report) + "/7); not asserted against computed scores"};
}

// ---------------------------------------------------------------- 10

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[fs::relative(e.path(), dir).string()].assign(std::istreambuf_iterator<char>(in), {});
    }
    return out;
}

Outcome criterion_determinism() {
    auto t0 = Clock::now();
    const fs::path a = g_root / "det_a", b = g_root / "det_b";
    for (const auto& d : {a, b})
        if (cli({"synth", "--seed", "7", "--years", "12", "--out", d.string()}) != 0) return {false, "synth failed"};
    std::vector<std::string> differing;
    auto compare = [&](const std::string& what, const fs::path& x, const fs::path& y) {
        auto sx = snapshot(x), sy = snapshot(y);
        if (sx.empty() || sx != sy) differing.push_back(what);
    };
    compare("synth", a, b);

    const std::string config = (a / "config.json").string();
    lighten_config(config);
    const std::vector<std::vector<std::string>> steps{
        {"classify"},
        {"aggregate"},
        {"features", "--set", "direct"},
        {"train", "--set", "direct"},
        {"cv", "--learner", "lasso", "--set", "direct"},
        {"reconstruct", "--set", "direct"},
        {"aggregate", "--learner", "gbt", "--set", "direct"},
        {"decompose"},
        {"decompose", "--learner", "lasso", "--set", "direct"},
        {"report"},
    };
    for (const auto& outdir : {a / "run1", a / "run2"}) {
        for (const auto& s : steps) {
            auto args = s;
            if (args[0] != "report") args.insert(args.end(), {"--config", config});
            args.insert(args.end(), {"--out", outdir.string()});
            if (cli(args) != 0) return {false, args[0] + " failed"};
        }
    }
    compare("pipeline", a / "run1", a / "run2");
    std::size_t files = snapshot(a / "run1").size();
    double dt = seconds_since(t0);
    std::string which;
    for (const auto& d : differing) which += " " + d;
    return {differing.empty(), "synth plus " + std::to_string(steps.size()) + " pipeline steps run twice, " +
                                   std::to_string(files) + " artifacts compared, " +
                                   (differing.empty() ? std::string("all byte-identical") : "differences in" + which) +
                                   ", " + fmt("%.0f s", dt)};
}

} // namespace

int main(int argc, char** argv) {
    setenv("FOEHN_LOG_LEVEL", "warn", 0);
    g_root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "foehn_acceptance";
    fs::remove_all(g_root);
    fs::create_directories(g_root);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"hourly labels match the brute-force oracle", criterion_hourly_label},
        {"EM recovers the mixture with a monotone log-likelihood", criterion_em},
        {"lasso KKT conditions along the path", criterion_lasso_kkt},
        {"stability selection recovers the informative column", criterion_stabsel},
        {"boosting contract", criterion_gbt},
        {"synthetic end-to-end pipeline", criterion_end_to_end},
        {"calendar exactness of an 83-year reconstruction", criterion_calendar},
        {"STR properties", criterion_str},
        {"reference values shipped as report targets", criterion_reference_targets},
        {"CLI determinism", criterion_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " ("
                  << o.detail << ")" << std::endl;
    }
    std::cout << (criteria.size() - std::size_t(failed)) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
