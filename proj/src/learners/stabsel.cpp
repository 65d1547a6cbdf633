#include "foehn/errors.hpp"
#include "foehn/learners.hpp"

#include <algorithm>
#include <cmath>

namespace foehn {

LogisticFit fit_logistic(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double ridge) {
    const Eigen::Index n = Z.rows(), k = Z.cols();
    // Augmented design with a leading intercept column.
    Eigen::MatrixXd A(n, k + 1);
    A.col(0).setOnes();
    A.rightCols(k) = Z;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
    double ybar = std::clamp(y.mean(), 1e-9, 1 - 1e-9);
    b[0] = std::log(ybar / (1 - ybar));

    auto objective = [&](const Eigen::VectorXd& bb) {
        Eigen::VectorXd eta = A * bb;
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double e = eta[i];
            s += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
        }
        return s / double(n) + 0.5 * ridge * bb.tail(k).squaredNorm();
    };

    LogisticFit fit;
    double f = objective(b);
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd eta = A * b;
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = logistic(eta[i]);
            w[i] = p[i] * (1 - p[i]);
        }
        Eigen::VectorXd g = A.transpose() * (p - y) / double(n);
        Eigen::MatrixXd H = A.transpose() * w.asDiagonal() * A / double(n);
        g.tail(k) += ridge * b.tail(k);
        H.bottomRightCorner(k, k).diagonal().array() += ridge;
        if (g.lpNorm<Eigen::Infinity>() < 1e-10) {
            fit.converged = true;
            break;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        Eigen::VectorXd step = ldlt.solve(g);
        if (!step.allFinite()) break;
        double t = 1.0, fn = f;
        Eigen::VectorXd bn;
        for (int h = 0; h < 50; ++h) {
            bn = b - t * step;
            fn = objective(bn);
            if (fn <= f) break;
            t *= 0.5;
        }
        if (!(fn <= f)) break;
        double delta = f - fn;
        b = bn;
        f = fn;
        if (delta < 1e-14 * (1 + std::abs(f)) && (t * step).lpNorm<Eigen::Infinity>() < 1e-10) {
            fit.converged = true;
            break;
        }
    }
    fit.beta0 = b[0];
    fit.beta = b.tail(k);
    return fit;
}

StabselModel fit_stabsel(const Dataset& data, const StabselOptions& opts) {
    data.require_both_classes();
    if (opts.runs < 1 || opts.first_k < 1) throw ConfigError("stability selection needs runs >= 1 and first_k >= 1");
    const std::size_t k = data.cols();
    StabselModel m;
    m.names = data.names;
    m.runs = opts.runs;
    m.selection_freq.assign(k, 0.0);

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.rows(); ++i) (data.y[Eigen::Index(i)] > 0.5 ? pos : neg).push_back(i);

    LassoOptions lo;
    lo.n_lambda = opts.n_lambda;
    lo.lambda_min_ratio = opts.lambda_min_ratio;
    std::vector<int> hits(k, 0);
    for (int r = 0; r < opts.runs; ++r) {
        Rng rng(derive_seed(opts.seed, {std::uint64_t(r)}));
        // Half of each class, so the subsample keeps the class balance.
        std::vector<std::size_t> rows;
        for (auto* cls : {&pos, &neg}) {
            std::vector<std::size_t> c = *cls;
            std::shuffle(c.begin(), c.end(), rng);
            std::size_t take = std::max<std::size_t>(1, c.size() / 2);
            rows.insert(rows.end(), c.begin(), c.begin() + std::ptrdiff_t(take));
        }
        std::sort(rows.begin(), rows.end());
        auto sub = data.subset(rows);
        auto st = Standardization::fit(sub.X);
        if (st.kept.empty()) continue;
        Eigen::MatrixXd Z = st.apply(sub.X);
        double lmax = lambda_max(Z, sub.y);
        if (!(lmax > 0)) continue;
        auto grid = lambda_grid(lmax, opts.n_lambda, opts.lambda_min_ratio);
        auto path = lasso_path(Z, sub.y, grid, lo, std::size_t(opts.first_k));

        // First K columns to enter; ties within a path step go by column index.
        std::vector<bool> in(st.kept.size(), false);
        std::size_t entered = 0;
        for (const auto& pt : path) {
            for (std::size_t c = 0; c < st.kept.size() && entered < std::size_t(opts.first_k); ++c) {
                if (!in[c] && pt.beta[Eigen::Index(c)] != 0.0) {
                    in[c] = true;
                    ++entered;
                    ++hits[st.kept[c]];
                }
            }
            if (entered >= std::size_t(opts.first_k)) break;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        m.selection_freq[j] = double(hits[j]) / double(opts.runs);
        if (m.selection_freq[j] > opts.threshold) m.selected.push_back(j);
    }

    m.beta.assign(m.selected.size(), 0.0);
    if (m.selected.empty()) {
        double p = data.positive_rate();
        m.beta0 = std::log(p / (1 - p));
        return m;
    }
    Eigen::MatrixXd Xs(data.X.rows(), Eigen::Index(m.selected.size()));
    for (std::size_t c = 0; c < m.selected.size(); ++c) Xs.col(Eigen::Index(c)) = data.X.col(Eigen::Index(m.selected[c]));
    auto st = Standardization::fit(Xs);
    Eigen::MatrixXd Z = st.apply(Xs);
    auto fit = fit_logistic(Z, data.y, 0.0);
    if (!fit.converged || (fit.beta.size() && fit.beta.lpNorm<Eigen::Infinity>() > 1e3)) {
        fit = fit_logistic(Z, data.y, 1e-6);
        m.ridge_fallback = true;
        if (!fit.converged) throw ConvergenceError("stability selection: final logistic fit did not converge");
    }
    m.beta0 = fit.beta0;
    for (std::size_t c = 0; c < st.kept.size(); ++c) {
        auto j = st.kept[c];
        double bj = fit.beta[Eigen::Index(c)] / st.sd[j];
        m.beta[j] = bj;
        m.beta0 -= bj * st.mean[j];
    }
    return m;
}

} // namespace foehn
