#include "foehn/errors.hpp"
#include "foehn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace foehn {

namespace {

double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double neg_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += log1pexp(eta[i]) - y[i] * eta[i];
    return s / double(y.size());
}

double logit(double p) { return std::log(p / (1.0 - p)); }

struct Solver {
    const Eigen::MatrixXd& Z;
    const Eigen::VectorXd& y;
    const LassoOptions& opts;
    Eigen::Index n, k;

    double b0 = 0.0;
    Eigen::VectorXd b;
    Eigen::VectorXd eta;

    Solver(const Eigen::MatrixXd& z, const Eigen::VectorXd& yy, const LassoOptions& o)
        : Z(z), y(yy), opts(o), n(z.rows()), k(z.cols()), b(Eigen::VectorXd::Zero(z.cols())) {
        b0 = logit(std::clamp(y.mean(), 1e-12, 1 - 1e-12));
        eta = Eigen::VectorXd::Constant(n, b0);
    }

    double objective(double lambda) const { return neg_loglik(y, eta) + lambda * b.lpNorm<1>(); }

    // Columns visited by the coordinate sweeps: the active set plus the
    // columns passing the sequential strong rule.
    std::vector<char> strong;

    // Gradient of the mean log-likelihood: intercept part and Z'(y - p)/n.
    double gradient(Eigen::VectorXd& grad) const {
        Eigen::VectorXd resid(n);
        for (Eigen::Index i = 0; i < n; ++i) resid[i] = y[i] - logistic(eta[i]);
        grad.noalias() = Z.transpose() * resid / double(n);
        return resid.sum() / double(n);
    }

    // Max KKT violation of the penalized logistic objective at the current point.
    double kkt_violation(double lambda, double g0, const Eigen::VectorXd& grad) const {
        double worst = std::abs(g0);
        for (Eigen::Index j = 0; j < k; ++j) {
            double v = b[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - lambda)
                                   : std::abs(grad[j] - lambda * (b[j] > 0 ? 1.0 : -1.0));
            worst = std::max(worst, v);
        }
        return worst;
    }

    void update_eta() {
        eta.setConstant(b0);
        for (Eigen::Index j = 0; j < k; ++j)
            if (b[j] != 0.0) eta.noalias() += b[j] * Z.col(j);
    }

    // Weighted lasso on the IRLS quadratic approximation over the strong
    // columns: minimize (1/2n) sum w_i (z_i - b0 - Z_i b)^2 + lambda |b|_1.
    // Solved exactly by an active-set method; coordinate descent takes over
    // when the active-set iteration cannot proceed.
    void quadratic_step(double lambda, double& nb0, Eigen::VectorXd& nb) const {
        Eigen::VectorXd w(n), z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double p = logistic(eta[i]);
            w[i] = std::max(p * (1.0 - p), 1e-5);
            z[i] = eta[i] + (y[i] - p) / w[i];
        }
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < k; ++j)
            if (strong[std::size_t(j)]) cols.push_back(j);
        nb0 = b0;
        nb = b;
        if (active_set(lambda, w, z, cols, nb0, nb)) return;
        nb0 = b0;
        nb = b;
        coordinate_descent(lambda, w, z, cols, nb0, nb);
    }

    // Feature-sign search: solve on the active set with fixed signs; when a
    // sign would change, move to the best sign-change point of the segment
    // under the true objective; admit the worst violator once the active
    // coefficients are optimal. Every step lowers the objective.
    bool active_set(double lambda, const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                    const std::vector<Eigen::Index>& cols, double& nb0, Eigen::VectorXd& nb) const {
        std::vector<Eigen::Index> act;
        std::vector<double> sgn;
        for (auto j : cols)
            if (nb[j] != 0.0) act.push_back(j), sgn.push_back(nb[j] > 0 ? 1.0 : -1.0);
        const Eigen::VectorXd wz = w.cwiseProduct(z);
        const double entry_tol = 1e-2 * opts.kkt_tol;
        const int max_iter = 4 * int(cols.size()) + 50;
        for (int it = 0; it < max_iter; ++it) {
            const Eigen::Index m = Eigen::Index(act.size()) + 1;
            Eigen::MatrixXd XA(n, m);
            Eigen::VectorXd cur(m), sign = Eigen::VectorXd::Zero(m);
            XA.col(0).setOnes();
            cur[0] = nb0;
            for (Eigen::Index a = 1; a < m; ++a) {
                XA.col(a) = Z.col(act[std::size_t(a - 1)]);
                cur[a] = nb[act[std::size_t(a - 1)]];
                sign[a] = sgn[std::size_t(a - 1)];
            }
            Eigen::MatrixXd H = XA.transpose() * w.asDiagonal() * XA / double(n);
            // Negligible ridge on the slopes keeps near-collinear active columns solvable.
            H.diagonal().tail(m - 1).array() += 1e-10 * H.diagonal().maxCoeff();
            const Eigen::VectorXd lin = XA.transpose() * wz / double(n);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
            const Eigen::VectorXd rhs = lin - lambda * sign;
            const Eigen::VectorXd c = ldlt.solve(rhs);
            if (!c.allFinite()) return false;

            bool consistent = true;
            for (Eigen::Index a = 1; a < m; ++a) consistent &= c[a] * sign[a] > 0.0;
            Eigen::VectorXd next = c;
            if (!consistent) {
                // Quadratic part up to a constant, plus the penalty.
                auto objective_at = [&](const Eigen::VectorXd& x) {
                    return 0.5 * x.dot(H * x) - lin.dot(x) + lambda * x.tail(m - 1).lpNorm<1>();
                };
                const Eigen::VectorXd d = c - cur;
                double best_t = 1.0, best = objective_at(c);
                for (Eigen::Index a = 1; a < m; ++a) {
                    if (cur[a] * c[a] >= 0.0) continue;
                    double t = cur[a] / (cur[a] - c[a]);
                    Eigen::VectorXd x = cur + t * d;
                    x[a] = 0.0;
                    double f = objective_at(x);
                    if (f < best) best = f, best_t = t;
                }
                const double f0 = objective_at(cur);
                if (!(best < f0 - 1e-14 * (1.0 + std::abs(f0)))) return false;
                next = cur + best_t * d;
                for (Eigen::Index a = 1; a < m; ++a)
                    if (cur[a] * c[a] < 0.0 && cur[a] / (cur[a] - c[a]) == best_t) next[a] = 0.0;
            }

            nb0 = next[0];
            std::vector<Eigen::Index> kept;
            std::vector<double> kept_sign;
            for (Eigen::Index a = 1; a < m; ++a) {
                auto j = act[std::size_t(a - 1)];
                nb[j] = next[a];
                if (next[a] != 0.0) kept.push_back(j), kept_sign.push_back(next[a] > 0 ? 1.0 : -1.0);
            }
            act = std::move(kept);
            sgn = std::move(kept_sign);
            if (!consistent) continue;

            // Admit the worst violator among the strong columns.
            Eigen::VectorXd wr = wz - w.cwiseProduct(XA * next);
            double worst = entry_tol, g_enter = 0.0;
            Eigen::Index enter = -1;
            for (auto j : cols) {
                if (nb[j] != 0.0) continue;
                double g = Z.col(j).dot(wr) / double(n);
                if (std::abs(g) - lambda > worst) worst = std::abs(g) - lambda, enter = j, g_enter = g;
            }
            if (enter < 0) return true;
            act.push_back(enter);
            sgn.push_back(g_enter > 0 ? 1.0 : -1.0);
        }
        return false;
    }

    void coordinate_descent(double lambda, const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                            const std::vector<Eigen::Index>& cols, double& nb0, Eigen::VectorXd& nb) const {
        Eigen::VectorXd r = z.array() - nb0;
        for (auto j : cols)
            if (nb[j] != 0.0) r -= nb[j] * Z.col(j);
        const double sw = w.sum();
        Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
        for (auto j : cols) v[j] = Z.col(j).cwiseAbs2().dot(w) / double(n);

        auto update = [&](Eigen::Index j) {
            if (v[j] <= 0.0) return 0.0;
            double g = 0.0;
            const double* zj = Z.col(j).data();
            for (Eigen::Index i = 0; i < n; ++i) g += w[i] * zj[i] * r[i];
            g = g / double(n) + v[j] * nb[j];
            double nv = soft_threshold(g, lambda) / v[j];
            double d = nv - nb[j];
            if (d != 0.0) {
                for (Eigen::Index i = 0; i < n; ++i) r[i] -= d * zj[i];
                nb[j] = nv;
            }
            return v[j] * d * d;
        };
        auto update_intercept = [&] {
            double d = w.dot(r) / sw;
            nb0 += d;
            r.array() -= d;
            return (sw / double(n)) * d * d;
        };

        constexpr double tol = 1e-16;
        for (int full = 0; full < 1000; ++full) {
            double change = update_intercept();
            for (auto j : cols) change = std::max(change, update(j));
            if (change < tol) break;
            // Iterate on the active set until it settles, then re-sweep the strong set.
            for (int inner = 0; inner < 10000; ++inner) {
                double c = update_intercept();
                for (auto j : cols)
                    if (nb[j] != 0.0) c = std::max(c, update(j));
                if (c < tol) break;
            }
        }
    }

    // Minimizes the penalized objective at `lambda` from the current point;
    // `lambda_prev` is the previous path penalty used for screening.
    int solve(double lambda, double lambda_prev) {
        Eigen::VectorXd grad;
        double g0 = gradient(grad);
        strong.assign(std::size_t(k), 0);
        for (Eigen::Index j = 0; j < k; ++j)
            strong[std::size_t(j)] = b[j] != 0.0 || std::abs(grad[j]) >= 2.0 * lambda - lambda_prev;
        for (int outer = 0; outer < opts.max_outer; ++outer) {
            if (outer > 0) g0 = gradient(grad);
            if (kkt_violation(lambda, g0, grad) <= opts.kkt_tol) return outer;
            // Screening misses enter the sweep set.
            for (Eigen::Index j = 0; j < k; ++j)
                if (std::abs(grad[j]) > lambda) strong[std::size_t(j)] = 1;
            double nb0;
            Eigen::VectorXd nb;
            quadratic_step(lambda, nb0, nb);
            double f0 = objective(lambda);
            double ob0 = b0;
            Eigen::VectorXd ob = b;
            double t = 1.0;
            for (int half = 0; half < 40; ++half) {
                b0 = ob0 + t * (nb0 - ob0);
                b = ob + t * (nb - ob);
                update_eta();
                if (objective(lambda) <= f0 + 1e-15 * std::abs(f0)) break;
                t *= 0.5;
            }
        }
        g0 = gradient(grad);
        if (kkt_violation(lambda, g0, grad) <= opts.kkt_tol) return opts.max_outer;
        throw ConvergenceError("lasso did not converge at lambda = " + std::to_string(lambda));
    }
};

} // namespace

double lambda_max(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
    Eigen::VectorXd r = y.array() - y.mean();
    return (Z.transpose() * r).cwiseAbs().maxCoeff() / double(Z.rows());
}

std::vector<double> lambda_grid(double lmax, int n, double min_ratio) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[std::size_t(i)] = n == 1 ? lmax : lmax * std::pow(min_ratio, double(i) / double(n - 1));
    return out;
}

double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double beta0, const Eigen::VectorXd& beta,
                       double lambda) {
    Eigen::VectorXd eta = Z * beta;
    eta.array() += beta0;
    return neg_loglik(y, eta) + lambda * beta.lpNorm<1>();
}

std::vector<PathPoint> lasso_path(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, std::span<const double> lambdas,
                                  const LassoOptions& opts, std::size_t stop_after_active) {
    Solver s(Z, y, opts);
    const double null_dev = mean_deviance(y, s.eta);
    std::vector<PathPoint> path;
    double prev_ratio = 0.0;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        PathPoint pt;
        pt.lambda = lambdas[l];
        pt.outer_iterations = s.solve(pt.lambda, l > 0 ? lambdas[l - 1] : pt.lambda);
        pt.beta0 = s.b0;
        pt.beta = s.b;
        pt.deviance = mean_deviance(y, s.eta);
        path.push_back(pt);

        if (stop_after_active > 0) {
            if (std::size_t((s.b.array() != 0.0).count()) >= stop_after_active) break;
            continue;
        }
        double ratio = null_dev > 0 ? 1.0 - pt.deviance / null_dev : 0.0;
        if (ratio > opts.max_dev_ratio) break;
        if (l > 0 && ratio - prev_ratio < opts.path_min_gain * ratio) break;
        prev_ratio = ratio;
    }
    return path;
}

LassoModel fit_lasso(const Dataset& data, const LassoOptions& opts) {
    data.require_both_classes();
    if (opts.folds < 2) throw ConfigError("lasso needs at least 2 CV folds");
    auto st = Standardization::fit(data.X);
    Eigen::MatrixXd Z = st.apply(data.X);

    LassoModel m;
    m.names = data.names;
    for (auto j : st.dropped) m.dropped.push_back(data.names[j]);
    m.beta.assign(data.cols(), 0.0);
    const double lmax = Z.cols() ? lambda_max(Z, data.y) : 0.0;
    if (Z.cols() == 0 || lmax <= 0.0) {
        m.beta0 = logit(data.positive_rate());
        m.lambda_grid = {lmax};
        m.cv_curve = {0.0};
        return m;
    }
    m.lambda_grid = lambda_grid(lmax, opts.n_lambda, opts.lambda_min_ratio);
    auto full = lasso_path(Z, data.y, m.lambda_grid, opts);

    Rng rng(opts.seed);
    auto fold = stratified_folds(data.y, opts.folds, rng);
    std::vector<double> dev_sum(full.size(), 0.0);
    std::size_t usable = full.size();
    std::size_t held_total = 0;
    for (int f = 0; f < opts.folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? test : train).push_back(i);
        if (test.empty()) continue;
        auto tr = data.subset(train);
        auto te = data.subset(test);
        if (tr.y.sum() <= 0.0 || tr.y.sum() >= double(tr.rows())) continue;
        // Folds share the full-data grid but standardize on their own rows.
        auto fst = Standardization::fit(tr.X);
        Eigen::MatrixXd Ztr = fst.apply(tr.X), Zte = fst.apply(te.X);
        LassoOptions fo = opts;
        fo.max_dev_ratio = 2.0;  // keep the fold paths aligned with the full path
        fo.path_min_gain = -1.0;
        auto path = lasso_path(Ztr, tr.y, std::span<const double>(m.lambda_grid).first(usable), fo);
        usable = std::min(usable, path.size());
        for (std::size_t l = 0; l < usable; ++l) {
            Eigen::VectorXd eta = Zte * path[l].beta;
            eta.array() += path[l].beta0;
            dev_sum[l] += mean_deviance(te.y, eta) * double(test.size());
        }
        held_total += test.size();
    }
    if (held_total == 0) throw EstimationError("lasso CV: no usable folds");
    m.lambda_grid.resize(usable);
    m.cv_curve.resize(usable);
    for (std::size_t l = 0; l < usable; ++l) m.cv_curve[l] = dev_sum[l] / double(held_total);
    m.lambda_index = std::size_t(std::min_element(m.cv_curve.begin(), m.cv_curve.end()) - m.cv_curve.begin());
    m.lambda_min = m.lambda_grid[m.lambda_index];

    const auto& pt = full[m.lambda_index];
    m.beta0 = pt.beta0;
    for (std::size_t c = 0; c < st.kept.size(); ++c) {
        auto j = st.kept[c];
        double bj = pt.beta[Eigen::Index(c)] / st.sd[j];
        m.beta[j] = bj;
        m.beta0 -= bj * st.mean[j];
    }
    return m;
}

} // namespace foehn
