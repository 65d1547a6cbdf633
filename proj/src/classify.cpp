#include "foehn/classify.hpp"

#include "foehn/errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace foehn {

bool sector_contains(double dd, const WindSector& s) {
    if (!(dd >= 0.0 && dd < 360.0)) throw ValueError("wind direction " + format_number(dd) + " outside [0, 360)");
    if (s.from_deg <= s.to_deg) return dd >= s.from_deg && dd <= s.to_deg;
    return dd >= s.from_deg || dd <= s.to_deg;
}

double delta_theta(double t_valley, double t_crest, double dh) { return t_valley - t_crest - 0.01 * dh; }

std::vector<Precondition> precondition_mask(const ObservationSeries& valley, const ObservationSeries& crest,
                                            const WindSector& vs, const WindSector& cs) {
    if (valley.empty() || crest.empty()) throw IntegrityError("precondition mask on an empty series");
    if (valley.start != crest.start || valley.size() != crest.size())
        throw IntegrityError("valley and crest series are not on the same grid; intersect them first");
    std::vector<Precondition> out(valley.size(), Precondition::missing);
    for (std::size_t i = 0; i < valley.size(); ++i) {
        if (is_missing(valley.dd[i]) || is_missing(crest.dd[i]) || is_missing(valley.t[i]) ||
            is_missing(valley.rh[i]) || is_missing(valley.ff[i]) || is_missing(crest.t[i]))
            continue;
        bool in = sector_contains(valley.dd[i], vs) && sector_contains(crest.dd[i], cs);
        out[i] = in ? Precondition::inside : Precondition::outside;
    }
    return out;
}

namespace {

double logistic(double eta) {
    return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

// log(1 + exp(x)) without overflow.
double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double log_normal_pdf(double y, double mu, double sigma) {
    double z = (y - mu) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

struct Moments {
    double mean = 0.0, sd = 0.0;
};

Moments moments(std::span<const double> v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / double(v.size()))};
}

// Expected complete-data log-likelihood of the concomitant model.
double concomitant_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& post, const Eigen::Vector3d& a) {
    Eigen::VectorXd eta = X * a;
    double q = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) q += post[i] * eta[i] - log1pexp(eta[i]);
    return q;
}

// Newton-Raphson on the weighted logistic likelihood with soft responses,
// started from the current coefficients and guarded by step halving so the
// objective never decreases.
Eigen::Vector3d update_concomitant(const Eigen::MatrixXd& X, const Eigen::VectorXd& post, Eigen::Vector3d a) {
    double q = concomitant_objective(X, post, a);
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd eta = X * a;
        Eigen::VectorXd grad_w(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            double p = logistic(eta[i]);
            grad_w[i] = post[i] - p;
            w[i] = std::max(p * (1.0 - p), 1e-12);
        }
        Eigen::Vector3d grad = X.transpose() * grad_w;
        Eigen::Matrix3d hess = X.transpose() * w.asDiagonal() * X;
        Eigen::Vector3d step = hess.ldlt().solve(grad);
        double step_size = 1.0;
        Eigen::Vector3d next = a + step;
        double qn = concomitant_objective(X, post, next);
        while (qn < q && step_size > 1e-8) {
            step_size *= 0.5;
            next = a + step_size * step;
            qn = concomitant_objective(X, post, next);
        }
        if (qn < q) break;
        a = next;
        double gain = qn - q;
        q = qn;
        if (step.lpNorm<Eigen::Infinity>() * step_size < 1e-10 || gain < 1e-12 * (1.0 + std::abs(q))) break;
    }
    return a;
}

} // namespace

double MixtureParams::prior(double rh, double ff) const {
    double eta = alpha[0] + alpha[1] * (rh - rh_mean) / rh_sd + alpha[2] * (ff - ff_mean) / ff_sd;
    return logistic(eta);
}

MixtureParams em_fit(std::span<const double> y, std::span<const double> rh, std::span<const double> ff,
                     const EmOptions& opts) {
    const std::size_t n = y.size();
    if (rh.size() != n || ff.size() != n) throw ContractError("em_fit: input lengths differ");
    if (n < opts.min_sample || n < 4)
        throw EstimationError("mixture fit needs at least " + std::to_string(opts.min_sample) +
                              " precondition-passing observations, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(y[i]) || !std::isfinite(rh[i]) || !std::isfinite(ff[i]))
            throw ValueError("em_fit: non-finite input at index " + std::to_string(i));

    MixtureParams p;
    p.n_used = n;
    auto mr = moments(rh), mf = moments(ff);
    p.rh_mean = mr.mean;
    p.rh_sd = mr.sd > 0 ? mr.sd : 1.0;
    p.ff_mean = mf.mean;
    p.ff_sd = mf.sd > 0 ? mf.sd : 1.0;

    Eigen::MatrixXd X(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = (rh[i] - p.rh_mean) / p.rh_sd;
        X(i, 2) = (ff[i] - p.ff_mean) / p.ff_sd;
    }

    // Median split: lower half seeds the no-foehn component.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<double> lower, upper;
    for (std::size_t k = 0; k < n; ++k) (k < n / 2 ? lower : upper).push_back(y[order[k]]);
    auto lo = moments(lower), up = moments(upper);
    double frac_upper = double(upper.size()) / double(n);
    Eigen::Vector3d a(std::log(frac_upper / (1.0 - frac_upper)), 0.0, 0.0);
    double mu1 = lo.mean, s1 = lo.sd, mu2 = up.mean, s2 = up.sd;
    if (opts.swap_init) {
        std::swap(mu1, mu2);
        std::swap(s1, s2);
        a = -a;
    }
    if (s1 < opts.sigma_floor || s2 < opts.sigma_floor)
        throw DegenerateFitError("initial split has no spread", s1 < opts.sigma_floor ? 1 : 2);

    Eigen::VectorXd post(n);
    double ll_prev = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // E-step
        Eigen::VectorXd eta = X * a;
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double l1 = -log1pexp(eta[i]) + log_normal_pdf(y[i], mu1, s1);   // log((1-pi) N1)
            double l2 = -log1pexp(-eta[i]) + log_normal_pdf(y[i], mu2, s2);  // log(pi N2)
            double m = std::max(l1, l2);
            double lse = m + std::log(std::exp(l1 - m) + std::exp(l2 - m));
            ll += lse;
            post[i] = std::exp(l2 - lse);
        }
        p.loglik_trace.push_back(ll);
        p.iterations = iter;
        if (iter > 0 && ll - ll_prev < opts.tol * std::abs(ll_prev)) {
            p.converged = true;
            break;
        }
        ll_prev = ll;

        // M-step
        double w2 = post.sum(), w1 = double(n) - w2;
        if (w1 <= 0.0 || w2 <= 0.0)
            throw DegenerateFitError("mixture component " + std::to_string(w1 <= 0.0 ? 1 : 2) + " lost all weight",
                                     w1 <= 0.0 ? 1 : 2);
        double sy1 = 0.0, sy2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sy2 += post[i] * y[i];
            sy1 += (1.0 - post[i]) * y[i];
        }
        mu1 = sy1 / w1;
        mu2 = sy2 / w2;
        double ss1 = 0.0, ss2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ss2 += post[i] * (y[i] - mu2) * (y[i] - mu2);
            ss1 += (1.0 - post[i]) * (y[i] - mu1) * (y[i] - mu1);
        }
        s1 = std::sqrt(ss1 / w1);
        s2 = std::sqrt(ss2 / w2);
        for (int c : {1, 2}) {
            double s = c == 1 ? s1 : s2;
            if (!(s >= opts.sigma_floor))
                throw DegenerateFitError("mixture component " + std::to_string(c) + " collapsed (sigma " +
                                             format_number(s) + ")",
                                         c);
        }
        a = update_concomitant(X, post, a);
    }

    if (mu2 < mu1) {
        std::swap(mu1, mu2);
        std::swap(s1, s2);
        a = -a;
    }
    p.mu1 = mu1;
    p.sigma1 = s1;
    p.mu2 = mu2;
    p.sigma2 = s2;
    p.alpha = {a[0], a[1], a[2]};
    p.separation = (mu2 - mu1) / std::sqrt(0.5 * (s1 * s1 + s2 * s2));

    Eigen::VectorXd pis = (X * a).unaryExpr([](double e) { return logistic(e); });
    double mean_pi = pis.mean();
    p.degenerate = p.separation < 1.0 || mean_pi < 0.01 || mean_pi > 0.99;
    return p;
}

double posterior_from_prior(double y, double pi, double mu1, double s1, double mu2, double s2) {
    if (pi <= 0.0) return 0.0;
    if (pi >= 1.0) return 1.0;
    double l1 = std::log1p(-pi) + log_normal_pdf(y, mu1, s1);
    double l2 = std::log(pi) + log_normal_pdf(y, mu2, s2);
    double m = std::max(l1, l2);
    return std::exp(l2 - m) / (std::exp(l1 - m) + std::exp(l2 - m));
}

double posterior(double y, double rh, double ff, const MixtureParams& p) {
    return posterior_from_prior(y, p.prior(rh, ff), p.mu1, p.sigma1, p.mu2, p.sigma2);
}

Classification classify_series(const ObservationSeries& valley_in, const ObservationSeries& crest_in,
                               const StationPair& pair, const EmOptions& opts) {
    auto [valley, crest] = intersect(valley_in, crest_in);
    Classification out;
    out.series.start = valley.start;
    out.series.precondition = precondition_mask(valley, crest, pair.valley_sector, pair.crest_sector);
    const auto& mask = out.series.precondition;
    double dh = pair.crest.altitude - pair.valley.altitude;

    std::vector<double> y, rh, ff;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        switch (mask[i]) {
        case Precondition::missing: ++out.n_missing; break;
        case Precondition::outside: ++out.n_outside; break;
        case Precondition::inside:
            ++out.n_inside;
            y.push_back(delta_theta(valley.t[i], crest.t[i], dh));
            rh.push_back(valley.rh[i]);
            ff.push_back(valley.ff[i]);
            break;
        }
    }
    if (!y.empty()) {
        out.params = em_fit(y, rh, ff, opts);
        out.fitted = true;
    }

    out.series.p.assign(mask.size(), kMissing);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] == Precondition::outside) {
            out.series.p[i] = 0.0;
        } else if (mask[i] == Precondition::inside) {
            out.series.p[i] =
                posterior(delta_theta(valley.t[i], crest.t[i], dh), valley.rh[i], valley.ff[i], out.params);
        }
    }
    return out;
}

void write_posterior_csv(std::ostream& out, const PosteriorSeries& s) {
    out << "timestamp,p,precondition\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_iso(s.time(i)) << ',' << format_number(s.p[i]) << ',';
        if (s.precondition[i] != Precondition::missing) out << (s.precondition[i] == Precondition::inside ? 1 : 0);
        out << '\n';
    }
}

void to_json(nlohmann::json& j, const MixtureParams& p) {
    j = {{"mu1", p.mu1},
         {"sigma1", p.sigma1},
         {"mu2", p.mu2},
         {"sigma2", p.sigma2},
         {"alpha", p.alpha},
         {"rh_mean", p.rh_mean},
         {"rh_sd", p.rh_sd},
         {"ff_mean", p.ff_mean},
         {"ff_sd", p.ff_sd},
         {"loglik_trace", p.loglik_trace},
         {"n_used", p.n_used},
         {"iterations", p.iterations},
         {"converged", p.converged},
         {"separation", p.separation},
         {"degenerate", p.degenerate}};
}

void from_json(const nlohmann::json& j, MixtureParams& p) {
    j.at("mu1").get_to(p.mu1);
    j.at("sigma1").get_to(p.sigma1);
    j.at("mu2").get_to(p.mu2);
    j.at("sigma2").get_to(p.sigma2);
    j.at("alpha").get_to(p.alpha);
    j.at("rh_mean").get_to(p.rh_mean);
    j.at("rh_sd").get_to(p.rh_sd);
    j.at("ff_mean").get_to(p.ff_mean);
    j.at("ff_sd").get_to(p.ff_sd);
    p.loglik_trace = j.value("loglik_trace", std::vector<double>{});
    p.n_used = j.value("n_used", std::size_t{0});
    p.iterations = j.value("iterations", 0);
    p.converged = j.value("converged", false);
    p.separation = j.value("separation", 0.0);
    p.degenerate = j.value("degenerate", false);
}

} // namespace foehn
