#include "foehn/decompose.hpp"

#include "foehn/data_io.hpp"
#include "foehn/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <ostream>

namespace foehn {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Unknowns: trend T_0..T_{J-1}, then 11 free seasonal values per covered year
// (December is minus the sum of the other months).
struct Layout {
    std::size_t J = 0;
    int first_year = 0, years = 0, first_month0 = 0;
    Eigen::Index p() const { return Eigen::Index(J) + 11 * years; }
    Eigen::Index s(int year_index, int month0) const { return Eigen::Index(J) + 11 * year_index + month0; }
    int year_index(std::size_t t) const { return (first_month0 + int(t)) / 12; }
    int month0(std::size_t t) const { return (first_month0 + int(t)) % 12; }
};

// Adds coef * S(year, month) to row `r`, expanding December.
void add_seasonal(Triplets& tr, const Layout& L, Eigen::Index r, int yi, int m0, double coef) {
    if (m0 < 11) {
        tr.emplace_back(r, L.s(yi, m0), coef);
    } else {
        for (int k = 0; k < 11; ++k) tr.emplace_back(r, L.s(yi, k), -coef);
    }
}

struct System {
    SpMat X, DT, DS;
    SpMat XtX, PT, PS;
    Eigen::VectorXd Xty;
};

System build(const Layout& L, const Eigen::VectorXd& y) {
    System s;
    const auto J = Eigen::Index(L.J);
    Triplets tx;
    for (std::size_t t = 0; t < L.J; ++t) {
        tx.emplace_back(Eigen::Index(t), Eigen::Index(t), 1.0);
        add_seasonal(tx, L, Eigen::Index(t), L.year_index(t), L.month0(t), 1.0);
    }
    s.X.resize(J, L.p());
    s.X.setFromTriplets(tx.begin(), tx.end());

    Triplets td;
    for (Eigen::Index t = 0; t + 2 < J; ++t) {
        td.emplace_back(t, t, 1.0);
        td.emplace_back(t, t + 1, -2.0);
        td.emplace_back(t, t + 2, 1.0);
    }
    s.DT.resize(std::max<Eigen::Index>(J - 2, 0), L.p());
    s.DT.setFromTriplets(td.begin(), td.end());

    Triplets ts;
    Eigen::Index r = 0;
    for (int m0 = 0; m0 < 12; ++m0)
        for (int yi = 0; yi + 2 < L.years; ++yi, ++r) {
            add_seasonal(ts, L, r, yi, m0, 1.0);
            add_seasonal(ts, L, r, yi + 1, m0, -2.0);
            add_seasonal(ts, L, r, yi + 2, m0, 1.0);
        }
    s.DS.resize(r, L.p());
    s.DS.setFromTriplets(ts.begin(), ts.end());

    s.XtX = SpMat(s.X.transpose()) * s.X;
    s.PT = SpMat(s.DT.transpose()) * s.DT;
    s.PS = SpMat(s.DS.transpose()) * s.DS;
    s.Xty = s.X.transpose() * y;
    return s;
}

struct Solved {
    Eigen::VectorXd coef, fitted;
    double rss = 0.0, edf = 0.0, gcv = 0.0;
};

using Solver = Eigen::SimplicialLDLT<SpMat>;

void factor(Solver& solver, const System& s, double lt, double ls) {
    SpMat M = s.XtX + lt * s.PT + ls * s.PS;
    solver.compute(M);
    if (solver.info() != Eigen::Success)
        throw EstimationError("decomposition system is singular (too few values for the penalties)");
    if ((solver.vectorD().array() <= 0.0).any())
        throw EstimationError("decomposition system is not positive definite");
}

Solved solve(const System& s, const Eigen::VectorXd& y, double lt, double ls) {
    Solver solver;
    factor(solver, s, lt, ls);
    Solved out;
    out.coef = solver.solve(s.Xty);
    out.fitted = s.X * out.coef;
    out.rss = (y - out.fitted).squaredNorm();
    // trace(H) = sum_t x_t' M^-1 x_t over the rows of X.
    SpMat Xt = s.X.transpose();
    for (Eigen::Index t = 0; t < s.X.rows(); ++t) {
        Eigen::VectorXd xt = Xt.col(t);
        out.edf += xt.dot(solver.solve(xt));
    }
    const double J = double(y.size());
    const double dof = J - out.edf;
    out.gcv = dof > 0 ? J * out.rss / (dof * dof) : std::numeric_limits<double>::infinity();
    return out;
}

} // namespace

StrFit fit_str(std::span<const double> yv, int start_year, int start_month, const StrOptions& opts) {
    if (yv.size() < 36) throw ContractError("decomposition needs at least 36 monthly values");
    if (start_month < 1 || start_month > 12) throw ValueError("start month must be 1..12");
    for (double v : yv)
        if (!std::isfinite(v)) throw ValueError("decomposition input contains missing values");
    if (opts.grid.empty()) throw ConfigError("decomposition: empty penalty grid");

    Layout L;
    L.J = yv.size();
    L.first_year = start_year;
    L.first_month0 = start_month - 1;
    L.years = L.year_index(L.J - 1) + 1;
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), Eigen::Index(yv.size()));
    auto sys = build(L, y);

    double lt, ls;
    Solved best;
    if (opts.lambda_trend && opts.lambda_seasonal) {
        lt = *opts.lambda_trend;
        ls = *opts.lambda_seasonal;
        if (!(lt >= 0) || !(ls >= 0)) throw ConfigError("decomposition penalties must be non-negative");
        best = solve(sys, y, lt, ls);
    } else {
        lt = ls = 0;
        best.gcv = std::numeric_limits<double>::infinity();
        for (double a : opts.grid)
            for (double b : opts.grid) {
                auto s = solve(sys, y, a, b);
                if (s.gcv < best.gcv) {
                    best = std::move(s);
                    lt = a;
                    ls = b;
                }
            }
        if (!std::isfinite(best.gcv)) throw EstimationError("decomposition: no penalty pair leaves residual degrees of freedom");
    }

    StrFit fit;
    fit.start_year = start_year;
    fit.start_month = start_month;
    fit.lambda_trend = lt;
    fit.lambda_seasonal = ls;
    fit.edf = best.edf;
    fit.gcv = best.gcv;
    const double dof = double(L.J) - best.edf;
    if (!(dof > 0)) throw EstimationError("decomposition: smoother uses all degrees of freedom");
    fit.sigma2 = best.rss / dof;
    fit.first_year = start_year;
    fit.seasonal_by_year.resize(std::size_t(L.years));
    for (int yi = 0; yi < L.years; ++yi) {
        auto& row = fit.seasonal_by_year[std::size_t(yi)];
        double sum = 0.0;
        for (int m0 = 0; m0 < 11; ++m0) {
            row[std::size_t(m0)] = best.coef[L.s(yi, m0)];
            sum += row[std::size_t(m0)];
        }
        row[11] = -sum;
    }

    Solver solver;
    factor(solver, sys, lt, ls);
    SpMat Xt = sys.X.transpose();
    fit.y.assign(yv.begin(), yv.end());
    fit.trend.resize(L.J);
    fit.seasonal.resize(L.J);
    fit.remainder.resize(L.J);
    fit.ci_lower.resize(L.J);
    fit.ci_upper.resize(L.J);
    for (std::size_t t = 0; t < L.J; ++t) {
        fit.trend[t] = best.coef[Eigen::Index(t)];
        fit.seasonal[t] = fit.seasonal_by_year[std::size_t(L.year_index(t))][std::size_t(L.month0(t))];
        fit.remainder[t] = fit.y[t] - fit.trend[t] - fit.seasonal[t];
        // Leverage of y_t on T_t: entry t of M^-1 x_t, x_t the design row of month t.
        Eigen::VectorXd xt = Xt.col(Eigen::Index(t));
        double v = std::max(0.0, solver.solve(xt)[Eigen::Index(t)]);
        double half = 1.959963984540054 * std::sqrt(fit.sigma2 * v);
        fit.ci_lower[t] = fit.trend[t] - half;
        fit.ci_upper[t] = fit.trend[t] + half;
    }
    return fit;
}

StrFit fit_str(const AggregateSeries& monthly, const StrOptions& opts) {
    if (monthly.size() == 0) throw ContractError("decomposition needs at least 36 monthly values");
    auto c = to_civil(monthly.period_start.front());
    return fit_str(monthly.value, c.year, c.month, opts);
}

bool trend_significance(std::span<const double> lo, std::span<const double> hi) {
    if (lo.empty() || lo.size() != hi.size()) throw ContractError("trend band is empty or ragged");
    double max_lo = lo[0], min_hi = hi[0];
    for (std::size_t i = 1; i < lo.size(); ++i) {
        max_lo = std::max(max_lo, lo[i]);
        min_hi = std::min(min_hi, hi[i]);
    }
    return max_lo > min_hi;
}

bool trend_significance(const StrFit& fit) { return trend_significance(fit.ci_lower, fit.ci_upper); }

DecadeSeasonal decade_seasonal(const StrFit& fit) {
    DecadeSeasonal d;
    std::vector<std::array<double, 12>> sums;
    std::vector<int> counts;
    std::array<double, 12> total{};
    for (std::size_t yi = 0; yi < fit.seasonal_by_year.size(); ++yi) {
        int year = fit.first_year + int(yi);
        int dec = year - ((year % 10) + 10) % 10;
        if (d.decades.empty() || d.decades.back() != dec) {
            d.decades.push_back(dec);
            sums.push_back({});
            counts.push_back(0);
        }
        for (std::size_t m = 0; m < 12; ++m) {
            sums.back()[m] += fit.seasonal_by_year[yi][m];
            total[m] += fit.seasonal_by_year[yi][m];
        }
        ++counts.back();
    }
    for (std::size_t k = 0; k < sums.size(); ++k) {
        std::array<double, 12> m{};
        for (std::size_t i = 0; i < 12; ++i) m[i] = sums[k][i] / counts[k];
        d.mean.push_back(m);
    }
    const auto n = double(fit.seasonal_by_year.size());
    for (std::size_t i = 0; i < 12; ++i) d.overall[i] = n > 0 ? total[i] / n : kMissing;
    return d;
}

void write_str_csv(std::ostream& out, const StrFit& fit) {
    out << "t,year,month,y,trend,ci_lo,ci_hi,seasonal,remainder\n";
    for (std::size_t t = 0; t < fit.size(); ++t)
        out << t << ',' << fit.year(t) << ',' << fit.month(t) << ',' << format_number(fit.y[t]) << ','
            << format_number(fit.trend[t]) << ',' << format_number(fit.ci_lower[t]) << ','
            << format_number(fit.ci_upper[t]) << ',' << format_number(fit.seasonal[t]) << ','
            << format_number(fit.remainder[t]) << '\n';
}

void write_decade_csv(std::ostream& out, const DecadeSeasonal& d) {
    out << "month";
    for (int dec : d.decades) out << ",d" << dec;
    out << ",all\n";
    for (std::size_t m = 0; m < 12; ++m) {
        out << m + 1;
        for (const auto& col : d.mean) out << ',' << format_number(col[m]);
        out << ',' << format_number(d.overall[m]) << '\n';
    }
}

} // namespace foehn
