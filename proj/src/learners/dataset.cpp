#include "foehn/errors.hpp"
#include "foehn/learners.hpp"

#include <algorithm>
#include <cmath>

namespace foehn {

double logistic(double eta) {
    return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

namespace {
double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
} // namespace

double mean_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += log1pexp(eta[i]) - y[i] * eta[i];
    return 2.0 * s / double(y.size());
}

Standardization Standardization::fit(const Eigen::MatrixXd& X) {
    Standardization s;
    const auto n = double(X.rows());
    s.mean.resize(std::size_t(X.cols()));
    s.sd.resize(std::size_t(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        double m = X.col(j).mean();
        double ss = (X.col(j).array() - m).square().sum();
        double sd = std::sqrt(ss / n);
        s.mean[std::size_t(j)] = m;
        if (!(sd > 1e-12 * (1.0 + std::abs(m)))) {
            s.sd[std::size_t(j)] = 0.0;
            s.dropped.push_back(std::size_t(j));
        } else {
            s.sd[std::size_t(j)] = sd;
            s.kept.push_back(std::size_t(j));
        }
    }
    return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd Z(X.rows(), Eigen::Index(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
        auto j = kept[c];
        Z.col(Eigen::Index(c)) = (X.col(Eigen::Index(j)).array() - mean[j]) / sd[j];
    }
    return Z;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset d;
    d.names = names;
    d.X.resize(Eigen::Index(rows.size()), X.cols());
    d.y.resize(Eigen::Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.X.row(Eigen::Index(i)) = X.row(Eigen::Index(rows[i]));
        d.y[Eigen::Index(i)] = y[Eigen::Index(rows[i])];
    }
    return d;
}

void Dataset::require_both_classes() const {
    if (y.size() == 0) throw EstimationError("empty training set");
    double pos = y.sum();
    if (pos <= 0.0 || pos >= double(y.size()))
        throw EstimationError("training labels contain a single class (" + std::to_string(y.size()) + " rows)");
}

double Dataset::positive_rate() const { return y.size() ? y.mean() : 0.0; }

std::vector<int> stratified_folds(const Eigen::VectorXd& y, int k, Rng& rng) {
    std::vector<int> fold(std::size_t(y.size()), 0);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> idx;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if ((y[i] > 0.5) == (cls == 1)) idx.push_back(std::size_t(i));
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t p = 0; p < idx.size(); ++p) fold[idx[p]] = int(p % std::size_t(k));
    }
    return fold;
}

std::string to_string(LearnerKind k) {
    switch (k) {
    case LearnerKind::lasso: return "lasso";
    case LearnerKind::stabsel: return "stabsel";
    case LearnerKind::gbt: return "gbt";
    }
    return "?";
}

LearnerKind parse_learner(const std::string& s) {
    if (s == "lasso") return LearnerKind::lasso;
    if (s == "stabsel") return LearnerKind::stabsel;
    if (s == "gbt") return LearnerKind::gbt;
    throw ConfigError("unknown learner '" + s + "' (expected lasso, stabsel or gbt)");
}

} // namespace foehn
