#include "foehn/errors.hpp"
#include "foehn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace foehn {

double leaf_weight(double G, double H, double lambda_reg) { return -G / (H + lambda_reg); }

double split_gain(double GL, double HL, double GR, double HR, double lambda_reg) {
    double G = GL + GR, H = HL + HR;
    return 0.5 * (GL * GL / (HL + lambda_reg) + GR * GR / (HR + lambda_reg) - G * G / (H + lambda_reg));
}

double Tree::predict(std::span<const double> z) const {
    int i = 0;
    while (nodes[std::size_t(i)].feature >= 0) {
        const auto& n = nodes[std::size_t(i)];
        i = z[std::size_t(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[std::size_t(i)].value;
}

int Tree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature < 0) continue;
        d[std::size_t(nodes[i].left)] = d[std::size_t(nodes[i].right)] = d[i] + 1;
        best = std::max(best, d[i] + 1);
    }
    return best;
}

namespace {

double logloss(const Eigen::VectorXd& y, const Eigen::VectorXd& margin) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double e = margin[i];
        s += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
    }
    return s / double(y.size());
}

// Exact greedy tree builder. Each feature keeps the sampled rows in sorted
// order; a node owns the same [begin, end) range in every feature's list and
// splitting partitions that range stably.
class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& Z, const std::vector<int>& usable, const GbtParams& p)
        : Z_(Z), usable_(usable), p_(p) {}

    Tree build(const std::vector<std::size_t>& rows, const std::vector<double>& g, const std::vector<double>& h) {
        g_ = &g;
        h_ = &h;
        order_.assign(usable_.size(), {});
        for (std::size_t f = 0; f < usable_.size(); ++f) {
            auto& o = order_[f];
            o = rows;
            const auto col = Z_.col(usable_[f]);
            std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
                return col[Eigen::Index(a)] < col[Eigen::Index(b)];
            });
        }
        members_ = rows;
        goes_left_.assign(std::size_t(Z_.rows()), 0);
        Tree t;
        t.nodes.emplace_back();
        grow(t, 0, 0, rows.size(), 0);
        return t;
    }

private:
    void grow(Tree& t, int node, std::size_t begin, std::size_t end, int depth) {
        double G = 0, H = 0;
        for (std::size_t i = begin; i < end; ++i) {
            G += (*g_)[members_[i]];
            H += (*h_)[members_[i]];
        }
        auto& nd = t.nodes[std::size_t(node)];
        nd.cover = H;
        nd.value = p_.eta * leaf_weight(G, H, p_.lambda_reg);
        if (depth >= p_.max_depth || H < 2 * p_.min_child_weight) return;

        double best = 0.0, best_thr = 0.0;
        int best_f = -1;
        for (std::size_t f = 0; f < usable_.size(); ++f) {
            const auto& o = order_[f];
            const auto col = Z_.col(usable_[f]);
            double GL = 0, HL = 0;
            for (std::size_t i = begin; i + 1 < end; ++i) {
                GL += (*g_)[o[i]];
                HL += (*h_)[o[i]];
                double a = col[Eigen::Index(o[i])], b = col[Eigen::Index(o[i + 1])];
                if (!(a < b)) continue;
                double HR = H - HL;
                if (HL < p_.min_child_weight || HR < p_.min_child_weight) continue;
                double gain = split_gain(GL, HL, G - GL, HR, p_.lambda_reg);
                if (gain > best) {
                    best = gain;
                    best_f = int(f);
                    best_thr = 0.5 * (a + b);
                }
            }
        }
        if (best_f < 0 || best < p_.gamma) return;

        const auto col = Z_.col(usable_[std::size_t(best_f)]);
        std::size_t nleft = 0;
        for (std::size_t i = begin; i < end; ++i) {
            auto r = members_[i];
            goes_left_[r] = col[Eigen::Index(r)] < best_thr;
            nleft += goes_left_[r];
        }
        auto left_first = [&](std::vector<std::size_t>& o) {
            std::stable_partition(o.begin() + std::ptrdiff_t(begin), o.begin() + std::ptrdiff_t(end),
                                  [&](std::size_t r) { return goes_left_[r] != 0; });
        };
        left_first(members_);
        for (auto& o : order_) left_first(o);

        int left = int(t.nodes.size());
        t.nodes.emplace_back();
        t.nodes.emplace_back();
        auto& n2 = t.nodes[std::size_t(node)];
        n2.feature = usable_[std::size_t(best_f)];
        n2.threshold = best_thr;
        n2.gain = best;
        n2.left = left;
        n2.right = left + 1;
        grow(t, left, begin, begin + nleft, depth + 1);
        grow(t, left + 1, begin + nleft, end, depth + 1);
    }

    const Eigen::MatrixXd& Z_;
    const std::vector<int>& usable_;
    const GbtParams& p_;
    const std::vector<double>* g_ = nullptr;
    const std::vector<double>* h_ = nullptr;
    std::vector<std::size_t> members_;
    std::vector<std::vector<std::size_t>> order_;
    std::vector<char> goes_left_;
};

double tree_on_row(const Tree& t, const Eigen::MatrixXd& Z, Eigen::Index r) {
    int i = 0;
    while (t.nodes[std::size_t(i)].feature >= 0) {
        const auto& n = t.nodes[std::size_t(i)];
        i = Z(r, n.feature) < n.threshold ? n.left : n.right;
    }
    return t.nodes[std::size_t(i)].value;
}

// Standardized matrix with every named column; unusable columns are zero.
Eigen::MatrixXd standardize_all(const Eigen::MatrixXd& X, const std::vector<double>& mean,
                                const std::vector<double>& sd) {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (sd[std::size_t(j)] > 0) Z.col(j) = (X.col(j).array() - mean[std::size_t(j)]) / sd[std::size_t(j)];
    return Z;
}

} // namespace

GbtModel train_gbt(const Dataset& data, const GbtParams& params, std::uint64_t seed, std::vector<double>* trace) {
    data.require_both_classes();
    if (params.nrounds < 1 || params.max_depth < 0 || params.eta <= 0)
        throw ConfigError("gbt: invalid parameters");
    GbtModel m;
    m.names = data.names;
    m.params = params;
    auto st = Standardization::fit(data.X);
    m.mean = st.mean;
    m.sd = st.sd;
    Eigen::MatrixXd Z = standardize_all(data.X, m.mean, m.sd);
    std::vector<int> usable;
    for (auto j : st.kept) usable.push_back(int(j));

    const auto n = Eigen::Index(data.rows());
    double ybar = data.positive_rate();
    m.base_score = std::log(ybar / (1 - ybar));
    Eigen::VectorXd margin = Eigen::VectorXd::Constant(n, m.base_score);
    std::vector<double> g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
    Rng rng(seed);
    std::bernoulli_distribution keep(std::clamp(params.subsample, 0.0, 1.0));
    TreeBuilder builder(Z, usable, params);
    for (int round = 0; round < params.nrounds; ++round) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double p = logistic(margin[i]);
            g[std::size_t(i)] = p - data.y[i];
            h[std::size_t(i)] = p * (1 - p);
        }
        std::vector<std::size_t> rows;
        for (Eigen::Index i = 0; i < n; ++i)
            if (params.subsample >= 1.0 || keep(rng)) rows.push_back(std::size_t(i));
        Tree t = builder.build(rows, g, h);
        if (round == 0 && t.nodes.size() == 1) m.no_splits = true;
        for (Eigen::Index i = 0; i < n; ++i) margin[i] += tree_on_row(t, Z, i);
        m.trees.push_back(std::move(t));
        if (trace) trace->push_back(logloss(data.y, margin));
    }
    return m;
}

std::vector<GbtParams> GbtGrid::combinations(const GbtParams& base) const {
    std::vector<GbtParams> out;
    for (double e : eta)
        for (int d : max_depth)
            for (double w : min_child_weight)
                for (double gm : gamma) {
                    GbtParams p = base;
                    p.eta = e;
                    p.max_depth = d;
                    p.min_child_weight = w;
                    p.gamma = gm;
                    out.push_back(p);
                }
    return out;
}

GbtModel fit_gbt(const Dataset& data, const GbtOptions& opts) {
    data.require_both_classes();
    if (opts.cv_folds < 2 || opts.max_rounds < 1) throw ConfigError("gbt: need cv_folds >= 2 and max_rounds >= 1");
    GbtParams base;
    base.subsample = opts.subsample;
    base.lambda_reg = opts.lambda_reg;
    base.nrounds = opts.max_rounds;
    auto combos = opts.grid.combinations(base);
    if (combos.empty()) throw ConfigError("gbt: empty parameter grid");

    Rng rng(derive_seed(opts.seed, {hash_tag("folds")}));
    auto fold = stratified_folds(data.y, opts.cv_folds, rng);
    struct Split {
        Dataset train, test;
    };
    std::vector<Split> splits;
    for (int f = 0; f < opts.cv_folds; ++f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? te : tr).push_back(i);
        if (te.empty()) continue;
        Split s{data.subset(tr), data.subset(te)};
        if (s.train.y.sum() <= 0 || s.train.y.sum() >= double(s.train.rows())) continue;
        splits.push_back(std::move(s));
    }
    if (splits.empty()) throw EstimationError("gbt CV: no usable folds");

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_combo = 0;
    int best_rounds = 1;
    for (std::size_t c = 0; c < combos.size(); ++c) {
        std::vector<double> loss(std::size_t(opts.max_rounds), 0.0);
        std::size_t held = 0;
        for (std::size_t f = 0; f < splits.size(); ++f) {
            const auto& sp = splits[f];
            auto model = train_gbt(sp.train, combos[c], derive_seed(opts.seed, {c, f}));
            Eigen::MatrixXd Zte = standardize_all(sp.test.X, model.mean, model.sd);
            Eigen::VectorXd margin = Eigen::VectorXd::Constant(Zte.rows(), model.base_score);
            for (std::size_t r = 0; r < model.trees.size(); ++r) {
                for (Eigen::Index i = 0; i < Zte.rows(); ++i) margin[i] += tree_on_row(model.trees[r], Zte, i);
                loss[r] += logloss(sp.test.y, margin) * double(sp.test.rows());
            }
            held += sp.test.rows();
        }
        for (std::size_t r = 0; r < loss.size(); ++r) {
            double v = loss[r] / double(held);
            if (v < best) {
                best = v;
                best_combo = c;
                best_rounds = int(r) + 1;
            }
        }
    }
    GbtParams chosen = combos[best_combo];
    chosen.nrounds = best_rounds;
    auto model = train_gbt(data, chosen, derive_seed(opts.seed, {hash_tag("refit")}));
    model.cv_logloss = best;
    return model;
}

} // namespace foehn
