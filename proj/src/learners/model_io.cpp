#include "foehn/errors.hpp"
#include "foehn/learners.hpp"

#include <nlohmann/json.hpp>

#include <unordered_map>

namespace foehn {

LearnerModel fit_learner(LearnerKind kind, const Dataset& data, const LearnerOptions& opts, std::uint64_t seed) {
    switch (kind) {
    case LearnerKind::lasso: {
        auto o = opts.lasso;
        o.seed = seed;
        return fit_lasso(data, o);
    }
    case LearnerKind::stabsel: {
        auto o = opts.stabsel;
        o.seed = seed;
        return fit_stabsel(data, o);
    }
    case LearnerKind::gbt: {
        auto o = opts.gbt;
        o.seed = seed;
        return fit_gbt(data, o);
    }
    }
    throw ConfigError("unknown learner kind");
}

const std::vector<std::string>& model_names(const LearnerModel& m) {
    return std::visit([](const auto& x) -> const std::vector<std::string>& { return x.names; }, m);
}

namespace {

std::vector<Eigen::Index> column_map(const std::vector<std::string>& wanted, const std::vector<std::string>& have) {
    std::unordered_map<std::string, Eigen::Index> at;
    for (std::size_t i = 0; i < have.size(); ++i) at.emplace(have[i], Eigen::Index(i));
    std::vector<Eigen::Index> out;
    std::string missing;
    for (const auto& n : wanted) {
        auto it = at.find(n);
        if (it == at.end()) {
            missing += (missing.empty() ? "" : ", ") + n;
            out.push_back(-1);
        } else {
            out.push_back(it->second);
        }
    }
    if (!missing.empty()) throw SchemaError("feature table lacks model columns: " + missing);
    return out;
}

} // namespace

Eigen::VectorXd predict(const LearnerModel& model, const Eigen::MatrixXd& X, const std::vector<std::string>& names) {
    if (Eigen::Index(names.size()) != X.cols()) throw ContractError("predict: names do not match matrix columns");
    const auto cols = column_map(model_names(model), names);
    Eigen::VectorXd out(X.rows());
    if (const auto* m = std::get_if<LassoModel>(&model)) {
        Eigen::VectorXd eta = Eigen::VectorXd::Constant(X.rows(), m->beta0);
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (m->beta[j] != 0.0) eta += m->beta[j] * X.col(cols[j]);
        for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = logistic(eta[i]);
    } else if (const auto* m = std::get_if<StabselModel>(&model)) {
        Eigen::VectorXd eta = Eigen::VectorXd::Constant(X.rows(), m->beta0);
        for (std::size_t c = 0; c < m->selected.size(); ++c) eta += m->beta[c] * X.col(cols[m->selected[c]]);
        for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = logistic(eta[i]);
    } else {
        const auto& g = std::get<GbtModel>(model);
        std::vector<double> z(cols.size());
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            for (std::size_t j = 0; j < cols.size(); ++j)
                z[j] = g.sd[j] > 0 ? (X(i, cols[j]) - g.mean[j]) / g.sd[j] : 0.0;
            double margin = g.base_score;
            for (const auto& t : g.trees) margin += t.predict(z);
            out[i] = logistic(margin);
        }
    }
    return out;
}

void to_json(nlohmann::json& j, const LearnerModel& model) {
    j = nlohmann::json::object();
    j["schema_version"] = kModelSchemaVersion;
    if (const auto* m = std::get_if<LassoModel>(&model)) {
        j["kind"] = "lasso";
        j["names"] = m->names;
        j["beta0"] = m->beta0;
        j["beta"] = m->beta;
        j["lambda_grid"] = m->lambda_grid;
        j["cv_curve"] = m->cv_curve;
        j["lambda_min"] = m->lambda_min;
        j["lambda_index"] = m->lambda_index;
        j["dropped"] = m->dropped;
    } else if (const auto* m = std::get_if<StabselModel>(&model)) {
        j["kind"] = "stabsel";
        j["names"] = m->names;
        j["selection_freq"] = m->selection_freq;
        j["selected"] = m->selected;
        j["beta0"] = m->beta0;
        j["beta"] = m->beta;
        j["ridge_fallback"] = m->ridge_fallback;
        j["runs"] = m->runs;
    } else {
        const auto& g = std::get<GbtModel>(model);
        j["kind"] = "gbt";
        j["names"] = g.names;
        j["mean"] = g.mean;
        j["sd"] = g.sd;
        j["base_score"] = g.base_score;
        j["params"] = {{"eta", g.params.eta},
                       {"max_depth", g.params.max_depth},
                       {"min_child_weight", g.params.min_child_weight},
                       {"gamma", g.params.gamma},
                       {"subsample", g.params.subsample},
                       {"nrounds", g.params.nrounds},
                       {"lambda", g.params.lambda_reg}};
        j["cv_logloss"] = g.cv_logloss;
        j["no_splits"] = g.no_splits;
        auto trees = nlohmann::json::array();
        for (const auto& t : g.trees) {
            auto nodes = nlohmann::json::array();
            for (const auto& n : t.nodes)
                nodes.push_back(nlohmann::json::array({n.feature, n.threshold, n.left, n.right, n.value, n.gain, n.cover}));
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
    }
}

void from_json(const nlohmann::json& j, LearnerModel& model) {
    try {
        if (j.at("schema_version").get<int>() != kModelSchemaVersion)
            throw SchemaError("unsupported model schema version " + j.at("schema_version").dump());
        auto kind = parse_learner(j.at("kind").get<std::string>());
        switch (kind) {
        case LearnerKind::lasso: {
            LassoModel m;
            j.at("names").get_to(m.names);
            j.at("beta0").get_to(m.beta0);
            j.at("beta").get_to(m.beta);
            j.at("lambda_grid").get_to(m.lambda_grid);
            j.at("cv_curve").get_to(m.cv_curve);
            j.at("lambda_min").get_to(m.lambda_min);
            j.at("lambda_index").get_to(m.lambda_index);
            j.at("dropped").get_to(m.dropped);
            if (m.beta.size() != m.names.size()) throw SchemaError("lasso model: beta/names length mismatch");
            model = std::move(m);
            break;
        }
        case LearnerKind::stabsel: {
            StabselModel m;
            j.at("names").get_to(m.names);
            j.at("selection_freq").get_to(m.selection_freq);
            j.at("selected").get_to(m.selected);
            j.at("beta0").get_to(m.beta0);
            j.at("beta").get_to(m.beta);
            j.at("ridge_fallback").get_to(m.ridge_fallback);
            j.at("runs").get_to(m.runs);
            if (m.beta.size() != m.selected.size()) throw SchemaError("stabsel model: beta/selected length mismatch");
            for (auto s : m.selected)
                if (s >= m.names.size()) throw SchemaError("stabsel model: selected index out of range");
            model = std::move(m);
            break;
        }
        case LearnerKind::gbt: {
            GbtModel m;
            j.at("names").get_to(m.names);
            j.at("mean").get_to(m.mean);
            j.at("sd").get_to(m.sd);
            j.at("base_score").get_to(m.base_score);
            const auto& p = j.at("params");
            p.at("eta").get_to(m.params.eta);
            p.at("max_depth").get_to(m.params.max_depth);
            p.at("min_child_weight").get_to(m.params.min_child_weight);
            p.at("gamma").get_to(m.params.gamma);
            p.at("subsample").get_to(m.params.subsample);
            p.at("nrounds").get_to(m.params.nrounds);
            p.at("lambda").get_to(m.params.lambda_reg);
            j.at("cv_logloss").get_to(m.cv_logloss);
            j.at("no_splits").get_to(m.no_splits);
            if (m.mean.size() != m.names.size() || m.sd.size() != m.names.size())
                throw SchemaError("gbt model: standardization/names length mismatch");
            for (const auto& tj : j.at("trees")) {
                Tree t;
                for (const auto& nj : tj) {
                    TreeNode n;
                    n.feature = nj.at(0).get<int>();
                    n.threshold = nj.at(1).get<double>();
                    n.left = nj.at(2).get<int>();
                    n.right = nj.at(3).get<int>();
                    n.value = nj.at(4).get<double>();
                    n.gain = nj.at(5).get<double>();
                    n.cover = nj.at(6).get<double>();
                    t.nodes.push_back(n);
                }
                const int size = int(t.nodes.size());
                if (size == 0) throw SchemaError("gbt model: empty tree");
                for (int i = 0; i < size; ++i) {
                    const auto& n = t.nodes[std::size_t(i)];
                    if (n.feature < 0) continue;
                    if (n.feature >= int(m.names.size()) || n.left <= i || n.right <= i || n.left >= size ||
                        n.right >= size)
                        throw SchemaError("gbt model: malformed tree");
                }
                m.trees.push_back(std::move(t));
            }
            model = std::move(m);
            break;
        }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

} // namespace foehn
