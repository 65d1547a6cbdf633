#include "foehn/config.hpp"

#include "foehn/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace foehn {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

WindSector sector(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(what + " must be [from_deg, to_deg]");
    WindSector s{j[0].get<double>(), j[1].get<double>()};
    for (double v : {s.from_deg, s.to_deg})
        if (!(v >= 0 && v < 360)) throw ConfigError(what + " bounds must lie in [0, 360)");
    return s;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
}

std::string rel_path(const fs::path& p, const fs::path& base) {
    auto r = p.lexically_relative(base);
    return (r.empty() ? p : r).generic_string();
}

} // namespace

const StationConfig& Config::station(const std::string& id) const {
    for (const auto& s : stations)
        if (s.meta.id == id) return s;
    throw ConfigError("unknown station '" + id + "'");
}

std::vector<const StationConfig*> Config::valley_stations() const {
    std::vector<const StationConfig*> out;
    for (const auto& s : stations)
        if (s.meta.role == StationRole::valley) out.push_back(&s);
    return out;
}

StationPair Config::pair(const StationConfig& valley) const {
    const auto& crest = station(valley.crest);
    return {valley.meta, crest.meta, valley.valley_sector, valley.crest_sector};
}

Config parse_config(const json& j, const fs::path& base_dir) {
    try {
        check_keys(j, "config",
                   {"seed", "stations", "ridge", "gridded", "recipes", "cv", "learners", "variable_sets", "classify",
                    "reconstruct", "decompose", "threads"});
        Config c;
        c.base_dir = base_dir;
        opt(j, "seed", c.seed);
        opt(j, "threads", c.threads);
        if (c.threads < 1) throw ConfigError("threads must be >= 1");

        for (const auto& sj : j.at("stations")) {
            check_keys(sj, "station",
                       {"id", "role", "lat", "lon", "altitude", "foehn_type", "observations", "crest", "valley_sector",
                        "crest_sector"});
            StationConfig s;
            s.meta.id = sj.at("id").get<std::string>();
            auto role = sj.at("role").get<std::string>();
            if (role != "valley" && role != "crest") throw ConfigError("station role must be valley or crest");
            s.meta.role = role == "valley" ? StationRole::valley : StationRole::crest;
            s.meta.lat = sj.at("lat").get<double>();
            s.meta.lon = sj.at("lon").get<double>();
            s.meta.altitude = sj.at("altitude").get<double>();
            auto ft = sj.value("foehn_type", std::string("south"));
            if (ft != "south" && ft != "north") throw ConfigError("foehn_type must be south or north");
            s.meta.foehn_type = ft == "south" ? FoehnType::south : FoehnType::north;
            validate(s.meta);
            s.observations = resolve(base_dir, sj.at("observations").get<std::string>());
            if (s.meta.role == StationRole::valley) {
                s.crest = sj.at("crest").get<std::string>();
                s.valley_sector = sector(sj.at("valley_sector"), "valley_sector of " + s.meta.id);
                s.crest_sector = sector(sj.at("crest_sector"), "crest_sector of " + s.meta.id);
            }
            for (const auto& other : c.stations)
                if (other.meta.id == s.meta.id) throw ConfigError("duplicate station id '" + s.meta.id + "'");
            c.stations.push_back(std::move(s));
        }
        for (const auto& s : c.stations) {
            if (s.meta.role != StationRole::valley) continue;
            const StationConfig* crest = nullptr;
            for (const auto& o : c.stations)
                if (o.meta.id == s.crest) crest = &o;
            if (!crest) throw ConfigError("valley station " + s.meta.id + " references missing crest '" + s.crest + "'");
            if (crest->meta.role != StationRole::crest)
                throw ConfigError("station '" + s.crest + "' referenced as crest is not a crest station");
        }

        for (const auto& p : j.at("ridge")) {
            if (!p.is_array() || p.size() != 2) throw ConfigError("ridge vertices must be [lat, lon]");
            c.ridge.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        if (c.ridge.size() < 2) throw ConfigError("ridge needs at least two vertices");
        c.gridded = resolve(base_dir, j.at("gridded").get<std::string>());
        if (j.contains("recipes")) c.recipes = resolve(base_dir, j.at("recipes").get<std::string>());

        if (j.contains("cv")) {
            const auto& cv = j.at("cv");
            check_keys(cv, "cv", {"first_year", "last_year"});
            opt(cv, "first_year", c.cv_first_year);
            opt(cv, "last_year", c.cv_last_year);
        }

        if (j.contains("learners")) {
            const auto& lj = j.at("learners");
            if (!lj.is_object()) throw ConfigError("learners must be an object");
            c.learners.clear();
            for (const auto& [name, v] : lj.items()) {
                auto kind = parse_learner(name);
                c.learners.push_back(kind);
                auto& o = c.learner_options;
                switch (kind) {
                case LearnerKind::lasso:
                    check_keys(v, "learners.lasso", {"folds", "n_lambda", "lambda_min_ratio"});
                    opt(v, "folds", o.lasso.folds);
                    opt(v, "n_lambda", o.lasso.n_lambda);
                    opt(v, "lambda_min_ratio", o.lasso.lambda_min_ratio);
                    break;
                case LearnerKind::stabsel:
                    check_keys(v, "learners.stabsel", {"runs", "first_k", "threshold", "n_lambda"});
                    opt(v, "runs", o.stabsel.runs);
                    opt(v, "first_k", o.stabsel.first_k);
                    opt(v, "threshold", o.stabsel.threshold);
                    opt(v, "n_lambda", o.stabsel.n_lambda);
                    break;
                case LearnerKind::gbt:
                    check_keys(v, "learners.gbt", {"cv_folds", "max_rounds", "subsample", "grid"});
                    opt(v, "cv_folds", o.gbt.cv_folds);
                    opt(v, "max_rounds", o.gbt.max_rounds);
                    opt(v, "subsample", o.gbt.subsample);
                    if (v.contains("grid")) {
                        const auto& g = v.at("grid");
                        check_keys(g, "learners.gbt.grid", {"eta", "max_depth", "min_child_weight", "gamma"});
                        opt(g, "eta", o.gbt.grid.eta);
                        opt(g, "max_depth", o.gbt.grid.max_depth);
                        opt(g, "min_child_weight", o.gbt.grid.min_child_weight);
                        opt(g, "gamma", o.gbt.grid.gamma);
                    }
                    break;
                }
            }
            if (c.learners.empty()) throw ConfigError("learners must name at least one of lasso, stabsel, gbt");
            // JSON object order is not meaningful; keep the canonical order.
            std::sort(c.learners.begin(), c.learners.end());
        }
        if (j.contains("variable_sets")) {
            c.variable_sets.clear();
            for (const auto& v : j.at("variable_sets")) c.variable_sets.push_back(parse_variable_set(v.get<std::string>()));
            std::sort(c.variable_sets.begin(), c.variable_sets.end());
            c.variable_sets.erase(std::unique(c.variable_sets.begin(), c.variable_sets.end()), c.variable_sets.end());
            if (c.variable_sets.empty()) throw ConfigError("variable_sets must not be empty");
        }
        if (j.contains("classify")) {
            const auto& e = j.at("classify");
            check_keys(e, "classify", {"min_sample", "tol", "max_iter"});
            opt(e, "min_sample", c.em.min_sample);
            opt(e, "tol", c.em.tol);
            opt(e, "max_iter", c.em.max_iter);
        }
        if (j.contains("reconstruct")) {
            const auto& r = j.at("reconstruct");
            check_keys(r, "reconstruct", {"first", "last"});
            c.reconstruct_first = parse_iso(r.at("first").get<std::string>());
            c.reconstruct_last = parse_iso(r.at("last").get<std::string>());
            if (*c.reconstruct_last < *c.reconstruct_first) throw ConfigError("reconstruct.last precedes reconstruct.first");
        }
        if (j.contains("decompose")) {
            const auto& d = j.at("decompose");
            check_keys(d, "decompose", {"lambda_trend", "lambda_seasonal", "grid"});
            if (d.contains("lambda_trend")) c.decompose.lambda_trend = d.at("lambda_trend").get<double>();
            if (d.contains("lambda_seasonal")) c.decompose.lambda_seasonal = d.at("lambda_seasonal").get<double>();
            opt(d, "grid", c.decompose.grid);
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const ValueError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

Config load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json config_to_json(const Config& c) {
    json j;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    auto stations = json::array();
    for (const auto& s : c.stations) {
        json sj{{"id", s.meta.id},
                {"role", s.meta.role == StationRole::valley ? "valley" : "crest"},
                {"lat", s.meta.lat},
                {"lon", s.meta.lon},
                {"altitude", s.meta.altitude},
                {"foehn_type", s.meta.foehn_type == FoehnType::south ? "south" : "north"},
                {"observations", rel_path(s.observations, c.base_dir)}};
        if (s.meta.role == StationRole::valley) {
            sj["crest"] = s.crest;
            sj["valley_sector"] = {s.valley_sector.from_deg, s.valley_sector.to_deg};
            sj["crest_sector"] = {s.crest_sector.from_deg, s.crest_sector.to_deg};
        }
        stations.push_back(std::move(sj));
    }
    j["stations"] = std::move(stations);
    auto ridge = json::array();
    for (auto p : c.ridge) ridge.push_back({p.lat, p.lon});
    j["ridge"] = std::move(ridge);
    j["gridded"] = rel_path(c.gridded, c.base_dir);
    if (c.recipes) j["recipes"] = rel_path(*c.recipes, c.base_dir);
    j["cv"] = {{"first_year", c.cv_first_year}, {"last_year", c.cv_last_year}};
    json lj = json::object();
    const auto& o = c.learner_options;
    for (auto k : c.learners) {
        switch (k) {
        case LearnerKind::lasso:
            lj["lasso"] = {{"folds", o.lasso.folds}, {"n_lambda", o.lasso.n_lambda},
                           {"lambda_min_ratio", o.lasso.lambda_min_ratio}};
            break;
        case LearnerKind::stabsel:
            lj["stabsel"] = {{"runs", o.stabsel.runs}, {"first_k", o.stabsel.first_k},
                             {"threshold", o.stabsel.threshold}, {"n_lambda", o.stabsel.n_lambda}};
            break;
        case LearnerKind::gbt:
            lj["gbt"] = {{"cv_folds", o.gbt.cv_folds},
                         {"max_rounds", o.gbt.max_rounds},
                         {"subsample", o.gbt.subsample},
                         {"grid",
                          {{"eta", o.gbt.grid.eta},
                           {"max_depth", o.gbt.grid.max_depth},
                           {"min_child_weight", o.gbt.grid.min_child_weight},
                           {"gamma", o.gbt.grid.gamma}}}};
            break;
        }
    }
    j["learners"] = std::move(lj);
    auto sets = json::array();
    for (auto s : c.variable_sets) sets.push_back(to_string(s));
    j["variable_sets"] = std::move(sets);
    j["classify"] = {{"min_sample", c.em.min_sample}, {"tol", c.em.tol}, {"max_iter", c.em.max_iter}};
    if (c.reconstruct_first && c.reconstruct_last)
        j["reconstruct"] = {{"first", format_iso(*c.reconstruct_first)}, {"last", format_iso(*c.reconstruct_last)}};
    json d{{"grid", c.decompose.grid}};
    if (c.decompose.lambda_trend) d["lambda_trend"] = *c.decompose.lambda_trend;
    if (c.decompose.lambda_seasonal) d["lambda_seasonal"] = *c.decompose.lambda_seasonal;
    j["decompose"] = std::move(d);
    return j;
}

} // namespace foehn
