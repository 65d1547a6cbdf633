#include "foehn/aggregate.hpp"
#include "foehn/classify.hpp"
#include "foehn/cli.hpp"
#include "foehn/decompose.hpp"
#include "foehn/errors.hpp"
#include "foehn/evaluate.hpp"
#include "foehn/learners.hpp"
#include "foehn/synth.hpp"

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace foehn;

namespace {

std::string label_name(HourLabel l) {
    switch (l) {
    case HourLabel::foehn: return "foehn";
    case HourLabel::no_foehn: return "no_foehn";
    default: return "missing";
    }
}

py::dict mixture_dict(const MixtureParams& p) {
    py::dict d;
    d["mu1"] = p.mu1;
    d["sigma1"] = p.sigma1;
    d["mu2"] = p.mu2;
    d["sigma2"] = p.sigma2;
    d["alpha"] = std::vector<double>(p.alpha.begin(), p.alpha.end());
    d["rh_mean"] = p.rh_mean;
    d["rh_sd"] = p.rh_sd;
    d["ff_mean"] = p.ff_mean;
    d["ff_sd"] = p.ff_sd;
    d["loglik_trace"] = p.loglik_trace;
    d["n_used"] = p.n_used;
    d["iterations"] = p.iterations;
    d["converged"] = p.converged;
    d["separation"] = p.separation;
    d["degenerate"] = p.degenerate;
    return d;
}

py::dict str_dict(const StrFit& f) {
    py::dict d;
    d["y"] = f.y;
    d["trend"] = f.trend;
    d["seasonal"] = f.seasonal;
    d["remainder"] = f.remainder;
    d["ci_lower"] = f.ci_lower;
    d["ci_upper"] = f.ci_upper;
    d["lambda_trend"] = f.lambda_trend;
    d["lambda_seasonal"] = f.lambda_seasonal;
    d["sigma2"] = f.sigma2;
    d["edf"] = f.edf;
    d["gcv"] = f.gcv;
    d["trend_significant"] = trend_significance(f);
    return d;
}

/// A fitted learner with its column names.
struct PyModel {
    LearnerModel model;

    std::string kind() const { return to_string(LearnerKind(model.index())); }
    Eigen::VectorXd predict(const Eigen::MatrixXd& X, const std::vector<std::string>& names) const {
        return foehn::predict(model, X, names);
    }
    std::string to_json() const { return nlohmann::json(model).dump(); }
    static PyModel from_json(const std::string& text) { return {nlohmann::json::parse(text).get<LearnerModel>()}; }
};

Dataset make_dataset(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string> names) {
    if (X.rows() != y.size()) throw ValueError("X and y have different row counts");
    if (names.empty())
        for (Eigen::Index j = 0; j < X.cols(); ++j) names.push_back("x" + std::to_string(j));
    if (Eigen::Index(names.size()) != X.cols()) throw ValueError("names must match the columns of X");
    return {X, y, std::move(names)};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Foehn classification, statistical learners and season-trend decomposition";

    py::register_exception<Error>(m, "FoehnError", PyExc_RuntimeError);

    m.def(
        "hourly_label",
        [](const std::vector<double>& posteriors) { return label_name(hourly_label(posteriors)); },
        py::arg("posteriors"), "Label of one hour from up to six 10-min posteriors (NaN = missing).");

    m.def(
        "em_fit",
        [](const std::vector<double>& dtheta, const std::vector<double>& rh, const std::vector<double>& ff,
           std::size_t min_sample, double tol, int max_iter) {
            EmOptions o;
            o.min_sample = min_sample;
            o.tol = tol;
            o.max_iter = max_iter;
            return mixture_dict(em_fit(dtheta, rh, ff, o));
        },
        py::arg("dtheta"), py::arg("rh"), py::arg("ff"), py::arg("min_sample") = 500, py::arg("tol") = 1e-6,
        py::arg("max_iter") = 1000, "Two-component Gaussian mixture with a logistic concomitant model.");

    m.def("posterior_from_prior", &posterior_from_prior, py::arg("y"), py::arg("pi"), py::arg("mu1"),
          py::arg("sigma1"), py::arg("mu2"), py::arg("sigma2"));

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("kind", &PyModel::kind)
        .def_property_readonly("names", [](const PyModel& p) { return model_names(p.model); })
        .def("predict", &PyModel::predict, py::arg("X"), py::arg("names"))
        .def("to_json", &PyModel::to_json)
        .def_static("from_json", &PyModel::from_json, py::arg("text"));

    m.def(
        "fit",
        [](const std::string& learner, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           std::vector<std::string> names, std::uint64_t seed, int lasso_folds, int n_lambda, int stabsel_runs,
           int gbt_cv_folds, int gbt_rounds, std::optional<GbtParams> gbt_params) {
            auto data = make_dataset(X, y, std::move(names));
            LearnerOptions o;
            o.lasso.folds = lasso_folds;
            o.lasso.n_lambda = n_lambda;
            o.stabsel.runs = stabsel_runs;
            o.stabsel.n_lambda = n_lambda;
            o.gbt.cv_folds = gbt_cv_folds;
            o.gbt.max_rounds = gbt_rounds;
            if (gbt_params) {
                auto& g = *gbt_params;
                o.gbt.grid = GbtGrid{{g.eta}, {g.max_depth}, {g.min_child_weight}, {g.gamma}};
            }
            py::gil_scoped_release release;
            return PyModel{fit_learner(parse_learner(learner), data, o, seed)};
        },
        py::arg("learner"), py::arg("X"), py::arg("y"), py::arg("names") = std::vector<std::string>{},
        py::arg("seed") = 1, py::arg("lasso_folds") = 30, py::arg("n_lambda") = 100, py::arg("stabsel_runs") = 200,
        py::arg("gbt_cv_folds") = 10, py::arg("gbt_rounds") = 20, py::arg("gbt_params") = py::none(),
        "Fit one learner (lasso, stabsel or gbt) on a binary response.");

    py::class_<GbtParams>(m, "GbtParams")
        .def(py::init<>())
        .def_readwrite("eta", &GbtParams::eta)
        .def_readwrite("max_depth", &GbtParams::max_depth)
        .def_readwrite("min_child_weight", &GbtParams::min_child_weight)
        .def_readwrite("gamma", &GbtParams::gamma)
        .def_readwrite("subsample", &GbtParams::subsample)
        .def_readwrite("nrounds", &GbtParams::nrounds)
        .def_readwrite("lambda_reg", &GbtParams::lambda_reg);

    m.def(
        "gbt_trace",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& p, std::uint64_t seed) {
            std::vector<double> trace;
            train_gbt(make_dataset(X, y, {}), p, seed, &trace);
            return trace;
        },
        py::arg("X"), py::arg("y"), py::arg("params"), py::arg("seed") = 1,
        "Training logloss after each boosting round.");

    m.def(
        "lasso_path",
        [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_lambda, double min_ratio) {
            auto st = Standardization::fit(X);
            Eigen::MatrixXd Z = st.apply(X);
            auto grid = lambda_grid(lambda_max(Z, y), n_lambda, min_ratio);
            auto path = foehn::lasso_path(Z, y, grid, LassoOptions{});
            py::list out;
            for (const auto& p : path) {
                py::dict d;
                d["lambda"] = p.lambda;
                d["beta0"] = p.beta0;
                d["beta"] = p.beta;
                d["deviance"] = p.deviance;
                out.append(d);
            }
            return out;
        },
        py::arg("X"), py::arg("y"), py::arg("n_lambda") = 100, py::arg("min_ratio") = 1e-4,
        "L1-penalized logistic path on standardized columns.");

    m.def(
        "brier",
        [](const std::vector<double>& p, const std::vector<double>& o) { return brier(p, o); }, py::arg("p"),
        py::arg("o"));

    m.def(
        "event_metrics",
        [](const std::vector<double>& p, const std::vector<double>& o, double threshold) {
            auto e = event_metrics(p, o, threshold);
            py::dict d;
            d["tp"] = e.tp;
            d["fn"] = e.fn;
            d["fp"] = e.fp;
            d["tn"] = e.tn;
            d["fnr"] = e.fnr;
            d["fpr"] = e.fpr;
            d["pc"] = e.pc;
            return d;
        },
        py::arg("p"), py::arg("o"), py::arg("threshold") = 0.5, "FNR, FPR and PC in percent.");

    m.def(
        "fit_str",
        [](const std::vector<double>& y, int start_year, int start_month, std::optional<double> lambda_trend,
           std::optional<double> lambda_seasonal) {
            StrOptions o;
            o.lambda_trend = lambda_trend;
            o.lambda_seasonal = lambda_seasonal;
            return str_dict(fit_str(y, start_year, start_month, o));
        },
        py::arg("y"), py::arg("start_year"), py::arg("start_month") = 1, py::arg("lambda_trend") = py::none(),
        py::arg("lambda_seasonal") = py::none(), "Season-trend decomposition of a monthly series.");

    m.def(
        "trend_significance",
        [](const std::vector<double>& lo, const std::vector<double>& hi) { return trend_significance(lo, hi); },
        py::arg("ci_lower"), py::arg("ci_upper"));

    m.def(
        "synth",
        [](const std::string& out, std::uint64_t seed, int years, int first_year) {
            SynthSpec s;
            s.seed = seed;
            s.years = years;
            s.first_year = first_year;
            s.validate();
            write_synth(out, s, generate(s));
        },
        py::arg("out"), py::arg("seed") = 42, py::arg("years") = 12, py::arg("first_year") = 2011,
        "Write a synthetic data set with its config.json into a directory.");

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "foehn");
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            py::gil_scoped_release release;
            return run_cli(int(argv.size()), argv.data());
        },
        py::arg("args"), "Run a command-line subcommand in-process; returns the exit code.");
}
