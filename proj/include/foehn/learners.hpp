#pragma once

#include "foehn/random.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace foehn {

/// Column means and (population) standard deviations. Columns without
/// variance are dropped and listed.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dropped;

    static Standardization fit(const Eigen::MatrixXd& X);
    /// Standardized matrix of the kept columns.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

/// Binary-response design matrix. X holds raw covariates; every learner
/// standardizes internally, so fitted probabilities do not depend on the
/// scale of any column.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> names;

    std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
    Dataset subset(std::span<const std::size_t> rows) const;
    /// Throws EstimationError unless both classes are present.
    void require_both_classes() const;
    double positive_rate() const;
};

/// Assigns each row to one of `k` folds, balancing each class separately.
std::vector<int> stratified_folds(const Eigen::VectorXd& y, int k, Rng& rng);

// ---------------------------------------------------------------- lasso

struct LassoOptions {
    int folds = 30;
    int n_lambda = 100;
    double lambda_min_ratio = 1e-4;
    int max_outer = 300;
    double kkt_tol = 1e-7;
    /// glmnet-style early exit: stop the path once the training deviance
    /// ratio exceeds this or changes by less than `path_min_gain` relatively.
    double max_dev_ratio = 0.999;
    double path_min_gain = 1e-5;
    std::uint64_t seed = 1;
};

/// One point of an L1-penalized logistic path on standardized columns.
struct PathPoint {
    double lambda = 0.0;
    double beta0 = 0.0;
    Eigen::VectorXd beta;  // standardized scale
    double deviance = 0.0; // training deviance
    int outer_iterations = 0;
};

/// Smallest penalty at which every slope is zero.
double lambda_max(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);
std::vector<double> lambda_grid(double lambda_max, int n, double min_ratio);

/// Coordinate descent with an IRLS outer loop, warm-started along `lambdas`
/// (descending). Stops early when the glmnet saturation rules trigger or,
/// with `stop_after_active > 0`, once that many columns have entered.
/// Every returned point satisfies the KKT conditions within `kkt_tol`.
std::vector<PathPoint> lasso_path(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, std::span<const double> lambdas,
                                  const LassoOptions& opts, std::size_t stop_after_active = 0);

/// Penalized objective -loglik/n + lambda * |beta|_1.
double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double beta0, const Eigen::VectorXd& beta,
                       double lambda);

struct LassoModel {
    std::vector<std::string> names;
    double beta0 = 0.0;             // original scale
    std::vector<double> beta;       // original scale, one per name
    std::vector<double> lambda_grid;
    std::vector<double> cv_curve;   // mean held-out deviance per lambda
    double lambda_min = 0.0;
    std::size_t lambda_index = 0;
    std::vector<std::string> dropped;
};

LassoModel fit_lasso(const Dataset& data, const LassoOptions& opts = {});

// ---------------------------------------------------------------- stabsel

struct StabselOptions {
    int runs = 200;
    int first_k = 40;
    double threshold = 0.6;
    int n_lambda = 100;
    double lambda_min_ratio = 1e-4;
    std::uint64_t seed = 1;
};

struct StabselModel {
    std::vector<std::string> names;
    std::vector<double> selection_freq;  // per name
    std::vector<std::size_t> selected;   // indices into names
    double beta0 = 0.0;                  // final unregularized fit, original scale
    std::vector<double> beta;            // per selected column
    bool ridge_fallback = false;         // final fit separated; tiny ridge used
    int runs = 0;
};

StabselModel fit_stabsel(const Dataset& data, const StabselOptions& opts = {});

struct LogisticFit {
    double beta0 = 0.0;
    Eigen::VectorXd beta;
    bool converged = false;
};

/// Newton-Raphson logistic regression with an optional ridge penalty
/// (ridge/2 * |beta|^2 added to -loglik/n).
LogisticFit fit_logistic(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double ridge = 0.0);

// ---------------------------------------------------------------- gbt

struct GbtParams {
    double eta = 0.2;
    int max_depth = 10;
    double min_child_weight = 4.0;
    double gamma = 2.0;
    double subsample = 0.5;
    int nrounds = 20;
    double lambda_reg = 1.0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf; index into the model's names
    double threshold = 0.0;  // standardized scale; x < threshold goes left
    int left = -1, right = -1;
    double value = 0.0;      // leaf output (already scaled by eta)
    double gain = 0.0;       // loss reduction of the split, before gamma
    double cover = 0.0;      // hessian sum
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double predict(std::span<const double> z_row) const;
    int depth() const;
};

struct GbtModel {
    std::vector<std::string> names;
    std::vector<double> mean, sd;  // standardization per name (sd 0 = unused)
    double base_score = 0.0;       // initial log-odds
    GbtParams params;
    std::vector<Tree> trees;
    double cv_logloss = 0.0;
    bool no_splits = false;        // every split rejected in round 1
};

struct GbtGrid {
    std::vector<double> eta{0.1, 0.125, 0.15, 0.2};
    std::vector<int> max_depth{5, 10, 20};
    std::vector<double> min_child_weight{2, 4, 6};
    std::vector<double> gamma{2, 5, 10};

    std::vector<GbtParams> combinations(const GbtParams& base) const;
};

struct GbtOptions {
    GbtGrid grid;
    int cv_folds = 10;
    int max_rounds = 20;
    double subsample = 0.5;
    double lambda_reg = 1.0;
    std::uint64_t seed = 1;
};

/// Second-order boosting with fixed parameters; `trace` receives the
/// training logloss after each round when non-null.
GbtModel train_gbt(const Dataset& data, const GbtParams& params, std::uint64_t seed,
                   std::vector<double>* trace = nullptr);

/// Grid search over `opts.grid` with stratified CV, then a refit on all rows.
GbtModel fit_gbt(const Dataset& data, const GbtOptions& opts = {});

/// Closed-form leaf weight and split gain used by the tree builder.
double leaf_weight(double G, double H, double lambda_reg);
double split_gain(double GL, double HL, double GR, double HR, double lambda_reg);

// ---------------------------------------------------------------- shared

enum class LearnerKind { lasso, stabsel, gbt };
std::string to_string(LearnerKind k);
LearnerKind parse_learner(const std::string& s);

using LearnerModel = std::variant<LassoModel, StabselModel, GbtModel>;

struct LearnerOptions {
    LassoOptions lasso;
    StabselOptions stabsel;
    GbtOptions gbt;
};

LearnerModel fit_learner(LearnerKind kind, const Dataset& data, const LearnerOptions& opts, std::uint64_t seed);
const std::vector<std::string>& model_names(const LearnerModel& m);

/// Probabilities for rows of X whose columns are named `names`. Every model
/// column must be present (extra columns are ignored); otherwise SchemaError.
Eigen::VectorXd predict(const LearnerModel& model, const Eigen::MatrixXd& X, const std::vector<std::string>& names);

void to_json(nlohmann::json& j, const LearnerModel& m);
void from_json(const nlohmann::json& j, LearnerModel& m);
inline constexpr int kModelSchemaVersion = 1;

double logistic(double eta);
/// Mean binomial deviance of probabilities for outcomes.
double mean_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta);

} // namespace foehn
