#pragma once

#include "foehn/aggregate.hpp"
#include "foehn/features.hpp"
#include "foehn/learners.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace foehn {

struct Fold {
    int index = 0;  // 1-based
    int test_first = 0, test_last = 0;
    std::vector<int> train_years;
    bool feasible = true;

    bool is_test(int year) const { return year >= test_first && year <= test_last; }
};

struct FoldPlan {
    int first_year = 0, last_year = 0;
    std::vector<Fold> folds;
};

/// Six folds of two consecutive test years over a 12-year period. With
/// `labels`, a fold without a single labeled hour in its test span is marked
/// infeasible. Any other period length is a ConfigError.
FoldPlan make_folds(int first_year, int last_year, const HourlyLabelSeries* labels = nullptr);

struct Job {
    std::string station;
    int hour = 0;
    LearnerKind learner = LearnerKind::lasso;
    VariableSet set = VariableSet::full;
};

/// One job per (station, hour of day, learner, variable set).
std::vector<Job> train_layout(const std::vector<std::string>& stations, const std::vector<LearnerKind>& learners,
                              const std::vector<VariableSet>& sets);

double brier(std::span<const double> p, std::span<const double> o);

struct EventMetrics {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
    double fnr = 0.0;  // percent, NaN without positives
    double fpr = 0.0;  // percent, NaN without negatives
    double pc = 0.0;   // percent

    std::size_t n() const { return tp + fn + fp + tn; }
};

EventMetrics confusion_metrics(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn);
/// Forecast is positive when p >= threshold.
EventMetrics event_metrics(std::span<const double> p, std::span<const double> o, double threshold = 0.5);

/// Labeled hours joined with feature rows.
struct JoinedData {
    std::vector<Instant> time;
    std::vector<int> year, hour;
    Dataset data;
};

/// Hours that carry a label and a feature row; with `years`, restricted to
/// that inclusive range.
JoinedData join(const FeatureTable& features, const HourlyLabelSeries& labels,
                std::optional<std::pair<int, int>> years = std::nullopt);

struct StationData {
    std::string station;
    HourlyLabelSeries labels;
    std::map<VariableSet, FeatureTable> features;
};

struct ScoreRow {
    std::string station;
    LearnerKind learner = LearnerKind::lasso;
    VariableSet set = VariableSet::full;
    std::string fold;   // "1".."6", "mean", or "all" for in-sample
    std::string split;  // train, test, insample
    double brier = 0.0;
    EventMetrics metrics;
};

struct ScoreReport {
    std::vector<ScoreRow> rows;
    std::vector<std::string> skipped;  // jobs that could not be fitted, with reason
};

struct CvOptions {
    LearnerOptions learner;
    std::uint64_t seed = 1;
    int threads = 1;
    bool in_sample = false;  // fit on the whole period instead of folds
};

/// Fits the 24 hour-of-day models per (station, learner, set, fold) and
/// scores pooled predictions on train and test hours. A failing job is
/// recorded in `skipped` and does not stop the others.
ScoreReport run_cv(const FoldPlan& plan, const std::vector<StationData>& stations,
                   const std::vector<LearnerKind>& learners, const std::vector<VariableSet>& sets,
                   const CvOptions& opts);

void write_score_csv(std::ostream& out, const ScoreReport& report);
/// Plain-text tables: mean Brier per station/learner/set and FNR/FPR/PC in
/// the lasso/stabsel/gbt triplet layout, followed by the reference
/// values for comparison.
void write_score_summary(std::ostream& out, const ScoreReport& report);

/// Seed of one fitting job, derived from the run seed.
std::uint64_t job_seed(std::uint64_t seed, const std::string& station, int hour, LearnerKind learner, VariableSet set,
                       int fold);

} // namespace foehn
