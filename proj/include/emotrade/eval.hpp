#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emotrade/discretize.hpp"
#include "emotrade/learn.hpp"
#include "emotrade/market.hpp"
#include "emotrade/timeseries.hpp"

namespace emotrade {

double accuracy(std::span<const CategoryLabel> predicted, std::span<const CategoryLabel> actual);

struct ConfusionMatrix {
    std::vector<CategoryLabel> labels;
    std::vector<std::vector<std::size_t>> counts;  // [actual][predicted]

    static ConfusionMatrix build(std::span<const CategoryLabel> labels, std::span<const CategoryLabel> predicted,
                                 std::span<const CategoryLabel> actual);
    std::size_t total() const;
    std::size_t trace() const;
};

using Predictor = std::function<CategoryLabel(const Eigen::VectorXd&)>;
using Trainer = std::function<Predictor(const Dataset&)>;

// shuffled: rows permuted once by the seed; contiguous: chronological blocks.
enum class CvMode { shuffled, contiguous };

std::string_view to_string(CvMode m);
CvMode parse_cv_mode(std::string_view name);

// k folds partitioning 0..n-1; the first n % k folds hold one extra row.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed,
                                                 CvMode mode = CvMode::shuffled);

struct CvResult {
    double mean_accuracy = 0.0;
    std::vector<double> fold_accuracies;
    std::vector<std::size_t> fold_sizes;
    // A fold whose training complement holds a single class; it is scored
    // with that class as a constant prediction and counted in the mean.
    std::vector<bool> degenerate;

    int degenerate_count() const;
};

CvResult kfold_cv(const Dataset& ds, int k, const Trainer& trainer, std::uint64_t seed,
                  CvMode mode = CvMode::shuffled);

// Standard trainer: scaler fitted on the training rows (or `fixed_scaler`) plus the learner.
Trainer classifier_trainer(ModelKind kind, const Hyperparams& hp,
                           std::optional<MinMaxScaler> fixed_scaler = std::nullopt);

// Inputs for holdout and experiments: the full emotion series (including the
// history needed for lags), market returns and the trading calendar.
struct ExperimentData {
    EmotionSeries emotions;
    MarketSeries market;
    TradingCalendar calendar;
};

// Chronological split of the aligned dates, keeping only target dates for
// which every emotion is available up to `max_lag` sessions back.
struct RowSplit {
    std::vector<Date> train;
    std::vector<Date> test;
};

RowSplit split_rows(const ExperimentData& data, double train_fraction, int max_lag);

std::vector<double> target_values(const MarketSeries& market, Target target, std::span<const Date> dates);

struct HoldoutOptions {
    Hyperparams hp;
    // Fit normalisation on train and test features together (reproduces the
    // original whole-series normalisation; leaks test information).
    bool whole_series_normalization = false;
};

struct HoldoutResult {
    DiscretizationScheme scheme;
    Classifier classifier;
    std::vector<CategoryLabel> predicted;
    std::vector<CategoryLabel> actual;
    double accuracy = 0.0;
    ConfusionMatrix confusion;
};

// Scheme, scaler and model are fitted on the training rows only; test labels
// come from applying the fitted scheme to test targets.
HoldoutResult holdout_eval(const ExperimentData& data, const RowSplit& rows, Target target, const FeatureSpec& spec,
                           ModelKind kind, DiscretizationMethod method, const HoldoutOptions& options);

// Builds the labelled training dataset for a target, fitting the scheme on it.
struct LabelledRows {
    Dataset dataset;
    DiscretizationScheme scheme;
};
LabelledRows labelled_dataset(const ExperimentData& data, std::span<const Date> dates, Target target,
                              const FeatureSpec& spec, DiscretizationMethod method);

FeatureSpec spec_for(ModelKind kind, Target target, int max_lag);

// Picks C and gamma from a small grid by k-fold accuracy on `ds`.
Hyperparams tune_svm(const Dataset& ds, const Hyperparams& base, int k, std::uint64_t seed, CvMode mode);

struct ExperimentConfig {
    std::vector<Target> targets{kTargets.begin(), kTargets.end()};
    std::vector<DiscretizationMethod> methods{DiscretizationMethod::equal_frequency, DiscretizationMethod::kmeans,
                                              DiscretizationMethod::sign};
    std::vector<ModelKind> models{ModelKind::lr, ModelKind::svm, ModelKind::svm_es};
    double train_fraction = 0.8;
    int max_lag = 5;
    int cv_folds = 5;
    CvMode cv_mode = CvMode::shuffled;
    std::uint64_t seed = 0;
    Hyperparams hp;
    bool whole_series_normalization = false;
    bool svm_grid_search = false;
    int jobs = 1;
};

struct EvalCell {
    Target target = Target::close;
    ModelKind model = ModelKind::svm;
    DiscretizationMethod method = DiscretizationMethod::kmeans;
    int categories = 3;
    std::string feature_spec;
    CvResult cv;
    double holdout_accuracy = 0.0;
    std::size_t holdout_rows = 0;
    ConfusionMatrix confusion;
};

struct EvalReport {
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    Date train_first, train_last, test_first, test_last;
    std::vector<EvalCell> cells;
};

// Cells: models x targets x methods, with the sign method only for close and open.
EvalReport run_experiment(const ExperimentData& data, const ExperimentConfig& config);

std::string report_csv(const EvalReport& report);
std::string report_text(const EvalReport& report);
nlohmann::ordered_json confusion_json(const EvalReport& report);

}  // namespace emotrade
