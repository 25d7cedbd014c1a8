#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "emotrade/corpus.hpp"
#include "emotrade/date.hpp"
#include "emotrade/discretize.hpp"
#include "emotrade/market.hpp"
#include "emotrade/timeseries.hpp"

namespace emotrade {

struct FeaturePair {
    Emotion emotion = Emotion::anger;
    int lag = 1;

    friend bool operator==(const FeaturePair&, const FeaturePair&) = default;
};

class FeatureSpec {
public:
    FeatureSpec() = default;
    explicit FeatureSpec(std::vector<FeaturePair> pairs);

    // Every emotion at lags 1..max_lag, emotion-major.
    static FeatureSpec all_emotions(int max_lag = 5);
    // "disgust:1,disgust:2"
    static FeatureSpec parse(std::string_view text);
    std::string str() const;

    const std::vector<FeaturePair>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    int max_lag() const;

private:
    std::vector<FeaturePair> pairs_;
};

// Emotions selected per target from the correlation and causality analysis.
FeatureSpec svmes_feature_spec(Target target);

// Row i, column j: proportion of pairs[j].emotion `lag` trading sessions
// before target_dates[i].
Eigen::MatrixXd build_features(const EmotionSeries& x, const FeatureSpec& spec, std::span<const Date> target_dates,
                               const TradingCalendar& calendar);

struct Dataset {
    std::vector<Date> dates;
    Eigen::MatrixXd features;
    std::vector<CategoryLabel> labels;

    std::size_t size() const { return labels.size(); }
    Dataset rows(std::span<const std::size_t> indices) const;
    void validate() const;
};

struct Hyperparams {
    double C = 1.0;
    double gamma = 0.0;  // <= 0 means 1 / feature_count
    double lr_learning_rate = 0.5;
    int lr_epochs = 2000;
    double lr_l2 = 1e-3;
    double smo_tolerance = 1e-3;
    long smo_max_iter = 1'000'000;

    void validate() const;
};

// Per-column min-max scaling; a constant column maps to 0.
struct MinMaxScaler {
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    static MinMaxScaler fit(const Eigen::MatrixXd& features);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
    Eigen::VectorXd transform(const Eigen::VectorXd& row) const;
};

struct LRModel {
    std::vector<CategoryLabel> classes;  // ascending
    Eigen::MatrixXd weights;             // classes x features
    Eigen::VectorXd bias;

    Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const;
    CategoryLabel predict(const Eigen::VectorXd& x) const;
};

struct LRObjective {
    double loss = 0.0;
    Eigen::MatrixXd grad_weights;
    Eigen::VectorXd grad_bias;
};

// Mean cross-entropy plus (l2 / 2) * ||W||^2; `targets` are class indices.
LRObjective lr_objective(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                         std::span<const int> targets, double l2);

LRModel train_logistic(const Dataset& ds, const Hyperparams& hp);

enum class KernelType { rbf, linear };

struct Kernel {
    KernelType type = KernelType::rbf;
    double gamma = 1.0;

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const;
};

// Soft-margin dual solution for labels y in {-1, +1}:
// f(x) = sum_i alpha_i y_i K(x_i, x) + bias.
struct BinarySvm {
    std::vector<double> alpha;
    std::vector<int> y;
    double bias = 0.0;
    long iterations = 0;
    std::vector<double> dual_objective;  // after every accepted step, if recorded
};

BinarySvm solve_smo(const Eigen::MatrixXd& x, std::span<const int> y, double C, const Kernel& kernel,
                    double tolerance, long max_iter, bool record_objective = false);

// One-vs-one machine for a class pair; `positive` maps to y = +1.
struct PairMachine {
    CategoryLabel positive = 0;
    CategoryLabel negative = 0;
    Eigen::MatrixXd support_vectors;  // rows
    std::vector<double> coef;         // alpha_i * y_i
    double bias = 0.0;

    double decision(const Eigen::VectorXd& x, const Kernel& kernel) const;
};

struct SVMModel {
    Kernel kernel;
    double C = 1.0;
    std::vector<CategoryLabel> classes;
    std::vector<PairMachine> machines;

    CategoryLabel predict(const Eigen::VectorXd& x) const;
};

SVMModel train_svm(const Dataset& ds, const Hyperparams& hp);

enum class ModelKind { lr, svm, svm_es };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view name);

// Scaler plus learner; consumes raw (unnormalised) feature rows.
struct Classifier {
    MinMaxScaler scaler;
    std::variant<LRModel, SVMModel> model;

    CategoryLabel predict(const Eigen::VectorXd& raw) const;
};

// Fits the scaler on `ds` unless `fixed_scaler` is given, then the learner.
Classifier train_classifier(ModelKind kind, const Dataset& ds, const Hyperparams& hp,
                            const std::optional<MinMaxScaler>& fixed_scaler = std::nullopt);

// Everything needed to predict one target from an emotion series.
struct TrainedModel {
    ModelKind kind = ModelKind::svm;
    Target target = Target::close;
    FeatureSpec spec;
    DiscretizationScheme scheme;
    Hyperparams hyperparams;
    Classifier classifier;
    Date trained_through;

    CategoryLabel predict(const Eigen::VectorXd& raw_features) const;
};

nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace emotrade
