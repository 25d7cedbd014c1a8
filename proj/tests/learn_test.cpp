#include <gtest/gtest.h>

#include <set>

#include "emotrade/learn.hpp"
#include "emotrade/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace emotrade;

namespace {

Dataset blobs(Rng& rng, const std::vector<std::pair<double, double>>& centers, int per_class, double sd) {
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(centers.size()) * per_class, 2);
    Eigen::Index r = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (int i = 0; i < per_class; ++i, ++r) {
            ds.features(r, 0) = rng.normal(centers[c].first, sd);
            ds.features(r, 1) = rng.normal(centers[c].second, sd);
            ds.labels.push_back(static_cast<CategoryLabel>(c));
        }
    }
    return ds;
}

Dataset xor_data(Rng& rng, int n) {
    Dataset ds;
    ds.features.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const int qx = static_cast<int>(rng.below(2)), qy = static_cast<int>(rng.below(2));
        ds.features(i, 0) = (qx ? 1.0 : -1.0) + rng.normal(0, 0.25);
        ds.features(i, 1) = (qy ? 1.0 : -1.0) + rng.normal(0, 0.25);
        ds.labels.push_back(qx == qy ? 1 : 0);
    }
    return ds;
}

template <typename Model>
double train_accuracy(const Model& m, const Dataset& ds) {
    int hits = 0;
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        hits += m.predict(ds.features.row(i).transpose()) == ds.labels[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace

TEST(FeatureSpec, FullSpecAndParsing) {
    const auto full = FeatureSpec::all_emotions(5);
    EXPECT_EQ(full.size(), 25u);
    EXPECT_EQ(full.max_lag(), 5);
    const auto parsed = FeatureSpec::parse(full.str());
    EXPECT_EQ(parsed.pairs(), full.pairs());
    EXPECT_EQ(FeatureSpec::parse("disgust:1,disgust:2").size(), 2u);
    EXPECT_THROW(FeatureSpec::parse("disgust:1,disgust:1"), std::invalid_argument);
    EXPECT_THROW(FeatureSpec::parse("disgust:6"), std::invalid_argument);
    EXPECT_THROW(FeatureSpec::parse("disgust"), std::invalid_argument);
    EXPECT_THROW(FeatureSpec(std::vector<FeaturePair>{}), std::invalid_argument);
}

TEST(FeatureSpec, SelectedEmotionTables) {
    EXPECT_EQ(svmes_feature_spec(Target::close).str(), "disgust:1,disgust:2");
    EXPECT_EQ(svmes_feature_spec(Target::open).size(), 12u);
    EXPECT_EQ(svmes_feature_spec(Target::high).size(), 8u);
    EXPECT_EQ(svmes_feature_spec(Target::low).size(), 5u);
    EXPECT_EQ(svmes_feature_spec(Target::volume).size(), 10u);
    for (auto t : kTargets) {
        const auto spec = svmes_feature_spec(t);
        for (const auto& p : spec.pairs()) EXPECT_NE(p.emotion, Emotion::anger);
    }
}

TEST(BuildFeatures, ValuesAreLaggedTradingDayProportions) {
    const auto sessions = fixture::sse_sessions_2015();
    const TradingCalendar cal(sessions);
    const auto x = fixture::random_series(sessions, 3);
    const FeatureSpec spec({{Emotion::fear, 1}, {Emotion::joy, 3}, {Emotion::disgust, 5}});
    const std::vector<Date> target{Date(2015, 9, 8)};
    const auto m = build_features(x, spec, target, cal);
    ASSERT_EQ(m.rows(), 1);
    ASSERT_EQ(m.cols(), 3);
    // sessions before 2015-09-08: 09-07, 09-02, 09-01, 08-31, 08-28
    EXPECT_EQ(m(0, 0), x.values[*x.position(Date(2015, 9, 7))][index_of(Emotion::fear)]);
    EXPECT_EQ(m(0, 1), x.values[*x.position(Date(2015, 9, 1))][index_of(Emotion::joy)]);
    EXPECT_EQ(m(0, 2), x.values[*x.position(Date(2015, 8, 28))][index_of(Emotion::disgust)]);
    const std::vector<Date> several{Date(2015, 9, 8), Date(2015, 10, 8)};
    EXPECT_EQ(build_features(x, FeatureSpec::all_emotions(), several, cal).cols(), 25);
    EXPECT_EQ(build_features(x, svmes_feature_spec(Target::close), several, cal).cols(), 2);
}

TEST(BuildFeatures, MissingLaggedDayIsNamed) {
    const auto sessions = fixture::sse_sessions_2015();
    const TradingCalendar cal(sessions);
    auto x = fixture::random_series(sessions, 3);
    const auto pos = *x.position(Date(2015, 9, 2));
    x.dates.erase(x.dates.begin() + static_cast<std::ptrdiff_t>(pos));
    x.values.erase(x.values.begin() + static_cast<std::ptrdiff_t>(pos));
    const std::vector<Date> target{Date(2015, 9, 8)};
    try {
        build_features(x, FeatureSpec::all_emotions(), target, cal);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("2015-09-02"), std::string::npos) << e.what();
    }
    const std::vector<Date> weekend{Date(2015, 9, 12)};
    EXPECT_THROW(build_features(x, FeatureSpec::all_emotions(), weekend, cal), std::invalid_argument);
}

TEST(Scaler, PerColumnAndConstantColumns) {
    Eigen::MatrixXd m(3, 2);
    m << 1, 5, 3, 5, 2, 5;
    const auto s = MinMaxScaler::fit(m);
    const auto t = s.transform(m);
    EXPECT_DOUBLE_EQ(t(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(t(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(t(2, 0), 0.5);
    EXPECT_DOUBLE_EQ(t(1, 1), 0.0);
    EXPECT_THROW(s.transform(Eigen::VectorXd(Eigen::VectorXd::Zero(3))), std::invalid_argument);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 30, d = 4, k = 3;
        Eigen::MatrixXd x(n, d), w(k, d);
        Eigen::VectorXd b(k);
        std::vector<int> t(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
            t[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(k));
        }
        for (int i = 0; i < k; ++i) {
            b(i) = rng.normal();
            for (int j = 0; j < d; ++j) w(i, j) = rng.normal();
        }
        const auto analytic = lr_objective(w, b, x, t, 0.01);
        const auto numeric = oracle::lr_numeric_gradient(w, b, x, t, 0.01);
        auto rel = [](double a, double nmr) { return std::abs(a - nmr) / std::max({std::abs(a), std::abs(nmr), 1e-3}); };
        for (int i = 0; i < k; ++i) {
            EXPECT_LE(rel(analytic.grad_bias(i), numeric.bias(i)), 1e-6);
            for (int j = 0; j < d; ++j) EXPECT_LE(rel(analytic.grad_weights(i, j), numeric.weights(i, j)), 1e-6);
        }
    }
}

TEST(Logistic, SeparableBlobs) {
    Rng rng(2);
    const auto ds = blobs(rng, {{-2, -2}, {2, 2}}, 100, 0.6);
    const auto m = train_logistic(ds, Hyperparams{});
    EXPECT_GE(train_accuracy(m, ds), 0.99);
    EXPECT_EQ(m.classes, (std::vector<CategoryLabel>{0, 1}));
    EXPECT_TRUE(m.weights.allFinite());
}

TEST(Logistic, DuplicatedRowsGiveSamePredictions) {
    Rng rng(3);
    const auto ds = blobs(rng, {{0, 0}, {1, 1}, {0, 2}}, 30, 0.5);
    Dataset doubled = ds;
    doubled.features.resize(ds.features.rows() * 2, 2);
    doubled.features << ds.features, ds.features;
    doubled.labels.insert(doubled.labels.end(), ds.labels.begin(), ds.labels.end());
    const auto a = train_logistic(ds, Hyperparams{});
    const auto b = train_logistic(doubled, Hyperparams{});
    EXPECT_LE((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-9);
    for (int i = 0; i < 200; ++i) {
        Eigen::VectorXd p(2);
        p << rng.uniform(-1, 2), rng.uniform(-1, 3);
        EXPECT_EQ(a.predict(p), b.predict(p));
    }
}

TEST(Logistic, ZeroWeightsPickLargestBias) {
    LRModel m;
    m.classes = {-1, 0, 1};
    m.weights = Eigen::MatrixXd::Zero(3, 2);
    m.bias = Eigen::Vector3d(0.1, 0.5, 0.5);
    EXPECT_EQ(m.predict(Eigen::Vector2d(3, 4)), 0);
    EXPECT_NEAR(m.probabilities(Eigen::Vector2d(0, 0)).sum(), 1.0, 1e-15);
    EXPECT_THROW(m.predict(Eigen::Vector3d(1, 1, 1)), std::invalid_argument);
}

TEST(Logistic, NeedsTwoClasses) {
    Dataset ds;
    ds.features = Eigen::MatrixXd::Ones(3, 1);
    ds.labels = {1, 1, 1};
    EXPECT_THROW(train_logistic(ds, Hyperparams{}), std::invalid_argument);
}

TEST(Svm, XorPatternWithRbfKernel) {
    Rng rng(4);
    const auto ds = xor_data(rng, 200);
    Hyperparams hp;
    hp.C = 10;
    hp.gamma = 1.0;
    const auto m = train_svm(ds, hp);
    EXPECT_GE(train_accuracy(m, ds), 0.95);
    // a linear model cannot fit this set
    EXPECT_LT(train_accuracy(train_logistic(ds, Hyperparams{}), ds), 0.8);
}

TEST(Svm, KktConditionsOnSeparableData) {
    Rng rng(5);
    const auto ds = blobs(rng, {{-1.5, 0}, {1.5, 0}}, 40, 0.4);
    std::vector<int> y;
    for (auto l : ds.labels) y.push_back(l == 1 ? 1 : -1);
    for (auto type : {KernelType::linear, KernelType::rbf}) {
        const Kernel k{type, 0.5};
        const double C = 1e3;
        const auto sol = solve_smo(ds.features, y, C, k, 1e-3, 1'000'000, true);
        const auto kkt = oracle::check_kkt(ds.features, y, sol, C, k);
        EXPECT_TRUE(kkt.box_ok);
        EXPECT_LE(kkt.equality_residual, 1e-6);
        EXPECT_LE(kkt.max_violation, 1e-3);
        for (std::size_t i = 1; i < sol.dual_objective.size(); ++i) {
            EXPECT_GE(sol.dual_objective[i], sol.dual_objective[i - 1] - 1e-12);
        }
    }
}

TEST(Svm, KktHoldsOnNoisyOverlappingData) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ds = blobs(rng, {{-0.5, 0}, {0.5, 0}}, 50, 1.0);
        std::vector<int> y;
        for (auto l : ds.labels) y.push_back(l == 1 ? 1 : -1);
        const Kernel k{KernelType::rbf, 0.5};
        const double C = 1.0;
        const auto sol = solve_smo(ds.features, y, C, k, 1e-3, 1'000'000, true);
        const auto kkt = oracle::check_kkt(ds.features, y, sol, C, k);
        EXPECT_TRUE(kkt.box_ok);
        EXPECT_LE(kkt.equality_residual, 1e-6);
        EXPECT_LE(kkt.max_violation, 1e-3);
        for (std::size_t i = 1; i < sol.dual_objective.size(); ++i) {
            EXPECT_GE(sol.dual_objective[i], sol.dual_objective[i - 1] - 1e-12);
        }
    }
}

TEST(Svm, NonConvergenceReportsDiagnostics) {
    Rng rng(7);
    const auto ds = blobs(rng, {{-0.5, 0}, {0.5, 0}}, 50, 1.0);
    std::vector<int> y;
    for (auto l : ds.labels) y.push_back(l == 1 ? 1 : -1);
    try {
        solve_smo(ds.features, y, 1.0, Kernel{KernelType::rbf, 0.5}, 1e-3, 3);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("KKT gap"), std::string::npos);
    }
}

TEST(Svm, ThreeClassVotingRecoversTrainingLabels) {
    Rng rng(8);
    const auto ds = blobs(rng, {{-3, 0}, {3, 0}, {0, 4}}, 30, 0.4);
    Dataset shifted = ds;
    for (auto& l : shifted.labels) l -= 1;  // -1, 0, 1
    const auto m = train_svm(shifted, Hyperparams{});
    EXPECT_EQ(m.machines.size(), 3u);
    EXPECT_EQ(train_accuracy(m, shifted), 1.0);
    for (const auto& pm : m.machines) {
        double eq = 0;
        for (double c : pm.coef) eq += c;
        EXPECT_LE(std::abs(eq), 1e-6);
        for (double c : pm.coef) EXPECT_LE(std::abs(c), m.C + 1e-12);
    }
}

TEST(Svm, SupportVectorPredictsItsOwnLabel) {
    Rng rng(9);
    const auto ds = blobs(rng, {{-2, 0}, {2, 0}}, 30, 0.5);
    const auto m = train_svm(ds, Hyperparams{});
    const auto& pm = m.machines.front();
    ASSERT_GT(pm.support_vectors.rows(), 0);
    for (Eigen::Index i = 0; i < pm.support_vectors.rows(); ++i) {
        const Eigen::VectorXd sv = pm.support_vectors.row(i).transpose();
        const CategoryLabel expected = pm.coef[static_cast<std::size_t>(i)] > 0 ? pm.positive : pm.negative;
        EXPECT_EQ(m.predict(sv), expected);
        EXPECT_EQ(m.predict(sv), m.predict(sv));
    }
}

TEST(Svm, DefaultGammaIsInverseFeatureCount) {
    Rng rng(10);
    Dataset ds = blobs(rng, {{-2, 0}, {2, 0}}, 10, 0.5);
    EXPECT_DOUBLE_EQ(train_svm(ds, Hyperparams{}).kernel.gamma, 0.5);
}

TEST(Classifier, JsonRoundTripPredictsIdentically) {
    Rng rng(11);
    const auto ds = blobs(rng, {{0.1, 0.1}, {0.3, 0.2}, {0.2, 0.4}}, 25, 0.05);
    const FeatureSpec spec({{Emotion::joy, 1}, {Emotion::fear, 2}});
    for (auto kind : {ModelKind::lr, ModelKind::svm}) {
        TrainedModel m;
        m.kind = kind;
        m.target = Target::high;
        m.spec = spec;
        m.scheme = kmeans_1d(std::vector<double>{0, 0.1, 5, 5.1, 10, 10.1}).scheme;
        m.classifier = train_classifier(kind, ds, Hyperparams{});
        m.trained_through = Date(2015, 9, 16);
        const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
        EXPECT_EQ(back.kind, kind);
        EXPECT_EQ(back.spec.pairs(), spec.pairs());
        EXPECT_EQ(back.trained_through, m.trained_through);
        for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
            const Eigen::VectorXd row = ds.features.row(i).transpose();
            EXPECT_EQ(back.predict(row), m.predict(row));
        }
        EXPECT_THROW(m.predict(Eigen::VectorXd::Zero(3)), std::invalid_argument);
    }
}

TEST(Classifier, FixedScalerIsUsed) {
    Rng rng(12);
    const auto ds = blobs(rng, {{0, 0}, {1, 1}}, 20, 0.2);
    MinMaxScaler wide{Eigen::Vector2d(-10, -10), Eigen::Vector2d(10, 10)};
    const auto c = train_classifier(ModelKind::lr, ds, Hyperparams{}, wide);
    EXPECT_EQ(c.scaler.min, wide.min);
    EXPECT_EQ(c.scaler.max, wide.max);
}

TEST(Hyperparams, Validation) {
    Hyperparams hp;
    EXPECT_NO_THROW(hp.validate());
    hp.C = 0;
    EXPECT_THROW(hp.validate(), std::invalid_argument);
    hp = Hyperparams{};
    hp.smo_tolerance = -1;
    EXPECT_THROW(hp.validate(), std::invalid_argument);
    EXPECT_EQ(parse_model_kind("svm_es"), ModelKind::svm_es);
    EXPECT_THROW(parse_model_kind("knn"), std::invalid_argument);
}
