#include "emotrade/eval.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "emotrade/rng.hpp"

namespace emotrade {

double accuracy(std::span<const CategoryLabel> predicted, std::span<const CategoryLabel> actual) {
    if (predicted.size() != actual.size()) {
        throw std::invalid_argument(
            fmt::format("accuracy: {} predictions for {} labels", predicted.size(), actual.size()));
    }
    if (actual.empty()) throw std::invalid_argument("accuracy: no labels");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) hits += predicted[i] == actual[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(actual.size());
}

ConfusionMatrix ConfusionMatrix::build(std::span<const CategoryLabel> labels, std::span<const CategoryLabel> predicted,
                                       std::span<const CategoryLabel> actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("confusion matrix: length mismatch");
    ConfusionMatrix cm;
    cm.labels.assign(labels.begin(), labels.end());
    cm.counts.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
    auto index = [&](CategoryLabel l) {
        const auto it = std::find(cm.labels.begin(), cm.labels.end(), l);
        if (it == cm.labels.end()) throw std::invalid_argument(fmt::format("confusion matrix: unknown label {}", l));
        return static_cast<std::size_t>(it - cm.labels.begin());
    };
    for (std::size_t i = 0; i < actual.size(); ++i) ++cm.counts[index(actual[i])][index(predicted[i])];
    return cm;
}

std::size_t ConfusionMatrix::total() const {
    std::size_t t = 0;
    for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
    return t;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

std::string_view to_string(CvMode m) { return m == CvMode::shuffled ? "shuffled" : "contiguous"; }

CvMode parse_cv_mode(std::string_view name) {
    if (name == "shuffled") return CvMode::shuffled;
    if (name == "contiguous") return CvMode::contiguous;
    throw std::invalid_argument(fmt::format("unknown CV mode '{}'", name));
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed, CvMode mode) {
    if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
    const auto kk = static_cast<std::size_t>(k);
    if (n < kk) throw std::invalid_argument(fmt::format("{} rows cannot fill {} folds", n, k));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (mode == CvMode::shuffled) {
        Rng rng(seed);
        rng.shuffle(order);
    }
    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

int CvResult::degenerate_count() const {
    return static_cast<int>(std::count(degenerate.begin(), degenerate.end(), true));
}

CvResult kfold_cv(const Dataset& ds, int k, const Trainer& trainer, std::uint64_t seed, CvMode mode) {
    ds.validate();
    std::set<CategoryLabel> classes(ds.labels.begin(), ds.labels.end());
    if (classes.size() < 2) throw std::invalid_argument("cross-validation needs at least two classes");
    const auto folds = make_folds(ds.size(), k, seed, mode);
    CvResult res;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<bool> held(ds.size(), false);
        for (auto i : folds[f]) held[i] = true;
        std::vector<std::size_t> train_idx;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (!held[i]) train_idx.push_back(i);
        }
        const Dataset train = ds.rows(train_idx);
        const Dataset test = ds.rows(folds[f]);
        std::set<CategoryLabel> train_classes(train.labels.begin(), train.labels.end());
        const bool degenerate = train_classes.size() < 2;
        Predictor predict;
        if (degenerate) {
            const CategoryLabel only = *train_classes.begin();
            predict = [only](const Eigen::VectorXd&) { return only; };
        } else {
            predict = trainer(train);
        }
        std::vector<CategoryLabel> predicted;
        for (Eigen::Index r = 0; r < test.features.rows(); ++r) {
            predicted.push_back(predict(test.features.row(r).transpose()));
        }
        res.fold_accuracies.push_back(accuracy(predicted, test.labels));
        res.fold_sizes.push_back(test.size());
        res.degenerate.push_back(degenerate);
    }
    res.mean_accuracy = std::accumulate(res.fold_accuracies.begin(), res.fold_accuracies.end(), 0.0) /
                        static_cast<double>(res.fold_accuracies.size());
    return res;
}

Trainer classifier_trainer(ModelKind kind, const Hyperparams& hp, std::optional<MinMaxScaler> fixed_scaler) {
    return [kind, hp, fixed_scaler](const Dataset& ds) -> Predictor {
        auto clf = std::make_shared<const Classifier>(train_classifier(kind, ds, hp, fixed_scaler));
        return [clf](const Eigen::VectorXd& x) { return clf->predict(x); };
    };
}

RowSplit split_rows(const ExperimentData& data, double train_fraction, int max_lag) {
    const auto aligned = align(data.emotions, data.market);
    if (aligned.x.size() < 2) throw std::invalid_argument("emotion and market series share fewer than two dates");
    const auto split = split_train_test(aligned.x, aligned.y, train_fraction);
    auto eligible = [&](Date d) {
        const auto pos = data.calendar.position(d);
        if (!pos || *pos < static_cast<std::size_t>(max_lag)) return false;
        for (int l = 1; l <= max_lag; ++l) {
            if (!data.emotions.position(data.calendar.days()[*pos - static_cast<std::size_t>(l)])) return false;
        }
        return true;
    };
    RowSplit rows;
    for (const Date d : split.train.y.dates)
        if (eligible(d)) rows.train.push_back(d);
    for (const Date d : split.test.y.dates)
        if (eligible(d)) rows.test.push_back(d);
    if (rows.train.empty()) throw std::invalid_argument("no training rows with complete lagged features");
    return rows;
}

std::vector<double> target_values(const MarketSeries& market, Target target, std::span<const Date> dates) {
    const auto& column = market.column(target);
    std::vector<double> out;
    out.reserve(dates.size());
    for (const Date d : dates) {
        const auto pos = market.position(d);
        if (!pos) throw std::invalid_argument(fmt::format("no market data for {}", d.str()));
        out.push_back(column[*pos]);
    }
    return out;
}

FeatureSpec spec_for(ModelKind kind, Target target, int max_lag) {
    return kind == ModelKind::svm_es ? svmes_feature_spec(target) : FeatureSpec::all_emotions(max_lag);
}

LabelledRows labelled_dataset(const ExperimentData& data, std::span<const Date> dates, Target target,
                              const FeatureSpec& spec, DiscretizationMethod method) {
    LabelledRows out;
    const auto values = target_values(data.market, target, dates);
    auto disc = discretize(method, values);
    out.scheme = std::move(disc.scheme);
    out.dataset.dates.assign(dates.begin(), dates.end());
    out.dataset.labels = std::move(disc.labels);
    out.dataset.features = build_features(data.emotions, spec, dates, data.calendar);
    return out;
}

HoldoutResult holdout_eval(const ExperimentData& data, const RowSplit& rows, Target target, const FeatureSpec& spec,
                           ModelKind kind, DiscretizationMethod method, const HoldoutOptions& options) {
    if (rows.test.empty()) throw std::invalid_argument("holdout: empty test period");
    if (!(rows.train.back() < rows.test.front())) {
        throw std::invalid_argument("holdout: training dates must precede test dates");
    }
    const auto train = labelled_dataset(data, rows.train, target, spec, method);
    const auto test_values = target_values(data.market, target, rows.test);
    const Eigen::MatrixXd test_features = build_features(data.emotions, spec, rows.test, data.calendar);

    std::optional<MinMaxScaler> scaler;
    if (options.whole_series_normalization) {
        Eigen::MatrixXd all(train.dataset.features.rows() + test_features.rows(), test_features.cols());
        all << train.dataset.features, test_features;
        scaler = MinMaxScaler::fit(all);
    }
    HoldoutResult res;
    res.scheme = train.scheme;
    res.classifier = train_classifier(kind, train.dataset, options.hp, scaler);
    res.actual = apply_scheme(res.scheme, test_values);
    for (Eigen::Index r = 0; r < test_features.rows(); ++r) {
        res.predicted.push_back(res.classifier.predict(test_features.row(r).transpose()));
    }
    res.accuracy = accuracy(res.predicted, res.actual);
    res.confusion = ConfusionMatrix::build(res.scheme.labels, res.predicted, res.actual);
    return res;
}

Hyperparams tune_svm(const Dataset& ds, const Hyperparams& base, int k, std::uint64_t seed, CvMode mode) {
    const double gamma0 = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, ds.features.cols()));
    Hyperparams best = base;
    double best_acc = -1.0;
    for (double c : {0.1, 1.0, 10.0, 100.0}) {
        for (double gscale : {0.1, 1.0, 10.0}) {
            Hyperparams hp = base;
            hp.C = c;
            hp.gamma = gamma0 * gscale;
            const double acc = kfold_cv(ds, k, classifier_trainer(ModelKind::svm, hp), seed, mode).mean_accuracy;
            if (acc > best_acc + 1e-12) {
                best_acc = acc;
                best = hp;
            }
        }
    }
    return best;
}

namespace {

struct CellKey {
    Target target;
    ModelKind model;
    DiscretizationMethod method;
};

EvalCell evaluate_cell(const ExperimentData& data, const RowSplit& rows, const CellKey& key,
                       const ExperimentConfig& config) {
    const std::string name =
        fmt::format("{}/{}/{}", to_string(key.target), to_string(key.model), to_string(key.method));
    try {
        EvalCell cell;
        cell.target = key.target;
        cell.model = key.model;
        cell.method = key.method;
        cell.categories = key.method == DiscretizationMethod::sign ? 2 : 3;
        const auto spec = spec_for(key.model, key.target, config.max_lag);
        cell.feature_spec = spec.str();

        const auto labelled = labelled_dataset(data, rows.train, key.target, spec, key.method);
        Hyperparams hp = config.hp;
        if (config.svm_grid_search && key.model != ModelKind::lr) {
            hp = tune_svm(labelled.dataset, hp, config.cv_folds, derive_seed(config.seed, "tune/" + name),
                          config.cv_mode);
        }
        std::optional<MinMaxScaler> scaler;
        if (config.whole_series_normalization) {
            const auto test_features = build_features(data.emotions, spec, rows.test, data.calendar);
            Eigen::MatrixXd all(labelled.dataset.features.rows() + test_features.rows(), test_features.cols());
            all << labelled.dataset.features, test_features;
            scaler = MinMaxScaler::fit(all);
        }
        cell.cv = kfold_cv(labelled.dataset, config.cv_folds, classifier_trainer(key.model, hp, scaler),
                           derive_seed(config.seed, "cv/" + name), config.cv_mode);
        if (!rows.test.empty()) {
            HoldoutOptions opt{hp, config.whole_series_normalization};
            const auto holdout = holdout_eval(data, rows, key.target, spec, key.model, key.method, opt);
            cell.holdout_accuracy = holdout.accuracy;
            cell.holdout_rows = holdout.actual.size();
            cell.confusion = holdout.confusion;
        }
        return cell;
    } catch (const std::exception& e) {
        throw std::runtime_error(fmt::format("cell {}: {}", name, e.what()));
    }
}

}  // namespace

EvalReport run_experiment(const ExperimentData& data, const ExperimentConfig& config) {
    const auto rows = split_rows(data, config.train_fraction, config.max_lag);
    if (rows.test.empty()) throw std::invalid_argument("no test rows after the split");

    std::vector<CellKey> keys;
    for (auto method : config.methods) {
        for (auto model : config.models) {
            for (auto target : config.targets) {
                if (method == DiscretizationMethod::sign && target != Target::close && target != Target::open) continue;
                keys.push_back({target, model, method});
            }
        }
    }
    std::vector<EvalCell> cells(keys.size());
    const auto workers = static_cast<std::size_t>(std::max(1, config.jobs));
    if (workers == 1) {
        for (std::size_t i = 0; i < keys.size(); ++i) cells[i] = evaluate_cell(data, rows, keys[i], config);
    } else {
        std::vector<std::future<void>> futures;
        for (std::size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < keys.size(); i += workers) {
                    cells[i] = evaluate_cell(data, rows, keys[i], config);
                }
            }));
        }
        for (auto& f : futures) f.get();
    }

    EvalReport report;
    report.train_rows = rows.train.size();
    report.test_rows = rows.test.size();
    report.train_first = rows.train.front();
    report.train_last = rows.train.back();
    report.test_first = rows.test.front();
    report.test_last = rows.test.back();
    report.cells = std::move(cells);
    return report;
}

std::string report_csv(const EvalReport& report) {
    std::string out =
        "target,model,discretization,categories,cv_mean_accuracy,cv_fold_accuracies,degenerate_folds,"
        "holdout_accuracy,holdout_rows,features\n";
    for (const auto& c : report.cells) {
        std::string folds;
        for (double a : c.cv.fold_accuracies) {
            if (!folds.empty()) folds += ';';
            folds += fmt::format("{:.6f}", a);
        }
        out += fmt::format("{},{},{},{},{:.6f},{},{},{:.6f},{},\"{}\"\n", to_string(c.target), to_string(c.model),
                           to_string(c.method), c.categories, c.cv.mean_accuracy, folds, c.cv.degenerate_count(),
                           c.holdout_accuracy, c.holdout_rows, c.feature_spec);
    }
    return out;
}

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

std::string model_title(ModelKind k) {
    switch (k) {
        case ModelKind::lr: return "LR";
        case ModelKind::svm: return "SVM";
        case ModelKind::svm_es: return "SVM-ES";
    }
    return "?";
}

std::string method_title(DiscretizationMethod m) {
    switch (m) {
        case DiscretizationMethod::equal_frequency: return "equal frequency";
        case DiscretizationMethod::kmeans: return "K-means";
        case DiscretizationMethod::sign: return "sign";
    }
    return "?";
}

// One block of the accuracy table: rows = targets, columns = (method, model).
void append_block(std::string& out, const EvalReport& report, int categories, bool holdout) {
    std::vector<std::pair<DiscretizationMethod, ModelKind>> columns;
    std::vector<Target> targets;
    for (const auto& c : report.cells) {
        if (c.categories != categories) continue;
        const auto col = std::make_pair(c.method, c.model);
        if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
        if (std::find(targets.begin(), targets.end(), c.target) == targets.end()) targets.push_back(c.target);
    }
    if (columns.empty()) return;
    std::sort(targets.begin(), targets.end());
    out += fmt::format("{:<12}", fmt::format("Target ({})", categories));
    for (const auto& [m, k] : columns) out += fmt::format("{:>24}", method_title(m) + " " + model_title(k));
    out += '\n';
    for (auto t : targets) {
        out += fmt::format("{:<12}", upper(to_string(t)));
        for (const auto& [m, k] : columns) {
            const auto it = std::find_if(report.cells.begin(), report.cells.end(), [&](const EvalCell& c) {
                return c.categories == categories && c.target == t && c.method == m && c.model == k;
            });
            if (it == report.cells.end()) {
                out += fmt::format("{:>24}", "-");
            } else {
                const double acc = holdout ? it->holdout_accuracy : it->cv.mean_accuracy;
                const std::string mark = !holdout && it->cv.degenerate_count() > 0 ? "!" : "";
                out += fmt::format("{:>24}", fmt::format("{:.1f}%{}", 100.0 * acc, mark));
            }
        }
        out += '\n';
    }
}

}  // namespace

std::string report_text(const EvalReport& report) {
    std::string out;
    out += fmt::format("train rows: {} ({} .. {})\n", report.train_rows, report.train_first.str(),
                       report.train_last.str());
    out += fmt::format("test rows:  {} ({} .. {})\n\n", report.test_rows, report.test_first.str(),
                       report.test_last.str());
    out += "Cross-validation accuracy on the training period ('!' = degenerate folds present)\n";
    append_block(out, report, 3, false);
    out += '\n';
    append_block(out, report, 2, false);
    out += "\nHoldout accuracy on the test period\n";
    append_block(out, report, 3, true);
    out += '\n';
    append_block(out, report, 2, true);
    return out;
}

nlohmann::ordered_json confusion_json(const EvalReport& report) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json j;
        j["target"] = std::string(to_string(c.target));
        j["model"] = std::string(to_string(c.model));
        j["discretization"] = std::string(to_string(c.method));
        j["labels"] = c.confusion.labels;
        j["counts"] = c.confusion.counts;  // rows: actual, columns: predicted
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace emotrade
