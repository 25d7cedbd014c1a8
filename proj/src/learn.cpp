#include "emotrade/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "text_io.hpp"

namespace emotrade {

// ---------------------------------------------------------------- features

FeatureSpec::FeatureSpec(std::vector<FeaturePair> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw std::invalid_argument("feature spec is empty");
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        if (pairs_[i].lag < 1 || pairs_[i].lag > 5) {
            throw std::invalid_argument(fmt::format("feature lag {} outside 1..5", pairs_[i].lag));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (pairs_[i] == pairs_[j]) {
                throw std::invalid_argument(fmt::format("duplicate feature {}:{}", to_string(pairs_[i].emotion),
                                                        pairs_[i].lag));
            }
        }
    }
}

FeatureSpec FeatureSpec::all_emotions(int max_lag) {
    std::vector<FeaturePair> pairs;
    for (auto e : kEmotions)
        for (int lag = 1; lag <= max_lag; ++lag) pairs.push_back({e, lag});
    return FeatureSpec{std::move(pairs)};
}

FeatureSpec FeatureSpec::parse(std::string_view text) {
    std::vector<FeaturePair> pairs;
    for (auto item : detail::split(text, ',')) {
        item = detail::trim(item);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw std::invalid_argument(fmt::format("bad feature '{}'", item));
        const double lag = detail::parse_double(item.substr(colon + 1));
        pairs.push_back({parse_emotion(detail::trim(item.substr(0, colon))), static_cast<int>(lag)});
    }
    return FeatureSpec{std::move(pairs)};
}

std::string FeatureSpec::str() const {
    std::string out;
    for (const auto& p : pairs_) {
        if (!out.empty()) out += ',';
        out += fmt::format("{}:{}", to_string(p.emotion), p.lag);
    }
    return out;
}

int FeatureSpec::max_lag() const {
    int m = 0;
    for (const auto& p : pairs_) m = std::max(m, p.lag);
    return m;
}

FeatureSpec svmes_feature_spec(Target target) {
    std::vector<FeaturePair> p;
    auto add = [&](Emotion e, int from, int to) {
        for (int lag = from; lag <= to; ++lag) p.push_back({e, lag});
    };
    switch (target) {
        case Target::close:
            add(Emotion::disgust, 1, 2);
            break;
        case Target::open:
            add(Emotion::fear, 1, 5);
            add(Emotion::joy, 1, 5);
            add(Emotion::disgust, 3, 4);
            break;
        case Target::high:
            add(Emotion::joy, 1, 4);
            add(Emotion::sadness, 1, 3);
            add(Emotion::disgust, 5, 5);
            break;
        case Target::low:
            add(Emotion::sadness, 1, 1);
            add(Emotion::joy, 1, 3);
            add(Emotion::disgust, 5, 5);
            break;
        case Target::volume:
            add(Emotion::sadness, 1, 5);
            add(Emotion::fear, 1, 5);
            break;
        default:
            throw std::invalid_argument("unknown target");
    }
    return FeatureSpec{std::move(p)};
}

Eigen::MatrixXd build_features(const EmotionSeries& x, const FeatureSpec& spec, std::span<const Date> target_dates,
                               const TradingCalendar& calendar) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(target_dates.size()), static_cast<Eigen::Index>(spec.size()));
    for (std::size_t i = 0; i < target_dates.size(); ++i) {
        const Date target = target_dates[i];
        if (!calendar.contains(target)) {
            throw std::invalid_argument(fmt::format("target date {} is not a trading day", target.str()));
        }
        for (std::size_t j = 0; j < spec.size(); ++j) {
            const auto& pair = spec.pairs()[j];
            const auto tpos = *calendar.position(target);
            if (static_cast<std::size_t>(pair.lag) > tpos) {
                throw std::invalid_argument(fmt::format("missing emotion data: calendar has no trading day {} "
                                                        "sessions before {}",
                                                        pair.lag, target.str()));
            }
            const Date source = calendar.days()[tpos - static_cast<std::size_t>(pair.lag)];
            const auto row = x.position(source);
            if (!row) {
                throw std::invalid_argument(fmt::format("missing emotion data for {} ({} lag {} of {})", source.str(),
                                                        to_string(pair.emotion), pair.lag, target.str()));
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                x.values[*row][index_of(pair.emotion)];
        }
    }
    return out;
}

Dataset Dataset::rows(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = indices[r];
        if (!dates.empty()) out.dates.push_back(dates[src]);
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(src));
        out.labels.push_back(labels[src]);
    }
    return out;
}

void Dataset::validate() const {
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw std::invalid_argument("dataset: feature rows and labels differ in count");
    }
    if (!dates.empty() && dates.size() != labels.size()) throw std::invalid_argument("dataset: date count mismatch");
    if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature value");
}

void Hyperparams::validate() const {
    if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
    if (!(lr_learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (lr_epochs < 1) throw std::invalid_argument("epochs must be positive");
    if (!(lr_l2 >= 0.0)) throw std::invalid_argument("l2 must be nonnegative");
    if (!(smo_tolerance > 0.0)) throw std::invalid_argument("SMO tolerance must be positive");
}

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& features) {
    if (features.rows() == 0) throw std::invalid_argument("cannot fit a scaler on zero rows");
    return {features.colwise().minCoeff().transpose(), features.colwise().maxCoeff().transpose()};
}

Eigen::VectorXd MinMaxScaler::transform(const Eigen::VectorXd& row) const {
    if (row.size() != min.size()) {
        throw std::invalid_argument(fmt::format("feature length {} does not match model ({})", row.size(), min.size()));
    }
    Eigen::VectorXd out(row.size());
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double range = max(j) - min(j);
        out(j) = range > 0.0 ? (row(j) - min(j)) / range : 0.0;
    }
    return out;
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& features) const {
    Eigen::MatrixXd out(features.rows(), features.cols());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        out.row(i) = transform(Eigen::VectorXd(features.row(i).transpose())).transpose();
    }
    return out;
}

// ---------------------------------------------------------------- logistic

namespace {

std::vector<CategoryLabel> distinct_labels(std::span<const CategoryLabel> labels) {
    std::set<CategoryLabel> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    const double mx = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - mx).exp();
    return e / e.sum();
}

std::size_t argmax_first(const Eigen::VectorXd& v) {
    std::size_t best = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
        if (v(k) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(k);
    }
    return best;
}

}  // namespace

Eigen::VectorXd LRModel::probabilities(const Eigen::VectorXd& x) const {
    if (x.size() != weights.cols()) {
        throw std::invalid_argument(fmt::format("feature length {} does not match model ({})", x.size(), weights.cols()));
    }
    return softmax(weights * x + bias);
}

CategoryLabel LRModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != weights.cols()) {
        throw std::invalid_argument(fmt::format("feature length {} does not match model ({})", x.size(), weights.cols()));
    }
    return classes[argmax_first(weights * x + bias)];
}

LRObjective lr_objective(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias, const Eigen::MatrixXd& x,
                         std::span<const int> targets, double l2) {
    const auto n = x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);
    LRObjective obj;
    obj.grad_weights = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
    obj.grad_bias = Eigen::VectorXd::Zero(bias.size());
    Eigen::MatrixXd logits = (x * weights.transpose()).rowwise() + bias.transpose();
    Eigen::MatrixXd residual(n, weights.rows());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd shifted = logits.row(i).array() - mx;
        const double log_norm = std::log(shifted.array().exp().sum());
        const auto t = static_cast<Eigen::Index>(targets[static_cast<std::size_t>(i)]);
        obj.loss -= (shifted(t) - log_norm) * inv_n;
        residual.row(i) = (shifted.array() - log_norm).exp();
        residual(i, t) -= 1.0;
    }
    obj.grad_weights = residual.transpose() * x * inv_n + l2 * weights;
    obj.grad_bias = residual.colwise().sum().transpose() * inv_n;
    obj.loss += 0.5 * l2 * weights.squaredNorm();
    return obj;
}

LRModel train_logistic(const Dataset& ds, const Hyperparams& hp) {
    ds.validate();
    hp.validate();
    LRModel model;
    model.classes = distinct_labels(ds.labels);
    if (model.classes.size() < 2) throw std::invalid_argument("logistic regression needs at least two classes");
    std::vector<int> targets;
    targets.reserve(ds.size());
    for (auto l : ds.labels) {
        targets.push_back(static_cast<int>(std::lower_bound(model.classes.begin(), model.classes.end(), l) -
                                           model.classes.begin()));
    }
    const auto k = static_cast<Eigen::Index>(model.classes.size());
    model.weights = Eigen::MatrixXd::Zero(k, ds.features.cols());
    model.bias = Eigen::VectorXd::Zero(k);
    for (int epoch = 0; epoch < hp.lr_epochs; ++epoch) {
        const auto obj = lr_objective(model.weights, model.bias, ds.features, targets, hp.lr_l2);
        model.weights -= hp.lr_learning_rate * obj.grad_weights;
        model.bias -= hp.lr_learning_rate * obj.grad_bias;
    }
    if (!model.weights.allFinite() || !model.bias.allFinite()) {
        throw std::runtime_error("logistic regression diverged; lower the learning rate");
    }
    return model;
}

// ---------------------------------------------------------------- SVM

double Kernel::operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const {
    if (type == KernelType::linear) return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
}

BinarySvm solve_smo(const Eigen::MatrixXd& x, std::span<const int> y, double C, const Kernel& kernel,
                    double tolerance, long max_iter, bool record_objective) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (y.size() != n) throw std::invalid_argument("solve_smo: label count mismatch");
    constexpr double kTau = 1e-12;

    // Q_ij = y_i y_j K(x_i, x_j); small problems, so the full matrix is cached.
    Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = y[i] * y[j] *
                             kernel(x.row(static_cast<Eigen::Index>(i)).transpose(),
                                    x.row(static_cast<Eigen::Index>(j)).transpose());
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    auto Q = [&](std::size_t i, std::size_t j) { return q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

    BinarySvm out;
    out.y.assign(y.begin(), y.end());
    std::vector<double>& alpha = out.alpha;
    alpha.assign(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 0.5 a'Qa - e'a

    auto dual = [&] {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) f += alpha[i] * (grad[i] - 1.0);
        return -0.5 * f;
    };
    if (record_objective) out.dual_objective.push_back(0.0);

    long iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (; iter < max_iter; ++iter) {
        // maximal violating pair
        double gmax = -std::numeric_limits<double>::infinity(), gmax2 = gmax;
        std::size_t i_sel = n, j_sel = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (alpha[t] < C && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i_sel = t;
                }
                if (alpha[t] > 0 && grad[t] >= gmax2) {
                    gmax2 = grad[t];
                    j_sel = t;
                }
            } else {
                if (alpha[t] > 0 && grad[t] >= gmax) {
                    gmax = grad[t];
                    i_sel = t;
                }
                if (alpha[t] < C && -grad[t] >= gmax2) {
                    gmax2 = -grad[t];
                    j_sel = t;
                }
            }
        }
        gap = gmax + gmax2;
        if (i_sel == n || j_sel == n || gap < tolerance) break;

        const std::size_t i = i_sel, j = j_sel;
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * dai + Q(t, j) * daj;
        if (record_objective) out.dual_objective.push_back(dual());
    }
    if (gap >= tolerance && iter >= max_iter) {
        throw std::runtime_error(fmt::format("SMO did not converge: {} iterations, KKT gap {:.3e} > tolerance {:.1e}, "
                                             "n = {}, C = {}",
                                             iter, gap, tolerance, n, C));
    }
    out.iterations = iter;

    // bias from free vectors, else the midpoint of the feasible interval
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    out.bias = -rho;
    return out;
}

double PairMachine::decision(const Eigen::VectorXd& x, const Kernel& kernel) const {
    double f = bias;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
        f += coef[static_cast<std::size_t>(i)] * kernel(support_vectors.row(i).transpose(), x);
    }
    return f;
}

CategoryLabel SVMModel::predict(const Eigen::VectorXd& x) const {
    if (!machines.empty() && x.size() != machines.front().support_vectors.cols()) {
        throw std::invalid_argument(fmt::format("feature length {} does not match model ({})", x.size(),
                                                machines.front().support_vectors.cols()));
    }
    std::map<CategoryLabel, int> votes;
    std::map<CategoryLabel, double> strength;
    for (auto c : classes) votes[c] = 0, strength[c] = 0.0;
    for (const auto& m : machines) {
        const double f = m.decision(x, kernel);
        ++votes[f > 0 ? m.positive : m.negative];
        strength[m.positive] += f;
        strength[m.negative] -= f;
    }
    // classes ascend, so strict comparisons keep the lowest label on full ties
    CategoryLabel best = classes.front();
    for (auto c : classes) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best])) best = c;
    }
    return best;
}

SVMModel train_svm(const Dataset& ds, const Hyperparams& hp) {
    ds.validate();
    hp.validate();
    SVMModel model;
    model.classes = distinct_labels(ds.labels);
    if (model.classes.size() < 2) throw std::invalid_argument("SVM needs at least two classes");
    model.C = hp.C;
    model.kernel.type = KernelType::rbf;
    model.kernel.gamma = hp.gamma > 0.0 ? hp.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, ds.features.cols()));

    for (std::size_t a = 0; a < model.classes.size(); ++a) {
        for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
            PairMachine m;
            m.positive = model.classes[a];
            m.negative = model.classes[b];
            std::vector<std::size_t> rows;
            std::vector<int> y;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (ds.labels[i] == m.positive || ds.labels[i] == m.negative) {
                    rows.push_back(i);
                    y.push_back(ds.labels[i] == m.positive ? 1 : -1);
                }
            }
            const Dataset sub = ds.rows(rows);
            const auto sol = solve_smo(sub.features, y, hp.C, model.kernel, hp.smo_tolerance, hp.smo_max_iter);
            std::vector<Eigen::Index> sv;
            for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
                if (sol.alpha[i] > 0.0) {
                    sv.push_back(static_cast<Eigen::Index>(i));
                    m.coef.push_back(sol.alpha[i] * y[i]);
                }
            }
            m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), sub.features.cols());
            for (std::size_t r = 0; r < sv.size(); ++r) {
                m.support_vectors.row(static_cast<Eigen::Index>(r)) = sub.features.row(sv[r]);
            }
            m.bias = sol.bias;
            model.machines.push_back(std::move(m));
        }
    }
    return model;
}

// ---------------------------------------------------------------- wrappers

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::lr: return "lr";
        case ModelKind::svm: return "svm";
        case ModelKind::svm_es: return "svm_es";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "lr") return ModelKind::lr;
    if (name == "svm") return ModelKind::svm;
    if (name == "svm_es" || name == "svmes") return ModelKind::svm_es;
    throw std::invalid_argument(fmt::format("unknown model kind '{}'", name));
}

CategoryLabel Classifier::predict(const Eigen::VectorXd& raw) const {
    const Eigen::VectorXd x = scaler.transform(raw);
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

Classifier train_classifier(ModelKind kind, const Dataset& ds, const Hyperparams& hp,
                            const std::optional<MinMaxScaler>& fixed_scaler) {
    Classifier c;
    c.scaler = fixed_scaler ? *fixed_scaler : MinMaxScaler::fit(ds.features);
    Dataset scaled = ds;
    scaled.features = c.scaler.transform(ds.features);
    if (kind == ModelKind::lr) {
        c.model = train_logistic(scaled, hp);
    } else {
        c.model = train_svm(scaled, hp);
    }
    return c;
}

CategoryLabel TrainedModel::predict(const Eigen::VectorXd& raw_features) const {
    if (raw_features.size() != static_cast<Eigen::Index>(spec.size())) {
        throw std::invalid_argument(
            fmt::format("feature length {} does not match model ({})", raw_features.size(), spec.size()));
    }
    return classifier.predict(raw_features);
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(r);
    }
    return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto r = j[i].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(r.size()) != cols) throw std::invalid_argument("model: ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), c) = r[static_cast<std::size_t>(c)];
    }
    return m;
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::ordered_json model_to_json(const TrainedModel& m) {
    nlohmann::ordered_json j;
    j["model_type"] = std::string(to_string(m.kind));
    j["target"] = std::string(to_string(m.target));
    j["feature_spec"] = m.spec.str();
    j["trained_through"] = m.trained_through.str();
    j["discretization"] = scheme_to_json(m.scheme);
    j["normalization"] = {{"min", to_std(m.classifier.scaler.min)}, {"max", to_std(m.classifier.scaler.max)}};
    j["hyperparams"] = {{"C", m.hyperparams.C},
                        {"gamma", m.hyperparams.gamma},
                        {"lr_learning_rate", m.hyperparams.lr_learning_rate},
                        {"lr_epochs", m.hyperparams.lr_epochs},
                        {"lr_l2", m.hyperparams.lr_l2},
                        {"smo_tolerance", m.hyperparams.smo_tolerance}};
    if (const auto* lr = std::get_if<LRModel>(&m.classifier.model)) {
        j["classes"] = lr->classes;
        j["weights"] = matrix_json(lr->weights);
        j["bias"] = to_std(lr->bias);
    } else {
        const auto& svm = std::get<SVMModel>(m.classifier.model);
        j["classes"] = svm.classes;
        j["kernel"] = {{"type", svm.kernel.type == KernelType::rbf ? "rbf" : "linear"}, {"gamma", svm.kernel.gamma}};
        j["C"] = svm.C;
        nlohmann::ordered_json machines = nlohmann::ordered_json::array();
        for (const auto& pm : svm.machines) {
            nlohmann::ordered_json mj;
            mj["positive"] = pm.positive;
            mj["negative"] = pm.negative;
            mj["bias"] = pm.bias;
            mj["coef"] = pm.coef;
            mj["support_vectors"] = matrix_json(pm.support_vectors);
            machines.push_back(std::move(mj));
        }
        j["machines"] = std::move(machines);
    }
    return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
    TrainedModel m;
    m.kind = parse_model_kind(j.at("model_type").get<std::string>());
    m.target = parse_target(j.at("target").get<std::string>());
    m.spec = FeatureSpec::parse(j.at("feature_spec").get<std::string>());
    m.trained_through = Date::parse(j.at("trained_through").get<std::string>());
    m.scheme = scheme_from_json(j.at("discretization"));
    m.classifier.scaler.min = vector_from(j.at("normalization").at("min"));
    m.classifier.scaler.max = vector_from(j.at("normalization").at("max"));
    const auto& hp = j.at("hyperparams");
    m.hyperparams.C = hp.at("C").get<double>();
    m.hyperparams.gamma = hp.at("gamma").get<double>();
    m.hyperparams.lr_learning_rate = hp.at("lr_learning_rate").get<double>();
    m.hyperparams.lr_epochs = hp.at("lr_epochs").get<int>();
    m.hyperparams.lr_l2 = hp.at("lr_l2").get<double>();
    m.hyperparams.smo_tolerance = hp.at("smo_tolerance").get<double>();
    const auto cols = static_cast<Eigen::Index>(m.spec.size());
    if (m.classifier.scaler.min.size() != cols || m.classifier.scaler.max.size() != cols) {
        throw std::invalid_argument("model: normalization size does not match feature spec");
    }
    const auto classes = j.at("classes").get<std::vector<CategoryLabel>>();
    if (m.kind == ModelKind::lr) {
        LRModel lr;
        lr.classes = classes;
        lr.weights = matrix_from(j.at("weights"), cols);
        lr.bias = vector_from(j.at("bias"));
        m.classifier.model = std::move(lr);
    } else {
        SVMModel svm;
        svm.classes = classes;
        svm.C = j.at("C").get<double>();
        svm.kernel.type = j.at("kernel").at("type").get<std::string>() == "linear" ? KernelType::linear : KernelType::rbf;
        svm.kernel.gamma = j.at("kernel").at("gamma").get<double>();
        for (const auto& mj : j.at("machines")) {
            PairMachine pm;
            pm.positive = mj.at("positive").get<CategoryLabel>();
            pm.negative = mj.at("negative").get<CategoryLabel>();
            pm.bias = mj.at("bias").get<double>();
            pm.coef = mj.at("coef").get<std::vector<double>>();
            pm.support_vectors = matrix_from(mj.at("support_vectors"), cols);
            svm.machines.push_back(std::move(pm));
        }
        m.classifier.model = std::move(svm);
    }
    return m;
}

}  // namespace emotrade
