#include "emotrade/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "emotrade/corpus.hpp"
#include "emotrade/eval.hpp"
#include "emotrade/learn.hpp"
#include "emotrade/market.hpp"
#include "emotrade/stats.hpp"
#include "emotrade/synth.hpp"
#include "emotrade/timeseries.hpp"
#include "text_io.hpp"

namespace fs = std::filesystem;

namespace emotrade {

namespace {

// Set by each command as it progresses; reported on failure.
struct Stage {
    std::string name = "args";
    void operator()(std::string s) { name = std::move(s); }
};

// Outputs are written next to their final path with a `.partial` suffix and
// renamed only once the command has succeeded.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
    ~Outputs() {
        std::error_code ec;
        for (const auto& p : pending_) fs::remove(partial_of(p), ec);
    }
    Outputs(const Outputs&) = delete;
    Outputs& operator=(const Outputs&) = delete;

    fs::path stage(const std::string& name) {
        fs::create_directories(dir_);
        pending_.push_back(dir_ / name);
        return partial_of(pending_.back());
    }

    std::vector<fs::path> commit() {
        for (const auto& p : pending_) fs::rename(partial_of(p), p);
        auto done = std::move(pending_);
        pending_.clear();
        return done;
    }

    const fs::path& dir() const { return dir_; }

private:
    static fs::path partial_of(const fs::path& p) { return fs::path(p.string() + ".partial"); }

    fs::path dir_;
    std::vector<fs::path> pending_;
};

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = ".";
    bool paper_mode = false;
    int jobs = 1;
};

fs::path or_default(const std::string& given, const fs::path& dir, const char* name) {
    return given.empty() ? dir / name : fs::path(given);
}

void require_file(const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw std::invalid_argument(fmt::format("{} '{}' not found", what, p.string()));
}

void report_written(std::ostream& out, const std::vector<fs::path>& paths) {
    for (const auto& p : paths) out << "wrote " << p.string() << '\n';
}

struct MarketInputs {
    std::string series;
    std::string ohlcv;
    std::string calendar;
};

ExperimentData load_experiment(const MarketInputs& in, const fs::path& dir, bool paper_mode, Stage& stage) {
    stage("read_inputs");
    const auto series_path = or_default(in.series, dir, "emotion_series.csv");
    require_file(series_path, "emotion series");
    require_file(in.ohlcv, "OHLCV file");
    require_file(in.calendar, "calendar");
    ExperimentData data;
    data.emotions = read_emotion_series_csv(series_path);
    data.calendar = read_calendar(in.calendar);
    const auto records = read_ohlcv_csv(in.ohlcv);
    stage("returns");
    data.market = compute_returns(records, paper_mode ? ReturnMode::paper_literal : ReturnMode::standard);
    return data;
}

std::vector<Target> parse_targets(const std::vector<std::string>& names) {
    std::vector<Target> out;
    for (const auto& n : names) {
        if (n == "all") return {kTargets.begin(), kTargets.end()};
        out.push_back(parse_target(n));
    }
    if (out.empty()) throw std::invalid_argument("no targets given");
    return out;
}

// --- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string tweets;
    std::string keywords;
};

int cmd_ingest(const Common& c, const IngestArgs& a, std::ostream& out, Stage& stage) {
    stage("read_inputs");
    require_file(a.tweets, "tweet file");
    const auto tweets = read_tweets_jsonl(a.tweets);
    KeywordFilter filter;
    if (!a.keywords.empty()) {
        require_file(a.keywords, "keyword file");
        filter = KeywordFilter(read_keywords(a.keywords));
    }
    stage("filter");
    const auto kept = filter_stock_tweets(tweets, filter);
    stage("write");
    Outputs outputs(c.out);
    write_tweets_jsonl(outputs.stage("stock_tweets.jsonl"), kept);
    report_written(out, outputs.commit());
    out << fmt::format("kept {} of {} tweets\n", kept.size(), tweets.size());
    return 0;
}

// --- label ----------------------------------------------------------------

struct LabelArgs {
    std::string train;
    std::string model;
    std::string stock_tweets;
    double smoothing = 1.0;
};

int cmd_label(const Common& c, const LabelArgs& a, std::ostream& out, Stage& stage) {
    stage("read_inputs");
    if (a.train.empty() == a.model.empty()) {
        throw std::invalid_argument("give exactly one of --nb-train (fit a model) or --nb-model (apply one)");
    }
    const auto tweets_path = or_default(a.stock_tweets, c.out, "stock_tweets.jsonl");
    require_file(tweets_path, "tweet file");
    const auto tweets = read_tweets_jsonl(tweets_path);
    Outputs outputs(c.out);
    NBModel model;
    if (!a.train.empty()) {
        require_file(a.train, "training corpus");
        const auto corpus = read_tweets_jsonl(a.train);
        stage("train_nb");
        model = train_nb(corpus, a.smoothing);
        stage("write");
        save_nb_model(outputs.stage("nb_model.json"), model);
    } else {
        require_file(a.model, "NB model");
        model = load_nb_model(a.model);
    }
    stage("classify");
    const auto labelled = label_tweets(model, tweets, c.jobs);
    stage("write");
    write_tweets_jsonl(outputs.stage("labeled_tweets.jsonl"), labelled);
    report_written(out, outputs.commit());
    return 0;
}

// --- series ---------------------------------------------------------------

struct SeriesArgs {
    std::string labeled;
    std::string calendar;
    std::string missing = "error";
};

int cmd_series(const Common& c, const SeriesArgs& a, std::ostream& out, Stage& stage) {
    stage("read_inputs");
    const auto labeled_path = or_default(a.labeled, c.out, "labeled_tweets.jsonl");
    require_file(labeled_path, "labelled tweet file");
    require_file(a.calendar, "calendar");
    const auto tweets = read_tweets_jsonl(labeled_path);
    const auto calendar = read_calendar(a.calendar);
    MissingDayPolicy policy;
    if (a.missing == "error") {
        policy = MissingDayPolicy::error;
    } else if (a.missing == "forward_fill") {
        policy = MissingDayPolicy::forward_fill;
    } else {
        throw std::invalid_argument(fmt::format("unknown missing-day policy '{}'", a.missing));
    }
    stage("aggregate");
    const auto counts = aggregate_daily(tweets);
    const auto daily = proportions_series(counts);
    const auto trading = trading_day_series(counts, calendar, policy);
    stage("write");
    Outputs outputs(c.out);
    write_emotion_series_csv(outputs.stage("emotion_series.csv"), trading);
    write_emotion_series_csv(outputs.stage("daily_emotion_series.csv"), daily);
    report_written(out, outputs.commit());
    return 0;
}

// --- analyze --------------------------------------------------------------

struct AnalyzeArgs {
    MarketInputs in;
    double train_fraction = 0.8;
    AnalysisOptions options;
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a, std::ostream& out, Stage& stage) {
    const auto data = load_experiment(a.in, c.out, c.paper_mode, stage);
    stage("split");
    const auto aligned = align(data.emotions, data.market);
    const auto split = split_train_test(aligned.x, aligned.y, a.train_fraction);
    stage("analysis");
    AnalysisOptions options = a.options;
    options.seed = c.seed;
    options.jobs = c.jobs;
    const auto rows = analysis_grid(split.train, options);
    stage("write");
    Outputs outputs(c.out);
    write_analysis_csv(outputs.stage("analysis.csv"), rows);
    report_written(out, outputs.commit());
    const auto flagged = std::count_if(rows.begin(), rows.end(), [](const AnalysisRow& r) { return !r.tier.empty(); });
    out << fmt::format("{} of {} cells significant\n", flagged, rows.size());
    return 0;
}

// --- train ----------------------------------------------------------------

struct ModelArgs {
    std::string model = "svm_es";
    std::string method = "kmeans";
    std::string features;  // empty: by model kind; "all", "svmes" or a pair list
    Hyperparams hp;
    double train_fraction = 0.8;
    int max_lag = 5;
};

FeatureSpec resolve_spec(const ModelArgs& a, ModelKind kind, Target target) {
    if (a.features.empty()) return spec_for(kind, target, a.max_lag);
    if (a.features == "all") return FeatureSpec::all_emotions(a.max_lag);
    if (a.features == "svmes") return svmes_feature_spec(target);
    return FeatureSpec::parse(a.features);
}

struct TrainArgs {
    MarketInputs in;
    std::vector<std::string> targets{"all"};
    ModelArgs m;
};

int cmd_train(const Common& c, const TrainArgs& a, std::ostream& out, Stage& stage) {
    const auto data = load_experiment(a.in, c.out, c.paper_mode, stage);
    const auto kind = parse_model_kind(a.m.model);
    const auto method = parse_method(a.m.method);
    const auto targets = parse_targets(a.targets);
    a.m.hp.validate();
    stage("split");
    const auto rows = split_rows(data, a.m.train_fraction, a.m.max_lag);
    Outputs outputs(c.out);
    for (const Target target : targets) {
        stage(fmt::format("train:{}", to_string(target)));
        const auto spec = resolve_spec(a.m, kind, target);
        const auto labelled = labelled_dataset(data, rows.train, target, spec, method);
        std::optional<MinMaxScaler> scaler;
        if (c.paper_mode && !rows.test.empty()) {
            Eigen::MatrixXd all(labelled.dataset.features.rows() + static_cast<Eigen::Index>(rows.test.size()),
                                labelled.dataset.features.cols());
            all << labelled.dataset.features, build_features(data.emotions, spec, rows.test, data.calendar);
            scaler = MinMaxScaler::fit(all);
        }
        TrainedModel model;
        model.kind = kind;
        model.target = target;
        model.spec = spec;
        model.scheme = labelled.scheme;
        model.hyperparams = a.m.hp;
        model.classifier = train_classifier(kind, labelled.dataset, a.m.hp, scaler);
        model.trained_through = rows.train.back();
        stage(fmt::format("write:{}", to_string(target)));
        const auto name = fmt::format("model_{}_{}_{}.json", to_string(target), to_string(kind), to_string(method));
        detail::write_text(outputs.stage(name), model_to_json(model).dump(2) + "\n");
    }
    report_written(out, outputs.commit());
    return 0;
}

// --- predict --------------------------------------------------------------

struct PredictArgs {
    std::vector<std::string> models;
    std::string series;
    std::string calendar;
    std::string date;
};

int cmd_predict(const Common& c, const PredictArgs& a, std::ostream& out, Stage& stage) {
    stage("read_inputs");
    if (a.models.empty()) throw std::invalid_argument("no --model given");
    const auto series_path = or_default(a.series, c.out, "emotion_series.csv");
    require_file(series_path, "emotion series");
    require_file(a.calendar, "calendar");
    const auto series = read_emotion_series_csv(series_path);
    const auto calendar = read_calendar(a.calendar);
    if (series.size() == 0) throw std::invalid_argument("emotion series is empty");
    Date target_date;
    if (!a.date.empty()) {
        target_date = Date::parse(a.date);
    } else {
        const auto next = calendar.next_after(series.dates.back());
        if (!next) {
            throw std::invalid_argument(
                fmt::format("calendar has no trading day after {}", series.dates.back().str()));
        }
        target_date = *next;
    }
    std::string lines = "target,model,date,label\n";
    for (const auto& path : a.models) {
        stage("read_model");
        require_file(path, "model");
        std::ifstream in(path);
        const auto model = model_from_json(nlohmann::json::parse(in));
        stage(fmt::format("features:{}", to_string(model.target)));
        const std::array<Date, 1> dates{target_date};
        const Eigen::MatrixXd x = build_features(series, model.spec, dates, calendar);
        stage(fmt::format("predict:{}", to_string(model.target)));
        const auto label = model.predict(x.row(0).transpose());
        lines += fmt::format("{},{},{},{}\n", to_string(model.target), to_string(model.kind), target_date.str(), label);
    }
    out << lines;
    return 0;
}

// --- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    MarketInputs in;
    std::vector<std::string> targets{"all"};
    std::vector<std::string> models{"lr", "svm", "svm_es"};
    std::vector<std::string> methods{"equal_frequency", "kmeans", "sign"};
    ModelArgs m;
    int folds = 5;
    std::string cv_mode = "shuffled";
    bool grid_search = false;
};

int cmd_evaluate(const Common& c, const EvaluateArgs& a, std::ostream& out, Stage& stage) {
    const auto data = load_experiment(a.in, c.out, c.paper_mode, stage);
    ExperimentConfig config;
    config.targets = parse_targets(a.targets);
    config.models.clear();
    for (const auto& m : a.models) config.models.push_back(parse_model_kind(m));
    config.methods.clear();
    for (const auto& m : a.methods) config.methods.push_back(parse_method(m));
    config.train_fraction = a.m.train_fraction;
    config.max_lag = a.m.max_lag;
    config.cv_folds = a.folds;
    config.cv_mode = parse_cv_mode(a.cv_mode);
    config.seed = c.seed;
    config.hp = a.m.hp;
    config.hp.validate();
    config.whole_series_normalization = c.paper_mode;
    config.svm_grid_search = a.grid_search;
    config.jobs = c.jobs;
    stage("experiment");
    const auto report = run_experiment(data, config);
    stage("write");
    Outputs outputs(c.out);
    detail::write_text(outputs.stage("eval_report.csv"), report_csv(report));
    detail::write_text(outputs.stage("eval_report.txt"), report_text(report));
    detail::write_text(outputs.stage("confusion.json"), confusion_json(report).dump(2) + "\n");
    report_written(out, outputs.commit());
    return 0;
}

// --- synth ----------------------------------------------------------------

struct SynthArgs {
    std::string plant = "sadness:2:volume";
    std::string start = "2015-01-05";
    int days = 260;
    int tweets_per_day = 300;
};

PlantedRule parse_plant(const std::string& text) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw std::invalid_argument(fmt::format("bad --plant '{}', want emotion:lag:target", text));
    PlantedRule r;
    r.emotion = parse_emotion(parts[0]);
    r.lag = static_cast<int>(detail::parse_double(parts[1]));
    r.target = parse_target(parts[2]);
    return r;
}

int cmd_synth(const Common& c, const SynthArgs& a, std::ostream& out, Stage& stage) {
    SynthOptions opt;
    opt.seed = c.seed;
    opt.start = Date::parse(a.start);
    opt.trading_days = a.days;
    opt.tweets_per_day = a.tweets_per_day;
    opt.rule = parse_plant(a.plant);
    stage("generate");
    const auto data = generate_synthetic(opt);
    stage("write");
    const fs::path dir(c.out);
    fs::create_directories(dir);
    const fs::path tmp = dir / ".synth.partial";
    fs::remove_all(tmp);
    try {
        write_synthetic(tmp, data, opt);
        const auto abs = [&](const char* name) { return fs::absolute(dir / name).lexically_normal().string(); };
        std::string cfg = "# generated by synth\n";
        cfg += fmt::format("seed = {}\n", c.seed);
        cfg += fmt::format("tweets = {}\n", abs("raw_tweets.jsonl"));
        cfg += fmt::format("keywords = {}\n", abs("keywords.txt"));
        cfg += fmt::format("nb-train = {}\n", abs("nb_train.jsonl"));
        cfg += fmt::format("calendar = {}\n", abs("calendar.txt"));
        cfg += fmt::format("ohlcv = {}\n", abs("ohlcv.csv"));
        detail::write_text(tmp / "run.cfg", cfg);
        std::vector<fs::path> written;
        for (const auto& entry : fs::directory_iterator(tmp)) written.push_back(entry.path().filename());
        std::sort(written.begin(), written.end());
        for (const auto& name : written) {
            fs::rename(tmp / name, dir / name);
            out << "wrote " << (dir / name).string() << '\n';
        }
        fs::remove_all(tmp);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
    return 0;
}

// --- argument plumbing ----------------------------------------------------

void add_common(CLI::App& sub, Common& c) {
    sub.add_option("--config", c.config, "flat key = value file; flags override it");
    sub.add_option("--seed", c.seed, "master seed");
    sub.add_option("--out", c.out, "output directory");
    sub.add_flag("--paper-mode", c.paper_mode,
                 "literal return denominator and whole-series feature normalisation");
    sub.add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void add_market_inputs(CLI::App& sub, MarketInputs& in) {
    sub.add_option("--series", in.series, "emotion series CSV (default <out>/emotion_series.csv)");
    sub.add_option("--ohlcv", in.ohlcv, "OHLCV CSV")->required();
    sub.add_option("--calendar", in.calendar, "trading calendar")->required();
}

void add_model_args(CLI::App& sub, ModelArgs& m) {
    sub.add_option("--method", m.method, "equal_frequency | kmeans | sign");
    sub.add_option("--features", m.features, "all | svmes | emotion:lag,... (default by model kind)");
    sub.add_option("--C", m.hp.C, "SVM box constraint");
    sub.add_option("--gamma", m.hp.gamma, "RBF width (0: 1 / feature count)");
    sub.add_option("--lr-rate", m.hp.lr_learning_rate, "logistic regression step size");
    sub.add_option("--lr-epochs", m.hp.lr_epochs, "logistic regression epochs");
    sub.add_option("--lr-l2", m.hp.lr_l2, "logistic regression L2 penalty");
    sub.add_option("--smo-tol", m.hp.smo_tolerance, "SMO stopping tolerance");
    sub.add_option("--train-fraction", m.train_fraction, "chronological training share");
    sub.add_option("--max-lag", m.max_lag, "largest lag in trading days")->check(CLI::Range(1, 5));
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].starts_with("--config=")) return args[i].substr(9);
    }
    return std::nullopt;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
    if (!fs::is_regular_file(path)) throw std::invalid_argument(fmt::format("config file '{}' not found", path));
    std::vector<std::pair<std::string, std::string>> out;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument(fmt::format("{}:{}: expected key = value", path, i + 1));
        }
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw std::invalid_argument(fmt::format("{}:{}: empty key", path, i + 1));
        out.emplace_back(std::string(key), std::string(detail::trim(line.substr(eq + 1))));
    }
    return out;
}

int run_cli(const std::vector<std::string>& input_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Emotion time series and stock market analysis", "emotrade"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common common;
    IngestArgs ingest;
    LabelArgs label;
    SeriesArgs series;
    AnalyzeArgs analyze;
    TrainArgs train;
    PredictArgs predict;
    EvaluateArgs evaluate;
    SynthArgs synth;

    auto* s_ingest = app.add_subcommand("ingest", "keep stock-related tweets");
    add_common(*s_ingest, common);
    s_ingest->add_option("--tweets", ingest.tweets, "raw tweets, JSON lines")->required();
    s_ingest->add_option("--keywords", ingest.keywords, "keyword file, one per line");

    auto* s_label = app.add_subcommand("label", "train or apply the Naive Bayes emotion classifier");
    add_common(*s_label, common);
    s_label->add_option("--nb-train", label.train, "labelled training corpus, JSON lines");
    s_label->add_option("--nb-model", label.model, "previously saved model");
    s_label->add_option("--stock-tweets", label.stock_tweets, "tweets to label (default <out>/stock_tweets.jsonl)");
    s_label->add_option("--smoothing", label.smoothing, "additive smoothing")->check(CLI::PositiveNumber);

    auto* s_series = app.add_subcommand("series", "daily emotion proportions on trading days");
    add_common(*s_series, common);
    s_series->add_option("--labeled", series.labeled, "labelled tweets (default <out>/labeled_tweets.jsonl)");
    s_series->add_option("--calendar", series.calendar, "trading calendar")->required();
    s_series->add_option("--missing", series.missing, "error | forward_fill");

    auto* s_analyze = app.add_subcommand("analyze", "correlation and Granger causality grid");
    add_common(*s_analyze, common);
    add_market_inputs(*s_analyze, analyze.in);
    s_analyze->add_option("--train-fraction", analyze.train_fraction, "chronological training share");
    s_analyze->add_option("--max-lag", analyze.options.max_lag, "largest lag")->check(CLI::Range(1, 5));
    s_analyze->add_option("--significance", analyze.options.significance, "Granger significance level");
    s_analyze->add_option("--samples", analyze.options.n_samples, "correlation resampling draws");
    s_analyze->add_option("--sample-size", analyze.options.sample_size, "pairs per draw");
    s_analyze->add_option("--shuffles", analyze.options.n_shuffles, "shuffle baseline repetitions");
    s_analyze->add_option("--rho-threshold", analyze.options.rho_threshold, "correlation flag threshold");

    auto* s_train = app.add_subcommand("train", "fit and save a classifier per target");
    add_common(*s_train, common);
    add_market_inputs(*s_train, train.in);
    s_train->add_option("--targets", train.targets, "close,open,high,low,volume or all")->delimiter(',');
    s_train->add_option("--model", train.m.model, "lr | svm | svm_es");
    add_model_args(*s_train, train.m);

    auto* s_predict = app.add_subcommand("predict", "predict the next trading day's categories");
    add_common(*s_predict, common);
    s_predict->add_option("--model", predict.models, "saved model(s)")->delimiter(',');
    s_predict->add_option("--series", predict.series, "emotion series CSV (default <out>/emotion_series.csv)");
    s_predict->add_option("--calendar", predict.calendar, "trading calendar")->required();
    s_predict->add_option("--date", predict.date, "target trading day (default: next after the series)");

    auto* s_evaluate = app.add_subcommand("evaluate", "cross-validation and holdout report");
    add_common(*s_evaluate, common);
    add_market_inputs(*s_evaluate, evaluate.in);
    s_evaluate->add_option("--targets", evaluate.targets, "targets or all")->delimiter(',');
    s_evaluate->add_option("--models", evaluate.models, "lr,svm,svm_es")->delimiter(',');
    s_evaluate->add_option("--methods", evaluate.methods, "equal_frequency,kmeans,sign")->delimiter(',');
    add_model_args(*s_evaluate, evaluate.m);
    s_evaluate->add_option("--folds", evaluate.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
    s_evaluate->add_option("--cv-mode", evaluate.cv_mode, "shuffled | contiguous");
    s_evaluate->add_flag("--grid-search", evaluate.grid_search, "tune SVM C and gamma by inner CV");

    auto* s_synth = app.add_subcommand("synth", "write a synthetic corpus with a planted dependency");
    add_common(*s_synth, common);
    s_synth->add_option("--plant", synth.plant, "emotion:lag:target");
    s_synth->add_option("--start", synth.start, "first trading day");
    s_synth->add_option("--days", synth.days, "trading days with market data");
    s_synth->add_option("--tweets-per-day", synth.tweets_per_day, "tweets per trading day");

    std::string command = input_args.empty() ? "none" : input_args.front();
    Stage stage;
    std::vector<std::string> args = input_args;
    try {
        stage("config");
        if (const auto config = find_config(args)) {
            CLI::App* sub = nullptr;
            for (auto* s : app.get_subcommands({})) {
                if (s->get_name() == command) sub = s;
            }
            if (sub != nullptr) {
                for (const auto& [key, value] : read_flat_config(*config)) {
                    const std::string flag = "--" + key;
                    if (key == "config" || given(args, flag)) continue;
                    if (sub->get_option_no_throw(flag) == nullptr) continue;  // belongs to another command
                    args.push_back(flag + "=" + value);
                }
            }
        }
        stage("args");
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        }
        for (auto* s : app.get_subcommands()) command = s->get_name();

        if (command == "ingest") return cmd_ingest(common, ingest, out, stage);
        if (command == "label") return cmd_label(common, label, out, stage);
        if (command == "series") return cmd_series(common, series, out, stage);
        if (command == "analyze") return cmd_analyze(common, analyze, out, stage);
        if (command == "train") return cmd_train(common, train, out, stage);
        if (command == "predict") return cmd_predict(common, predict, out, stage);
        if (command == "evaluate") return cmd_evaluate(common, evaluate, out, stage);
        if (command == "synth") return cmd_synth(common, synth, out, stage);
        throw std::invalid_argument(fmt::format("unknown command '{}'", command));
    } catch (const std::exception& e) {
        err << fmt::format("error: command={} stage={}: {}\n", command, stage.name, one_line(e.what()));
        return 1;
    }
}

}  // namespace emotrade
