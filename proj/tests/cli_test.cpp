#include <gtest/gtest.h>

#include <regex>

#include "emotrade/cli.hpp"
#include "pipeline.hpp"

using namespace emotrade;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

bool has_partial(const fs::path& dir) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.path().filename().string().find(".partial") != std::string::npos) return true;
    }
    return false;
}

const std::regex kErrorLine(R"(^error: command=[a-z]+ stage=[a-z_:]+: .+\n$)");

}  // namespace

TEST(FlatConfig, ParsesKeyValueLines) {
    const auto dir = pipeline::scratch("cfg");
    write(dir / "a.cfg", "# comment\n\nseed = 5\n  out=/tmp/x  # trailing\nmodels = lr,svm\n");
    const auto kv = read_flat_config((dir / "a.cfg").string());
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"seed", "5"}));
    EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"out", "/tmp/x"}));
    EXPECT_EQ(kv[2].second, "lr,svm");
    write(dir / "b.cfg", "seed 5\n");
    try {
        read_flat_config((dir / "b.cfg").string());
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("b.cfg:1"), std::string::npos) << e.what();
    }
    fs::remove_all(dir);
}

TEST(Cli, HelpAndUnknownCommand) {
    EXPECT_EQ(pipeline::cli({"--help"}).status, 0);
    EXPECT_EQ(pipeline::cli({"evaluate", "--help"}).status, 0);
    EXPECT_NE(pipeline::cli({"frobnicate"}).status, 0);
    EXPECT_NE(pipeline::cli({}).status, 0);
}

TEST(Cli, FailuresPrintOneErrorLine) {
    const auto dir = pipeline::scratch("err");
    const auto r = pipeline::cli({"ingest", "--tweets", (dir / "missing.jsonl").string(), "--out", dir.string()});
    EXPECT_EQ(r.status, 1);
    EXPECT_TRUE(std::regex_match(r.err, kErrorLine)) << r.err;
    EXPECT_NE(r.err.find("command=ingest"), std::string::npos);
    EXPECT_NE(r.err.find("missing.jsonl"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "stock_tweets.jsonl"));
    EXPECT_FALSE(has_partial(dir));

    const auto bad = pipeline::cli({"train", "--model", "knn", "--ohlcv", "x", "--calendar", "y"});
    EXPECT_EQ(bad.status, 1);
    EXPECT_TRUE(std::regex_match(bad.err, kErrorLine)) << bad.err;
    fs::remove_all(dir);
}

TEST(Cli, SynthIsDeterministic) {
    const auto a = pipeline::scratch("synth_a");
    const auto b = pipeline::scratch("synth_b");
    for (const auto& d : {a, b}) {
        const auto r = pipeline::cli({"synth", "--out", d.string(), "--seed", "3", "--days", "40", "--tweets-per-day", "50"});
        ASSERT_EQ(r.status, 0) << r.err;
    }
    for (const auto* name : {"raw_tweets.jsonl", "nb_train.jsonl", "ohlcv.csv", "calendar.txt", "synth.json"}) {
        EXPECT_EQ(pipeline::slurp(a / name), pipeline::slurp(b / name)) << name;
    }
    EXPECT_FALSE(has_partial(a));
    const auto c = pipeline::scratch("synth_c");
    ASSERT_EQ(pipeline::cli({"synth", "--out", c.string(), "--seed", "4", "--days", "40", "--tweets-per-day", "50"}).status, 0);
    EXPECT_NE(pipeline::slurp(a / "ohlcv.csv"), pipeline::slurp(c / "ohlcv.csv"));
    EXPECT_NE(pipeline::cli({"synth", "--out", c.string(), "--plant", "joy:9:close"}).status, 0);
    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST(Cli, PipelineFlagsOverrideConfigAndPredict) {
    const auto dir = pipeline::scratch("pipe");
    pipeline::Options o;
    o.days = "120";
    o.tweets_per_day = "120";
    const auto ev = pipeline::run_all(dir, o);
    ASSERT_EQ(ev.status, 0) << ev.err;
    for (const auto* name : {"stock_tweets.jsonl", "labeled_tweets.jsonl", "nb_model.json", "emotion_series.csv",
                             "analysis.csv", "eval_report.csv", "eval_report.txt", "confusion.json"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    EXPECT_FALSE(has_partial(dir));

    // the config says seed 7; an explicit flag wins and changes the shuffled folds
    const std::string cfg = (dir / "run.cfg").string();
    const auto before = pipeline::slurp(dir / "eval_report.csv");
    ASSERT_EQ(pipeline::cli({"evaluate", "--config", cfg, "--out", dir.string(), "--models", "svm_es", "--methods",
                             "kmeans", "--seed", "7"})
                  .status,
              0);
    EXPECT_EQ(pipeline::slurp(dir / "eval_report.csv"), before);
    ASSERT_EQ(pipeline::cli({"evaluate", "--config", cfg, "--out", dir.string(), "--models", "svm_es", "--methods",
                             "kmeans", "--seed", "8"})
                  .status,
              0);
    EXPECT_NE(pipeline::slurp(dir / "eval_report.csv"), before);

    const auto tr = pipeline::cli({"train", "--config", cfg, "--out", dir.string(), "--targets", "volume", "--model",
                                   "svm_es"});
    ASSERT_EQ(tr.status, 0) << tr.err;
    const auto model = (dir / "model_volume_svm_es_kmeans.json").string();
    ASSERT_TRUE(fs::exists(model));
    const auto pr = pipeline::cli({"predict", "--config", cfg, "--out", dir.string(), "--model", model});
    ASSERT_EQ(pr.status, 0) << pr.err;
    EXPECT_TRUE(std::regex_search(pr.out, std::regex(R"(volume,svm_es,\d{4}-\d{2}-\d{2},-?[01])"))) << pr.out;

    // a lagged day missing from the series is reported with its date
    const auto series = pipeline::slurp(dir / "emotion_series.csv");
    std::istringstream lines(series);
    std::vector<std::string> rows;
    for (std::string l; std::getline(lines, l);) rows.push_back(l);
    ASSERT_GT(rows.size(), 20u);
    const std::string dropped = rows[rows.size() - 2].substr(0, 10);
    std::string edited;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i != rows.size() - 2) edited += rows[i] + "\n";
    }
    write(dir / "holey.csv", edited);
    const auto miss = pipeline::cli({"predict", "--config", cfg, "--out", dir.string(), "--model", model, "--series",
                                     (dir / "holey.csv").string()});
    EXPECT_EQ(miss.status, 1);
    EXPECT_TRUE(std::regex_match(miss.err, kErrorLine)) << miss.err;
    EXPECT_NE(miss.err.find(dropped), std::string::npos) << miss.err;
    fs::remove_all(dir);
}
