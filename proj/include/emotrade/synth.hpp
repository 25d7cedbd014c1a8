#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "emotrade/corpus.hpp"
#include "emotrade/date.hpp"
#include "emotrade/market.hpp"
#include "emotrade/timeseries.hpp"

namespace emotrade {

// A dependency to plant: the target's category on day t follows the level of
// `emotion` on trading day t - lag.
struct PlantedRule {
    Emotion emotion = Emotion::sadness;
    int lag = 2;
    Target target = Target::volume;
};

struct SynthOptions {
    std::uint64_t seed = 0;
    Date start{2015, 1, 5};
    int trading_days = 260;
    int tweets_per_day = 300;
    double off_topic_fraction = 0.15;
    int training_tweets_per_class = 200;
    PlantedRule rule;
};

struct SynthData {
    TradingCalendar calendar;               // extends a few sessions past the last OHLCV row
    std::vector<Tweet> raw_tweets;          // unlabelled, includes off-topic posts
    std::vector<Tweet> training_corpus;     // labelled, for the Naive Bayes model
    std::vector<OhlcvRecord> ohlcv;
    std::vector<int> levels;                // planted level per trading day, -1/0/1
};

SynthData generate_synthetic(const SynthOptions& options);

// Writes raw_tweets.jsonl, nb_train.jsonl, keywords.txt, calendar.txt,
// ohlcv.csv and synth.json into `dir`.
void write_synthetic(const std::filesystem::path& dir, const SynthData& data, const SynthOptions& options);

}  // namespace emotrade
