#include "emotrade/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "emotrade/rng.hpp"
#include "text_io.hpp"

namespace emotrade {

namespace {

using WordList = std::vector<std::string_view>;

const std::array<WordList, kEmotionCount>& emotion_words() {
    static const std::array<WordList, kEmotionCount> words = {{
        {"愤怒", "气愤", "恼火", "可恶", "混蛋", "暴怒", "发火", "怒斥", "痛骂", "抗议"},
        {"恶心", "厌恶", "讨厌", "鄙视", "无耻", "垃圾", "反感", "唾弃", "嫌弃", "丑陋"},
        {"高兴", "开心", "喜悦", "大涨", "赚钱", "快乐", "兴奋", "满意", "幸福", "庆祝"},
        {"难过", "伤心", "悲伤", "亏损", "失望", "痛苦", "心碎", "哭泣", "沮丧", "遗憾"},
        {"害怕", "恐惧", "担心", "恐慌", "不安", "紧张", "崩盘", "焦虑", "惊慌", "忧虑"},
    }};
    return words;
}

const WordList& neutral_words() {
    static const WordList words = {"今天", "市场", "投资", "大家", "认为", "行情",
                                   "分析", "消息", "公司", "明天", "觉得", "已经"};
    return words;
}

const WordList& off_topic_words() {
    static const WordList words = {"天气", "电影", "晚饭", "周末", "旅游", "音乐", "朋友", "睡觉"};
    return words;
}

std::string_view pick(Rng& rng, const WordList& words) { return words[rng.below(words.size())]; }

std::string compose(Rng& rng, Emotion e, bool on_topic, const std::vector<std::string>& keywords) {
    std::string text;
    const int neutral = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < neutral; ++i) text += pick(rng, on_topic ? neutral_words() : off_topic_words());
    if (on_topic) text += keywords[rng.below(keywords.size())];
    const int emotional = 1 + static_cast<int>(rng.below(2));
    for (int i = 0; i < emotional; ++i) text += pick(rng, emotion_words()[index_of(e)]);
    text += "。";
    return text;
}

std::string timestamp(Date d, Rng& rng) {
    const auto secs = rng.below(24 * 3600);
    return fmt::format("{}T{:02}:{:02}:{:02}", d.str(), secs / 3600, secs / 60 % 60, secs % 60);
}

Emotion draw_emotion(Rng& rng, const EmotionVector& p) {
    double u = rng.uniform();
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        if (u < p[e]) return kEmotions[e];
        u -= p[e];
    }
    return kEmotions[kEmotionCount - 1];
}

// Planted emotion at 0.2 + 0.15 * level; the rest share the remainder unevenly.
EmotionVector day_mix(Rng& rng, Emotion planted, int level) {
    EmotionVector p{};
    const double share = 0.2 + 0.15 * level;
    double weight_sum = 0.0;
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        if (kEmotions[e] == planted) continue;
        p[e] = 1.0 + 0.3 * rng.uniform();
        weight_sum += p[e];
    }
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        p[e] = kEmotions[e] == planted ? share : (1.0 - share) * p[e] / weight_sum;
    }
    return p;
}

}  // namespace

SynthData generate_synthetic(const SynthOptions& opt) {
    if (opt.trading_days < 20) throw std::invalid_argument("synth: at least 20 trading days are required");
    if (opt.tweets_per_day < 1) throw std::invalid_argument("synth: tweets_per_day must be positive");
    if (!(opt.off_topic_fraction >= 0.0 && opt.off_topic_fraction < 1.0)) {
        throw std::invalid_argument("synth: off_topic_fraction outside [0, 1)");
    }
    if (opt.rule.lag < 1 || opt.rule.lag > 5) throw std::invalid_argument("synth: lag outside 1..5");

    Rng rng(derive_seed(opt.seed, "synth"));
    const int extra_sessions = 5;
    std::vector<Date> sessions;
    for (Date d = opt.start; static_cast<int>(sessions.size()) < opt.trading_days + extra_sessions; d = d.plus_days(1)) {
        if (d.weekday_index() >= 5) continue;
        if (rng.uniform() < 0.03) continue;  // occasional market holiday
        sessions.push_back(d);
    }
    SynthData data;
    data.calendar = TradingCalendar(sessions);
    const auto n = static_cast<std::size_t>(opt.trading_days);
    const Date last = sessions[n - 1];

    data.levels.resize(n);
    for (auto& l : data.levels) l = static_cast<int>(rng.below(3)) - 1;

    const auto keywords = default_stock_keywords();
    std::size_t next_id = 0;
    auto emit = [&](Date d, const EmotionVector& mix, int count) {
        for (int i = 0; i < count; ++i) {
            const bool on_topic = rng.uniform() >= opt.off_topic_fraction;
            const Emotion e = draw_emotion(rng, mix);
            Tweet t;
            t.id = fmt::format("w{:07}", next_id++);
            t.timestamp = timestamp(d, rng);
            t.text = compose(rng, e, on_topic, keywords);
            data.raw_tweets.push_back(std::move(t));
        }
    };
    std::size_t s = 0;
    for (Date d = sessions.front(); d <= last; d = d.plus_days(1)) {
        if (d == sessions[s]) {
            emit(d, day_mix(rng, opt.rule.emotion, data.levels[s]), opt.tweets_per_day);
            ++s;
        } else {
            emit(d, day_mix(rng, opt.rule.emotion, 0), std::max(1, opt.tweets_per_day / 3));
        }
    }

    for (Emotion e : kEmotions) {
        for (int i = 0; i < opt.training_tweets_per_class; ++i) {
            Tweet t;
            t.id = fmt::format("nb{:06}", next_id++);
            t.timestamp = timestamp(opt.start.plus_days(-1), rng);
            t.text = compose(rng, e, rng.uniform() >= 0.5, keywords);
            t.label = e;
            data.training_corpus.push_back(std::move(t));
        }
    }

    const Target target = opt.rule.target;
    const double base_volume = 2.0e8;
    double prev_close = 3000.0;
    for (std::size_t t = 0; t < n; ++t) {
        const bool planted = t >= static_cast<std::size_t>(opt.rule.lag);
        const int level = planted ? data.levels[t - static_cast<std::size_t>(opt.rule.lag)] : 0;
        const bool bounded = target == Target::high || target == Target::low;
        double rc_open = bounded ? rng.uniform(-0.8, 0.8) : rng.normal(0.0, 0.8);
        double rc_close = bounded ? rng.uniform(-0.8, 0.8) : rng.normal(0.0, 0.8);
        if (target == Target::open) rc_open = 1.5 * level + rng.normal(0.0, 0.1);
        if (target == Target::close) rc_close = 1.5 * level + rng.normal(0.0, 0.1);
        double rc_high = std::max(rc_open, rc_close) + std::abs(rng.normal(0.0, 0.3));
        double rc_low = std::min(rc_open, rc_close) - std::abs(rng.normal(0.0, 0.3));
        if (target == Target::high) rc_high = 2.5 + 1.5 * level + std::abs(rng.normal(0.0, 0.1));
        if (target == Target::low) rc_low = -2.5 + 1.5 * level - std::abs(rng.normal(0.0, 0.1));
        double volume = base_volume * std::max(0.3, 1.0 + rng.normal(0.0, 0.15));
        if (target == Target::volume) volume = base_volume * (1.0 + 0.4 * level) * (1.0 + rng.normal(0.0, 0.02));

        OhlcvRecord r;
        r.date = sessions[t];
        r.open = prev_close * (1.0 + rc_open / 100.0);
        r.close = prev_close * (1.0 + rc_close / 100.0);
        r.high = prev_close * (1.0 + rc_high / 100.0);
        r.low = prev_close * (1.0 + rc_low / 100.0);
        r.volume = std::round(volume);
        r.validate();
        data.ohlcv.push_back(r);
        prev_close = r.close;
    }
    return data;
}

void write_synthetic(const std::filesystem::path& dir, const SynthData& data, const SynthOptions& opt) {
    std::filesystem::create_directories(dir);
    write_tweets_jsonl(dir / "raw_tweets.jsonl", data.raw_tweets);
    write_tweets_jsonl(dir / "nb_train.jsonl", data.training_corpus);
    std::string keywords;
    for (const auto& k : default_stock_keywords()) keywords += k + "\n";
    detail::write_text(dir / "keywords.txt", keywords);
    write_calendar(dir / "calendar.txt", data.calendar);
    write_ohlcv_csv(dir / "ohlcv.csv", data.ohlcv);

    nlohmann::ordered_json j;
    j["seed"] = opt.seed;
    j["start"] = opt.start.str();
    j["trading_days"] = opt.trading_days;
    j["tweets_per_day"] = opt.tweets_per_day;
    j["off_topic_fraction"] = opt.off_topic_fraction;
    j["planted"] = {{"emotion", std::string(to_string(opt.rule.emotion))},
                    {"lag", opt.rule.lag},
                    {"target", std::string(to_string(opt.rule.target))}};
    j["raw_tweets"] = data.raw_tweets.size();
    j["training_tweets"] = data.training_corpus.size();
    detail::write_text(dir / "synth.json", j.dump(2) + "\n");
}

}  // namespace emotrade
