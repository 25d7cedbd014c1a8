#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "emotrade/corpus.hpp"
#include "emotrade/date.hpp"

namespace emotrade {

using EmotionCounts = std::array<std::size_t, kEmotionCount>;
using EmotionVector = std::array<double, kEmotionCount>;

class TradingCalendar {
public:
    TradingCalendar() = default;
    explicit TradingCalendar(std::vector<Date> trading_days);

    const std::vector<Date>& days() const { return days_; }
    std::size_t size() const { return days_.size(); }
    bool contains(Date d) const;
    std::optional<std::size_t> position(Date d) const;
    // The trading day `lag` sessions before `d`; `d` must be a trading day.
    Date sessions_before(Date d, int lag) const;
    // First trading day strictly after `d`.
    std::optional<Date> next_after(Date d) const;

private:
    std::vector<Date> days_;
};

struct EmotionSeries {
    std::vector<Date> dates;
    std::vector<EmotionVector> values;

    std::size_t size() const { return dates.size(); }
    std::optional<std::size_t> position(Date d) const;
    std::vector<double> column(Emotion e) const;
    // Dates strictly increasing, each row nonnegative and summing to 1.
    void validate() const;
};

struct LaggedSeries {
    Emotion emotion = Emotion::anger;
    int lag = 1;
    std::vector<Date> dates;     // target dates
    std::vector<double> values;  // proportion `lag` rows earlier
};

// counts[d][e] = number of tweets dated d labelled e
std::map<Date, EmotionCounts> aggregate_daily(std::span<const Tweet> tweets);

EmotionVector to_proportions(const EmotionCounts& counts);

// Proportions for every day that has tweets.
EmotionSeries proportions_series(const std::map<Date, EmotionCounts>& counts);

EmotionSeries drop_non_trading(const EmotionSeries& series, const TradingCalendar& cal);

enum class MissingDayPolicy { error, forward_fill };

// Proportions on every trading day between the first and last tweet dates.
// Non-trading days are dropped; trading days without tweets either raise or
// repeat the previous trading day's proportions.
EmotionSeries trading_day_series(const std::map<Date, EmotionCounts>& counts, const TradingCalendar& cal,
                                 MissingDayPolicy policy = MissingDayPolicy::error);

LaggedSeries lag_shift(const EmotionSeries& series, Emotion emotion, int lag);

std::vector<double> minmax_normalize(std::span<const double> values);

EmotionSeries read_emotion_series_csv(const std::filesystem::path& path);
void write_emotion_series_csv(const std::filesystem::path& path, const EmotionSeries& series);
TradingCalendar read_calendar(const std::filesystem::path& path);
void write_calendar(const std::filesystem::path& path, const TradingCalendar& cal);

}  // namespace emotrade
