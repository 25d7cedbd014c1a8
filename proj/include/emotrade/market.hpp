#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "emotrade/date.hpp"
#include "emotrade/timeseries.hpp"

namespace emotrade {

enum class Target { close = 0, open = 1, high = 2, low = 3, volume = 4 };

inline constexpr std::array<Target, 5> kTargets = {Target::close, Target::open, Target::high, Target::low,
                                                   Target::volume};

std::string_view to_string(Target t);
Target parse_target(std::string_view name);

struct OhlcvRecord {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    void validate() const;
};

// Percent rate of change for the four price attributes, raw volume.
struct MarketSeries {
    std::vector<Date> dates;
    std::vector<double> close_rc;
    std::vector<double> open_rc;
    std::vector<double> high_rc;
    std::vector<double> low_rc;
    std::vector<double> volume;

    std::size_t size() const { return dates.size(); }
    const std::vector<double>& column(Target t) const;
    MarketSeries slice(std::size_t begin, std::size_t end) const;
    std::optional<std::size_t> position(Date d) const;
};

// standard: (attr_i - close_{i-1}) / close_{i-1} * 100
// paper_literal: (attr_i - close_{i-1}) / close_i * 100
enum class ReturnMode { standard, paper_literal };

MarketSeries compute_returns(std::span<const OhlcvRecord> records, ReturnMode mode = ReturnMode::standard);

struct PeriodData {
    EmotionSeries x;
    MarketSeries y;
};

struct TrainTestSplit {
    PeriodData train;
    PeriodData test;
};

// Chronological: the first ceil(fraction * n) dates train, the rest test.
TrainTestSplit split_train_test(const EmotionSeries& x, const MarketSeries& y, double train_fraction = 0.8);

// Both series restricted to the dates they share.
PeriodData align(const EmotionSeries& x, const MarketSeries& y);

std::vector<OhlcvRecord> read_ohlcv_csv(const std::filesystem::path& path);
void write_ohlcv_csv(const std::filesystem::path& path, std::span<const OhlcvRecord> records);

}  // namespace emotrade
