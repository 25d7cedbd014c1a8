#include "emotrade/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "text_io.hpp"

namespace emotrade {

TradingCalendar::TradingCalendar(std::vector<Date> trading_days) : days_(std::move(trading_days)) {
    for (std::size_t i = 1; i < days_.size(); ++i) {
        if (!(days_[i - 1] < days_[i])) {
            throw std::invalid_argument(
                fmt::format("calendar not strictly increasing at {}", days_[i].str()));
        }
    }
}

bool TradingCalendar::contains(Date d) const { return std::binary_search(days_.begin(), days_.end(), d); }

std::optional<std::size_t> TradingCalendar::position(Date d) const {
    const auto it = std::lower_bound(days_.begin(), days_.end(), d);
    if (it == days_.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - days_.begin());
}

Date TradingCalendar::sessions_before(Date d, int lag) const {
    const auto pos = position(d);
    if (!pos) throw std::invalid_argument(fmt::format("{} is not a trading day", d.str()));
    if (lag < 0 || static_cast<std::size_t>(lag) > *pos) {
        throw std::out_of_range(fmt::format("calendar has no trading day {} sessions before {}", lag, d.str()));
    }
    return days_[*pos - static_cast<std::size_t>(lag)];
}

std::optional<Date> TradingCalendar::next_after(Date d) const {
    const auto it = std::upper_bound(days_.begin(), days_.end(), d);
    if (it == days_.end()) return std::nullopt;
    return *it;
}

std::optional<std::size_t> EmotionSeries::position(Date d) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
}

std::vector<double> EmotionSeries::column(Emotion e) const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(v[index_of(e)]);
    return out;
}

void EmotionSeries::validate() const {
    if (dates.size() != values.size()) throw std::invalid_argument("emotion series dates/values length mismatch");
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (i > 0 && !(dates[i - 1] < dates[i])) {
            throw std::invalid_argument(fmt::format("emotion series dates not increasing at {}", dates[i].str()));
        }
        double total = 0.0;
        for (double p : values[i]) {
            if (!(p >= 0.0)) throw std::invalid_argument(fmt::format("negative proportion on {}", dates[i].str()));
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument(fmt::format("proportions on {} sum to {}", dates[i].str(), total));
        }
    }
}

std::map<Date, EmotionCounts> aggregate_daily(std::span<const Tweet> tweets) {
    std::map<Date, EmotionCounts> counts;
    for (const auto& t : tweets) {
        if (!t.label) throw std::invalid_argument(fmt::format("unlabeled tweet '{}'", t.id));
        ++counts[t.date()][index_of(*t.label)];
    }
    return counts;
}

EmotionVector to_proportions(const EmotionCounts& counts) {
    const auto total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total == 0) throw std::invalid_argument("no labeled tweets for day");
    EmotionVector p{};
    for (std::size_t e = 0; e < kEmotionCount; ++e) {
        p[e] = static_cast<double>(counts[e]) / static_cast<double>(total);
    }
    return p;
}

EmotionSeries proportions_series(const std::map<Date, EmotionCounts>& counts) {
    EmotionSeries s;
    for (const auto& [d, c] : counts) {
        s.dates.push_back(d);
        s.values.push_back(to_proportions(c));
    }
    return s;
}

EmotionSeries drop_non_trading(const EmotionSeries& series, const TradingCalendar& cal) {
    EmotionSeries out;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (cal.contains(series.dates[i])) {
            out.dates.push_back(series.dates[i]);
            out.values.push_back(series.values[i]);
        }
    }
    return out;
}

EmotionSeries trading_day_series(const std::map<Date, EmotionCounts>& counts, const TradingCalendar& cal,
                                 MissingDayPolicy policy) {
    EmotionSeries out;
    if (counts.empty()) return out;
    const Date first = counts.begin()->first;
    const Date last = counts.rbegin()->first;
    for (const Date d : cal.days()) {
        if (d < first || d > last) continue;
        const auto it = counts.find(d);
        const bool empty_day =
            it == counts.end() || std::all_of(it->second.begin(), it->second.end(), [](auto c) { return c == 0; });
        if (!empty_day) {
            out.dates.push_back(d);
            out.values.push_back(to_proportions(it->second));
        } else if (policy == MissingDayPolicy::forward_fill && !out.values.empty()) {
            out.dates.push_back(d);
            out.values.push_back(out.values.back());
        } else {
            throw std::invalid_argument(fmt::format("no labeled tweets for day {}", d.str()));
        }
    }
    return out;
}

LaggedSeries lag_shift(const EmotionSeries& series, Emotion emotion, int lag) {
    if (lag < 1 || lag > 5) throw std::invalid_argument(fmt::format("lag {} outside 1..5", lag));
    const auto n = series.size();
    if (n <= static_cast<std::size_t>(lag)) {
        throw std::invalid_argument(fmt::format("series of length {} too short for lag {}", n, lag));
    }
    LaggedSeries out;
    out.emotion = emotion;
    out.lag = lag;
    const auto l = static_cast<std::size_t>(lag);
    for (std::size_t i = l; i < n; ++i) {
        out.dates.push_back(series.dates[i]);
        out.values.push_back(series.values[i - l][index_of(emotion)]);
    }
    return out;
}

std::vector<double> minmax_normalize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("degenerate range");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo, max = *hi;
    if (!(max > min)) throw std::invalid_argument("degenerate range");
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(v == max ? 1.0 : (v - min) / (max - min));
    return out;
}

EmotionSeries read_emotion_series_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || detail::trim(lines[0]) != "date,anger,disgust,joy,sadness,fear") {
        throw std::runtime_error(fmt::format("{}: expected header date,anger,disgust,joy,sadness,fear", path.string()));
    }
    EmotionSeries s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto fields = detail::split(lines[i], ',');
        if (fields.size() != 1 + kEmotionCount) {
            throw std::runtime_error(fmt::format("{}:{}: expected 6 fields", path.string(), i + 1));
        }
        try {
            s.dates.push_back(Date::parse(detail::trim(fields[0])));
            EmotionVector v{};
            for (std::size_t e = 0; e < kEmotionCount; ++e) v[e] = detail::parse_double(fields[e + 1]);
            s.values.push_back(v);
        } catch (const std::exception& e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), i + 1, e.what()));
        }
    }
    s.validate();
    return s;
}

void write_emotion_series_csv(const std::filesystem::path& path, const EmotionSeries& series) {
    std::string out = "date,anger,disgust,joy,sadness,fear\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += series.dates[i].str();
        for (double p : series.values[i]) {
            out += ',';
            out += detail::format_real(p);
        }
        out += '\n';
    }
    detail::write_text(path, out);
}

TradingCalendar read_calendar(const std::filesystem::path& path) {
    std::vector<Date> days;
    for (const auto& line : detail::read_lines(path)) {
        const auto t = detail::trim(line);
        if (!t.empty()) days.push_back(Date::parse(t));
    }
    return TradingCalendar{std::move(days)};
}

void write_calendar(const std::filesystem::path& path, const TradingCalendar& cal) {
    std::string out;
    for (const auto d : cal.days()) out += d.str() + "\n";
    detail::write_text(path, out);
}

}  // namespace emotrade
