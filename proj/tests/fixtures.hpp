#pragma once

#include <set>
#include <vector>

#include "emotrade/date.hpp"
#include "emotrade/market.hpp"
#include "emotrade/rng.hpp"
#include "emotrade/timeseries.hpp"

namespace fixture {

// Shanghai exchange sessions from 2014-12-01 to 2015-12-07: weekdays minus
// the 2015 public holidays.
inline std::vector<emotrade::Date> sse_sessions_2015() {
    using emotrade::Date;
    const std::set<Date> holidays{
        Date(2015, 1, 1),  Date(2015, 1, 2),  Date(2015, 2, 18), Date(2015, 2, 19), Date(2015, 2, 20),
        Date(2015, 2, 23), Date(2015, 2, 24), Date(2015, 4, 6),  Date(2015, 5, 1),  Date(2015, 6, 22),
        Date(2015, 9, 3),  Date(2015, 9, 4),  Date(2015, 10, 1), Date(2015, 10, 2), Date(2015, 10, 5),
        Date(2015, 10, 6), Date(2015, 10, 7)};
    std::vector<Date> out;
    for (Date d(2014, 12, 1); d <= Date(2015, 12, 7); d = d.plus_days(1)) {
        if (d.weekday_index() < 5 && !holidays.count(d)) out.push_back(d);
    }
    return out;
}

// Random proportions on `dates`.
inline emotrade::EmotionSeries random_series(const std::vector<emotrade::Date>& dates, std::uint64_t seed) {
    emotrade::Rng rng(seed);
    emotrade::EmotionSeries s;
    for (const auto d : dates) {
        emotrade::EmotionVector v{};
        double total = 0;
        for (auto& p : v) total += (p = 0.05 + rng.uniform());
        for (auto& p : v) p /= total;
        s.dates.push_back(d);
        s.values.push_back(v);
    }
    return s;
}

inline emotrade::MarketSeries random_market(const std::vector<emotrade::Date>& dates, std::uint64_t seed) {
    emotrade::Rng rng(seed);
    emotrade::MarketSeries m;
    for (const auto d : dates) {
        m.dates.push_back(d);
        m.close_rc.push_back(rng.normal());
        m.open_rc.push_back(rng.normal());
        m.high_rc.push_back(std::abs(rng.normal()));
        m.low_rc.push_back(-std::abs(rng.normal()));
        m.volume.push_back(1e8 * (1.0 + 0.2 * rng.uniform()));
    }
    return m;
}

}  // namespace fixture
