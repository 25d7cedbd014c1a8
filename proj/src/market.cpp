#include "emotrade/market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "text_io.hpp"

namespace emotrade {

namespace {
constexpr std::array<std::string_view, 5> kTargetNames = {"close", "open", "high", "low", "volume"};
}

std::string_view to_string(Target t) { return kTargetNames[static_cast<std::size_t>(t)]; }

Target parse_target(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < kTargetNames.size(); ++i) {
        if (kTargetNames[i] == lower) return kTargets[i];
    }
    throw std::invalid_argument(fmt::format("unknown target '{}'", name));
}

void OhlcvRecord::validate() const {
    if (!(open > 0 && high > 0 && low > 0 && close > 0)) {
        throw std::invalid_argument(fmt::format("non-positive index value on {}", date.str()));
    }
    if (!(volume >= 0)) throw std::invalid_argument(fmt::format("negative volume on {}", date.str()));
    if (low > std::min(open, close) || high < std::max(open, close)) {
        throw std::invalid_argument(fmt::format("inconsistent high/low on {}", date.str()));
    }
}

const std::vector<double>& MarketSeries::column(Target t) const {
    switch (t) {
        case Target::close: return close_rc;
        case Target::open: return open_rc;
        case Target::high: return high_rc;
        case Target::low: return low_rc;
        case Target::volume: return volume;
    }
    throw std::invalid_argument("unknown target");
}

MarketSeries MarketSeries::slice(std::size_t begin, std::size_t end) const {
    auto cut = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                   v.begin() + static_cast<std::ptrdiff_t>(end));
    };
    MarketSeries out;
    out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(begin),
                     dates.begin() + static_cast<std::ptrdiff_t>(end));
    out.close_rc = cut(close_rc);
    out.open_rc = cut(open_rc);
    out.high_rc = cut(high_rc);
    out.low_rc = cut(low_rc);
    out.volume = cut(volume);
    return out;
}

std::optional<std::size_t> MarketSeries::position(Date d) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
}

MarketSeries compute_returns(std::span<const OhlcvRecord> records, ReturnMode mode) {
    if (records.size() < 2) throw std::invalid_argument("at least two OHLCV records are required");
    MarketSeries out;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& prev = records[i - 1];
        const auto& cur = records[i];
        if (!(prev.date < cur.date)) {
            throw std::invalid_argument(fmt::format("OHLCV dates not increasing at {}", cur.date.str()));
        }
        const double base = prev.close;
        const double denom = mode == ReturnMode::standard ? prev.close : cur.close;
        if (!(denom > 0.0)) throw std::invalid_argument(fmt::format("non-positive denominator on {}", cur.date.str()));
        auto rc = [&](double attr) { return (attr - base) / denom * 100.0; };
        out.dates.push_back(cur.date);
        out.close_rc.push_back(rc(cur.close));
        out.open_rc.push_back(rc(cur.open));
        out.high_rc.push_back(rc(cur.high));
        out.low_rc.push_back(rc(cur.low));
        out.volume.push_back(cur.volume);
    }
    return out;
}

TrainTestSplit split_train_test(const EmotionSeries& x, const MarketSeries& y, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument(fmt::format("train fraction {} outside (0, 1)", train_fraction));
    }
    const std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (x.dates[i] != y.dates[i]) {
            throw std::invalid_argument(fmt::format("misaligned dates at row {}: emotion {} vs market {}", i,
                                                    x.dates[i].str(), y.dates[i].str()));
        }
    }
    if (x.size() != y.size()) {
        const auto& longer = x.size() > y.size() ? x.dates : y.dates;
        throw std::invalid_argument(fmt::format("misaligned dates at row {}: {} present in only one series", n,
                                                longer[n].str()));
    }
    const auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-12));
    TrainTestSplit split;
    auto slice_x = [&](std::size_t b, std::size_t e) {
        EmotionSeries s;
        s.dates.assign(x.dates.begin() + static_cast<std::ptrdiff_t>(b), x.dates.begin() + static_cast<std::ptrdiff_t>(e));
        s.values.assign(x.values.begin() + static_cast<std::ptrdiff_t>(b),
                        x.values.begin() + static_cast<std::ptrdiff_t>(e));
        return s;
    };
    split.train = {slice_x(0, n_train), y.slice(0, n_train)};
    split.test = {slice_x(n_train, n), y.slice(n_train, n)};
    return split;
}

PeriodData align(const EmotionSeries& x, const MarketSeries& y) {
    std::vector<std::size_t> xi, yi;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        if (x.dates[i] < y.dates[j]) {
            ++i;
        } else if (y.dates[j] < x.dates[i]) {
            ++j;
        } else {
            xi.push_back(i++);
            yi.push_back(j++);
        }
    }
    PeriodData out;
    for (auto k : xi) {
        out.x.dates.push_back(x.dates[k]);
        out.x.values.push_back(x.values[k]);
    }
    for (auto k : yi) {
        out.y.dates.push_back(y.dates[k]);
        out.y.close_rc.push_back(y.close_rc[k]);
        out.y.open_rc.push_back(y.open_rc[k]);
        out.y.high_rc.push_back(y.high_rc[k]);
        out.y.low_rc.push_back(y.low_rc[k]);
        out.y.volume.push_back(y.volume[k]);
    }
    return out;
}

std::vector<OhlcvRecord> read_ohlcv_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty() || detail::trim(lines[0]) != "date,open,high,low,close,volume") {
        throw std::runtime_error(fmt::format("{}: expected header date,open,high,low,close,volume", path.string()));
    }
    std::vector<OhlcvRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto f = detail::split(lines[i], ',');
        try {
            if (f.size() != 6) throw std::invalid_argument("expected 6 fields");
            OhlcvRecord r{Date::parse(detail::trim(f[0])), detail::parse_double(f[1]), detail::parse_double(f[2]),
                          detail::parse_double(f[3]), detail::parse_double(f[4]), detail::parse_double(f[5])};
            r.validate();
            if (!records.empty() && !(records.back().date < r.date)) {
                throw std::invalid_argument("dates not strictly increasing");
            }
            records.push_back(r);
        } catch (const std::exception& e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), i + 1, e.what()));
        }
    }
    return records;
}

void write_ohlcv_csv(const std::filesystem::path& path, std::span<const OhlcvRecord> records) {
    std::string out = "date,open,high,low,close,volume\n";
    for (const auto& r : records) {
        out += fmt::format("{},{:.4f},{:.4f},{:.4f},{:.4f},{:.0f}\n", r.date.str(), r.open, r.high, r.low, r.close,
                           r.volume);
    }
    detail::write_text(path, out);
}

}  // namespace emotrade
