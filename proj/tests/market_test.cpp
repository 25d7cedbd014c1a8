#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "emotrade/market.hpp"
#include "fixtures.hpp"

using namespace emotrade;

namespace {

OhlcvRecord rec(Date d, double open, double high, double low, double close, double volume = 1e6) {
    return OhlcvRecord{d, open, high, low, close, volume};
}

}  // namespace

TEST(Targets, NamesRoundTrip) {
    for (auto t : kTargets) EXPECT_EQ(parse_target(to_string(t)), t);
    EXPECT_EQ(parse_target("CLOSE"), Target::close);
    EXPECT_THROW(parse_target("adj_close"), std::invalid_argument);
}

TEST(Returns, StandardAndLiteralDenominators) {
    const std::vector<OhlcvRecord> r{rec(Date(2015, 9, 15), 99, 101, 98, 100),
                                     rec(Date(2015, 9, 16), 100, 103, 99, 102, 2e6)};
    const auto std_mode = compute_returns(r, ReturnMode::standard);
    ASSERT_EQ(std_mode.size(), 1u);
    EXPECT_DOUBLE_EQ(std_mode.close_rc[0], 2.0);
    EXPECT_DOUBLE_EQ(std_mode.open_rc[0], 0.0);
    EXPECT_DOUBLE_EQ(std_mode.high_rc[0], 3.0);
    EXPECT_DOUBLE_EQ(std_mode.low_rc[0], -1.0);
    EXPECT_DOUBLE_EQ(std_mode.volume[0], 2e6);
    const auto literal = compute_returns(r, ReturnMode::paper_literal);
    EXPECT_NEAR(literal.close_rc[0], 1.9607843137254901, 1e-12);
    EXPECT_DOUBLE_EQ(literal.open_rc[0], 0.0);
}

TEST(Returns, LengthAndOrderInvariants) {
    Rng rng(4);
    std::vector<OhlcvRecord> r;
    double close = 3000;
    for (Date d(2015, 1, 5); r.size() < 60; d = d.plus_days(1)) {
        const double open = close * (1 + rng.normal(0, 0.01));
        const double next = close * (1 + rng.normal(0, 0.01));
        r.push_back(rec(d, open, std::max(open, next) * 1.01, std::min(open, next) * 0.99, next));
        close = next;
    }
    const auto m = compute_returns(r);
    ASSERT_EQ(m.size(), r.size() - 1);
    for (std::size_t i = 1; i < m.size(); ++i) EXPECT_LT(m.dates[i - 1], m.dates[i]);
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_GE(m.high_rc[i], m.close_rc[i]);
        EXPECT_LE(m.low_rc[i], m.open_rc[i]);
    }
}

TEST(Returns, RejectsBadInput) {
    EXPECT_THROW(compute_returns(std::vector<OhlcvRecord>{rec(Date(2015, 9, 16), 1, 1, 1, 1)}), std::invalid_argument);
    const std::vector<OhlcvRecord> backwards{rec(Date(2015, 9, 16), 1, 1, 1, 1), rec(Date(2015, 9, 15), 1, 1, 1, 1)};
    EXPECT_THROW(compute_returns(backwards), std::invalid_argument);
    EXPECT_THROW(rec(Date(2015, 9, 16), 10, 9, 8, 10).validate(), std::invalid_argument);
    EXPECT_THROW(rec(Date(2015, 9, 16), 10, 11, 8, -1).validate(), std::invalid_argument);
}

TEST(Split, TwoHundredFortyNineSessions) {
    const auto sessions = fixture::sse_sessions_2015();
    ASSERT_EQ(sessions.size(), 249u);
    const auto x = fixture::random_series(sessions, 1);
    const auto y = fixture::random_market(sessions, 2);
    const auto split = split_train_test(x, y, 0.8);
    EXPECT_EQ(split.train.x.size(), 200u);
    EXPECT_EQ(split.test.x.size(), 49u);
    // boundary falls in the second half of September; the test period runs through December 7
    EXPECT_EQ(split.train.y.dates.back(), Date(2015, 9, 22));
    EXPECT_EQ(split.test.y.dates.front(), Date(2015, 9, 23));
    EXPECT_EQ(split.test.y.dates.back(), Date(2015, 12, 7));
    EXPECT_EQ(split.train.x.dates, split.train.y.dates);
}

TEST(Split, SeptemberSixteenthBoundaryLeaves191LaggedRows) {
    // Training through 2015-09-16 is 196 sessions; five lags leave 191 rows.
    const auto sessions = fixture::sse_sessions_2015();
    const auto it = std::find(sessions.begin(), sessions.end(), Date(2015, 9, 16));
    ASSERT_NE(it, sessions.end());
    const auto n_train = static_cast<std::size_t>(it - sessions.begin()) + 1;
    EXPECT_EQ(n_train, 196u);
    EXPECT_EQ(n_train - 5, 191u);
}

TEST(Split, SmallAndInvalid) {
    std::vector<Date> dates;
    for (Date d(2015, 9, 1); dates.size() < 10; d = d.plus_days(1)) dates.push_back(d);
    const auto x = fixture::random_series(dates, 1);
    const auto y = fixture::random_market(dates, 2);
    const auto split = split_train_test(x, y, 0.8);
    EXPECT_EQ(split.train.x.size(), 8u);
    EXPECT_EQ(split.test.y.size(), 2u);
    EXPECT_LT(split.train.y.dates.back(), split.test.y.dates.front());
    EXPECT_THROW(split_train_test(x, y, 1.0), std::invalid_argument);
    EXPECT_THROW(split_train_test(x, y, 0.0), std::invalid_argument);
}

TEST(Split, MisalignmentNamesFirstMismatch) {
    std::vector<Date> dates{Date(2015, 9, 14), Date(2015, 9, 15), Date(2015, 9, 16)};
    auto x = fixture::random_series(dates, 1);
    auto y = fixture::random_market(dates, 2);
    y.dates[1] = Date(2015, 9, 12);
    try {
        split_train_test(x, y, 0.5);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("2015-09-15"), std::string::npos) << e.what();
    }
}

TEST(Split, PartitionProperty) {
    const auto sessions = fixture::sse_sessions_2015();
    const auto x = fixture::random_series(sessions, 1);
    const auto y = fixture::random_market(sessions, 2);
    for (double f : {0.1, 0.33, 0.5, 0.8, 0.95}) {
        const auto s = split_train_test(x, y, f);
        EXPECT_EQ(s.train.y.size() + s.test.y.size(), sessions.size());
        EXPECT_LT(s.train.y.dates.back(), s.test.y.dates.front());
    }
}

TEST(Align, KeepsSharedDates) {
    const auto x = fixture::random_series({Date(2015, 9, 14), Date(2015, 9, 15), Date(2015, 9, 16)}, 1);
    const auto y = fixture::random_market({Date(2015, 9, 15), Date(2015, 9, 16), Date(2015, 9, 17)}, 2);
    const auto a = align(x, y);
    EXPECT_EQ(a.x.dates, (std::vector<Date>{Date(2015, 9, 15), Date(2015, 9, 16)}));
    EXPECT_EQ(a.y.dates, a.x.dates);
    EXPECT_EQ(a.y.close_rc[0], y.close_rc[0]);
    EXPECT_EQ(a.x.values[0], x.values[1]);
}

TEST(OhlcvIo, RoundTripAndErrors) {
    const auto dir = std::filesystem::temp_directory_path() / "emotrade_ohlcv";
    std::filesystem::create_directories(dir);
    const std::vector<OhlcvRecord> r{rec(Date(2015, 9, 15), 3001.25, 3010.5, 2990.125, 3005.0625, 123456789),
                                     rec(Date(2015, 9, 16), 3005, 3020, 3000, 3018, 987654321)};
    write_ohlcv_csv(dir / "o.csv", r);
    const auto back = read_ohlcv_csv(dir / "o.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].date, r[0].date);
    EXPECT_NEAR(back[0].low, r[0].low, 1e-4);
    EXPECT_EQ(back[1].volume, r[1].volume);
    {
        std::ofstream f(dir / "bad.csv");
        f << "date,open,high,low,close,volume\n2015-09-16,1,2,0.5,1.5,10\n2015-09-16,1,2,0.5,1.5,10\n";
    }
    EXPECT_THROW(read_ohlcv_csv(dir / "bad.csv"), std::runtime_error);
    std::filesystem::remove_all(dir);
}
