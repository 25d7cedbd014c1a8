#include "emotrade/date.hpp"

#include <cctype>
#include <stdexcept>

#include <fmt/format.h>

namespace emotrade {

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument(fmt::format("invalid date {}-{}-{}", year, month, day));
    }
    days_ = std::chrono::sys_days{ymd};
}

namespace {

int parse_digits(std::string_view s, std::string_view whole) {
    int v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw std::invalid_argument(fmt::format("invalid date '{}'", whole));
        }
        v = v * 10 + (c - '0');
    }
    return v;
}

}  // namespace

Date Date::parse(std::string_view text) {
    if (text.size() < 10 || text[4] != '-' || text[7] != '-' ||
        (text.size() > 10 && text[10] != 'T' && text[10] != ' ')) {
        throw std::invalid_argument(fmt::format("invalid date '{}'", text));
    }
    const int y = parse_digits(text.substr(0, 4), text);
    const int m = parse_digits(text.substr(5, 2), text);
    const int d = parse_digits(text.substr(8, 2), text);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw std::invalid_argument(fmt::format("invalid date '{}'", text));
    return Date{std::chrono::sys_days{ymd}};
}

std::string Date::str() const {
    const auto ymd = this->ymd();
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

int Date::weekday_index() const {
    const std::chrono::weekday wd{days_};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

}  // namespace emotrade
