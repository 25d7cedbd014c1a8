#pragma once

#include <chrono>
#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace emotrade {

// Calendar date without time zone. Ordered, hashable, printable as YYYY-MM-DD.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    Date(int year, unsigned month, unsigned day);

    // Accepts `YYYY-MM-DD`, optionally followed by `T...` (time part ignored).
    static Date parse(std::string_view text);

    std::string str() const;
    std::chrono::sys_days days() const { return days_; }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    // 0 = Monday ... 6 = Sunday
    int weekday_index() const;

    Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;
    friend constexpr bool operator==(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

struct DateHash {
    std::size_t operator()(const Date& d) const noexcept {
        return std::hash<long long>{}(d.days().time_since_epoch().count());
    }
};

}  // namespace emotrade
