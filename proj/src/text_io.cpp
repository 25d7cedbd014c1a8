#include "text_io.hpp"

#include <charconv>

namespace emotrade::detail {

double parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw std::invalid_argument(fmt::format("invalid number '{}'", s));
    }
    return v;
}

}  // namespace emotrade::detail
