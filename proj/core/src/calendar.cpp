#include "exocast/calendar.hpp"

#include "exocast/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace exocast {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

int to_int(std::string_view s) {
    int value = 0;
    std::from_chars(s.data(), s.data() + s.size(), value);
    return value;
}

} // namespace

Date::Date(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                       std::chrono::day{day}};
    if (!ymd.ok()) {
        throw DataError("invalid calendar date components");
    }
    day_ = sys_days{ymd};
}

std::optional<Date> Date::try_parse(std::string_view text) {
    // Trim surrounding whitespace.
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
        text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.remove_suffix(1);

    std::string_view y, m, d;
    if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        y = text.substr(0, 4);
        m = text.substr(5, 2);
        d = text.substr(8, 2);
    } else if (text.size() == 8 && all_digits(text)) {
        y = text.substr(0, 4);
        m = text.substr(4, 2);
        d = text.substr(6, 2);
    } else {
        return std::nullopt;
    }
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;

    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{to_int(y)},
                       std::chrono::month{static_cast<unsigned>(to_int(m))},
                       std::chrono::day{static_cast<unsigned>(to_int(d))}};
    if (!ymd.ok()) return std::nullopt;
    return Date{sys_days{ymd}};
}

Date Date::parse(std::string_view text) {
    auto parsed = try_parse(text);
    if (!parsed) {
        throw DataError("unparseable date: '" + std::string(text) + "'");
    }
    return *parsed;
}

std::string Date::iso() const {
    std::chrono::year_month_day ymd{day_};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date& Date::operator+=(int days) {
    day_ += std::chrono::days{days};
    return *this;
}

} // namespace exocast
