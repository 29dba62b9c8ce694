#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace exocast {

/// Calendar date with day resolution. Parses the two formats found in the
/// COVID tracking exports: ISO-8601 ("2020-02-26") and compact ("20200226").
class Date {
public:
    Date() = default;
    Date(int year, unsigned month, unsigned day);

    static Date parse(std::string_view text);
    static std::optional<Date> try_parse(std::string_view text);

    std::string iso() const;

    Date& operator+=(int days);
    friend Date operator+(Date d, int days) { return d += days; }
    /// Difference in days.
    friend int operator-(Date a, Date b) {
        return static_cast<int>((a.day_ - b.day_).count());
    }

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(std::chrono::sys_days d) : day_(d) {}
    std::chrono::sys_days day_{};
};

} // namespace exocast
