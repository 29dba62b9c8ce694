#pragma once

#include "exocast/calendar.hpp"

#include <cstddef>
#include <vector>

namespace exocast {

/// Dated univariate series of daily observations.
struct TimeSeries {
    Date start_date;
    std::vector<double> values;

    TimeSeries() = default;
    TimeSeries(Date start, std::vector<double> v)
        : start_date(start), values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double operator[](std::size_t i) const { return values[i]; }
    double back() const { return values.back(); }
    Date date_at(std::size_t i) const { return start_date + static_cast<int>(i); }
    Date end_date() const { return start_date + (static_cast<int>(values.size()) - 1); }

    /// Copy of the first `n` observations.
    TimeSeries head(std::size_t n) const {
        return {start_date, std::vector<double>(values.begin(), values.begin() + n)};
    }

    /// Throws std::invalid_argument if empty or any value is non-finite.
    void validate() const;
};

} // namespace exocast
