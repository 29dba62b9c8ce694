#include "exocast/time_series.hpp"

#include <cmath>
#include <stdexcept>

namespace exocast {

void TimeSeries::validate() const {
    if (values.empty()) {
        throw std::invalid_argument("time series must contain at least one value");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("time series contains a non-finite value");
        }
    }
}

} // namespace exocast
