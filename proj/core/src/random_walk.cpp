#include "exocast/random_walk.hpp"

#include "exocast/stats.hpp"

#include <stdexcept>

namespace exocast {

RandomWalkModel fit_rw(const TimeSeries& y) {
    y.validate();
    if (y.size() < 2) {
        throw std::invalid_argument("random walk needs at least two observations");
    }
    std::vector<double> diffs(y.size() - 1);
    for (std::size_t i = 1; i < y.size(); ++i) diffs[i - 1] = y[i] - y[i - 1];
    return RandomWalkModel{sample_variance(diffs), y.back()};
}

std::vector<double> forecast_rw(const RandomWalkModel& model, int h) {
    if (h < 1) throw std::invalid_argument("forecast horizon must be at least 1");
    return std::vector<double>(static_cast<std::size_t>(h), model.last_value);
}

} // namespace exocast
