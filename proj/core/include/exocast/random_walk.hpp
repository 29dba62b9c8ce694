#pragma once

#include "exocast/time_series.hpp"

#include <vector>

namespace exocast {

/// Gaussian random walk y_t = y_{t-1} + eps_t; the point forecast at every
/// horizon is the last observed value.
struct RandomWalkModel {
    double sigma2 = 0.0;
    double last_value = 0.0;
};

/// sigma2 is the biased sample variance of the first differences. Throws
/// std::invalid_argument when the series has fewer than two values.
RandomWalkModel fit_rw(const TimeSeries& y);

std::vector<double> forecast_rw(const RandomWalkModel& model, int h);

} // namespace exocast
