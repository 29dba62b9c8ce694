#pragma once

#include <cstddef>
#include <vector>

namespace exocast {

double sample_mean(const std::vector<double>& v);

/// Biased (divide-by-n) sample variance.
double sample_variance(const std::vector<double>& v);

/// Sample autocorrelation with biased covariance normalization, so the
/// estimates stay in [-1, 1]. Element 0 is always 1. Throws
/// std::invalid_argument when max_lag >= length and ModelError-free
/// std::domain_error when the series is constant.
std::vector<double> acf(const std::vector<double>& v, int max_lag);

/// Symmetric mean absolute percentage error on the 0-200 scale:
/// (100/n) * sum 2|F_i - A_i| / (|F_i| + |A_i|), with the summand defined
/// as 0 whenever both entries are exactly zero.
double smape(const std::vector<double>& forecast, const std::vector<double>& actual);

} // namespace exocast
