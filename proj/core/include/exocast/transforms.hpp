#pragma once

#include "exocast/time_series.hpp"

#include <array>
#include <vector>

namespace exocast {

/// Offset applied before taking logarithms. `plus_one` maps y to log(y + 1)
/// so zero counts stay in the domain; inversion subtracts the one back.
enum class LogOffset { none, plus_one };

/// log(y) or log(y + 1). Throws std::domain_error when the offset value is
/// not strictly positive.
double log_transform(double y, LogOffset offset);

/// Inverse of log_transform.
double exp_transform(double w, LogOffset offset);

std::vector<double> log_transform(const std::vector<double>& y, LogOffset offset);

/// Coefficients c_0..c_{d+D*season} of (1-B)^d (1-B^season)^D, c_0 = 1.
/// The differenced value is w_t = sum_i c_i * y_{t-i}.
std::vector<double> differencing_coefficients(int d, int D, int season);

/// State needed to invert a difference transform: the leading values
/// retained at each stage, in application order (d regular stages first,
/// then D seasonal stages).
struct DifferenceTransform {
    int d = 0;
    int D = 0;
    int season = 1;
    std::vector<std::vector<double>> heads;
};

struct DifferenceResult {
    TimeSeries series;
    DifferenceTransform transform;
};

/// Applies regular differencing d times, then seasonal differencing D times.
/// Output length is input length - d - D*season. Throws
/// std::invalid_argument when the series is too short.
DifferenceResult difference(const TimeSeries& s, int d, int D, int season = 1);

/// Reconstructs the original series from a DifferenceResult.
TimeSeries integrate(const DifferenceResult& diff);

/// Weekly log-return z_t = log y_t - log y_{t-7} (with optional +1 offset).
/// The first seven observations are retained as inversion anchors.
struct WeeklyLogReturnResult {
    TimeSeries series;
    std::array<double, 7> anchor{};
    LogOffset offset = LogOffset::none;
};

/// Throws std::invalid_argument when the series has fewer than 8 values and
/// std::domain_error when a value is non-positive after the offset.
WeeklyLogReturnResult weekly_log_return(const TimeSeries& s,
                                        LogOffset offset = LogOffset::none);

/// Round-trip inverse of weekly_log_return.
TimeSeries invert_weekly_log_return(const WeeklyLogReturnResult& z);

/// Single-value inversion: recovers y_t from z_t and the base value y_{t-7}.
double invert_weekly_log_return_value(double z, double base, LogOffset offset);

} // namespace exocast
