#include "exocast/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace exocast {

double sample_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty vector");
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    const double mean = sample_mean(v);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(v.size());
}

std::vector<double> acf(const std::vector<double>& v, int max_lag) {
    const int n = static_cast<int>(v.size());
    if (max_lag < 0) throw std::invalid_argument("max_lag must be non-negative");
    if (n <= max_lag) throw std::invalid_argument("series shorter than max_lag + 1");

    const double mean = sample_mean(v);
    double c0 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        c0 += d * d;
    }
    c0 /= static_cast<double>(n);
    if (c0 == 0.0) {
        throw std::domain_error("autocorrelation of a constant series is undefined");
    }

    std::vector<double> rho(max_lag + 1);
    rho[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        double ck = 0.0;
        for (int t = lag; t < n; ++t) {
            ck += (v[t] - mean) * (v[t - lag] - mean);
        }
        ck /= static_cast<double>(n);
        rho[lag] = ck / c0;
    }
    return rho;
}

double smape(const std::vector<double>& forecast, const std::vector<double>& actual) {
    if (forecast.size() != actual.size()) {
        throw std::invalid_argument("smape: forecast and actual lengths differ");
    }
    if (forecast.empty()) {
        throw std::invalid_argument("smape: empty input");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        const double denom = std::abs(forecast[i]) + std::abs(actual[i]);
        if (denom == 0.0) continue; // exact zero forecast of a zero actual
        sum += 2.0 * std::abs(forecast[i] - actual[i]) / denom;
    }
    return 100.0 * sum / static_cast<double>(forecast.size());
}

} // namespace exocast
