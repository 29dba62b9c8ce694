#include "exocast/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace exocast {

double log_transform(double y, LogOffset offset) {
    const double shifted = offset == LogOffset::plus_one ? y + 1.0 : y;
    if (!(shifted > 0.0)) {
        throw std::domain_error("log transform requires positive values after offset");
    }
    return std::log(shifted);
}

double exp_transform(double w, LogOffset offset) {
    const double y = std::exp(w);
    return offset == LogOffset::plus_one ? y - 1.0 : y;
}

std::vector<double> log_transform(const std::vector<double>& y, LogOffset offset) {
    std::vector<double> out;
    out.reserve(y.size());
    for (double v : y) out.push_back(log_transform(v, offset));
    return out;
}

std::vector<double> differencing_coefficients(int d, int D, int season) {
    if (d < 0 || D < 0 || season < 1) {
        throw std::invalid_argument("differencing orders must be non-negative, season >= 1");
    }
    std::vector<double> coeff{1.0};
    auto convolve_lag = [&coeff](int lag) {
        // Multiply the polynomial by (1 - B^lag).
        std::vector<double> next(coeff.size() + lag, 0.0);
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            next[i] += coeff[i];
            next[i + lag] -= coeff[i];
        }
        coeff = std::move(next);
    };
    for (int i = 0; i < d; ++i) convolve_lag(1);
    for (int i = 0; i < D; ++i) convolve_lag(season);
    return coeff;
}

namespace {

std::vector<double> diff_once(const std::vector<double>& v, int lag,
                              std::vector<double>& head) {
    head.assign(v.begin(), v.begin() + lag);
    std::vector<double> out(v.size() - lag);
    for (std::size_t i = lag; i < v.size(); ++i) {
        out[i - lag] = v[i] - v[i - lag];
    }
    return out;
}

std::vector<double> integrate_once(const std::vector<double>& w, int lag,
                                   const std::vector<double>& head) {
    std::vector<double> out(w.size() + lag);
    for (int i = 0; i < lag; ++i) out[i] = head[i];
    for (std::size_t i = 0; i < w.size(); ++i) {
        out[i + lag] = w[i] + out[i];
    }
    return out;
}

} // namespace

DifferenceResult difference(const TimeSeries& s, int d, int D, int season) {
    if (d < 0 || D < 0 || season < 1) {
        throw std::invalid_argument("differencing orders must be non-negative, season >= 1");
    }
    const int consumed = d + D * season;
    if (static_cast<int>(s.size()) <= consumed) {
        throw std::invalid_argument("series too short for requested differencing");
    }
    DifferenceResult result;
    result.transform.d = d;
    result.transform.D = D;
    result.transform.season = season;

    std::vector<double> work = s.values;
    for (int i = 0; i < d; ++i) {
        std::vector<double> head;
        work = diff_once(work, 1, head);
        result.transform.heads.push_back(std::move(head));
    }
    for (int i = 0; i < D; ++i) {
        std::vector<double> head;
        work = diff_once(work, season, head);
        result.transform.heads.push_back(std::move(head));
    }
    result.series = TimeSeries{s.start_date + consumed, std::move(work)};
    return result;
}

TimeSeries integrate(const DifferenceResult& diff) {
    const auto& t = diff.transform;
    std::vector<double> work = diff.series.values;
    // Undo stages in reverse application order.
    for (int i = static_cast<int>(t.heads.size()) - 1; i >= 0; --i) {
        const int lag = i >= t.d ? t.season : 1;
        work = integrate_once(work, lag, t.heads[i]);
    }
    const int consumed = t.d + t.D * t.season;
    return TimeSeries{diff.series.start_date + (-consumed), std::move(work)};
}

WeeklyLogReturnResult weekly_log_return(const TimeSeries& s, LogOffset offset) {
    if (s.size() < 8) {
        throw std::invalid_argument("weekly log-return needs at least 8 observations");
    }
    WeeklyLogReturnResult result;
    result.offset = offset;
    for (int i = 0; i < 7; ++i) result.anchor[i] = s.values[i];

    std::vector<double> z(s.size() - 7);
    for (std::size_t t = 7; t < s.size(); ++t) {
        z[t - 7] = log_transform(s.values[t], offset) - log_transform(s.values[t - 7], offset);
    }
    result.series = TimeSeries{s.start_date + 7, std::move(z)};
    return result;
}

TimeSeries invert_weekly_log_return(const WeeklyLogReturnResult& z) {
    std::vector<double> y(z.series.size() + 7);
    for (int i = 0; i < 7; ++i) y[i] = z.anchor[i];
    for (std::size_t i = 0; i < z.series.size(); ++i) {
        y[i + 7] = invert_weekly_log_return_value(z.series.values[i], y[i], z.offset);
    }
    return TimeSeries{z.series.start_date + (-7), std::move(y)};
}

double invert_weekly_log_return_value(double z, double base, LogOffset offset) {
    const double shifted = offset == LogOffset::plus_one ? base + 1.0 : base;
    const double y = shifted * std::exp(z);
    return offset == LogOffset::plus_one ? y - 1.0 : y;
}

} // namespace exocast
