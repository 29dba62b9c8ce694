#include "exocast/evaluation.hpp"

#include "exocast/errors.hpp"
#include "exocast/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace exocast {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string format_cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

RollingSchedule build_schedule(int series_length, int initial_train, int step, int h_max) {
    if (series_length < 1 || initial_train < 1) {
        throw ConfigError("series length and initial training length must be positive");
    }
    if (step < 1 || h_max < 1) throw ConfigError("step and h_max must be positive");
    RollingSchedule schedule;
    schedule.series_length = series_length;
    schedule.initial_train = initial_train;
    schedule.step = step;
    schedule.h_max = h_max;
    for (int e = initial_train; e + h_max < series_length; e += step) {
        schedule.train_ends.push_back(e);
    }
    // The boundary case e + h_max == series_length would leave no room to
    // advance; matching the documented window counts it is excluded too.
    if (schedule.train_ends.empty()) {
        throw ConfigError("no rolling window fits: " + std::to_string(initial_train) + " + " +
                          std::to_string(h_max) + " leaves no forecastable span in " +
                          std::to_string(series_length) + " observations");
    }
    return schedule;
}

WindowView::WindowView(const TimeSeries& target, const Eigen::MatrixXd& exog, int train_end,
                       int h_max)
    : target_(target), exog_(exog), train_end_(train_end), h_max_(h_max) {
    if (train_end < 1 || train_end + h_max > static_cast<int>(target.size())) {
        throw std::invalid_argument("window does not fit the series");
    }
    if (exog.size() > 0 && exog.rows() != static_cast<int>(target.size())) {
        throw std::invalid_argument("exogenous matrix must align with the target");
    }
}

TimeSeries WindowView::train_target() const {
    max_target_ = std::max(max_target_, train_end_ - 1);
    return target_.head(static_cast<std::size_t>(train_end_));
}

Eigen::MatrixXd WindowView::train_exog() const {
    if (exog_.size() == 0) return Eigen::MatrixXd();
    max_exog_ = std::max(max_exog_, train_end_ - 1);
    return exog_.topRows(train_end_);
}

Eigen::MatrixXd WindowView::future_exog(int h) const {
    if (h < 1 || h > h_max_) throw std::invalid_argument("horizon outside the window");
    if (exog_.size() == 0) return Eigen::MatrixXd();
    max_exog_ = std::max(max_exog_, train_end_ + h - 1);
    return exog_.middleRows(train_end_, h);
}

double WindowView::actual(int h) const {
    if (h < 1 || h > h_max_) throw std::invalid_argument("horizon outside the window");
    return target_[static_cast<std::size_t>(train_end_ + h - 1)];
}

ModelEvaluation evaluate_model(const Forecaster& model, const TimeSeries& target,
                               const Eigen::MatrixXd& exog, const RollingSchedule& schedule,
                               int workers) {
    if (static_cast<int>(target.size()) != schedule.series_length) {
        throw std::invalid_argument("schedule was built for a different series length");
    }
    const int n_windows = schedule.windows();
    const int h_max = schedule.h_max;

    ModelEvaluation eval;
    eval.model = model.name();
    eval.windows_total = n_windows;
    eval.table.cells.assign(n_windows, std::vector<double>(h_max, kNan));
    std::vector<std::string> errors(n_windows);

    auto run_window = [&](int w) {
        const WindowView view(target, exog, schedule.train_ends[w], h_max);
        try {
            std::vector<double> fc = model.forecast_window(view);
            if (static_cast<int>(fc.size()) != h_max) {
                throw std::logic_error("forecaster returned " + std::to_string(fc.size()) +
                                       " values for h_max " + std::to_string(h_max));
            }
            eval.table.cells[w] = std::move(fc);
        } catch (const ModelError& err) {
            errors[w] = err.what();
        }
        if (view.max_target_index_served() >= view.train_end() ||
            view.max_exog_index_served() >= view.train_end() + h_max) {
            throw std::logic_error("window view served data past its boundary");
        }
    };

    if (workers <= 1 || n_windows <= 1) {
        for (int w = 0; w < n_windows; ++w) run_window(w);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (int w = next.fetch_add(1); w < n_windows; w = next.fetch_add(1)) {
                try {
                    run_window(w);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        const int count = std::min(workers, n_windows);
        pool.reserve(count);
        for (int i = 0; i < count; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (int w = 0; w < n_windows; ++w) {
        if (!errors[w].empty()) {
            eval.exclusions.push_back("window " + std::to_string(w) + " (train_end " +
                                      std::to_string(schedule.train_ends[w]) +
                                      "): " + errors[w]);
        } else {
            ++eval.windows_used;
        }
    }

    eval.per_horizon.assign(h_max, kNan);
    for (int h = 1; h <= h_max; ++h) {
        std::vector<double> fc, ac;
        for (int w = 0; w < n_windows; ++w) {
            const double f = eval.table.cells[w][h - 1];
            if (std::isnan(f)) continue;
            fc.push_back(f);
            ac.push_back(target[static_cast<std::size_t>(schedule.target_index(w, h))]);
        }
        if (!fc.empty()) eval.per_horizon[h - 1] = smape(fc, ac);
    }
    return eval;
}

std::vector<double> aggregate_states_to_national(
    const std::map<std::string, ForecastTable>& per_state, const RollingSchedule& schedule,
    const std::vector<double>& national_actual) {
    if (per_state.empty()) throw std::invalid_argument("no state forecasts to aggregate");
    const int n_windows = schedule.windows();
    const int h_max = schedule.h_max;

    for (const auto& [region, table] : per_state) {
        if (static_cast<int>(table.cells.size()) != n_windows) {
            throw std::invalid_argument("forecast table for " + region +
                                        " does not match the schedule");
        }
        for (int w = 0; w < n_windows; ++w) {
            for (int h = 1; h <= h_max; ++h) {
                if (std::isnan(table.cells[w][h - 1])) {
                    throw ModelError("missing forecast cell: region " + region + ", window " +
                                     std::to_string(w) + ", horizon " + std::to_string(h));
                }
            }
        }
    }

    std::vector<double> result(h_max, kNan);
    for (int h = 1; h <= h_max; ++h) {
        std::vector<double> fc(n_windows, 0.0), ac(n_windows);
        for (int w = 0; w < n_windows; ++w) {
            for (const auto& [region, table] : per_state) fc[w] += table.cells[w][h - 1];
            const int idx = schedule.target_index(w, h);
            if (idx < 0 || idx >= static_cast<int>(national_actual.size())) {
                throw std::invalid_argument("national series does not cover the schedule");
            }
            ac[w] = national_actual[idx];
        }
        result[h - 1] = smape(fc, ac);
    }
    return result;
}

std::vector<double> EvaluationReport::average() const {
    std::vector<double> avg(models.size(), 0.0);
    if (cells.empty()) return avg;
    for (std::size_t m = 0; m < models.size(); ++m) {
        double acc = 0.0;
        for (const auto& row : cells) acc += row[m];
        avg[m] = acc / static_cast<double>(cells.size());
    }
    return avg;
}

std::string render_report(const EvaluationReport& report, ReportFormat format) {
    const std::size_t n_models = report.models.size();
    for (const auto& row : report.cells) {
        if (row.size() != n_models) throw std::invalid_argument("report row width mismatch");
    }
    const std::vector<double> avg = report.average();
    std::ostringstream out;

    if (format == ReportFormat::csv) {
        out << "horizon";
        for (const auto& m : report.models) out << ',' << m;
        out << '\n';
        for (std::size_t h = 0; h < report.cells.size(); ++h) {
            out << (h + 1);
            for (std::size_t m = 0; m < n_models; ++m) out << ',' << format_cell(report.cells[h][m]);
            out << '\n';
        }
        out << "average";
        for (std::size_t m = 0; m < n_models; ++m) out << ',' << format_cell(avg[m]);
        out << '\n';
        for (const auto& note : report.footnotes) out << "# " << note << '\n';
        return out.str();
    }

    std::vector<std::size_t> width(n_models);
    for (std::size_t m = 0; m < n_models; ++m) width[m] = std::max<std::size_t>(report.models[m].size(), 6);
    out << "h      ";
    for (std::size_t m = 0; m < n_models; ++m) {
        out << ' ';
        out.width(static_cast<std::streamsize>(width[m]));
        out << report.models[m];
    }
    out << '\n';
    auto row_out = [&](const std::string& label, const std::vector<double>& row) {
        out << label;
        for (std::size_t i = label.size(); i < 7; ++i) out << ' ';
        for (std::size_t m = 0; m < n_models; ++m) {
            out << ' ';
            out.width(static_cast<std::streamsize>(width[m]));
            out << format_cell(row[m]);
        }
        out << '\n';
    };
    for (std::size_t h = 0; h < report.cells.size(); ++h) {
        row_out(std::to_string(h + 1), report.cells[h]);
    }
    row_out("average", avg);
    for (const auto& note : report.footnotes) out << note << '\n';
    return out.str();
}

} // namespace exocast
