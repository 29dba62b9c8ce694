#pragma once

#include "exocast/time_series.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace exocast {

/// Rolling-origin validation schedule. train_ends holds training-prefix
/// lengths; the window with train_end = e targets indices e .. e+h_max-1
/// (days e+1 .. e+h_max in one-based terms) and consecutive windows advance
/// by exactly `step`.
struct RollingSchedule {
    int series_length = 0;
    int initial_train = 0;
    int step = 14;
    int h_max = 14;
    std::vector<int> train_ends;

    int windows() const { return static_cast<int>(train_ends.size()); }
    /// Index of the actual value scored at horizon h of window w.
    int target_index(int window, int h) const { return train_ends[window] + h - 1; }
};

/// Throws ConfigError when no window fits (initial_train + h_max exceeds the
/// series) or on non-positive arguments.
RollingSchedule build_schedule(int series_length, int initial_train, int step = 14,
                               int h_max = 14);

/// Data access for one rolling window. Models reach the series only through
/// this view, which refuses indices past the window's boundary and records
/// the deepest index served so the harness can assert no look-ahead:
/// target accesses stay below train_end, exogenous accesses below
/// train_end + h (recorded actuals stand in for future exogenous values).
class WindowView {
public:
    WindowView(const TimeSeries& target, const Eigen::MatrixXd& exog, int train_end, int h_max);

    int train_end() const { return train_end_; }
    int h_max() const { return h_max_; }

    /// The training prefix, indices [0, train_end).
    TimeSeries train_target() const;
    /// Exogenous rows [0, train_end), all columns.
    Eigen::MatrixXd train_exog() const;
    /// Exogenous rows [train_end, train_end + h).
    Eigen::MatrixXd future_exog(int h) const;

    /// Harness-side readback of the scored actual at horizon h; not counted
    /// as model access.
    double actual(int h) const;

    int max_target_index_served() const { return max_target_; }
    int max_exog_index_served() const { return max_exog_; }

private:
    const TimeSeries& target_;
    const Eigen::MatrixXd& exog_;
    int train_end_;
    int h_max_;
    mutable int max_target_ = -1;
    mutable int max_exog_ = -1;
};

/// A model under rolling evaluation: produces point forecasts for horizons
/// 1..h_max of a window. Implementations must be safe to call concurrently
/// on distinct windows.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> forecast_window(const WindowView& view) const = 0;
    /// Text snapshot of the most recent fitted parameters, for audit dumps.
    virtual std::string parameter_dump() const { return {}; }
};

/// Forecast grid for one region: cells[window][h-1], NaN where the window
/// was excluded.
struct ForecastTable {
    std::vector<std::vector<double>> cells;
};

struct ModelEvaluation {
    std::string model;
    /// Pooled sMAPE per horizon (one value per h, pairs pooled over
    /// windows); NaN when every window failed.
    std::vector<double> per_horizon;
    ForecastTable table;
    int windows_total = 0;
    int windows_used = 0;
    std::vector<std::string> exclusions;
};

/// Runs the model over all windows of the schedule. ModelError from a fit
/// excludes that window (noted in `exclusions`); other exceptions propagate.
/// `workers` > 1 evaluates windows concurrently; assembly is keyed by window
/// index so results are identical regardless of execution order.
ModelEvaluation evaluate_model(const Forecaster& model, const TimeSeries& target,
                               const Eigen::MatrixXd& exog, const RollingSchedule& schedule,
                               int workers = 1);

/// Sums state-level forecasts cell by cell into a national forecast and
/// scores it against `national_actual` (indexed like the state calendar the
/// schedule was built on). Throws ModelError naming the first missing cell.
std::vector<double> aggregate_states_to_national(
    const std::map<std::string, ForecastTable>& per_state, const RollingSchedule& schedule,
    const std::vector<double>& national_actual);

/// Table of per-horizon scores, one column per model; the rendered Average
/// row is the arithmetic mean of the horizon rows.
struct EvaluationReport {
    std::vector<std::string> models;
    /// cells[h-1][m] = sMAPE of model m at horizon h.
    std::vector<std::vector<double>> cells;
    std::vector<std::string> footnotes;

    std::vector<double> average() const;
};

enum class ReportFormat { csv, aligned_text };

/// Two-decimal rendering (ties fall to the nearest even digit of the stored
/// binary value, as printf does). CSV rows are "1".."14" then "average";
/// footnotes become trailing "# ..." lines in CSV and plain lines in text.
std::string render_report(const EvaluationReport& report, ReportFormat format);

} // namespace exocast
