#pragma once

#include "exocast/time_series.hpp"
#include "exocast/transforms.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace exocast {

/// Provenance of one design column: source -1 is the target series, 0..n-1
/// an exogenous column; lag is measured from the response time.
struct LagColumn {
    int source = -1;
    int lag = 0;
};

/// Regression design of weekly log-return lags. Row r predicts response[r]
/// from values lagged h..h+k-1 days; no cell references data at or beyond
/// the response time.
struct LagDesign {
    Eigen::VectorXd response;
    Eigen::MatrixXd matrix;
    int h = 1;
    int k = 14;
    std::vector<LagColumn> columns;
    std::vector<std::string> column_names;
    LogOffset offset = LogOffset::plus_one;
    bool exog_transformed = true;
};

struct McpModel {
    Eigen::VectorXd beta;
    double intercept = 0.0;
    double lambda = 0.0;
    double gamma = 3.0;
    int h = 1;
    int k = 14;
    std::vector<LagColumn> columns;
    std::vector<std::string> column_names;
    LogOffset offset = LogOffset::plus_one;
    bool exog_transformed = true;
    /// Objective value after each coordinate-descent sweep (standardized
    /// problem); non-increasing by construction.
    std::vector<double> objective_path;
};

/// Builds the lagged weekly log-return design: target lags z_{t-h}..
/// z_{t-(h+k-1)} first, then one block per exogenous column. When
/// transform_exog is set the exogenous columns are weekly log-returns too,
/// otherwise raw lagged values. Throws std::invalid_argument when the series
/// is too short and std::domain_error when a value is non-positive after the
/// offset.
LagDesign build_lag_design(const TimeSeries& target, const Eigen::MatrixXd& exog, int h,
                           int k = 14, LogOffset offset = LogOffset::plus_one,
                           bool transform_exog = true);

/// Keeps the m columns with the largest |Pearson correlation| with the
/// response, original order preserved; zero-variance columns are excluded
/// before ranking. Throws std::invalid_argument when fewer than m usable
/// columns exist.
LagDesign sis_screen(const LagDesign& design, int m = 7);

/// Minimax concave penalty value. Throws std::invalid_argument when
/// gamma <= 1 or lambda < 0.
double mcp_penalty(double beta, double lambda, double gamma);

/// Penalized objective (1/2N)||z - X beta||^2 + sum_j P(beta_j; lambda, gamma)
/// evaluated as given (no internal standardization or intercept).
double mcp_objective(const Eigen::VectorXd& response, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& beta, double lambda, double gamma);

/// Coordinate-descent fit. Columns are standardized and the response
/// centered internally; returned coefficients are on the original scale.
/// Convergence: max coefficient change < 1e-7; throws ModelError after
/// 10000 sweeps. warm, when given, seeds the standardized coefficients.
McpModel fit_mcp(const LagDesign& design, double lambda, double gamma = 3.0,
                 const Eigen::VectorXd* warm = nullptr);

/// Smallest lambda that shrinks every coefficient to zero; top of the
/// cross-validation path.
double lambda_max(const LagDesign& design);

/// Picks lambda from a 100-point log-spaced path (lambda_max down to
/// lambda_max/1000) by contiguous-block cross-validation, minimizing mean
/// fold MSE; ties resolve to the largest lambda. Throws ModelError when the
/// design has no usable columns.
double select_lambda_cv(const LagDesign& design, double gamma = 3.0, int folds = 5);

/// Predicts y at h days past the end of `recent`. The weekly log-return
/// inversion needs the base value y at 7 days before the target: taken from
/// `recent` when h <= 7, otherwise `anchor` must supply it (the caller's
/// h-7 forecast). Throws std::invalid_argument when the window is too short
/// or a required anchor is missing.
double forecast_mcp(const McpModel& model, const TimeSeries& recent,
                    const Eigen::MatrixXd& exog_recent, int h,
                    std::optional<double> anchor = std::nullopt);

} // namespace exocast
