#pragma once

#include "exocast/errors.hpp"
#include "exocast/time_series.hpp"
#include "exocast/transforms.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace exocast {

enum class TrendType { none, constant };

/// Observation transform applied before differencing. The daily-count
/// pipeline uses log1p; identity keeps the series as given (useful for
/// modelling already-transformed data).
enum class SarimaxTransform { identity, log1p };

struct SarimaxSpec {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 1;
    TrendType trend = TrendType::none;
    std::vector<std::string> exog_names;
    SarimaxTransform transform = SarimaxTransform::identity;

    /// Throws ConfigError on negative orders, s < 1, or seasonal orders with
    /// s < 2.
    void validate() const;

    /// Count of estimated regression + ARMA coefficients (sigma2 excluded;
    /// it is concentrated out of the likelihood).
    int parameter_count() const {
        return (trend == TrendType::constant ? 1 : 0) +
               static_cast<int>(exog_names.size()) + p + q + P + Q;
    }
};

/// AR polynomial convention: (1 - phi_1 B - ... - phi_p B^p); MA polynomial
/// (1 + theta_1 B + ... + theta_q B^q). Seasonal polynomials analogous in B^s.
struct FittedSarimax {
    SarimaxSpec spec;
    Eigen::VectorXd phi, theta, Phi, Theta;
    Eigen::VectorXd beta;
    double trend_const = 0.0;
    double sigma2 = 1.0;
    double loglik = 0.0;
};

/// Fit failed to meet the optimizer tolerances within the iteration budget;
/// carries the best parameters reached.
class SarimaxConvergenceError : public ModelError {
public:
    SarimaxConvergenceError(const std::string& what, FittedSarimax best)
        : ModelError(what), best_(std::move(best)) {}
    const FittedSarimax& best() const { return best_; }

private:
    FittedSarimax best_;
};

/// Kalman-filter pass over the differenced, regression-adjusted series.
struct FilterRun {
    std::vector<double> innovations;
    std::vector<double> innovation_variance;
    std::vector<double> one_step_ahead;
    /// Prediction of the next (unobserved) differenced, regression-adjusted
    /// value given the full sample.
    double next_prediction = 0.0;
    double loglik = 0.0;
};

/// Maximum-likelihood fit. exog, when nonempty, must supply one row per
/// observation of y and one column per spec.exog_names entry. All-zero
/// exogenous columns are excluded from estimation and reported with a zero
/// coefficient. Throws ModelError on collinear exogenous columns,
/// SarimaxConvergenceError when the optimizer budget is exhausted, and
/// std::invalid_argument on dimension problems.
FittedSarimax fit_sarimax(const SarimaxSpec& spec, const TimeSeries& y,
                          const Eigen::MatrixXd& exog = Eigen::MatrixXd());

/// Exact Gaussian log-likelihood of y under the model (sigma2 as stored, not
/// concentrated). Throws std::domain_error on non-finite parameters.
double sarimax_loglikelihood(const FittedSarimax& model, const TimeSeries& y,
                             const Eigen::MatrixXd& exog = Eigen::MatrixXd());

/// Full filter pass; exposes innovations and the end-of-sample one-step
/// prediction used by forecasting.
FilterRun sarimax_filter(const FittedSarimax& model, const TimeSeries& y,
                         const Eigen::MatrixXd& exog = Eigen::MatrixXd());

/// h-step conditional-mean forecast on the original scale of `history`.
/// exog_history must align with history; exog_future must supply h rows when
/// the spec names exogenous columns. With the log1p transform, outputs are
/// clamped at zero (count scale); the identity transform returns raw values.
std::vector<double> forecast_sarimax(const FittedSarimax& model, const TimeSeries& history,
                                     const Eigen::MatrixXd& exog_history,
                                     const Eigen::MatrixXd& exog_future, int h);

/// Flat key=value snapshot of a fitted model, and its inverse.
std::string serialize_sarimax(const FittedSarimax& model);
FittedSarimax deserialize_sarimax(const std::string& text);

/// Maps unconstrained reals to a stationary AR coefficient vector through
/// partial autocorrelations (tanh then Durbin-Levinson). Bijective onto the
/// stationarity region; used by the optimizer, exposed for tests.
Eigen::VectorXd constrain_ar(const Eigen::VectorXd& u);
Eigen::VectorXd unconstrain_ar(const Eigen::VectorXd& phi);

} // namespace exocast
