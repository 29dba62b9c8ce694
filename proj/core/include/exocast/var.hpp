#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace exocast {

/// Vector autoregression y_t = delta + Phi[0] y_{t-q} + ... + Phi[q-1] y_{t-1}
/// + eps_t. Coefficient matrices are stored oldest lag first (Phi[0]
/// multiplies y_{t-q}); most texts index the other way around.
struct VarModel {
    int q = 1;
    Eigen::VectorXd delta;
    std::vector<Eigen::MatrixXd> Phi;
    Eigen::MatrixXd sigma;
    std::vector<std::string> variable_names;

    int dim() const { return static_cast<int>(delta.size()); }
};

/// Equation-by-equation OLS on a T x n panel (rows are time points). Throws
/// std::invalid_argument when T <= n*q + 1 and ModelError on a rank-deficient
/// regressor matrix. sigma is the maximum-likelihood (divide by effective T)
/// residual covariance.
VarModel fit_var(const Eigen::MatrixXd& panel, int q,
                 std::vector<std::string> variable_names = {});

/// Minimizes BIC(q) = log det(sigma_q) + (log T*/T*) * n(nq+1) over
/// q = 1..q_max, every candidate fit on the rows valid at q_max so the
/// criteria are comparable. Ties resolve to the smaller order.
int select_order_bic(const Eigen::MatrixXd& panel, int q_max = 14);

/// Iterated conditional-mean forecasts, one row per step 1..h. recent must
/// supply at least q rows; only its last q rows are used.
Eigen::MatrixXd forecast_var_path(const VarModel& model, const Eigen::MatrixXd& recent, int h);

/// The forecast at horizon h alone.
Eigen::VectorXd forecast_var(const VarModel& model, const Eigen::MatrixXd& recent, int h);

} // namespace exocast
