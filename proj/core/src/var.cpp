#include "exocast/var.hpp"

#include "exocast/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace exocast {

namespace {

/// OLS fit using observations panel.row(t) for t in [start, T); regressors
/// are the q preceding rows plus an intercept.
VarModel fit_var_rows(const Eigen::MatrixXd& panel, int q, int start,
                      std::vector<std::string> names) {
    const int T = static_cast<int>(panel.rows());
    const int n = static_cast<int>(panel.cols());
    const int rows = T - start;
    const int k = n * q + 1;
    if (rows <= k) {
        throw std::invalid_argument("panel too short for order " + std::to_string(q) +
                                    ": need more than " + std::to_string(k) + " usable rows");
    }

    Eigen::MatrixXd X(rows, k);
    Eigen::MatrixXd Y(rows, n);
    for (int r = 0; r < rows; ++r) {
        const int t = start + r;
        X(r, 0) = 1.0;
        // Oldest lag first: columns 1..n hold y_{t-q}, the next n y_{t-q+1}, ...
        for (int s = 0; s < q; ++s) {
            X.block(r, 1 + s * n, 1, n) = panel.row(t - q + s);
        }
        Y.row(r) = panel.row(t);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        throw ModelError("collinear VAR regressors: rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(k));
    }
    const Eigen::MatrixXd B = qr.solve(Y);
    const Eigen::MatrixXd E = Y - X * B;

    VarModel model;
    model.q = q;
    model.delta = B.row(0).transpose();
    for (int s = 0; s < q; ++s) {
        model.Phi.push_back(B.middleRows(1 + s * n, n).transpose());
    }
    model.sigma = E.transpose() * E / static_cast<double>(rows);
    model.sigma = 0.5 * (model.sigma + model.sigma.transpose()).eval();
    model.variable_names = std::move(names);
    return model;
}

double log_det_covariance(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    double acc = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double ev = es.eigenvalues()[i];
        if (ev <= 0.0) return -std::numeric_limits<double>::infinity();
        acc += std::log(ev);
    }
    return acc;
}

} // namespace

VarModel fit_var(const Eigen::MatrixXd& panel, int q, std::vector<std::string> variable_names) {
    if (q < 1) throw std::invalid_argument("VAR order must be positive");
    if (!panel.allFinite()) throw std::invalid_argument("panel values must be finite");
    if (!variable_names.empty() &&
        static_cast<int>(variable_names.size()) != static_cast<int>(panel.cols())) {
        throw std::invalid_argument("variable name count must match the panel width");
    }
    return fit_var_rows(panel, q, q, std::move(variable_names));
}

int select_order_bic(const Eigen::MatrixXd& panel, int q_max) {
    if (q_max < 1) throw std::invalid_argument("q_max must be positive");
    const int T = static_cast<int>(panel.rows());
    const int n = static_cast<int>(panel.cols());
    const int t_eff = T - q_max;

    int best_q = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= q_max; ++q) {
        const VarModel m = fit_var_rows(panel, q, q_max, {});
        const double ld = log_det_covariance(m.sigma);
        const double penalty =
            std::log(static_cast<double>(t_eff)) / t_eff * (n * (n * q + 1.0));
        const double bic = ld + penalty;
        if (bic < best_bic) {
            best_bic = bic;
            best_q = q;
        }
    }
    return best_q;
}

Eigen::MatrixXd forecast_var_path(const VarModel& model, const Eigen::MatrixXd& recent, int h) {
    if (h < 1) throw std::invalid_argument("forecast horizon must be at least 1");
    const int n = model.dim();
    const int q = model.q;
    if (recent.cols() != n) {
        throw std::invalid_argument("recent window width must match the model dimension");
    }
    if (recent.rows() < q) {
        throw std::invalid_argument("recent window must supply at least q observations");
    }

    // Ring of the last q values, oldest first.
    std::vector<Eigen::VectorXd> buffer;
    for (int i = 0; i < q; ++i) {
        buffer.push_back(recent.row(recent.rows() - q + i).transpose());
    }

    Eigen::MatrixXd path(h, n);
    for (int step = 0; step < h; ++step) {
        Eigen::VectorXd next = model.delta;
        for (int s = 0; s < q; ++s) next += model.Phi[s] * buffer[s];
        path.row(step) = next.transpose();
        buffer.erase(buffer.begin());
        buffer.push_back(std::move(next));
    }
    return path;
}

Eigen::VectorXd forecast_var(const VarModel& model, const Eigen::MatrixXd& recent, int h) {
    return forecast_var_path(model, recent, h).row(h - 1).transpose();
}

} // namespace exocast
