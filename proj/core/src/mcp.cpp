#include "exocast/mcp.hpp"

#include "exocast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace exocast {

namespace {

double weekly_return_at(const std::vector<double>& y, int t, LogOffset offset) {
    return log_transform(y[t], offset) - log_transform(y[t - 7], offset);
}

bool usable_column(const Eigen::VectorXd& col) {
    const double scale = std::max(1.0, col.cwiseAbs().maxCoeff());
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    return var > 1e-24 * scale * scale;
}

double firm_threshold(double b, double lambda, double gamma) {
    const double ab = std::abs(b);
    if (ab <= lambda) return 0.0;
    if (ab <= gamma * lambda) {
        const double sign = b > 0.0 ? 1.0 : -1.0;
        return sign * (ab - lambda) / (1.0 - 1.0 / gamma);
    }
    return b;
}

struct Standardized {
    Eigen::MatrixXd X;      // usable columns, centered and unit-variance
    Eigen::VectorXd zc;     // centered response
    std::vector<int> cols;  // usable column indices into the design
    Eigen::VectorXd mean, sd;
    double z_mean = 0.0;
};

Standardized standardize(const LagDesign& design) {
    const int n = static_cast<int>(design.matrix.rows());
    const int p = static_cast<int>(design.matrix.cols());
    if (n == 0) throw std::invalid_argument("design has no rows");
    Standardized s;
    s.mean.resize(p);
    s.sd.resize(p);
    for (int j = 0; j < p; ++j) {
        const Eigen::VectorXd col = design.matrix.col(j);
        s.mean[j] = col.mean();
        s.sd[j] = std::sqrt((col.array() - s.mean[j]).square().mean());
        if (usable_column(col)) s.cols.push_back(j);
    }
    s.z_mean = design.response.mean();
    s.zc = design.response.array() - s.z_mean;
    s.X.resize(n, static_cast<int>(s.cols.size()));
    for (std::size_t i = 0; i < s.cols.size(); ++i) {
        const int j = s.cols[i];
        s.X.col(static_cast<int>(i)) = (design.matrix.col(j).array() - s.mean[j]) / s.sd[j];
    }
    return s;
}

} // namespace

LagDesign build_lag_design(const TimeSeries& target, const Eigen::MatrixXd& exog, int h, int k,
                           LogOffset offset, bool transform_exog) {
    if (h < 1 || k < 1) throw std::invalid_argument("horizon and lag depth must be positive");
    target.validate();
    const int n = static_cast<int>(target.size());
    const int n_exog = static_cast<int>(exog.cols());
    if (n_exog > 0 && exog.rows() != n) {
        throw std::invalid_argument("exogenous matrix must align with the target series");
    }
    // Earliest usable response time: the deepest lag h+k-1 must land on a
    // defined weekly log-return (index >= 7).
    const int first = h + k + 6;
    if (n <= first) {
        throw std::invalid_argument("series too short for horizon " + std::to_string(h) +
                                    " and lag depth " + std::to_string(k));
    }
    const int rows = n - first;

    std::vector<double> z(n, 0.0);
    for (int t = 7; t < n; ++t) z[t] = weekly_return_at(target.values, t, offset);

    Eigen::MatrixXd zx;
    if (n_exog > 0 && transform_exog) {
        zx.resize(n, n_exog);
        for (int j = 0; j < n_exog; ++j) {
            for (int t = 7; t < n; ++t) {
                zx(t, j) = log_transform(exog(t, j), offset) - log_transform(exog(t - 7, j), offset);
            }
            for (int t = 0; t < 7; ++t) zx(t, j) = 0.0;
        }
    }

    LagDesign design;
    design.h = h;
    design.k = k;
    design.offset = offset;
    design.exog_transformed = transform_exog;
    design.response.resize(rows);
    design.matrix.resize(rows, (1 + n_exog) * k);

    for (int lag = h; lag < h + k; ++lag) {
        design.columns.push_back({-1, lag});
        design.column_names.push_back("z(t-" + std::to_string(lag) + ")");
    }
    for (int j = 0; j < n_exog; ++j) {
        for (int lag = h; lag < h + k; ++lag) {
            design.columns.push_back({j, lag});
            design.column_names.push_back("x" + std::to_string(j) + "(t-" + std::to_string(lag) +
                                          ")");
        }
    }

    for (int r = 0; r < rows; ++r) {
        const int t = first + r;
        design.response[r] = z[t];
        int c = 0;
        for (int lag = h; lag < h + k; ++lag) design.matrix(r, c++) = z[t - lag];
        for (int j = 0; j < n_exog; ++j) {
            for (int lag = h; lag < h + k; ++lag) {
                design.matrix(r, c++) = transform_exog ? zx(t - lag, j) : exog(t - lag, j);
            }
        }
    }
    return design;
}

LagDesign sis_screen(const LagDesign& design, int m) {
    const int p = static_cast<int>(design.matrix.cols());
    if (m < 1) throw std::invalid_argument("screen size must be positive");
    if (m >= p) return design;

    const int n = static_cast<int>(design.matrix.rows());
    const double z_mean = design.response.mean();
    const Eigen::VectorXd zc = design.response.array() - z_mean;
    const double z_sd = std::sqrt(zc.squaredNorm() / n);

    struct Ranked {
        double score;
        int index;
    };
    std::vector<Ranked> ranked;
    for (int j = 0; j < p; ++j) {
        const Eigen::VectorXd col = design.matrix.col(j);
        if (!usable_column(col)) continue;
        double score = 0.0;
        if (z_sd > 0.0) {
            const Eigen::VectorXd xc = col.array() - col.mean();
            const double x_sd = std::sqrt(xc.squaredNorm() / n);
            score = std::abs(xc.dot(zc) / (n * x_sd * z_sd));
        }
        ranked.push_back({score, j});
    }
    if (static_cast<int>(ranked.size()) < m) {
        throw std::invalid_argument("fewer than " + std::to_string(m) +
                                    " usable columns to screen");
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.score > b.score;
    });
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) keep.push_back(ranked[i].index);
    std::sort(keep.begin(), keep.end());

    LagDesign out;
    out.h = design.h;
    out.k = design.k;
    out.offset = design.offset;
    out.exog_transformed = design.exog_transformed;
    out.response = design.response;
    out.matrix.resize(design.matrix.rows(), m);
    for (int i = 0; i < m; ++i) {
        out.matrix.col(i) = design.matrix.col(keep[i]);
        out.columns.push_back(design.columns[keep[i]]);
        out.column_names.push_back(design.column_names[keep[i]]);
    }
    return out;
}

double mcp_penalty(double beta, double lambda, double gamma) {
    if (gamma <= 1.0) throw std::invalid_argument("gamma must exceed 1");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
    const double ab = std::abs(beta);
    if (ab <= gamma * lambda) return lambda * ab - beta * beta / (2.0 * gamma);
    return 0.5 * gamma * lambda * lambda;
}

double mcp_objective(const Eigen::VectorXd& response, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& beta, double lambda, double gamma) {
    const double n = static_cast<double>(response.size());
    const double rss = (response - X * beta).squaredNorm();
    double penalty = 0.0;
    for (int j = 0; j < beta.size(); ++j) penalty += mcp_penalty(beta[j], lambda, gamma);
    return rss / (2.0 * n) + penalty;
}

McpModel fit_mcp(const LagDesign& design, double lambda, double gamma,
                 const Eigen::VectorXd* warm) {
    if (gamma <= 1.0) throw std::invalid_argument("gamma must exceed 1");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
    const Standardized s = standardize(design);
    const int n = static_cast<int>(s.X.rows());
    const int pu = static_cast<int>(s.X.cols());

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(pu);
    if (warm != nullptr && warm->size() == pu) beta = *warm;
    Eigen::VectorXd r = s.zc - s.X * beta;

    McpModel model;
    constexpr int kMaxSweeps = 10000;
    bool converged = pu == 0;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < pu; ++j) {
            const double b = s.X.col(j).dot(r) / n + beta[j];
            const double next = firm_threshold(b, lambda, gamma);
            const double delta = next - beta[j];
            if (delta != 0.0) {
                r -= s.X.col(j) * delta;
                beta[j] = next;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        model.objective_path.push_back(mcp_objective(s.zc, s.X, beta, lambda, gamma));
        if (max_change < 1e-7) converged = true;
    }
    if (!converged) {
        throw ModelError("MCP coordinate descent did not converge within 10000 sweeps");
    }

    const int p = static_cast<int>(design.matrix.cols());
    model.beta = Eigen::VectorXd::Zero(p);
    model.intercept = s.z_mean;
    for (int i = 0; i < pu; ++i) {
        const int j = s.cols[i];
        model.beta[j] = beta[i] / s.sd[j];
        model.intercept -= model.beta[j] * s.mean[j];
    }
    model.lambda = lambda;
    model.gamma = gamma;
    model.h = design.h;
    model.k = design.k;
    model.columns = design.columns;
    model.column_names = design.column_names;
    model.offset = design.offset;
    model.exog_transformed = design.exog_transformed;
    return model;
}

double lambda_max(const LagDesign& design) {
    const Standardized s = standardize(design);
    if (s.X.cols() == 0) return 0.0;
    const int n = static_cast<int>(s.X.rows());
    // Per-column dots, matching the coordinate-descent pass exactly, so a fit
    // at lambda_max shrinks every coefficient to zero even at equality.
    double best = 0.0;
    for (int j = 0; j < s.X.cols(); ++j) {
        best = std::max(best, std::abs(s.X.col(j).dot(s.zc)) / n);
    }
    return best;
}

double select_lambda_cv(const LagDesign& design, double gamma, int folds) {
    const int n = static_cast<int>(design.matrix.rows());
    if (folds < 1 || folds > n) {
        throw std::invalid_argument("fold count must be between 1 and the row count");
    }
    const double lmax = lambda_max(design);
    if (!(lmax > 0.0)) throw ModelError("degenerate design: no usable columns");

    constexpr int kPathLength = 100;
    std::vector<double> path(kPathLength);
    for (int i = 0; i < kPathLength; ++i) {
        path[i] = lmax * std::pow(10.0, -3.0 * i / (kPathLength - 1));
    }

    std::vector<double> mse_sum(kPathLength, 0.0);
    std::vector<int> fold_count(kPathLength, 0);
    // Coordinate descent can exhaust its sweep budget at the small end of the
    // path when screened columns are nearly collinear; such lambdas are not
    // selectable rather than fatal.
    std::vector<bool> eligible(kPathLength, true);

    for (int f = 0; f < folds; ++f) {
        const int lo = static_cast<int>(static_cast<long long>(f) * n / folds);
        const int hi = static_cast<int>(static_cast<long long>(f + 1) * n / folds);
        const int n_valid = hi - lo;
        if (n_valid == 0) continue;
        const int n_train = n - n_valid;
        if (n_train == 0) continue;

        LagDesign train;
        train.h = design.h;
        train.k = design.k;
        train.offset = design.offset;
        train.exog_transformed = design.exog_transformed;
        train.columns = design.columns;
        train.column_names = design.column_names;
        train.response.resize(n_train);
        train.matrix.resize(n_train, design.matrix.cols());
        int r = 0;
        for (int t = 0; t < n; ++t) {
            if (t >= lo && t < hi) continue;
            train.response[r] = design.response[t];
            train.matrix.row(r) = design.matrix.row(t);
            ++r;
        }

        const Standardized ts = standardize(train);
        Eigen::VectorXd warm;
        for (int i = 0; i < kPathLength; ++i) {
            if (!eligible[i]) continue;
            McpModel m;
            try {
                m = fit_mcp(train, path[i], gamma, warm.size() > 0 ? &warm : nullptr);
            } catch (const ModelError&) {
                eligible[i] = false;
                continue;
            }
            // Seed the next (smaller) lambda with this solution, restated on
            // the standardized scale of the training design.
            warm.resize(ts.X.cols());
            for (int c = 0; c < static_cast<int>(ts.cols.size()); ++c) {
                warm[c] = m.beta[ts.cols[c]] * ts.sd[ts.cols[c]];
            }
            double sse = 0.0;
            for (int t = lo; t < hi; ++t) {
                const double pred = m.intercept + design.matrix.row(t) * m.beta;
                const double err = pred - design.response[t];
                sse += err * err;
            }
            mse_sum[i] += sse / n_valid;
            fold_count[i] += 1;
        }
    }

    int best = -1;
    double best_mse = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kPathLength; ++i) {
        if (!eligible[i] || fold_count[i] == 0) continue;
        const double mse = mse_sum[i] / fold_count[i];
        if (mse < best_mse) {
            best_mse = mse;
            best = i;
        }
    }
    if (best < 0) throw ModelError("no lambda on the path produced a convergent fit");
    return path[best];
}

double forecast_mcp(const McpModel& model, const TimeSeries& recent,
                    const Eigen::MatrixXd& exog_recent, int h, std::optional<double> anchor) {
    if (h != model.h) {
        throw std::invalid_argument("forecast horizon " + std::to_string(h) +
                                    " does not match the model's design horizon " +
                                    std::to_string(model.h));
    }
    recent.validate();
    const int n = static_cast<int>(recent.size());
    const int target = n - 1 + h;

    int max_source = -1;
    for (const auto& col : model.columns) max_source = std::max(max_source, col.source);
    if (max_source >= 0) {
        if (exog_recent.rows() != n || exog_recent.cols() <= max_source) {
            throw std::invalid_argument("exogenous window must align with the recent series");
        }
    }

    double zhat = model.intercept;
    for (int j = 0; j < static_cast<int>(model.columns.size()); ++j) {
        if (model.beta[j] == 0.0) continue;
        const auto& col = model.columns[j];
        const int idx = target - col.lag;
        if (idx < 0 || idx >= n) {
            throw std::invalid_argument("recent window too short for lag " +
                                        std::to_string(col.lag));
        }
        double feature = 0.0;
        if (col.source < 0) {
            if (idx < 7) throw std::invalid_argument("recent window too short for log-returns");
            feature = weekly_return_at(recent.values, idx, model.offset);
        } else if (model.exog_transformed) {
            if (idx < 7) throw std::invalid_argument("recent window too short for log-returns");
            feature = log_transform(exog_recent(idx, col.source), model.offset) -
                      log_transform(exog_recent(idx - 7, col.source), model.offset);
        } else {
            feature = exog_recent(idx, col.source);
        }
        zhat += model.beta[j] * feature;
    }

    double base = 0.0;
    if (anchor.has_value()) {
        base = *anchor;
    } else if (h <= 7) {
        const int base_idx = target - 7;
        if (base_idx < 0) throw std::invalid_argument("recent window too short for inversion");
        base = recent[base_idx];
    } else {
        throw std::invalid_argument("horizons beyond 7 need an anchor forecast for inversion");
    }
    return std::max(0.0, invert_weekly_log_return_value(zhat, base, model.offset));
}

} // namespace exocast
