#include "exocast/sarimax.hpp"

#include "exocast/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>

namespace exocast {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// tanh saturates to exactly 1 for large inputs; clamp keeps the implied AR
// roots strictly outside the unit circle.
constexpr double kPacfClamp = 1.0 - 1e-10;

std::vector<double> poly_multiply(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

/// Coefficients of the product of a regular and a seasonal lag polynomial.
/// sign=-1 embeds/extracts AR style (1 - sum a_i B^i), sign=+1 MA style.
Eigen::VectorXd combined_coefficients(const Eigen::VectorXd& regular,
                                      const Eigen::VectorXd& seasonal, int s, double sign) {
    std::vector<double> a(static_cast<std::size_t>(regular.size()) + 1, 0.0);
    a[0] = 1.0;
    for (int i = 0; i < regular.size(); ++i) a[i + 1] = sign * regular[i];
    std::vector<double> b(static_cast<std::size_t>(seasonal.size()) * s + 1, 0.0);
    b[0] = 1.0;
    for (int j = 0; j < seasonal.size(); ++j) b[(j + 1) * s] = sign * seasonal[j];
    const auto c = poly_multiply(a, b);
    Eigen::VectorXd out(static_cast<int>(c.size()) - 1);
    for (int i = 0; i < out.size(); ++i) out[i] = sign * c[i + 1];
    return out;
}

Eigen::VectorXd constrain_ma(const Eigen::VectorXd& u) {
    return -constrain_ar(-u);
}

/// Companion-form state space for an ARMA(pbar, qbar) process:
/// alpha_{t+1} = T alpha_t + R eps_{t+1}, w_t = alpha_t[0], with T the
/// companion matrix of abar (first column abar, ones on the superdiagonal)
/// and R = (1, tbar_1, ..., tbar_{r-1}).
struct ArmaStateSpace {
    Eigen::VectorXd tcol;
    Eigen::VectorXd rvec;
    int r = 1;
};

ArmaStateSpace make_state_space(const Eigen::VectorXd& abar, const Eigen::VectorXd& tbar) {
    ArmaStateSpace ss;
    ss.r = std::max<int>(std::max<int>(static_cast<int>(abar.size()),
                                       static_cast<int>(tbar.size()) + 1),
                         1);
    ss.tcol = Eigen::VectorXd::Zero(ss.r);
    ss.tcol.head(abar.size()) = abar;
    ss.rvec = Eigen::VectorXd::Zero(ss.r);
    ss.rvec[0] = 1.0;
    for (int i = 0; i < tbar.size(); ++i) ss.rvec[i + 1] = tbar[i];
    return ss;
}

/// T*M exploiting the companion structure: row i = tcol[i]*M.row(0) + M.row(i+1).
Eigen::MatrixXd companion_mul(const Eigen::VectorXd& tcol, const Eigen::MatrixXd& M) {
    const int r = static_cast<int>(tcol.size());
    Eigen::MatrixXd out(r, M.cols());
    for (int i = 0; i < r; ++i) {
        out.row(i) = tcol[i] * M.row(0);
        if (i + 1 < r) out.row(i) += M.row(i + 1);
    }
    return out;
}

Eigen::VectorXd companion_mul_vec(const Eigen::VectorXd& tcol, const Eigen::VectorXd& v) {
    const int r = static_cast<int>(tcol.size());
    Eigen::VectorXd out(r);
    for (int i = 0; i < r; ++i) {
        out[i] = tcol[i] * v[0];
        if (i + 1 < r) out[i] += v[i + 1];
    }
    return out;
}

/// Solves P = T P T' + R R' by doubling; valid because the constrained
/// parameterization keeps the spectral radius of T below one.
Eigen::MatrixXd stationary_covariance(const ArmaStateSpace& ss) {
    const int r = ss.r;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r, r);
    T.col(0) = ss.tcol;
    for (int i = 0; i + 1 < r; ++i) T(i, i + 1) = 1.0;
    Eigen::MatrixXd V = ss.rvec * ss.rvec.transpose();
    Eigen::MatrixXd A = T;
    for (int it = 0; it < 100; ++it) {
        Eigen::MatrixXd Vn = V + A * V * A.transpose();
        if (!Vn.allFinite()) return Eigen::MatrixXd::Identity(r, r) * 1e7;
        const double delta = (Vn - V).cwiseAbs().maxCoeff();
        V = std::move(Vn);
        if (delta < 1e-14 * (1.0 + V.cwiseAbs().maxCoeff())) break;
        A = A * A;
        if (!A.allFinite()) return Eigen::MatrixXd::Identity(r, r) * 1e7;
        if (A.cwiseAbs().maxCoeff() < 1e-140) break;
    }
    return 0.5 * (V + V.transpose());
}

struct FilterStats {
    double ssq = 0.0;
    double slogF = 0.0;
    int n = 0;
    Eigen::VectorXd final_state;
    std::vector<double> v, F, pred;
};

/// Innovations-form Kalman filter with unit innovation variance (sigma2 is
/// applied by the caller). Switches to the steady-state gain once P stops
/// changing.
FilterStats run_filter(const std::vector<double>& e, const ArmaStateSpace& ss, bool capture) {
    const int r = ss.r;
    const int n = static_cast<int>(e.size());
    FilterStats st;
    st.n = n;
    if (capture) {
        st.v.reserve(n);
        st.F.reserve(n);
        st.pred.reserve(n);
    }

    Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
    Eigen::MatrixXd P = stationary_covariance(ss);
    const Eigen::MatrixXd RRt = ss.rvec * ss.rvec.transpose();
    Eigen::VectorXd K = Eigen::VectorXd::Zero(r);
    double F = 1.0;
    bool steady = false;

    for (int t = 0; t < n; ++t) {
        if (!steady) {
            F = P(0, 0);
            if (!(F > 1e-300)) throw ModelError("Kalman innovation variance is not positive");
            for (int i = 0; i < r; ++i) {
                K[i] = (ss.tcol[i] * P(0, 0) + (i + 1 < r ? P(i + 1, 0) : 0.0)) / F;
            }
        }
        const double v = e[t] - a[0];
        st.ssq += v * v / F;
        st.slogF += std::log(F);
        if (capture) {
            st.v.push_back(v);
            st.F.push_back(F);
            st.pred.push_back(a[0]);
        }
        a = companion_mul_vec(ss.tcol, a) + K * v;
        if (!steady) {
            const Eigen::MatrixXd TP = companion_mul(ss.tcol, P);
            Eigen::MatrixXd Pn =
                companion_mul(ss.tcol, TP.transpose()) + RRt - F * (K * K.transpose());
            Pn = 0.5 * (Pn + Pn.transpose());
            if ((Pn - P).cwiseAbs().maxCoeff() < 1e-13 * (1.0 + Pn.cwiseAbs().maxCoeff())) {
                steady = true;
            }
            P = std::move(Pn);
        }
    }
    st.final_state = a;
    return st;
}

std::vector<double> transform_series(const std::vector<double>& y, SarimaxTransform tr) {
    if (tr == SarimaxTransform::identity) return y;
    return log_transform(y, LogOffset::plus_one);
}

/// Applies the full differencing operator via its lag-polynomial
/// coefficients: w_t = sum_i c_i v_{t-i}.
std::vector<double> apply_diff(const std::vector<double>& v, const std::vector<double>& c) {
    const int lead = static_cast<int>(c.size()) - 1;
    if (static_cast<int>(v.size()) <= lead) {
        throw std::invalid_argument("differenced series is empty: series too short");
    }
    std::vector<double> out(v.size() - lead);
    for (std::size_t t = 0; t < out.size(); ++t) {
        double acc = 0.0;
        for (int i = 0; i <= lead; ++i) acc += c[i] * v[t + lead - i];
        out[t] = acc;
    }
    return out;
}

struct PreparedData {
    std::vector<double> w;
    Eigen::MatrixXd exog_diff;
};

PreparedData prepare_data(const SarimaxSpec& spec, const TimeSeries& y,
                          const Eigen::MatrixXd& exog) {
    spec.validate();
    y.validate();
    const int n = static_cast<int>(y.size());
    const int n_exog = static_cast<int>(spec.exog_names.size());
    if (n_exog > 0) {
        if (exog.rows() != n || exog.cols() != n_exog) {
            throw std::invalid_argument("exogenous matrix must have one row per observation "
                                        "and one column per named regressor");
        }
        if (!exog.allFinite()) throw std::invalid_argument("exogenous values must be finite");
    }
    const auto c = differencing_coefficients(spec.d, spec.D, spec.s);
    PreparedData out;
    out.w = apply_diff(transform_series(y.values, spec.transform), c);
    const int m = static_cast<int>(out.w.size());
    out.exog_diff.resize(m, n_exog);
    for (int j = 0; j < n_exog; ++j) {
        std::vector<double> col(n);
        for (int t = 0; t < n; ++t) col[t] = exog(t, j);
        const auto dcol = apply_diff(col, c);
        for (int t = 0; t < m; ++t) out.exog_diff(t, j) = dcol[t];
    }
    return out;
}

void check_model_finite(const FittedSarimax& model) {
    auto ok = [](const Eigen::VectorXd& v) { return v.allFinite(); };
    if (!ok(model.phi) || !ok(model.theta) || !ok(model.Phi) || !ok(model.Theta) ||
        !ok(model.beta) || !std::isfinite(model.trend_const) || !std::isfinite(model.sigma2) ||
        model.sigma2 <= 0.0) {
        throw std::domain_error("model parameters must be finite with sigma2 > 0");
    }
}

std::vector<double> adjusted_series(const FittedSarimax& model, const PreparedData& data) {
    const int m = static_cast<int>(data.w.size());
    std::vector<double> e(data.w);
    const double c = model.spec.trend == TrendType::constant ? model.trend_const : 0.0;
    for (int t = 0; t < m; ++t) {
        double reg = c;
        if (model.beta.size() > 0) reg += data.exog_diff.row(t).dot(model.beta);
        e[t] -= reg;
    }
    return e;
}

ArmaStateSpace model_state_space(const FittedSarimax& model) {
    const auto abar = combined_coefficients(model.phi, model.Phi, model.spec.s, -1.0);
    const auto tbar = combined_coefficients(model.theta, model.Theta, model.spec.s, 1.0);
    return make_state_space(abar, tbar);
}

void format_vector(std::ostringstream& out, const char* key, const Eigen::VectorXd& v) {
    out << key << '=';
    char buf[64];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        if (i > 0) out << ',';
        out << buf;
    }
    out << '\n';
}

} // namespace

void SarimaxSpec::validate() const {
    if (p < 0 || d < 0 || q < 0 || P < 0 || D < 0 || Q < 0) {
        throw ConfigError("model orders must be non-negative");
    }
    if (s < 1) throw ConfigError("season length must be positive");
    if ((P != 0 || D != 0 || Q != 0) && s < 2) {
        throw ConfigError("seasonal orders require season length >= 2");
    }
}

Eigen::VectorXd constrain_ar(const Eigen::VectorXd& u) {
    const int m = static_cast<int>(u.size());
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) r[i] = std::clamp(std::tanh(u[i]), -kPacfClamp, kPacfClamp);
    Eigen::VectorXd phi = r;
    for (int k = 1; k < m; ++k) {
        const Eigen::VectorXd prev = phi.head(k);
        for (int i = 0; i < k; ++i) phi[i] = prev[i] - r[k] * prev[k - 1 - i];
        phi[k] = r[k];
    }
    return phi;
}

Eigen::VectorXd unconstrain_ar(const Eigen::VectorXd& phi_in) {
    const int m = static_cast<int>(phi_in.size());
    Eigen::VectorXd phi = phi_in;
    Eigen::VectorXd u(m);
    for (int k = m - 1; k >= 1; --k) {
        const double rk = std::clamp(phi[k], -kPacfClamp, kPacfClamp);
        u[k] = std::atanh(rk);
        const double denom = 1.0 - rk * rk;
        const Eigen::VectorXd cur = phi.head(k);
        for (int i = 0; i < k; ++i) phi[i] = (cur[i] + rk * cur[k - 1 - i]) / denom;
    }
    if (m > 0) u[0] = std::atanh(std::clamp(phi[0], -kPacfClamp, kPacfClamp));
    return u;
}

FittedSarimax fit_sarimax(const SarimaxSpec& spec, const TimeSeries& y,
                          const Eigen::MatrixXd& exog) {
    const PreparedData data = prepare_data(spec, y, exog);
    const int m = static_cast<int>(data.w.size());
    const int n_exog = static_cast<int>(spec.exog_names.size());
    const int pbar = spec.p + spec.s * spec.P;
    const int qbar = spec.q + spec.s * spec.Q;
    if (m <= spec.parameter_count() + std::max(pbar, qbar)) {
        throw std::invalid_argument("series too short for the requested model orders");
    }

    // All-zero regressors carry no information; exclude them and report a
    // zero coefficient so degenerate columns do not trip the rank check.
    std::vector<int> kept;
    for (int j = 0; j < n_exog; ++j) {
        if (data.exog_diff.col(j).cwiseAbs().maxCoeff() > 0.0) kept.push_back(j);
    }
    const int n_trend = spec.trend == TrendType::constant ? 1 : 0;
    const int k = n_trend + static_cast<int>(kept.size());
    Eigen::MatrixXd X(m, k);
    if (n_trend) X.col(0).setOnes();
    for (std::size_t i = 0; i < kept.size(); ++i) {
        X.col(n_trend + static_cast<int>(i)) = data.exog_diff.col(kept[i]);
    }
    const Eigen::Map<const Eigen::VectorXd> wvec(data.w.data(), m);
    if (k > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        qr.setThreshold(1e-10);
        if (qr.rank() < k) {
            throw ModelError("collinear regression design: rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(k));
        }
    }

    const int np = k + spec.p + spec.q + spec.P + spec.Q;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(np);
    if (k > 0) x0.head(k) = X.colPivHouseholderQr().solve(wvec);

    struct Coeffs {
        Eigen::VectorXd b, phi, theta, Phi, Theta;
    };
    auto unpack = [&](const Eigen::VectorXd& par) {
        Coeffs c;
        int off = 0;
        c.b = par.segment(off, k);
        off += k;
        c.phi = constrain_ar(par.segment(off, spec.p));
        off += spec.p;
        c.theta = constrain_ma(par.segment(off, spec.q));
        off += spec.q;
        c.Phi = constrain_ar(par.segment(off, spec.P));
        off += spec.P;
        c.Theta = constrain_ma(par.segment(off, spec.Q));
        return c;
    };
    auto residual = [&](const Eigen::VectorXd& b) {
        std::vector<double> e(data.w);
        if (k > 0) {
            const Eigen::VectorXd fit = X * b;
            for (int t = 0; t < m; ++t) e[t] -= fit[t];
        }
        return e;
    };

    // Conditional-sum-of-squares warm start: cheap, conditions on the first
    // pbar observations with zero pre-sample innovations.
    auto css_objective = [&](const Eigen::VectorXd& par) {
        const Coeffs c = unpack(par);
        const auto abar = combined_coefficients(c.phi, c.Phi, spec.s, -1.0);
        const auto tbar = combined_coefficients(c.theta, c.Theta, spec.s, 1.0);
        const auto e = residual(c.b);
        const int start = pbar;
        const int n_eff = m - start;
        std::vector<double> eps(m, 0.0);
        double ssq = 0.0;
        for (int t = start; t < m; ++t) {
            double val = e[t];
            for (int i = 1; i <= pbar && i <= t; ++i) val -= abar[i - 1] * e[t - i];
            for (int j = 1; j <= qbar && j <= t - start; ++j) val -= tbar[j - 1] * eps[t - j];
            eps[t] = val;
            ssq += val * val;
        }
        return 0.5 * n_eff * std::log(std::max(ssq / n_eff, 1e-300));
    };
    // Filter breakdown (covariance overflow near the stationarity boundary)
    // marks the region as infeasible rather than aborting the fit.
    auto neg_loglik = [&](const Eigen::VectorXd& par) {
        const Coeffs c = unpack(par);
        const auto ss = make_state_space(combined_coefficients(c.phi, c.Phi, spec.s, -1.0),
                                         combined_coefficients(c.theta, c.Theta, spec.s, 1.0));
        try {
            const FilterStats st = run_filter(residual(c.b), ss, false);
            const double s2 = std::max(st.ssq / st.n, 1e-300);
            const double nll = 0.5 * st.n * (kLog2Pi + 1.0 + std::log(s2)) + 0.5 * st.slogF;
            return std::isfinite(nll) ? nll : std::numeric_limits<double>::infinity();
        } catch (const ModelError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    auto assemble = [&](const Eigen::VectorXd& par) {
        const Coeffs c = unpack(par);
        FittedSarimax f;
        f.spec = spec;
        f.phi = c.phi;
        f.theta = c.theta;
        f.Phi = c.Phi;
        f.Theta = c.Theta;
        f.beta = Eigen::VectorXd::Zero(n_exog);
        for (std::size_t i = 0; i < kept.size(); ++i) f.beta[kept[i]] = c.b[n_trend + i];
        f.trend_const = n_trend ? c.b[0] : 0.0;
        const FilterStats st = run_filter(adjusted_series(f, data), model_state_space(f), false);
        f.sigma2 = std::max(st.ssq / st.n, 1e-300);
        f.loglik = -0.5 * st.n * (kLog2Pi + 1.0 + std::log(f.sigma2)) - 0.5 * st.slogF;
        return f;
    };

    if (np == 0) return assemble(x0);

    Eigen::VectorXd start = x0;
    if (m - pbar > np) {
        const OptimResult css = minimize_bfgs(css_objective, x0, 200, 1e-4);
        if (css.x.allFinite() && css.value <= css_objective(x0)) start = css.x;
    }
    const OptimResult opt = minimize_bfgs(neg_loglik, start, 500, 1e-6);
    FittedSarimax model = assemble(opt.x);
    if (!opt.converged) {
        throw SarimaxConvergenceError(
            "maximum-likelihood optimization did not converge within 500 iterations "
            "(gradient norm " +
                std::to_string(opt.grad_norm) + ")",
            model);
    }
    return model;
}

double sarimax_loglikelihood(const FittedSarimax& model, const TimeSeries& y,
                             const Eigen::MatrixXd& exog) {
    check_model_finite(model);
    const PreparedData data = prepare_data(model.spec, y, exog);
    const FilterStats st =
        run_filter(adjusted_series(model, data), model_state_space(model), false);
    return -0.5 * (st.n * (kLog2Pi + std::log(model.sigma2)) + st.slogF +
                   st.ssq / model.sigma2);
}

FilterRun sarimax_filter(const FittedSarimax& model, const TimeSeries& y,
                         const Eigen::MatrixXd& exog) {
    check_model_finite(model);
    const PreparedData data = prepare_data(model.spec, y, exog);
    const FilterStats st =
        run_filter(adjusted_series(model, data), model_state_space(model), true);
    FilterRun run;
    run.innovations = st.v;
    run.one_step_ahead = st.pred;
    run.innovation_variance.resize(st.F.size());
    for (std::size_t i = 0; i < st.F.size(); ++i) {
        run.innovation_variance[i] = model.sigma2 * st.F[i];
    }
    run.next_prediction = st.final_state[0];
    run.loglik = -0.5 * (st.n * (kLog2Pi + std::log(model.sigma2)) + st.slogF +
                         st.ssq / model.sigma2);
    return run;
}

std::vector<double> forecast_sarimax(const FittedSarimax& model, const TimeSeries& history,
                                     const Eigen::MatrixXd& exog_history,
                                     const Eigen::MatrixXd& exog_future, int h) {
    check_model_finite(model);
    if (h < 1) throw std::invalid_argument("forecast horizon must be at least 1");
    const SarimaxSpec& spec = model.spec;
    const int n = static_cast<int>(history.size());
    const int n_exog = static_cast<int>(spec.exog_names.size());
    Eigen::MatrixXd exog_all;
    if (n_exog > 0) {
        if (exog_history.rows() != n || exog_history.cols() != n_exog) {
            throw std::invalid_argument("exogenous history must align with the series");
        }
        if (exog_future.rows() < h || exog_future.cols() != n_exog) {
            throw std::invalid_argument("missing future exogenous rows for the horizon");
        }
        exog_all.resize(n + h, n_exog);
        exog_all.topRows(n) = exog_history;
        exog_all.bottomRows(h) = exog_future.topRows(h);
    }
    spec.validate();
    history.validate();

    const auto c = differencing_coefficients(spec.d, spec.D, spec.s);
    const int lead = static_cast<int>(c.size()) - 1;
    std::vector<double> ystar = transform_series(history.values, spec.transform);
    const std::vector<double> w = apply_diff(ystar, c);
    const int m = static_cast<int>(w.size());

    Eigen::MatrixXd exog_diff(m + h, n_exog);
    for (int j = 0; j < n_exog; ++j) {
        std::vector<double> col(n + h);
        for (int t = 0; t < n + h; ++t) col[t] = exog_all(t, j);
        const auto dcol = apply_diff(col, c);
        for (int t = 0; t < m + h; ++t) exog_diff(t, j) = dcol[t];
    }

    std::vector<double> e(w);
    const double trend = spec.trend == TrendType::constant ? model.trend_const : 0.0;
    for (int t = 0; t < m; ++t) {
        double reg = trend;
        if (n_exog > 0) reg += exog_diff.row(t).dot(model.beta);
        e[t] -= reg;
    }

    const ArmaStateSpace ss = model_state_space(model);
    const FilterStats st = run_filter(e, ss, false);
    Eigen::VectorXd a = st.final_state;

    std::vector<double> out(h);
    for (int j = 0; j < h; ++j) {
        double what = a[0] + trend;
        if (n_exog > 0) what += exog_diff.row(m + j).dot(model.beta);
        a = companion_mul_vec(ss.tcol, a);
        // Undo differencing: ystar_t = w_t - sum_{i>=1} c_i ystar_{t-i}.
        double val = what;
        const std::size_t end = ystar.size();
        for (int i = 1; i <= lead; ++i) val -= c[i] * ystar[end - i];
        ystar.push_back(val);
        out[j] = spec.transform == SarimaxTransform::log1p ? std::max(0.0, std::expm1(val))
                                                           : val;
    }
    return out;
}

std::string serialize_sarimax(const FittedSarimax& model) {
    std::ostringstream out;
    const SarimaxSpec& s = model.spec;
    out << "p=" << s.p << "\nd=" << s.d << "\nq=" << s.q << "\nP=" << s.P << "\nD=" << s.D
        << "\nQ=" << s.Q << "\ns=" << s.s << '\n';
    out << "trend=" << (s.trend == TrendType::constant ? "constant" : "none") << '\n';
    out << "transform=" << (s.transform == SarimaxTransform::log1p ? "log1p" : "identity")
        << '\n';
    out << "exog_names=";
    for (std::size_t i = 0; i < s.exog_names.size(); ++i) {
        if (i > 0) out << ',';
        out << s.exog_names[i];
    }
    out << '\n';
    format_vector(out, "phi", model.phi);
    format_vector(out, "theta", model.theta);
    format_vector(out, "Phi", model.Phi);
    format_vector(out, "Theta", model.Theta);
    format_vector(out, "beta", model.beta);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", model.trend_const);
    out << "trend_const=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", model.sigma2);
    out << "sigma2=" << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", model.loglik);
    out << "loglik=" << buf << '\n';
    return out.str();
}

FittedSarimax deserialize_sarimax(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("malformed model snapshot line: " + line);
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("model snapshot missing key: " + key);
        return it->second;
    };
    auto to_int = [&](const std::string& key) { return std::stoi(need(key)); };
    auto to_double = [&](const std::string& key) { return std::stod(need(key)); };
    auto split = [](const std::string& v) {
        std::vector<std::string> parts;
        if (v.empty()) return parts;
        std::istringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        return parts;
    };
    auto to_vector = [&](const std::string& key) {
        const auto parts = split(need(key));
        Eigen::VectorXd v(static_cast<int>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<int>(i)] = std::stod(parts[i]);
        return v;
    };

    FittedSarimax f;
    f.spec.p = to_int("p");
    f.spec.d = to_int("d");
    f.spec.q = to_int("q");
    f.spec.P = to_int("P");
    f.spec.D = to_int("D");
    f.spec.Q = to_int("Q");
    f.spec.s = to_int("s");
    f.spec.trend = need("trend") == "constant" ? TrendType::constant : TrendType::none;
    f.spec.transform =
        need("transform") == "log1p" ? SarimaxTransform::log1p : SarimaxTransform::identity;
    f.spec.exog_names = split(need("exog_names"));
    f.phi = to_vector("phi");
    f.theta = to_vector("theta");
    f.Phi = to_vector("Phi");
    f.Theta = to_vector("Theta");
    f.beta = to_vector("beta");
    f.trend_const = to_double("trend_const");
    f.sigma2 = to_double("sigma2");
    f.loglik = to_double("loglik");
    f.spec.validate();
    return f;
}

} // namespace exocast
