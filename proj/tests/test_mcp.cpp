#include "exocast/mcp.hpp"

#include "exocast/errors.hpp"
#include "support/test_oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace exocast;
using exocast::testing::mcp_global_objective;

namespace {

TimeSeries series(std::vector<double> v) {
    return {Date(2020, 2, 26), std::move(v)};
}

TimeSeries random_counts(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> dist(3.0, 0.4);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = dist(rng);
    return series(std::move(v));
}

/// Design whose matrix is overwritten with synthetic columns; the lag
/// bookkeeping stays valid for fit/objective purposes.
LagDesign synthetic_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& z) {
    LagDesign d = build_lag_design(random_counts(static_cast<int>(X.rows()) + 22, 99),
                                   Eigen::MatrixXd(), 1, 1);
    d.matrix = X;
    d.response = z;
    d.columns.assign(static_cast<std::size_t>(X.cols()), LagColumn{-1, 1});
    d.column_names.assign(static_cast<std::size_t>(X.cols()), "synthetic");
    return d;
}

} // namespace

TEST_CASE("lag design construction") {
    SECTION("column count is (1 + n_exog) * k") {
        Eigen::MatrixXd exog(30, 1);
        for (int t = 0; t < 30; ++t) exog(t, 0) = 5.0 + t;
        const LagDesign d = build_lag_design(random_counts(30, 1), exog, 1, 14);
        CHECK(d.matrix.cols() == 28);
        CHECK(d.columns.size() == 28);
        // target lags first, then the exogenous block
        CHECK(d.columns[0].source == -1);
        CHECK(d.columns[0].lag == 1);
        CHECK(d.columns[14].source == 0);
        CHECK(d.columns[27].lag == 14);
    }
    SECTION("first usable row references exactly lag h+k-1") {
        const int h = 14, k = 14;
        const TimeSeries y = random_counts(40, 2);
        const LagDesign d = build_lag_design(y, Eigen::MatrixXd(), h, k);
        // first row targets t = h+k+6 = 34; its deepest lag lands on
        // z index t-(h+k-1) = 7, the first defined weekly log-return
        CHECK(d.matrix.rows() == 40 - 34);
        const double deepest = d.matrix(0, k - 1);
        const double z7 = std::log1p(y.values[7]) - std::log1p(y.values[0]);
        CHECK_THAT(deepest, Catch::Matchers::WithinAbs(z7, 1e-12));
    }
    SECTION("constant target produces zero target-lag columns") {
        const LagDesign d =
            build_lag_design(series(std::vector<double>(40, 3.0)), Eigen::MatrixXd(), 1, 14);
        CHECK(d.matrix.leftCols(14).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("too-short series is a length error") {
        CHECK_THROWS_AS(build_lag_design(random_counts(21, 3), Eigen::MatrixXd(), 1, 14),
                        std::invalid_argument);
        CHECK_NOTHROW(build_lag_design(random_counts(22, 3), Eigen::MatrixXd(), 1, 14));
    }
    SECTION("misaligned exogenous matrix is rejected") {
        Eigen::MatrixXd exog(10, 1);
        exog.setOnes();
        CHECK_THROWS_AS(build_lag_design(random_counts(30, 4), exog, 1, 14),
                        std::invalid_argument);
    }
}

TEST_CASE("sure-independence screening") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> noise(0.0, 1.0);
    const int n = 60;
    Eigen::MatrixXd X(n, 11);
    for (int j = 0; j < 11; ++j)
        for (int t = 0; t < n; ++t) X(t, j) = noise(rng);
    Eigen::VectorXd z(n);
    for (int t = 0; t < n; ++t) z[t] = noise(rng);
    X.col(4) = z; // exact copy of the response

    SECTION("a copy of the response is always kept") {
        LagDesign d = synthetic_design(X, z);
        const LagDesign kept = sis_screen(d, 1);
        REQUIRE(kept.matrix.cols() == 1);
        CHECK((kept.matrix.col(0) - z).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("selection is invariant to positive column rescaling") {
        LagDesign d = synthetic_design(X, z);
        const LagDesign a = sis_screen(d, 4);
        LagDesign scaled = d;
        scaled.matrix.col(2) *= 1000.0;
        scaled.matrix.col(7) *= 1e-6;
        const LagDesign b = sis_screen(scaled, 4);
        for (int j = 0; j < 4; ++j) {
            CHECK(a.columns[j].source == b.columns[j].source);
            CHECK(a.columns[j].lag == b.columns[j].lag);
        }
    }
    SECTION("m >= column count is the identity") {
        LagDesign d = synthetic_design(X, z);
        const LagDesign kept = sis_screen(d, 11);
        CHECK((kept.matrix - d.matrix).cwiseAbs().maxCoeff() == 0.0);
        const LagDesign more = sis_screen(d, 50);
        CHECK((more.matrix - d.matrix).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("kept columns preserve design order") {
        LagDesign d = build_lag_design(random_counts(80, 5), Eigen::MatrixXd(), 1, 14);
        const LagDesign kept = sis_screen(d, 7);
        REQUIRE(kept.columns.size() == 7);
        for (std::size_t i = 1; i < kept.columns.size(); ++i) {
            CHECK(kept.columns[i - 1].lag < kept.columns[i].lag);
        }
    }
}

TEST_CASE("penalty closed form") {
    CHECK(mcp_penalty(0.0, 1.0, 3.0) == 0.0);
    // |beta| = 2*gamma*lambda lies on the flat region: gamma*lambda^2/2
    CHECK_THAT(mcp_penalty(6.0, 1.0, 3.0), Catch::Matchers::WithinAbs(1.5, 1e-15));
    CHECK_THAT(mcp_penalty(-6.0, 1.0, 3.0), Catch::Matchers::WithinAbs(1.5, 1e-15));
    // continuity at the knee |beta| = gamma*lambda
    CHECK_THAT(mcp_penalty(3.0, 1.0, 3.0), Catch::Matchers::WithinAbs(1.5, 1e-15));
    CHECK_THAT(mcp_penalty(3.0 - 1e-9, 1.0, 3.0), Catch::Matchers::WithinAbs(1.5, 1e-8));
    CHECK_THROWS_AS(mcp_penalty(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mcp_penalty(1.0, -0.5, 3.0), std::invalid_argument);
}

TEST_CASE("penalty properties") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> betas(-10.0, 10.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double b = betas(rng);
        const double lambda = 0.1 + (rng() % 100) / 50.0;
        const double gamma = 1.5 + (rng() % 100) / 20.0;
        const double p = mcp_penalty(b, lambda, gamma);
        CHECK(p >= 0.0);
        CHECK(p <= 0.5 * gamma * lambda * lambda + 1e-15);
        CHECK(mcp_penalty(-b, lambda, gamma) == p);
        CHECK(mcp_penalty(b * 1.01, lambda, gamma) >= p - 1e-12);
        // gamma -> infinity converges to the lasso penalty
        CHECK_THAT(mcp_penalty(b, lambda, 1e6),
                   Catch::Matchers::WithinAbs(lambda * std::abs(b), 1e-4));
    }
}

TEST_CASE("coordinate descent against closed forms") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> noise(0.0, 1.0);
    const int n = 40, p = 4;

    // exactly orthonormal columns (after internal standardization) built by
    // QR of a random matrix, then rescaled to unit biased sd and zero mean
    Eigen::MatrixXd raw(n, p);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < p; ++j) raw(t, j) = noise(rng);
    Eigen::MatrixXd centered = raw.rowwise() - raw.colwise().mean();
    Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(centered)
                            .householderQ() *
                        Eigen::MatrixXd::Identity(n, p);
    Q = Q.rowwise() - Q.colwise().mean();
    for (int j = 0; j < p; ++j) Q.col(j) *= std::sqrt(static_cast<double>(n)) / Q.col(j).norm();

    Eigen::VectorXd z(n);
    for (int t = 0; t < n; ++t) z[t] = noise(rng);

    SECTION("orthonormal designs reduce to firm thresholding") {
        const LagDesign d = synthetic_design(Q, z);
        const double zbar = z.mean();
        for (double lambda : {0.01, 0.05, 0.2}) {
            const McpModel m = fit_mcp(d, lambda, 3.0);
            for (int j = 0; j < p; ++j) {
                const double b = Q.col(j).dot(z - Eigen::VectorXd::Constant(n, zbar)) / n;
                double expect;
                const double ab = std::abs(b);
                if (ab <= lambda) {
                    expect = 0.0;
                } else if (ab <= 3.0 * lambda) {
                    expect = (b > 0 ? 1.0 : -1.0) * (ab - lambda) / (1.0 - 1.0 / 3.0);
                } else {
                    expect = b;
                }
                CHECK_THAT(m.beta[j], Catch::Matchers::WithinAbs(expect, 1e-8));
            }
        }
    }
    SECTION("lambda = 0 equals ordinary least squares") {
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        const LagDesign d = synthetic_design(X, z);
        const McpModel m = fit_mcp(d, 0.0, 3.0);
        // oracle: least squares with intercept
        Eigen::MatrixXd Xi(n, p + 1);
        Xi.col(0).setOnes();
        Xi.rightCols(p) = X;
        const Eigen::VectorXd ols = (Xi.transpose() * Xi).ldlt().solve(Xi.transpose() * z);
        CHECK_THAT(m.intercept, Catch::Matchers::WithinAbs(ols[0], 1e-6));
        for (int j = 0; j < p; ++j) {
            CHECK_THAT(m.beta[j], Catch::Matchers::WithinAbs(ols[j + 1], 1e-6));
        }
        // residuals orthogonal to columns
        const Eigen::VectorXd r = z - Xi * ols;
        for (int j = 0; j < p; ++j) CHECK(std::abs(X.col(j).dot(r)) / n < 1e-8);
    }
    SECTION("lambda at lambda_max shrinks everything to zero") {
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        const LagDesign d = synthetic_design(X, z);
        const McpModel m = fit_mcp(d, lambda_max(d), 3.0);
        CHECK(m.beta.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("objective path is non-increasing") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 30, p = 6;
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        // correlate neighboring columns to make the path longer
        for (int j = 1; j < p; ++j) X.col(j) = 0.7 * X.col(j - 1) + 0.3 * X.col(j);
        Eigen::VectorXd z(n);
        for (int t = 0; t < n; ++t) z[t] = noise(rng);
        const LagDesign d = synthetic_design(X, z);
        const McpModel m = fit_mcp(d, 0.05, 3.0);
        REQUIRE(!m.objective_path.empty());
        for (std::size_t s = 1; s < m.objective_path.size(); ++s) {
            CHECK(m.objective_path[s] <= m.objective_path[s - 1] + 1e-12);
        }
    }
}

TEST_CASE("coordinate descent matches the exhaustive-support oracle") {
    std::mt19937_64 rng(57);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 20, p = 6;
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(p);
        beta_true[0] = 2.0;
        beta_true[3] = -1.0;
        Eigen::VectorXd z = X * beta_true;
        for (int t = 0; t < n; ++t) z[t] += 0.5 * noise(rng);

        // standardize exactly as fit_mcp does, so objectives are comparable
        Eigen::MatrixXd Xs(n, p);
        for (int j = 0; j < p; ++j) {
            const double mu = X.col(j).mean();
            Eigen::VectorXd c = X.col(j).array() - mu;
            Xs.col(j) = c * std::sqrt(static_cast<double>(n)) / c.norm();
        }
        const Eigen::VectorXd zc = z.array() - z.mean();

        const LagDesign d = synthetic_design(X, z);
        const double lmax = lambda_max(d);
        for (double frac : {0.8, 0.3, 0.1}) {
            const double lambda = lmax * frac;
            const McpModel m = fit_mcp(d, lambda, 3.0);
            Eigen::VectorXd beta_std(p);
            for (int j = 0; j < p; ++j) {
                const double sd = std::sqrt((X.col(j).array() - X.col(j).mean()).square().mean());
                beta_std[j] = m.beta[j] * sd;
            }
            const double cd_obj = mcp_objective(zc, Xs, beta_std, lambda, 3.0);
            const double oracle = mcp_global_objective(Xs, zc, lambda, 3.0);
            CHECK_THAT(cd_obj, Catch::Matchers::WithinAbs(oracle, 1e-4));
            CHECK(cd_obj >= oracle - 1e-9);
        }
    }
}

TEST_CASE("cross-validated lambda selection") {
    SECTION("noiseless linear relation is recovered") {
        std::mt19937_64 rng(71);
        std::normal_distribution<double> noise(0.0, 1.0);
        const int n = 60, p = 5;
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        const Eigen::VectorXd z = 3.0 * X.col(1);
        const LagDesign d = synthetic_design(X, z);
        const double lambda = select_lambda_cv(d, 3.0, 5);
        const McpModel m = fit_mcp(d, lambda, 3.0);
        CHECK_THAT(m.beta[1], Catch::Matchers::WithinAbs(3.0, 1e-3));
        for (int j : {0, 2, 3, 4}) CHECK(std::abs(m.beta[j]) < 1e-3);
    }
    SECTION("pure-noise response selects a near-zero model") {
        std::mt19937_64 rng(73);
        std::normal_distribution<double> noise(0.0, 1.0);
        const int n = 80, p = 5;
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        Eigen::VectorXd z(n);
        for (int t = 0; t < n; ++t) z[t] = noise(rng);
        const LagDesign d = synthetic_design(X, z);
        const McpModel m = fit_mcp(d, select_lambda_cv(d, 3.0, 5), 3.0);
        CHECK(m.beta.cwiseAbs().maxCoeff() < 0.5);
    }
    SECTION("leave-one-out runs") {
        std::mt19937_64 rng(79);
        std::normal_distribution<double> noise(0.0, 1.0);
        const int n = 25, p = 3;
        Eigen::MatrixXd X(n, p);
        for (int t = 0; t < n; ++t)
            for (int j = 0; j < p; ++j) X(t, j) = noise(rng);
        Eigen::VectorXd z = X.col(0);
        const LagDesign d = synthetic_design(X, z);
        CHECK_NOTHROW(select_lambda_cv(d, 3.0, n));
        CHECK_THROWS_AS(select_lambda_cv(d, 3.0, n + 1), std::invalid_argument);
        CHECK_THROWS_AS(select_lambda_cv(d, 3.0, 0), std::invalid_argument);
    }
    SECTION("constant response is a degenerate design") {
        std::mt19937_64 rng(83);
        std::normal_distribution<double> noise(0.0, 1.0);
        Eigen::MatrixXd X(20, 3);
        for (int t = 0; t < 20; ++t)
            for (int j = 0; j < 3; ++j) X(t, j) = noise(rng);
        const LagDesign d = synthetic_design(X, Eigen::VectorXd::Zero(20));
        CHECK_THROWS_AS(select_lambda_cv(d, 3.0, 5), ModelError);
    }
}

TEST_CASE("forecast inversion") {
    // model with zero coefficients over a 1-lag design
    const TimeSeries recent = random_counts(40, 91);
    LagDesign d = build_lag_design(recent, Eigen::MatrixXd(), 1, 14);
    McpModel zero = fit_mcp(d, lambda_max(d), 3.0);
    REQUIRE(zero.beta.cwiseAbs().maxCoeff() == 0.0);

    SECTION("intercept log 2 doubles the base: (9+1)*2-1 = 19") {
        zero.intercept = std::log(2.0);
        McpModel m = zero;
        TimeSeries y = recent;
        y.values[y.size() - 7] = 9.0; // base value y_{t+1-7}
        const double f = forecast_mcp(m, y, Eigen::MatrixXd(), 1);
        CHECK_THAT(f, Catch::Matchers::WithinAbs(19.0, 1e-10));
    }
    SECTION("all-zero model forecasts the base value") {
        McpModel m = zero;
        m.intercept = 0.0;
        const double f = forecast_mcp(m, recent, Eigen::MatrixXd(), 1);
        CHECK_THAT(f, Catch::Matchers::WithinAbs(recent.values[recent.size() - 7], 1e-10));
    }
    SECTION("horizon must match the design") {
        CHECK_THROWS_AS(forecast_mcp(zero, recent, Eigen::MatrixXd(), 2),
                        std::invalid_argument);
    }
    SECTION("anchor substitutes for the unavailable base beyond h=7") {
        LagDesign d8 = build_lag_design(recent, Eigen::MatrixXd(), 8, 14);
        McpModel m8 = fit_mcp(d8, lambda_max(d8), 3.0);
        m8.intercept = 0.0;
        // h=8 needs y at t+1, which is out of sample: anchor supplies it
        const double f = forecast_mcp(m8, recent, Eigen::MatrixXd(), 8, 42.0);
        CHECK_THAT(f, Catch::Matchers::WithinAbs(42.0, 1e-10));
        CHECK_THROWS_AS(forecast_mcp(m8, recent, Eigen::MatrixXd(), 8),
                        std::invalid_argument);
    }
    SECTION("noiseless autoregressive z-dynamics are recovered exactly") {
        // y built so that z_t = 0.5 * z_{t-1} exactly
        const int n = 30;
        std::vector<double> z(n, 0.0);
        z[7] = 0.8;
        for (int t = 8; t < n; ++t) z[t] = 0.5 * z[t - 1];
        std::vector<double> y(n, 10.0);
        for (int t = 7; t < n; ++t) y[t] = (y[t - 7] + 1.0) * std::exp(z[t]) - 1.0;
        const TimeSeries ys = series(y);
        LagDesign dz = build_lag_design(ys, Eigen::MatrixXd(), 1, 3);
        const McpModel m = fit_mcp(dz, 1e-6, 3.0);
        const double f = forecast_mcp(m, ys, Eigen::MatrixXd(), 1);
        const double z_next = 0.5 * (std::log1p(y[n - 1]) - std::log1p(y[n - 8]));
        const double expect = (y[n - 7] + 1.0) * std::exp(z_next) - 1.0;
        CHECK_THAT(f, Catch::Matchers::WithinRel(expect, 1e-6));
    }
}
