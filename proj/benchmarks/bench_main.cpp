// Microbenchmarks for the numerical hot paths: Kalman filtering, MCP
// coordinate descent, the rolling harness, and the GCN forward pass.

#include "exocast/evaluation.hpp"
#include "exocast/mcp.hpp"
#include "exocast/mobility.hpp"
#include "exocast/random_walk.hpp"
#include "exocast/sarimax.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

exocast::TimeSeries simulated_series(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    double prev = 0.0;
    for (int t = 0; t < n; ++t) {
        double value = 0.6 * prev + noise(rng);
        y[static_cast<std::size_t>(t)] = value + 50.0;
        prev = value;
    }
    return {exocast::Date{2020, 2, 26}, std::move(y)};
}

void bm_sarimax_loglikelihood(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    exocast::TimeSeries y = simulated_series(n, 7);
    exocast::SarimaxSpec spec;
    spec.p = 2;
    spec.d = 1;
    spec.q = 2;
    spec.P = 1;
    spec.D = 0;
    spec.Q = 1;
    spec.s = 7;
    exocast::FittedSarimax model;
    model.spec = spec;
    model.phi = Eigen::Vector2d(0.4, 0.1);
    model.theta = Eigen::Vector2d(0.2, 0.05);
    model.Phi = Eigen::VectorXd::Constant(1, 0.3);
    model.Theta = Eigen::VectorXd::Constant(1, 0.1);
    model.sigma2 = 1.0;
    for (auto _ : state) {
        double ll = exocast::sarimax_loglikelihood(model, y);
        benchmark::DoNotOptimize(ll);
    }
}

void bm_mcp_coordinate_descent(benchmark::State& state) {
    exocast::TimeSeries y = simulated_series(400, 11);
    exocast::LagDesign design = exocast::build_lag_design(y, Eigen::MatrixXd(), 7, 14);
    const double lmax = exocast::lambda_max(design);
    for (auto _ : state) {
        exocast::McpModel model = exocast::fit_mcp(design, lmax / 50.0, 3.0);
        benchmark::DoNotOptimize(model.beta);
    }
}

struct RwAdapter final : exocast::Forecaster {
    std::string name() const override { return "RW"; }
    std::vector<double> forecast_window(const exocast::WindowView& view) const override {
        exocast::RandomWalkModel model = exocast::fit_rw(view.train_target());
        return exocast::forecast_rw(model, view.h_max());
    }
};

void bm_rolling_rw(benchmark::State& state) {
    exocast::TimeSeries y = simulated_series(376, 3);
    exocast::RollingSchedule schedule = exocast::build_schedule(376, 236, 14, 14);
    RwAdapter model;
    Eigen::MatrixXd exog;
    for (auto _ : state) {
        exocast::ModelEvaluation result = exocast::evaluate_model(model, y, exog, schedule, 1);
        benchmark::DoNotOptimize(result.per_horizon);
    }
}

void bm_gcn_forward(benchmark::State& state) {
    const int n = 51;
    const int f = 16;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) adjacency(i, j) = unit(rng) < 0.2 ? 1.0 : 0.0;
    exocast::BinaryAdjacency adj{adjacency, 0};
    Eigen::MatrixXd a_hat = exocast::normalize_adjacency(adj);
    Eigen::MatrixXd x(n, f);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) x(i, j) = noise(rng);
    exocast::GcnWeights weights;
    weights.W0 = Eigen::MatrixXd::NullaryExpr(f, 8, [&]() { return noise(rng); });
    weights.W1 = Eigen::MatrixXd::NullaryExpr(8, 1, [&]() { return noise(rng); });
    for (auto _ : state) {
        Eigen::MatrixXd out =
            exocast::gcn_forward(x, a_hat, weights, exocast::FinalActivation::sigmoid);
        benchmark::DoNotOptimize(out);
    }
}

} // namespace

BENCHMARK(bm_sarimax_loglikelihood)->Arg(236)->Arg(376);
BENCHMARK(bm_mcp_coordinate_descent);
BENCHMARK(bm_rolling_rw);
BENCHMARK(bm_gcn_forward);

BENCHMARK_MAIN();
