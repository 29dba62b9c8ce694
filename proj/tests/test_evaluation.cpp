#include "exocast/evaluation.hpp"

#include "exocast/errors.hpp"
#include "exocast/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace exocast;

namespace {

TimeSeries series(std::vector<double> v) {
    return {Date(2020, 2, 26), std::move(v)};
}

TimeSeries random_counts(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> dist(3.0, 0.5);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = dist(rng);
    return series(std::move(v));
}

/// Reads the scored actuals back through the harness hatch; forecasts are
/// then exact, so every sMAPE must be identically zero.
class PerfectForesight : public Forecaster {
public:
    std::string name() const override { return "oracle"; }
    std::vector<double> forecast_window(const WindowView& view) const override {
        std::vector<double> out;
        for (int h = 1; h <= view.h_max(); ++h) out.push_back(view.actual(h));
        return out;
    }
};

/// Repeats the last training value, the simplest legitimate forecaster.
class LastValue : public Forecaster {
public:
    std::string name() const override { return "last_value"; }
    std::vector<double> forecast_window(const WindowView& view) const override {
        const TimeSeries train = view.train_target();
        return std::vector<double>(static_cast<std::size_t>(view.h_max()),
                                   train.values.back());
    }
};

/// Deliberately touches one index past the training boundary.
class LookAhead : public Forecaster {
public:
    std::string name() const override { return "look_ahead"; }
    std::vector<double> forecast_window(const WindowView& view) const override {
        TimeSeries train = view.train_target();
        Eigen::MatrixXd exog = view.future_exog(view.h_max() + 1);
        (void)exog;
        return std::vector<double>(static_cast<std::size_t>(view.h_max()), 0.0);
    }
};

/// Fails on selected windows to exercise the exclusion path.
class FailsOnWindow : public Forecaster {
public:
    explicit FailsOnWindow(int which) : which_(which) {}
    std::string name() const override { return "flaky"; }
    std::vector<double> forecast_window(const WindowView& view) const override {
        if (counter_++ == which_) throw ModelError("synthetic failure");
        const TimeSeries train = view.train_target();
        return std::vector<double>(static_cast<std::size_t>(view.h_max()),
                                   train.values.back());
    }

private:
    int which_;
    mutable int counter_ = 0;
};

} // namespace

TEST_CASE("schedule construction") {
    SECTION("full-length national series yields 9 windows") {
        const RollingSchedule s = build_schedule(376, 236, 14, 14);
        REQUIRE(s.windows() == 9);
        CHECK(s.train_ends.front() == 236);
        CHECK(s.train_ends.back() == 348);
        for (int w = 1; w < s.windows(); ++w) {
            CHECK(s.train_ends[w] - s.train_ends[w - 1] == 14);
        }
        // last window's final target index stays in range
        CHECK(s.target_index(8, 14) == 361);
    }
    SECTION("short series yield few windows") {
        const RollingSchedule s = build_schedule(39, 10, 14, 14);
        REQUIRE(s.windows() == 2);
        CHECK(s.train_ends[0] == 10);
        CHECK(s.train_ends[1] == 24);

        const RollingSchedule one = build_schedule(30, 10, 14, 14);
        CHECK(one.windows() == 1);
    }
    SECTION("no window fits") {
        CHECK_THROWS_AS(build_schedule(50, 40, 14, 14), ConfigError);
        CHECK_THROWS_AS(build_schedule(14, 0, 14, 14), ConfigError);
    }
    SECTION("invalid arguments") {
        CHECK_THROWS_AS(build_schedule(100, 50, 0, 14), ConfigError);
        CHECK_THROWS_AS(build_schedule(100, 50, 14, 0), ConfigError);
        CHECK_THROWS_AS(build_schedule(0, 0, 14, 14), ConfigError);
    }
    SECTION("boundary: train_end + h_max must stay strictly inside") {
        // 250 + 14 = 264 < 265 works; at 264 the window is dropped
        CHECK(build_schedule(265, 250, 14, 14).windows() == 1);
        CHECK_THROWS_AS(build_schedule(264, 250, 14, 14), ConfigError);
    }
}

TEST_CASE("window view access control") {
    const TimeSeries y = random_counts(60, 5);
    Eigen::MatrixXd exog(60, 2);
    for (int t = 0; t < 60; ++t) {
        exog(t, 0) = t;
        exog(t, 1) = 2.0 * t;
    }
    const WindowView view(y, exog, 40, 14);

    SECTION("training slices stop at the boundary") {
        const TimeSeries train = view.train_target();
        CHECK(train.size() == 40);
        CHECK(train.values.back() == y.values[39]);
        CHECK(view.train_exog().rows() == 40);
        CHECK(view.max_target_index_served() == 39);
    }
    SECTION("future exogenous rows are limited to the forecast span") {
        const Eigen::MatrixXd fx = view.future_exog(14);
        CHECK(fx.rows() == 14);
        CHECK(fx(0, 0) == 40.0);
        CHECK_THROWS_AS(view.future_exog(15), std::logic_error);
        CHECK_THROWS_AS(view.future_exog(0), std::logic_error);
    }
    SECTION("actuals readback is not counted as model access") {
        CHECK(view.actual(1) == y.values[40]);
        CHECK(view.actual(14) == y.values[53]);
        CHECK(view.max_target_index_served() == -1);
        CHECK_THROWS_AS(view.actual(15), std::logic_error);
        CHECK_THROWS_AS(view.actual(0), std::logic_error);
    }
}

TEST_CASE("rolling evaluation") {
    const TimeSeries y = random_counts(120, 11);
    const Eigen::MatrixXd exog(0, 0);
    const RollingSchedule s = build_schedule(120, 60, 14, 14);
    REQUIRE(s.windows() == 4);

    SECTION("perfect foresight scores exactly zero at every horizon") {
        const ModelEvaluation ev = evaluate_model(PerfectForesight(), y, exog, s);
        REQUIRE(ev.per_horizon.size() == 14);
        for (double v : ev.per_horizon) CHECK(v == 0.0);
        CHECK(ev.windows_used == 4);
        CHECK(ev.exclusions.empty());
    }
    SECTION("per-horizon sMAPE pools pairs across windows") {
        const ModelEvaluation ev = evaluate_model(LastValue(), y, exog, s);
        for (int h = 1; h <= 14; ++h) {
            std::vector<double> f, a;
            for (int w = 0; w < s.windows(); ++w) {
                f.push_back(y.values[static_cast<std::size_t>(s.train_ends[w] - 1)]);
                a.push_back(y.values[static_cast<std::size_t>(s.target_index(w, h))]);
            }
            CHECK_THAT(ev.per_horizon[static_cast<std::size_t>(h - 1)],
                       Catch::Matchers::WithinAbs(smape(f, a), 1e-12));
        }
        CHECK(ev.table.cells.size() == 4);
        CHECK(ev.table.cells[0].size() == 14);
    }
    SECTION("look-ahead attempts fail loudly") {
        CHECK_THROWS_AS(evaluate_model(LookAhead(), y, exog, s), std::logic_error);
    }
    SECTION("a failing window is excluded, not fatal") {
        const ModelEvaluation ev = evaluate_model(FailsOnWindow(2), y, exog, s);
        CHECK(ev.windows_total == 4);
        CHECK(ev.windows_used == 3);
        REQUIRE(ev.exclusions.size() == 1);
        CHECK(ev.exclusions[0].find("synthetic failure") != std::string::npos);
        for (double c : ev.table.cells[2]) CHECK(std::isnan(c));
        for (double v : ev.per_horizon) CHECK(std::isfinite(v));
    }
    SECTION("worker count does not change the result") {
        const ModelEvaluation a = evaluate_model(LastValue(), y, exog, s, 1);
        const ModelEvaluation b = evaluate_model(LastValue(), y, exog, s, 4);
        REQUIRE(a.per_horizon.size() == b.per_horizon.size());
        for (std::size_t i = 0; i < a.per_horizon.size(); ++i) {
            CHECK(a.per_horizon[i] == b.per_horizon[i]);
        }
        for (std::size_t w = 0; w < a.table.cells.size(); ++w) {
            for (std::size_t h = 0; h < a.table.cells[w].size(); ++h) {
                CHECK(a.table.cells[w][h] == b.table.cells[w][h]);
            }
        }
    }
    SECTION("wrong forecast length is a harness bug, not an exclusion") {
        class Short : public Forecaster {
        public:
            std::string name() const override { return "short"; }
            std::vector<double> forecast_window(const WindowView& view) const override {
                (void)view.train_target();
                return {1.0, 2.0};
            }
        };
        CHECK_THROWS_AS(evaluate_model(Short(), y, exog, s), std::logic_error);
    }
    SECTION("all windows failing leaves NaN scores") {
        class AlwaysFails : public Forecaster {
        public:
            std::string name() const override { return "broken"; }
            std::vector<double> forecast_window(const WindowView&) const override {
                throw ModelError("cannot fit");
            }
        };
        const ModelEvaluation ev = evaluate_model(AlwaysFails(), y, exog, s);
        CHECK(ev.windows_used == 0);
        CHECK(ev.exclusions.size() == 4);
        for (double v : ev.per_horizon) CHECK(std::isnan(v));
    }
}

TEST_CASE("state-to-national aggregation") {
    // two states whose forecasts sum to a known national path
    const RollingSchedule s = build_schedule(40, 20, 14, 14);
    REQUIRE(s.windows() == 1);

    std::map<std::string, ForecastTable> per_state;
    ForecastTable a, b;
    a.cells = {std::vector<double>(14, 0.0)};
    b.cells = {std::vector<double>(14, 0.0)};
    std::vector<double> national(40, 0.0);
    for (int h = 1; h <= 14; ++h) {
        a.cells[0][static_cast<std::size_t>(h - 1)] = h;
        b.cells[0][static_cast<std::size_t>(h - 1)] = 2.0 * h;
        national[static_cast<std::size_t>(s.target_index(0, h))] = 3.0 * h;
    }
    per_state["CA"] = a;
    per_state["NY"] = b;

    SECTION("summed forecasts score against the national actuals") {
        const std::vector<double> scores =
            aggregate_states_to_national(per_state, s, national);
        REQUIRE(scores.size() == 14);
        for (double v : scores) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("a missing cell is an error naming the state") {
        per_state["NY"].cells[0][4] = std::nan("");
        try {
            aggregate_states_to_national(per_state, s, national);
            FAIL("expected ModelError");
        } catch (const ModelError& e) {
            CHECK(std::string(e.what()).find("NY") != std::string::npos);
        }
    }
    SECTION("imbalanced forecasts score like the pooled sMAPE") {
        // halve one state's forecasts: national forecast = 2.5h vs actual 3h
        for (auto& c : per_state["CA"].cells[0]) c *= 0.5;
        const std::vector<double> scores =
            aggregate_states_to_national(per_state, s, national);
        for (int h = 1; h <= 14; ++h) {
            const double f = 2.5 * h, act = 3.0 * h;
            const double expect = 100.0 * std::abs(f - act) / ((std::abs(f) + std::abs(act)) / 2.0);
            CHECK_THAT(scores[static_cast<std::size_t>(h - 1)],
                       Catch::Matchers::WithinAbs(expect, 1e-12));
        }
    }
}

TEST_CASE("report rendering") {
    EvaluationReport r;
    r.models = {"alpha", "beta"};
    r.cells.assign(14, std::vector<double>(2, 0.0));
    for (int h = 0; h < 14; ++h) {
        r.cells[static_cast<std::size_t>(h)][0] = h + 1.125;
        r.cells[static_cast<std::size_t>(h)][1] = 2.0 * (h + 1);
    }

    SECTION("csv layout and two-decimal formatting") {
        const std::string csv = render_report(r, ReportFormat::csv);
        CHECK(csv.rfind("horizon,alpha,beta\n", 0) == 0);
        CHECK(csv.find("\n1,1.12,2.00\n") != std::string::npos);
        CHECK(csv.find("\n14,14.12,28.00\n") != std::string::npos);
        // average of 1.125..14.125 is 7.625 -> 7.62 under round-half-even
        CHECK(csv.find("average,7.62,15.00\n") != std::string::npos);
    }
    SECTION("NaN cells render as nan") {
        r.cells[3][1] = std::nan("");
        const std::string csv = render_report(r, ReportFormat::csv);
        CHECK(csv.find("\n4,4.12,nan\n") != std::string::npos);
    }
    SECTION("footnotes trail the table") {
        r.footnotes = {"window 3 excluded"};
        const std::string csv = render_report(r, ReportFormat::csv);
        CHECK(csv.find("# window 3 excluded\n") != std::string::npos);
        const std::string text = render_report(r, ReportFormat::aligned_text);
        CHECK(text.find("window 3 excluded") != std::string::npos);
    }
    SECTION("aligned text includes every model header") {
        const std::string text = render_report(r, ReportFormat::aligned_text);
        CHECK(text.find("alpha") != std::string::npos);
        CHECK(text.find("beta") != std::string::npos);
        CHECK(text.find("average") != std::string::npos);
    }
    SECTION("a NaN horizon makes that model's average NaN") {
        r.cells[0][0] = std::nan("");
        const std::vector<double> avg = r.average();
        CHECK(std::isnan(avg[0]));
        CHECK_THAT(avg[1], Catch::Matchers::WithinAbs(15.0, 1e-12));
    }
}
