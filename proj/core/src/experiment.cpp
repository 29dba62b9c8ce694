#include "exocast/experiment.hpp"

#include "exocast/mcp.hpp"
#include "exocast/random_walk.hpp"
#include "exocast/stats.hpp"
#include "exocast/var.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace exocast {

namespace {

std::vector<int> resolve_exog_indices(const std::vector<std::string>& wanted,
                                      const std::vector<std::string>& available) {
    std::vector<int> idx;
    for (const auto& name : wanted) {
        const auto it = std::find(available.begin(), available.end(), name);
        if (it == available.end()) {
            throw ConfigError("unknown exogenous column: " + name);
        }
        idx.push_back(static_cast<int>(it - available.begin()));
    }
    return idx;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<int>(i)) = m.col(cols[i]);
    return out;
}

/// Guarded last-window record: parameter dumps keep the fit from the
/// highest-indexed window regardless of evaluation order.
class LatestDump {
public:
    void offer(int window, std::string text) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (window >= window_) {
            window_ = window;
            text_ = std::move(text);
        }
    }
    std::string get() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return text_;
    }

private:
    mutable std::mutex mutex_;
    int window_ = -1;
    std::string text_;
};

class RwForecaster : public Forecaster {
public:
    std::string name() const override { return "RW"; }

    std::vector<double> forecast_window(const WindowView& view) const override {
        const RandomWalkModel model = fit_rw(view.train_target());
        char buf[160];
        std::snprintf(buf, sizeof(buf), "train_end=%d\nsigma2=%.17g\nlast_value=%.17g\n",
                      view.train_end(), model.sigma2, model.last_value);
        dump_.offer(view.train_end(), buf);
        return forecast_rw(model, view.h_max());
    }

    std::string parameter_dump() const override { return dump_.get(); }

private:
    mutable LatestDump dump_;
};

class SarimaxForecaster : public Forecaster {
public:
    SarimaxForecaster(std::string name, SarimaxSpec spec, std::vector<int> exog_cols,
                      int initial_train, bool refit)
        : name_(std::move(name)),
          spec_(std::move(spec)),
          exog_cols_(std::move(exog_cols)),
          initial_train_(initial_train),
          refit_(refit) {}

    std::string name() const override { return name_; }

    std::vector<double> forecast_window(const WindowView& view) const override {
        const TimeSeries y = view.train_target();
        const Eigen::MatrixXd exog_all = view.train_exog();
        const Eigen::MatrixXd exog =
            exog_cols_.empty() ? Eigen::MatrixXd() : select_columns(exog_all, exog_cols_);
        const Eigen::MatrixXd exog_future =
            exog_cols_.empty() ? Eigen::MatrixXd()
                               : select_columns(view.future_exog(view.h_max()), exog_cols_);

        FittedSarimax model;
        if (refit_) {
            model = fit_guarded(y, exog);
        } else {
            std::call_once(once_, [&] {
                shared_ = fit_guarded(y.head(static_cast<std::size_t>(initial_train_)),
                                      exog_cols_.empty()
                                          ? Eigen::MatrixXd()
                                          : Eigen::MatrixXd(exog.topRows(initial_train_)));
            });
            model = shared_;
        }
        dump_.offer(view.train_end(), serialize_sarimax(model) + note_);
        return forecast_sarimax(model, y, exog, exog_future, view.h_max());
    }

    std::string parameter_dump() const override { return dump_.get(); }

private:
    FittedSarimax fit_guarded(const TimeSeries& y, const Eigen::MatrixXd& exog) const {
        try {
            return fit_sarimax(spec_, y, exog);
        } catch (const SarimaxConvergenceError& err) {
            // Keep the best parameters found: dropping every window over a
            // stalled line search would lose more than it protects.
            note_ = std::string("# optimizer stopped early: ") + err.what() + "\n";
            return err.best();
        }
    }

    std::string name_;
    SarimaxSpec spec_;
    std::vector<int> exog_cols_;
    int initial_train_;
    bool refit_;
    mutable std::once_flag once_;
    mutable FittedSarimax shared_;
    mutable std::string note_;
    mutable LatestDump dump_;
};

class McpForecaster : public Forecaster {
public:
    McpForecaster(double gamma, int lag_depth, int screen, int folds, bool screen_target_lags,
                  std::vector<int> exog_cols)
        : gamma_(gamma),
          k_(lag_depth),
          screen_(screen),
          folds_(folds),
          screen_target_lags_(screen_target_lags),
          exog_cols_(std::move(exog_cols)) {}

    std::string name() const override { return "MCP"; }

    std::vector<double> forecast_window(const WindowView& view) const override {
        const TimeSeries y = view.train_target();
        const Eigen::MatrixXd exog =
            exog_cols_.empty() ? Eigen::MatrixXd()
                               : select_columns(view.train_exog(), exog_cols_);
        try {
            std::vector<double> out(view.h_max(), 0.0);
            std::ostringstream dump;
            for (int h = 1; h <= view.h_max(); ++h) {
                const LagDesign design = build_lag_design(y, exog, h, k_, LogOffset::plus_one);
                const LagDesign screened = screen_design(design);
                const double lambda = select_lambda_cv(screened, gamma_, folds_);
                const McpModel model = fit_mcp(screened, lambda, gamma_);
                const std::optional<double> anchor =
                    h > 7 ? std::optional<double>(out[h - 8]) : std::nullopt;
                out[h - 1] = forecast_mcp(model, y, exog, h, anchor);
                describe(dump, h, model);
            }
            dump_.offer(view.train_end(), "train_end=" + std::to_string(view.train_end()) +
                                              "\n" + dump.str());
            return out;
        } catch (const std::domain_error& err) {
            // Log-return of a non-positive value after offset: data-driven
            // degeneracy, treated like any other failed fit for this window.
            throw ModelError(std::string("lag design: ") + err.what());
        }
    }

    std::string parameter_dump() const override { return dump_.get(); }

private:
    LagDesign screen_design(const LagDesign& design) const {
        if (screen_target_lags_) return sis_screen(design, screen_);
        // Alternative reading: target lags bypass screening, the budget
        // applies to exogenous columns only.
        const int p = static_cast<int>(design.matrix.cols());
        if (p <= k_) return design;
        LagDesign exog_part;
        exog_part.h = design.h;
        exog_part.k = design.k;
        exog_part.offset = design.offset;
        exog_part.exog_transformed = design.exog_transformed;
        exog_part.response = design.response;
        exog_part.matrix = design.matrix.rightCols(p - k_);
        exog_part.columns.assign(design.columns.begin() + k_, design.columns.end());
        exog_part.column_names.assign(design.column_names.begin() + k_,
                                      design.column_names.end());
        const LagDesign kept = sis_screen(exog_part, std::min(screen_, p - k_));

        LagDesign merged;
        merged.h = design.h;
        merged.k = design.k;
        merged.offset = design.offset;
        merged.exog_transformed = design.exog_transformed;
        merged.response = design.response;
        const int total = k_ + static_cast<int>(kept.columns.size());
        merged.matrix.resize(design.matrix.rows(), total);
        merged.matrix.leftCols(k_) = design.matrix.leftCols(k_);
        merged.matrix.rightCols(total - k_) = kept.matrix;
        merged.columns.assign(design.columns.begin(), design.columns.begin() + k_);
        merged.columns.insert(merged.columns.end(), kept.columns.begin(), kept.columns.end());
        merged.column_names.assign(design.column_names.begin(),
                                   design.column_names.begin() + k_);
        merged.column_names.insert(merged.column_names.end(), kept.column_names.begin(),
                                   kept.column_names.end());
        return merged;
    }

    void describe(std::ostringstream& out, int h, const McpModel& model) const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", model.lambda);
        out << "h=" << h << " lambda=" << buf;
        for (int j = 0; j < model.beta.size(); ++j) {
            if (model.beta[j] == 0.0) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", model.beta[j]);
            out << ' ' << model.column_names[j] << '=' << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", model.intercept);
        out << " intercept=" << buf << '\n';
    }

    double gamma_;
    int k_, screen_, folds_;
    bool screen_target_lags_;
    std::vector<int> exog_cols_;
    mutable LatestDump dump_;
};

class VarForecaster : public Forecaster {
public:
    VarForecaster(int q_max, std::vector<int> exog_cols, int initial_train)
        : q_max_(q_max), exog_cols_(std::move(exog_cols)), initial_train_(initial_train) {}

    std::string name() const override { return "VAR"; }

    std::vector<double> forecast_window(const WindowView& view) const override {
        const TimeSeries y = view.train_target();
        const Eigen::MatrixXd exog =
            exog_cols_.empty() ? Eigen::MatrixXd()
                               : select_columns(view.train_exog(), exog_cols_);

        std::call_once(once_, [&] {
            const Eigen::MatrixXd z0 = returns_panel(
                y.head(static_cast<std::size_t>(initial_train_)),
                exog_cols_.empty() ? Eigen::MatrixXd()
                                   : Eigen::MatrixXd(exog.topRows(initial_train_)));
            // Variable set and order are frozen on the initial training
            // window; later windows refit coefficients only.
            kept_ = usable_variables(z0);
            if (kept_.empty() || kept_[0] != 0) {
                throw ModelError("VAR target has no weekly log-return variation");
            }
            order_ = select_order_bic(select_columns(z0, kept_), q_max_);
        });

        const Eigen::MatrixXd z = select_columns(returns_panel(y, exog), kept_);
        const VarModel model = fit_var(z, order_);
        const Eigen::MatrixXd path =
            forecast_var_path(model, z.bottomRows(model.q), view.h_max());

        std::vector<double> out(view.h_max(), 0.0);
        const int n = static_cast<int>(y.size());
        for (int h = 1; h <= view.h_max(); ++h) {
            const double base = h <= 7 ? y[static_cast<std::size_t>(n - 1 + h - 7)]
                                       : out[h - 8];
            out[h - 1] = std::max(
                0.0, invert_weekly_log_return_value(path(h - 1, 0), base, LogOffset::plus_one));
        }

        std::ostringstream dump;
        dump << "train_end=" << view.train_end() << "\nq=" << model.q << "\nvariables=0";
        for (std::size_t i = 1; i < kept_.size(); ++i) dump << ',' << kept_[i];
        dump << '\n';
        dump_.offer(view.train_end(), dump.str());
        return out;
    }

    std::string parameter_dump() const override { return dump_.get(); }

private:
    /// Weekly log-returns of target plus exogenous columns; rows aligned,
    /// column 0 is the target.
    static Eigen::MatrixXd returns_panel(const TimeSeries& y, const Eigen::MatrixXd& exog) {
        const int n = static_cast<int>(y.size());
        if (n < 8) throw ModelError("window too short for weekly log-returns");
        const int vars = 1 + static_cast<int>(exog.cols());
        Eigen::MatrixXd z(n - 7, vars);
        for (int t = 7; t < n; ++t) {
            z(t - 7, 0) = log_transform(y[static_cast<std::size_t>(t)], LogOffset::plus_one) -
                          log_transform(y[static_cast<std::size_t>(t - 7)], LogOffset::plus_one);
        }
        for (int j = 0; j < static_cast<int>(exog.cols()); ++j) {
            for (int t = 7; t < n; ++t) {
                z(t - 7, j + 1) = log_transform(exog(t, j), LogOffset::plus_one) -
                                  log_transform(exog(t - 7, j), LogOffset::plus_one);
            }
        }
        return z;
    }

    static std::vector<int> usable_variables(const Eigen::MatrixXd& z) {
        std::vector<int> kept;
        for (int j = 0; j < z.cols(); ++j) {
            const double mean = z.col(j).mean();
            if ((z.col(j).array() - mean).square().mean() > 1e-20) kept.push_back(j);
        }
        return kept;
    }

    int q_max_;
    std::vector<int> exog_cols_;
    int initial_train_;
    mutable std::once_flag once_;
    mutable std::vector<int> kept_;
    mutable int order_ = 1;
    mutable LatestDump dump_;
};

int resolved_workers(const ExperimentConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

} // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::rw: return "RW";
        case ModelKind::sarima: return "SARIMA";
        case ModelKind::sarimax: return "SARIMAX";
        case ModelKind::mcp: return "MCP";
        case ModelKind::var: return "VAR";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "RW") return ModelKind::rw;
    if (name == "SARIMA") return ModelKind::sarima;
    if (name == "SARIMAX") return ModelKind::sarimax;
    if (name == "MCP") return ModelKind::mcp;
    if (name == "VAR") return ModelKind::var;
    throw ConfigError("unknown model: " + name +
                      " (expected RW, SARIMA, SARIMAX, MCP, or VAR)");
}

void ExperimentConfig::validate() const {
    if (models.empty()) throw ConfigError("no models selected");
    if (h_max < 1 || h_max > 14) throw ConfigError("h_max must lie in 1..14");
    if (step < 1) throw ConfigError("step must be positive");
    if (initial_train < 0) throw ConfigError("initial_train must be non-negative");
    const std::string& path =
        level == DataLevel::national ? covid_national_path : covid_state_path;
    if (path.empty()) {
        throw ConfigError(std::string("missing data path for the ") +
                          (level == DataLevel::national ? "national" : "state") + " level");
    }
    if (mcp_gamma <= 1.0) throw ConfigError("mcp gamma must exceed 1");
    if (mcp_screen < 1 || mcp_lag_depth < 1 || mcp_folds < 1) {
        throw ConfigError("mcp screen size, lag depth, and folds must be positive");
    }
    if (var_q_max < 1) throw ConfigError("var q_max must be positive");
    sarimax_spec.validate();
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
}

ExperimentConfig experiment_config_from(const Config& cfg) {
    ExperimentConfig out;
    out.covid_national_path = cfg.get_or("data.covid_national", "");
    out.covid_state_path = cfg.get_or("data.covid_state", "");
    out.flows_path = cfg.get_or("data.flows", "");

    const std::string level = cfg.get_or("run.level", "national");
    if (level == "national") {
        out.level = DataLevel::national;
    } else if (level == "state") {
        out.level = DataLevel::state;
    } else {
        throw ConfigError("run.level must be national or state, got: " + level);
    }
    for (const auto& name : cfg.get_list_or("run.models")) {
        out.models.push_back(parse_model_kind(name));
    }
    out.initial_train = cfg.get_int_or("run.initial_train", 0);
    out.step = cfg.get_int_or("run.step", 14);
    out.h_max = cfg.get_int_or("run.h_max", 14);
    out.require_canonical_length = cfg.get_bool_or("run.require_canonical_length", false);
    out.refit_per_window = cfg.get_bool_or("run.refit_per_window", false);
    out.screen_target_lags = cfg.get_bool_or("run.screen_target_lags", true);
    out.exclude_self_loops = cfg.get_bool_or("run.exclude_self_loops", false);
    out.out_dir = cfg.get_or("run.out", ".");
    out.seed = static_cast<std::uint64_t>(cfg.get_int_or("run.seed", 0));
    out.workers = cfg.get_int_or("run.workers", 0);
    out.state_reports = cfg.get_list_or("run.state_reports");

    out.sarimax_spec.p = cfg.get_int_or("sarimax.p", 4);
    out.sarimax_spec.d = cfg.get_int_or("sarimax.d", 1);
    out.sarimax_spec.q = cfg.get_int_or("sarimax.q", 4);
    out.sarimax_spec.P = cfg.get_int_or("sarimax.P", 3);
    out.sarimax_spec.D = cfg.get_int_or("sarimax.D", 1);
    out.sarimax_spec.Q = cfg.get_int_or("sarimax.Q", 1);
    out.sarimax_spec.s = cfg.get_int_or("sarimax.s", 7);
    out.sarimax_spec.trend = cfg.get_or("sarimax.trend", "constant") == "constant"
                                 ? TrendType::constant
                                 : TrendType::none;
    out.sarimax_spec.transform = SarimaxTransform::log1p;
    if (cfg.has("sarimax.exog")) {
        out.sarimax_exog = cfg.get_list_or("sarimax.exog");
    } else {
        out.sarimax_exog = {"hospitalizedCurrently", "inIcuCurrently"};
    }

    if (cfg.has("mcp.gamma")) out.mcp_gamma = cfg.get_double("mcp.gamma");
    out.mcp_lag_depth = cfg.get_int_or("mcp.lag_depth", 14);
    out.mcp_screen = cfg.get_int_or("mcp.screen", 7);
    out.mcp_folds = cfg.get_int_or("mcp.folds", 5);
    out.var_q_max = cfg.get_int_or("var.q_max", 14);

    out.validate();
    return out;
}

std::string canonical_config(const ExperimentConfig& cfg) {
    Config echo;
    echo.set("data.covid_national", cfg.covid_national_path);
    echo.set("data.covid_state", cfg.covid_state_path);
    echo.set("data.flows", cfg.flows_path);
    echo.set("run.level", cfg.level == DataLevel::national ? "national" : "state");
    std::string models;
    for (std::size_t i = 0; i < cfg.models.size(); ++i) {
        if (i) models += ',';
        models += model_kind_name(cfg.models[i]);
    }
    echo.set("run.models", models);
    echo.set("run.initial_train", std::to_string(cfg.initial_train));
    echo.set("run.step", std::to_string(cfg.step));
    echo.set("run.h_max", std::to_string(cfg.h_max));
    echo.set("run.require_canonical_length", cfg.require_canonical_length ? "true" : "false");
    echo.set("run.refit_per_window", cfg.refit_per_window ? "true" : "false");
    echo.set("run.screen_target_lags", cfg.screen_target_lags ? "true" : "false");
    echo.set("run.exclude_self_loops", cfg.exclude_self_loops ? "true" : "false");
    echo.set("run.out", cfg.out_dir);
    echo.set("run.seed", std::to_string(cfg.seed));
    echo.set("run.workers", std::to_string(cfg.workers));
    std::string states;
    for (std::size_t i = 0; i < cfg.state_reports.size(); ++i) {
        if (i) states += ',';
        states += cfg.state_reports[i];
    }
    echo.set("run.state_reports", states);
    const SarimaxSpec& s = cfg.sarimax_spec;
    echo.set("sarimax.p", std::to_string(s.p));
    echo.set("sarimax.d", std::to_string(s.d));
    echo.set("sarimax.q", std::to_string(s.q));
    echo.set("sarimax.P", std::to_string(s.P));
    echo.set("sarimax.D", std::to_string(s.D));
    echo.set("sarimax.Q", std::to_string(s.Q));
    echo.set("sarimax.s", std::to_string(s.s));
    echo.set("sarimax.trend", s.trend == TrendType::constant ? "constant" : "none");
    std::string exog;
    for (std::size_t i = 0; i < cfg.sarimax_exog.size(); ++i) {
        if (i) exog += ',';
        exog += cfg.sarimax_exog[i];
    }
    echo.set("sarimax.exog", exog);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.mcp_gamma);
    echo.set("mcp.gamma", buf);
    echo.set("mcp.lag_depth", std::to_string(cfg.mcp_lag_depth));
    echo.set("mcp.screen", std::to_string(cfg.mcp_screen));
    echo.set("mcp.folds", std::to_string(cfg.mcp_folds));
    echo.set("var.q_max", std::to_string(cfg.var_q_max));
    return echo.dump();
}

std::uint64_t fnv1a_checksum_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for checksum: " + path);
    std::uint64_t hash = 14695981039346656037ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return hash;
}

std::unique_ptr<Forecaster> make_forecaster(ModelKind kind, const ExperimentConfig& cfg,
                                            const std::vector<std::string>& exog_names,
                                            int initial_train) {
    switch (kind) {
        case ModelKind::rw:
            return std::make_unique<RwForecaster>();
        case ModelKind::sarima: {
            SarimaxSpec spec = cfg.sarimax_spec;
            spec.exog_names.clear();
            return std::make_unique<SarimaxForecaster>("SARIMA", std::move(spec),
                                                       std::vector<int>{}, initial_train,
                                                       cfg.refit_per_window);
        }
        case ModelKind::sarimax: {
            SarimaxSpec spec = cfg.sarimax_spec;
            spec.exog_names = cfg.sarimax_exog;
            return std::make_unique<SarimaxForecaster>(
                "SARIMAX", std::move(spec), resolve_exog_indices(cfg.sarimax_exog, exog_names),
                initial_train, cfg.refit_per_window);
        }
        case ModelKind::mcp: {
            std::vector<int> all(exog_names.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
            return std::make_unique<McpForecaster>(cfg.mcp_gamma, cfg.mcp_lag_depth,
                                                   cfg.mcp_screen, cfg.mcp_folds,
                                                   cfg.screen_target_lags, std::move(all));
        }
        case ModelKind::var: {
            std::vector<int> all(exog_names.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
            return std::make_unique<VarForecaster>(cfg.var_q_max, std::move(all),
                                                   initial_train);
        }
    }
    throw ConfigError("unhandled model kind");
}

namespace {

struct ManifestInfo {
    std::vector<std::pair<std::string, std::uint64_t>> checksums;
    int windows = 0;
    int initial_train = 0;
    std::vector<std::string> notes;
};

void write_manifest(const ExperimentConfig& cfg, const ManifestInfo& info) {
    std::ostringstream out;
    out << "exocast 0.1.0 (Eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
        << EIGEN_MINOR_VERSION << ")\n";
    out << "windows = " << info.windows << "\ninitial_train = " << info.initial_train << '\n';
    for (const auto& [path, sum] : info.checksums) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sum));
        out << "checksum " << buf << ' ' << path << '\n';
    }
    for (const auto& note : info.notes) out << "note: " << note << '\n';
    out << "--- config ---\n" << canonical_config(cfg);
    write_file(std::filesystem::path(cfg.out_dir) / "manifest.txt", out.str());
}

ExperimentResult run_national(const ExperimentConfig& cfg, const PanelDataset& ds,
                              const RollingSchedule& schedule, int workers) {
    const int us = ds.region_index("US");
    const TimeSeries target = ds.target_series(us);
    const Eigen::MatrixXd& exog = ds.exog[us];

    EvaluationReport report;
    report.cells.assign(schedule.h_max, std::vector<double>(cfg.models.size(), 0.0));
    ManifestInfo manifest;
    manifest.windows = schedule.windows();
    manifest.initial_train = schedule.initial_train;

    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        const auto forecaster =
            make_forecaster(cfg.models[m], cfg, ds.exog_names, schedule.initial_train);
        const ModelEvaluation eval =
            evaluate_model(*forecaster, target, exog, schedule, workers);
        report.models.push_back(eval.model);
        for (int h = 0; h < schedule.h_max; ++h) report.cells[h][m] = eval.per_horizon[h];
        if (!eval.exclusions.empty()) {
            report.footnotes.push_back(eval.model + ": " +
                                       std::to_string(eval.exclusions.size()) +
                                       " of " + std::to_string(eval.windows_total) +
                                       " windows excluded");
            for (const auto& e : eval.exclusions) manifest.notes.push_back(eval.model + " " + e);
        }
        const std::string dump = forecaster->parameter_dump();
        if (!dump.empty()) {
            write_file(std::filesystem::path(cfg.out_dir) /
                           ("params_" + eval.model + ".txt"),
                       dump);
        }
    }

    manifest.checksums.push_back(
        {cfg.covid_national_path, fnv1a_checksum_file(cfg.covid_national_path)});
    ExperimentResult result;
    result.report = report;
    result.schedule = schedule;
    result.report_path = std::filesystem::path(cfg.out_dir) / "report.csv";
    write_file(result.report_path, render_report(report, ReportFormat::csv));
    write_manifest(cfg, manifest);
    return result;
}

ExperimentResult run_state(const ExperimentConfig& cfg, const PanelDataset& ds,
                           const RollingSchedule& schedule, int workers) {
    // National actuals aligned to the state calendar, for scoring the
    // aggregated forecasts; falls back to the sum of state actuals.
    std::vector<double> national_actual(static_cast<std::size_t>(ds.days()), 0.0);
    bool national_loaded = false;
    std::string aggregation_basis = "sum of state actuals";
    if (!cfg.covid_national_path.empty()) {
        const PanelDataset nat = load_covid_csv(cfg.covid_national_path, DataLevel::national);
        const int offset = ds.start - nat.start;
        if (offset >= 0 && offset + ds.days() <= nat.days()) {
            const int us = nat.region_index("US");
            for (int t = 0; t < ds.days(); ++t) {
                national_actual[t] = nat.target[us][t + offset];
            }
            national_loaded = true;
            aggregation_basis = "recorded national series";
        }
    }
    if (!national_loaded) {
        for (std::size_t r = 0; r < ds.regions.size(); ++r) {
            for (int t = 0; t < ds.days(); ++t) national_actual[t] += ds.target[r][t];
        }
    }

    EvaluationReport report;
    report.cells.assign(schedule.h_max,
                        std::vector<double>(cfg.models.size(),
                                            std::numeric_limits<double>::quiet_NaN()));
    report.footnotes.push_back("aggregated against " + aggregation_basis);
    ManifestInfo manifest;
    manifest.windows = schedule.windows();
    manifest.initial_train = schedule.initial_train;

    // Per-state reports requested in the config.
    std::map<std::string, EvaluationReport> state_reports;
    for (const auto& st : cfg.state_reports) {
        ds.region_index(st); // validates the code
        state_reports[st].cells.assign(
            schedule.h_max, std::vector<double>(cfg.models.size(),
                                                std::numeric_limits<double>::quiet_NaN()));
    }

    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        const std::string model_name = model_kind_name(cfg.models[m]);
        report.models.push_back(model_name);
        std::map<std::string, ForecastTable> tables;
        int excluded_windows = 0;
        std::string dump;

        for (std::size_t r = 0; r < ds.regions.size(); ++r) {
            const auto forecaster =
                make_forecaster(cfg.models[m], cfg, ds.exog_names, schedule.initial_train);
            ModelEvaluation eval;
            try {
                eval = evaluate_model(*forecaster, ds.target_series(static_cast<int>(r)),
                                      ds.exog[r], schedule, workers);
            } catch (const ModelError& err) {
                // Region-level failure (outside per-window handling): mark
                // every window missing for this state.
                eval.model = model_name;
                eval.windows_total = schedule.windows();
                eval.table.cells.assign(
                    schedule.windows(),
                    std::vector<double>(schedule.h_max,
                                        std::numeric_limits<double>::quiet_NaN()));
                manifest.notes.push_back(model_name + " " + ds.regions[r] + ": " + err.what());
            }
            excluded_windows += eval.windows_total - eval.windows_used;
            tables[ds.regions[r]] = eval.table;
            for (const auto& e : eval.exclusions) {
                manifest.notes.push_back(model_name + " " + ds.regions[r] + " " + e);
            }
            const auto it = state_reports.find(ds.regions[r]);
            if (it != state_reports.end()) {
                for (int h = 0; h < schedule.h_max; ++h) {
                    it->second.models.resize(cfg.models.size());
                    it->second.models[m] = model_name;
                    it->second.cells[h][m] = eval.per_horizon.empty()
                                                 ? std::numeric_limits<double>::quiet_NaN()
                                                 : eval.per_horizon[h];
                }
            }
            dump += "== " + ds.regions[r] + " ==\n" + forecaster->parameter_dump();
        }

        // Aggregate over the windows every state completed.
        std::vector<int> complete_windows;
        for (int w = 0; w < schedule.windows(); ++w) {
            bool complete = true;
            for (const auto& [region, table] : tables) {
                for (int h = 0; h < schedule.h_max && complete; ++h) {
                    if (std::isnan(table.cells[w][h])) complete = false;
                }
                if (!complete) break;
            }
            if (complete) complete_windows.push_back(w);
        }
        if (complete_windows.empty()) {
            report.footnotes.push_back(model_name + ": aggregation skipped, no window was "
                                                    "completed by every state");
        } else {
            RollingSchedule sub = schedule;
            sub.train_ends.clear();
            std::map<std::string, ForecastTable> sub_tables;
            for (const int w : complete_windows) sub.train_ends.push_back(schedule.train_ends[w]);
            for (const auto& [region, table] : tables) {
                ForecastTable t;
                for (const int w : complete_windows) t.cells.push_back(table.cells[w]);
                sub_tables[region] = std::move(t);
            }
            const std::vector<double> agg =
                aggregate_states_to_national(sub_tables, sub, national_actual);
            for (int h = 0; h < schedule.h_max; ++h) report.cells[h][m] = agg[h];
            if (static_cast<int>(complete_windows.size()) < schedule.windows()) {
                report.footnotes.push_back(
                    model_name + ": aggregated over " +
                    std::to_string(complete_windows.size()) + " of " +
                    std::to_string(schedule.windows()) + " windows (" +
                    std::to_string(excluded_windows) + " state-window exclusions)");
            }
        }
        if (!dump.empty()) {
            write_file(std::filesystem::path(cfg.out_dir) / ("params_" + model_name + ".txt"),
                       dump);
        }
    }

    for (const auto& [state, st_report] : state_reports) {
        write_file(std::filesystem::path(cfg.out_dir) / ("report_" + state + ".csv"),
                   render_report(st_report, ReportFormat::csv));
    }

    manifest.checksums.push_back(
        {cfg.covid_state_path, fnv1a_checksum_file(cfg.covid_state_path)});
    if (!cfg.covid_national_path.empty()) {
        manifest.checksums.push_back(
            {cfg.covid_national_path, fnv1a_checksum_file(cfg.covid_national_path)});
    }
    ExperimentResult result;
    result.report = report;
    result.schedule = schedule;
    result.report_path = std::filesystem::path(cfg.out_dir) / "report.csv";
    write_file(result.report_path, render_report(report, ReportFormat::csv));
    write_manifest(cfg, manifest);
    return result;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.out_dir);

    const std::string& data_path = config.level == DataLevel::national
                                       ? config.covid_national_path
                                       : config.covid_state_path;
    PanelDataset ds = load_covid_csv(data_path, config.level);
    if (config.require_canonical_length) {
        train_test_split(ds, config.level, true); // throws on length mismatch
    }
    const int initial = config.initial_train > 0
                            ? config.initial_train
                            : initial_train_length(ds.days(), config.level);
    const RollingSchedule schedule =
        build_schedule(ds.days(), initial, config.step, config.h_max);
    const int workers = resolved_workers(config);

    if (config.level == DataLevel::national) {
        return run_national(config, ds, schedule, workers);
    }
    return run_state(config, ds, schedule, workers);
}

std::vector<double> inspect_acf(const ExperimentConfig& cfg, int max_lag) {
    const std::string& path = cfg.level == DataLevel::national ? cfg.covid_national_path
                                                               : cfg.covid_state_path;
    const PanelDataset ds = load_covid_csv(path, cfg.level);
    const int region = cfg.level == DataLevel::national ? ds.region_index("US") : 0;
    return acf(ds.target[region], max_lag);
}

AdjacencyInspection inspect_adjacency(const ExperimentConfig& cfg) {
    if (cfg.flows_path.empty()) throw ConfigError("missing data path: flows");
    const FlowLoadResult flows = load_flows_csv(cfg.flows_path);
    AdjacencyInspection out;
    out.regions = state_region_codes();
    const FlowMatrix mean = aggregate_flows(flows.records, out.regions);
    out.pre = binarize_top_fraction(mean, 0.2, cfg.exclude_self_loops);
    out.post = full_rank_correct(out.pre);
    out.ones = static_cast<int>(out.pre.matrix.sum());
    return out;
}

} // namespace exocast
