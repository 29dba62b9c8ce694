#pragma once

#include "exocast/config.hpp"
#include "exocast/dataset.hpp"
#include "exocast/evaluation.hpp"
#include "exocast/mobility.hpp"
#include "exocast/sarimax.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace exocast {

enum class ModelKind { rw, sarima, sarimax, mcp, var };

std::string model_kind_name(ModelKind kind);
/// Throws ConfigError on an unknown name.
ModelKind parse_model_kind(const std::string& name);

struct ExperimentConfig {
    std::string covid_national_path;
    std::string covid_state_path;
    std::string flows_path;
    DataLevel level = DataLevel::national;
    std::vector<ModelKind> models;

    // Rolling schedule; initial_train 0 means the published split for the
    // level (or the 60% rule on other lengths).
    int initial_train = 0;
    int step = 14;
    int h_max = 14;
    bool require_canonical_length = false;

    SarimaxSpec sarimax_spec;              // orders/trend; exog names attached per model
    std::vector<std::string> sarimax_exog; // regressors for the SARIMAX column
    bool refit_per_window = false;

    double mcp_gamma = 3.0;
    int mcp_lag_depth = 14;
    int mcp_screen = 7;
    int mcp_folds = 5;
    bool screen_target_lags = true;

    int var_q_max = 14;

    bool exclude_self_loops = false;

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int workers = 0; // 0 = hardware concurrency
    /// States that get an individual report file in a state-level run.
    std::vector<std::string> state_reports;

    /// Throws ConfigError on contradictions (no models, h_max outside 1..14,
    /// missing data path for the level, ...).
    void validate() const;
};

ExperimentConfig experiment_config_from(const Config& cfg);

/// The config in canonical key=value form (what the manifest echoes).
std::string canonical_config(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of a file's bytes; manifest checksum.
std::uint64_t fnv1a_checksum_file(const std::string& path);

/// Rolling-harness adapter for one model family over one region's data.
/// exog_names describe the columns of the exogenous matrix handed to
/// evaluate_model; initial_train is the first window's training length
/// (fit-once models train on that prefix).
std::unique_ptr<Forecaster> make_forecaster(ModelKind kind, const ExperimentConfig& cfg,
                                            const std::vector<std::string>& exog_names,
                                            int initial_train);

struct ExperimentResult {
    EvaluationReport report;
    RollingSchedule schedule;
    std::filesystem::path report_path;
};

/// Loads the configured dataset, evaluates every configured model over the
/// rolling schedule and writes report.csv, per-model parameter dumps, and
/// manifest.txt under out_dir. State-level runs score the sum of per-state
/// forecasts against the national series (aggregated over the windows all
/// states completed). Identical config and data give byte-identical output.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Autocorrelations of the level's target series, lags 0..max_lag.
std::vector<double> inspect_acf(const ExperimentConfig& cfg, int max_lag = 30);

struct AdjacencyInspection {
    std::vector<std::string> regions;
    BinaryAdjacency pre;
    BinaryAdjacency post;
    int ones = 0;
};

/// Mobility-graph pipeline up to the full-rank correction.
AdjacencyInspection inspect_adjacency(const ExperimentConfig& cfg);

} // namespace exocast
