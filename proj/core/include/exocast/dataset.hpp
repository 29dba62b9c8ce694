#pragma once

#include "exocast/calendar.hpp"
#include "exocast/time_series.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace exocast {

enum class DataLevel { national, state };

/// The 50 states plus DC, lexicographic. Territories are not part of the
/// modeling universe because the state-to-state mobility matrix excludes
/// them.
const std::vector<std::string>& state_region_codes();

bool is_known_region(const std::string& code, DataLevel level);

/// One parsed row of a COVID CSV before panel assembly.
struct RawCovidRow {
    Date date;
    std::string region;
    double death_increase = 0.0;
    // NaN marks a missing exogenous cell.
    std::vector<double> exogenous;
};

/// Exogenous columns recognized in the COVID CSVs, in canonical order.
const std::vector<std::string>& covid_exogenous_columns();

/// Counters surfaced to the caller after cleaning.
struct CleaningLog {
    int unknown_region_rows = 0;
    int negative_target_clamped = 0;
    int negative_exog_clamped = 0;
    int imputed_cells = 0;
};

/// Per-region series aligned on one contiguous calendar.
struct PanelDataset {
    std::vector<std::string> regions; // lexicographic, fixed
    Date start;
    std::vector<std::string> exog_names;
    // target[r][t], exog[r] is (days x exog_names.size()).
    std::vector<std::vector<double>> target;
    std::vector<Eigen::MatrixXd> exog;
    CleaningLog log;

    int days() const { return regions.empty() ? 0 : static_cast<int>(target[0].size()); }
    int region_index(const std::string& code) const;
    TimeSeries target_series(int region_idx) const {
        return TimeSeries{start, target[region_idx]};
    }
    int exog_index(const std::string& name) const;
};

/// Loads and cleans a COVID CSV. The canonical study windows are applied
/// when the file covers them: the national series is trimmed to start
/// 2020-02-26, the state series to start 2020-03-29. Files over other date
/// ranges are kept whole after cleaning.
PanelDataset load_covid_csv(const std::string& path, DataLevel level);

/// Parses an already-open CSV body; exposed for tests.
PanelDataset build_panel(std::vector<RawCovidRow> rows, DataLevel level);

/// Serializes a panel with full precision; reload gives a bit-equal panel.
std::string panel_to_csv(const PanelDataset& ds);
void write_panel_csv(const PanelDataset& ds, const std::string& path);

struct SplitResult {
    PanelDataset train;
    PanelDataset test;
};

/// Canonical split when the panel matches the published lengths (376
/// national days -> 236/140, 297 state days -> 185/112); otherwise the 60%
/// rolling rule. With require_canonical_length, a mismatched length is a
/// ConfigError.
SplitResult train_test_split(const PanelDataset& ds, DataLevel level,
                             bool require_canonical_length = false);

/// Initial training length used by the rolling schedule, following the same
/// convention as train_test_split.
int initial_train_length(int days, DataLevel level);

/// One origin-destination mobility observation.
struct FlowRecord {
    std::string origin;
    std::string destination;
    Date date;
    double visitor_flows = 0.0;
    double pop_flows = 0.0;
};

struct FlowLoadResult {
    std::vector<FlowRecord> records;
    int dropped_unknown_region = 0;
};

/// Loads `origin,destination,date,visitor_flows,pop_flows` rows. Rows with
/// unknown region codes are dropped and counted; a negative flow value is a
/// DataError.
FlowLoadResult load_flows_csv(const std::string& path);

} // namespace exocast
