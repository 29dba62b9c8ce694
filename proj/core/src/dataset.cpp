#include "exocast/dataset.hpp"

#include "exocast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace exocast {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
    const std::string t = trim(field);
    if (t.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(t, &pos);
        return pos == t.size();
    } catch (const std::exception&) {
        return false;
    }
}

const Date kNationalStart{2020, 2, 26};
const Date kStateStart{2020, 3, 29};

} // namespace

const std::vector<std::string>& state_region_codes() {
    static const std::vector<std::string> codes = {
        "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DC", "DE", "FL", "GA",
        "HI", "IA", "ID", "IL", "IN", "KS", "KY", "LA", "MA", "MD", "ME",
        "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH", "NJ", "NM",
        "NV", "NY", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX",
        "UT", "VA", "VT", "WA", "WI", "WV", "WY"};
    return codes;
}

bool is_known_region(const std::string& code, DataLevel level) {
    if (level == DataLevel::national) return code == "US";
    const auto& codes = state_region_codes();
    return std::binary_search(codes.begin(), codes.end(), code);
}

const std::vector<std::string>& covid_exogenous_columns() {
    static const std::vector<std::string> names = {
        "hospitalizedCurrently", "inIcuCurrently", "onVentilatorCurrently",
        "hospitalizedCumulative"};
    return names;
}

int PanelDataset::region_index(const std::string& code) const {
    auto it = std::find(regions.begin(), regions.end(), code);
    if (it == regions.end()) throw std::invalid_argument("unknown region: " + code);
    return static_cast<int>(it - regions.begin());
}

int PanelDataset::exog_index(const std::string& name) const {
    auto it = std::find(exog_names.begin(), exog_names.end(), name);
    if (it == exog_names.end()) throw std::invalid_argument("unknown exogenous column: " + name);
    return static_cast<int>(it - exog_names.begin());
}

namespace {

std::vector<RawCovidRow> parse_covid_rows(std::istream& in, const std::string& origin_name,
                                          DataLevel level, CleaningLog& log) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(origin_name + ": empty file");
    }
    const auto header = split_csv_line(line);
    auto find_col = [&header](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return static_cast<int>(i);
        }
        return -1;
    };

    const int date_col = find_col("date");
    const int target_col = find_col("deathIncrease");
    if (date_col < 0) throw DataError(origin_name + ": missing required column 'date'");
    if (target_col < 0) {
        throw DataError(origin_name + ": missing required column 'deathIncrease'");
    }
    int region_col = find_col("region");
    if (region_col < 0) region_col = find_col("state");

    const auto& exog_names = covid_exogenous_columns();
    std::vector<int> exog_cols;
    for (const auto& name : exog_names) exog_cols.push_back(find_col(name));

    std::vector<RawCovidRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        auto field_at = [&](int idx) -> std::string {
            return idx >= 0 && idx < static_cast<int>(fields.size()) ? fields[idx] : "";
        };

        RawCovidRow row;
        row.date = Date::parse(field_at(date_col));
        row.region = region_col >= 0 ? trim(field_at(region_col))
                                     : (level == DataLevel::national ? "US" : "");
        if (!is_known_region(row.region, level)) {
            ++log.unknown_region_rows;
            continue;
        }
        double value = 0.0;
        if (!parse_double(field_at(target_col), value)) {
            throw DataError(origin_name + ": line " + std::to_string(line_no) +
                            ": missing or unparseable deathIncrease value");
        }
        row.death_increase = value;
        row.exogenous.resize(exog_names.size(), kMissing);
        for (std::size_t j = 0; j < exog_cols.size(); ++j) {
            double x;
            if (exog_cols[j] >= 0 && parse_double(field_at(exog_cols[j]), x)) {
                row.exogenous[j] = x;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void impute_column(std::vector<double>& col, CleaningLog& log) {
    // Forward-fill interior gaps, back-fill the leading run, zero when the
    // column never reports.
    double last = kMissing;
    for (double& v : col) {
        if (std::isnan(v)) {
            if (!std::isnan(last)) {
                v = last;
                ++log.imputed_cells;
            }
        } else {
            last = v;
        }
    }
    double next = kMissing;
    for (auto it = col.rbegin(); it != col.rend(); ++it) {
        if (std::isnan(*it)) {
            if (std::isnan(next)) {
                *it = 0.0;
            } else {
                *it = next;
            }
            ++log.imputed_cells;
        } else {
            next = *it;
        }
    }
}

} // namespace

PanelDataset build_panel(std::vector<RawCovidRow> rows, DataLevel level) {
    if (rows.empty()) throw DataError("no usable rows after region filtering");

    std::stable_sort(rows.begin(), rows.end(), [](const RawCovidRow& a, const RawCovidRow& b) {
        if (a.region != b.region) return a.region < b.region;
        return a.date < b.date;
    });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].region == rows[i - 1].region && rows[i].date == rows[i - 1].date) {
            throw DataError("duplicate date " + rows[i].date.iso() + " for region " +
                            rows[i].region);
        }
    }

    // Common calendar: intersection of per-region ranges, trimmed to the
    // canonical study start when it falls inside the data.
    std::map<std::string, std::pair<Date, Date>> ranges;
    for (const auto& row : rows) {
        auto it = ranges.find(row.region);
        if (it == ranges.end()) {
            ranges.emplace(row.region, std::make_pair(row.date, row.date));
        } else {
            it->second.first = std::min(it->second.first, row.date);
            it->second.second = std::max(it->second.second, row.date);
        }
    }
    Date start = ranges.begin()->second.first;
    Date end = ranges.begin()->second.second;
    for (const auto& [region, range] : ranges) {
        start = std::max(start, range.first);
        end = std::min(end, range.second);
    }
    const Date canonical = level == DataLevel::national ? kNationalStart : kStateStart;
    if (start <= canonical && canonical <= end) start = canonical;
    if (end < start) throw DataError("regions share no common date range");
    const int days = end - start + 1;

    PanelDataset ds;
    for (const auto& [region, range] : ranges) ds.regions.push_back(region);
    ds.start = start;
    ds.exog_names = covid_exogenous_columns();

    const int n_regions = static_cast<int>(ds.regions.size());
    const int n_exog = static_cast<int>(ds.exog_names.size());
    ds.target.assign(n_regions, std::vector<double>(days, kMissing));
    ds.exog.assign(n_regions, Eigen::MatrixXd::Constant(days, n_exog, kMissing));

    std::unordered_map<std::string, int> region_idx;
    for (int r = 0; r < n_regions; ++r) region_idx[ds.regions[r]] = r;

    for (const auto& row : rows) {
        if (row.date < start || row.date > end) continue;
        const int r = region_idx[row.region];
        const int t = row.date - start;
        ds.target[r][t] = row.death_increase;
        for (int j = 0; j < n_exog; ++j) ds.exog[r](t, j) = row.exogenous[j];
    }

    for (int r = 0; r < n_regions; ++r) {
        for (int t = 0; t < days; ++t) {
            if (std::isnan(ds.target[r][t])) {
                throw DataError("gap in calendar for region " + ds.regions[r] + " at " +
                                (start + t).iso());
            }
            if (ds.target[r][t] < 0.0) {
                ds.target[r][t] = 0.0;
                ++ds.log.negative_target_clamped;
            }
        }
        for (int j = 0; j < n_exog; ++j) {
            std::vector<double> col(days);
            for (int t = 0; t < days; ++t) col[t] = ds.exog[r](t, j);
            impute_column(col, ds.log);
            for (int t = 0; t < days; ++t) {
                if (col[t] < 0.0) {
                    col[t] = 0.0;
                    ++ds.log.negative_exog_clamped;
                }
                ds.exog[r](t, j) = col[t];
            }
        }
    }
    return ds;
}

PanelDataset load_covid_csv(const std::string& path, DataLevel level) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    CleaningLog log;
    auto rows = parse_covid_rows(in, path, level, log);
    PanelDataset ds = build_panel(std::move(rows), level);
    ds.log.unknown_region_rows += log.unknown_region_rows;
    return ds;
}

std::string panel_to_csv(const PanelDataset& ds) {
    std::ostringstream out;
    out << "date,region,deathIncrease";
    for (const auto& name : ds.exog_names) out << ',' << name;
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    for (std::size_t r = 0; r < ds.regions.size(); ++r) {
        for (int t = 0; t < ds.days(); ++t) {
            out << (ds.start + t).iso() << ',' << ds.regions[r];
            put(ds.target[r][t]);
            for (int j = 0; j < static_cast<int>(ds.exog_names.size()); ++j) {
                put(ds.exog[r](t, j));
            }
            out << '\n';
        }
    }
    return out.str();
}

void write_panel_csv(const PanelDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << panel_to_csv(ds);
}

namespace {

PanelDataset slice_panel(const PanelDataset& ds, int begin, int length) {
    PanelDataset out;
    out.regions = ds.regions;
    out.start = ds.start + begin;
    out.exog_names = ds.exog_names;
    out.log = ds.log;
    for (std::size_t r = 0; r < ds.regions.size(); ++r) {
        out.target.push_back(std::vector<double>(ds.target[r].begin() + begin,
                                                 ds.target[r].begin() + begin + length));
        out.exog.push_back(ds.exog[r].middleRows(begin, length));
    }
    return out;
}

} // namespace

int initial_train_length(int days, DataLevel level) {
    if (level == DataLevel::national && days == 376) return 236;
    if (level == DataLevel::state && days == 297) return 185;
    return static_cast<int>(std::floor(0.6 * days));
}

SplitResult train_test_split(const PanelDataset& ds, DataLevel level,
                             bool require_canonical_length) {
    const int days = ds.days();
    const int expected = level == DataLevel::national ? 376 : 297;
    if (require_canonical_length && days != expected) {
        throw ConfigError("dataset length " + std::to_string(days) +
                          " does not match the canonical " + std::to_string(expected) +
                          "-day window");
    }
    const int train = initial_train_length(days, level);
    if (train <= 0 || train >= days) {
        throw ConfigError("dataset too short to split");
    }
    return SplitResult{slice_panel(ds, 0, train), slice_panel(ds, train, days - train)};
}

FlowLoadResult load_flows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_csv_line(line);
    const std::vector<std::string> required = {"origin", "destination", "date",
                                               "visitor_flows", "pop_flows"};
    std::vector<int> cols;
    for (const auto& name : required) {
        int idx = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) idx = static_cast<int>(i);
        }
        if (idx < 0) throw DataError(path + ": missing required column '" + name + "'");
        cols.push_back(idx);
    }

    FlowLoadResult result;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        auto field_at = [&](int idx) -> std::string {
            return idx < static_cast<int>(fields.size()) ? fields[idx] : "";
        };
        FlowRecord rec;
        rec.origin = trim(field_at(cols[0]));
        rec.destination = trim(field_at(cols[1]));
        rec.date = Date::parse(field_at(cols[2]));
        if (!parse_double(field_at(cols[3]), rec.visitor_flows) ||
            !parse_double(field_at(cols[4]), rec.pop_flows)) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": unparseable flow value");
        }
        if (rec.visitor_flows < 0.0 || rec.pop_flows < 0.0) {
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": negative flow value");
        }
        if (!is_known_region(rec.origin, DataLevel::state) ||
            !is_known_region(rec.destination, DataLevel::state)) {
            ++result.dropped_unknown_region;
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

} // namespace exocast
