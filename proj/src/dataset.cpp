#include "crispnam/dataset.hpp"

#include "crispnam/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace crispnam {

namespace {

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("row " + std::to_string(row) + ", column '" + col +
                              "': cannot parse '" + s + "' as a number");
    }
}

int parse_event(const std::string& s, std::size_t row, const std::string& col) {
    double v = parse_double(s, row, col);
    double r = std::round(v);
    if (!std::isfinite(v) || std::abs(v - r) > 1e-12 || r < 0)
        throw ValidationError("row " + std::to_string(row) + ", column '" + col +
                              "': event label '" + s + "' is not a nonnegative integer");
    return static_cast<int>(r);
}

} // namespace

void SurvivalDataset::check_class_presence() const {
    std::vector<int> counts = event_counts(events, num_risks);
    for (int k = 1; k <= num_risks; ++k)
        if (counts[static_cast<std::size_t>(k)] == 0)
            throw ValidationError("no subject with event type " + std::to_string(k) +
                                  "; every cause must be observed at least once");
}

SurvivalDataset SurvivalDataset::subset(const std::vector<std::size_t>& idx) const {
    SurvivalDataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    out.times.reserve(idx.size());
    out.events.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) =
            features.row(static_cast<Eigen::Index>(idx[i]));
        out.times.push_back(times[idx[i]]);
        out.events.push_back(events[idx[i]]);
    }
    out.feature_names = feature_names;
    out.num_risks = num_risks;
    return out;
}

std::vector<int> event_counts(const std::vector<int>& events, int num_risks) {
    std::vector<int> counts(static_cast<std::size_t>(num_risks) + 1, 0);
    for (int e : events) {
        if (e < 0 || e > num_risks)
            throw ValidationError("event label " + std::to_string(e) + " outside {0.." +
                                  std::to_string(num_risks) + "}");
        ++counts[static_cast<std::size_t>(e)];
    }
    return counts;
}

RawDataset load_csv(std::istream& in, const std::string& time_col, const std::string& event_col,
                    const Schema& schema) {
    csv::Table t = csv::read(in);

    auto col_index = [&](const std::string& name) -> std::size_t {
        auto it = std::find(t.header.begin(), t.header.end(), name);
        if (it == t.header.end()) throw ValidationError("column '" + name + "' not found in CSV");
        return static_cast<std::size_t>(it - t.header.begin());
    };
    std::size_t ti = col_index(time_col);
    std::size_t ei = col_index(event_col);

    RawDataset ds;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == ti || c == ei) continue;
        auto it = schema.find(t.header[c]);
        if (it == schema.end())
            throw ValidationError("column '" + t.header[c] +
                                  "' present in CSV but missing from the schema");
        RawColumn col;
        col.name = t.header[c];
        col.kind = it->second;
        ds.columns.push_back(std::move(col));
    }
    for (const auto& [name, kind] : schema) {
        (void)kind;
        if (std::find(t.header.begin(), t.header.end(), name) == t.header.end())
            throw ValidationError("schema column '" + name + "' not found in CSV");
    }

    std::size_t n = t.rows.size();
    ds.times.reserve(n);
    ds.events.reserve(n);
    for (auto& col : ds.columns) {
        col.missing.assign(n, 0);
        if (col.kind == ColumnKind::Continuous) col.numeric.assign(n, 0.0);
        else col.category.assign(n, std::string());
    }

    int max_event = 0;
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t file_row = r + 2; // 1-based, after header
        double tv = parse_double(t.rows[r][ti], file_row, time_col);
        if (!std::isfinite(tv) || tv < 0)
            throw ValidationError("row " + std::to_string(file_row) + ": time " +
                                  t.rows[r][ti] + " must be finite and nonnegative");
        ds.times.push_back(tv);
        int ev = parse_event(t.rows[r][ei], file_row, event_col);
        max_event = std::max(max_event, ev);
        ds.events.push_back(ev);

        std::size_t out_c = 0;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (c == ti || c == ei) continue;
            RawColumn& col = ds.columns[out_c++];
            const std::string& cell = t.rows[r][c];
            if (cell.empty()) {
                col.missing[r] = 1;
            } else if (col.kind == ColumnKind::Continuous) {
                col.numeric[r] = parse_double(cell, file_row, col.name);
            } else {
                col.category[r] = cell;
            }
        }
    }
    ds.num_risks = max_event;
    return ds;
}

RawDataset load_csv(const std::string& path, const std::string& time_col,
                    const std::string& event_col, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    return load_csv(in, time_col, event_col, schema);
}

void write_csv(std::ostream& out, const SurvivalDataset& ds, const std::string& time_col,
               const std::string& event_col, const std::string& fingerprint) {
    if (!fingerprint.empty()) out << "# config_fingerprint=" << fingerprint << "\n";
    std::vector<std::string> row = ds.feature_names;
    row.push_back(time_col);
    row.push_back(event_col);
    csv::write_row(out, row);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j)
            row.push_back(csv::format_double(ds.features(static_cast<Eigen::Index>(i), j)));
        row.push_back(csv::format_double(ds.times[i]));
        row.push_back(std::to_string(ds.events[i]));
        csv::write_row(out, row);
    }
}

} // namespace crispnam
