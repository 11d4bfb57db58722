#pragma once

#include "crispnam/common.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace crispnam {

enum class ColumnKind { Continuous, Categorical };

// column name -> kind, for every covariate column in the file
using Schema = std::map<std::string, ColumnKind>;

// One covariate column as read from disk: values not yet imputed or encoded,
// missing cells flagged. Continuous cells are parsed eagerly so malformed
// numbers are reported with their row and column.
struct RawColumn {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::vector<double> numeric;         // valid where !missing, continuous only
    std::vector<std::string> category;   // categorical only
    std::vector<char> missing;
};

struct RawDataset {
    std::vector<RawColumn> columns; // in file order
    std::vector<double> times;
    std::vector<int> events; // 0 = censored, 1..K = cause
    int num_risks = 0;

    std::size_t size() const { return times.size(); }
};

// Fully numeric dataset: imputed, scaled, one-hot encoded.
struct SurvivalDataset {
    Matrix features; // N x p
    std::vector<double> times;
    std::vector<int> events;
    std::vector<std::string> feature_names;
    int num_risks = 0;

    std::size_t size() const { return times.size(); }
    int num_features() const { return static_cast<int>(features.cols()); }

    // training requirement: every cause 1..K occurs at least once
    void check_class_presence() const;
    SurvivalDataset subset(const std::vector<std::size_t>& idx) const;
};

RawDataset load_csv(const std::string& path, const std::string& time_col,
                    const std::string& event_col, const Schema& schema);
RawDataset load_csv(std::istream& in, const std::string& time_col, const std::string& event_col,
                    const Schema& schema);

// Standard CSV layout used by the CLI: covariates, then time_col, event_col.
void write_csv(std::ostream& out, const SurvivalDataset& ds, const std::string& time_col,
               const std::string& event_col, const std::string& fingerprint = "");

std::vector<int> event_counts(const std::vector<int>& events, int num_risks);

} // namespace crispnam
