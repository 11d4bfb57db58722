#pragma once

#include "crispnam/dataset.hpp"

#include <string>
#include <vector>

namespace crispnam {

// Metadata for one encoded output column, consumed by the interpretability
// exports to map preprocessed coordinates back to the original scale.
struct OutputColumn {
    std::string name;        // e.g. "age" or "stage=II"
    std::string source;      // source column name
    bool one_hot = false;
    std::string category;    // one-hot only
    double mean = 0.0;       // continuous only
    double stddev = 1.0;     // continuous only
};

// Standard scaling for continuous columns (population stddev, constant
// columns keep stddev 1), frozen vocabularies with one-hot encoding for
// categorical columns. Imputation (mean / mode) happens before scaling;
// statistics are computed on observed cells only. Unseen categories at
// transform time map to the all-zero one-hot block.
class Preprocessor {
  public:
    Preprocessor() = default;

    static Preprocessor fit(const RawDataset& raw);
    SurvivalDataset transform(const RawDataset& raw) const;

    const std::vector<OutputColumn>& output_columns() const { return output_columns_; }

    struct ContinuousStats {
        std::string column;
        double mean = 0.0;
        double stddev = 1.0; // 1 substituted when the column is constant
        double impute = 0.0; // observed mean
    };
    struct CategoricalStats {
        std::string column;
        std::vector<std::string> vocabulary; // sorted
        std::string impute_mode;
    };

    const std::vector<ContinuousStats>& continuous() const { return continuous_; }
    const std::vector<CategoricalStats>& categorical() const { return categorical_; }

    // used by checkpoint serialization
    static Preprocessor from_stats(std::vector<ContinuousStats> cont,
                                   std::vector<CategoricalStats> cat);

  private:
    void rebuild_output_columns();

    std::vector<ContinuousStats> continuous_;   // in dataset column order
    std::vector<CategoricalStats> categorical_; // in dataset column order
    std::vector<OutputColumn> output_columns_;
};

} // namespace crispnam
