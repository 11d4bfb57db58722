#pragma once

#include "crispnam/dataset.hpp"
#include "crispnam/model.hpp"
#include "crispnam/preprocess.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace crispnam {

// s_{i,k} evaluated on a grid spanning the observed preprocessed range of
// feature i (256 uniform points plus the observed deciles; one-hot features
// use {0, 1} only), with original-scale coordinates recovered from the
// preprocessor.
struct ShapeCurve {
    int feature = 0;
    int risk = 0; // 0-based
    std::string feature_name;
    std::vector<double> x_preprocessed;
    std::vector<double> x_original;
    std::vector<double> contribution;
    std::vector<double> rug_preprocessed; // observed values
    std::vector<double> rug_original;
};

ShapeCurve shape_function(const ModelParams& model, const Preprocessor& pre,
                          const SurvivalDataset& ds, int feature, int risk,
                          int grid_size = 256);

// Per-(feature, risk) mean absolute contribution over the dataset, the signed
// mean for direction of effect, and per-risk rankings (descending importance).
struct ImportanceTable {
    Matrix importance;  // p x K, nonnegative
    Matrix signed_mean; // p x K
    std::vector<std::vector<int>> ranking; // per risk: permutation of features
    std::vector<std::string> feature_names;
};

ImportanceTable importance(const ModelParams& model, const SurvivalDataset& ds);

void write_shape_csv(std::ostream& out, const std::vector<ShapeCurve>& curves,
                     const std::string& fingerprint = "");
void write_rug_csv(std::ostream& out, const std::vector<ShapeCurve>& curves,
                   const std::string& fingerprint = "");
void write_importance_csv(std::ostream& out, const ImportanceTable& table,
                          const std::string& fingerprint = "");

} // namespace crispnam
