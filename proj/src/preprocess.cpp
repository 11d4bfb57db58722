#include "crispnam/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace crispnam {

Preprocessor Preprocessor::fit(const RawDataset& raw) {
    require(raw.size() > 0, "cannot fit a preprocessor on an empty dataset");
    Preprocessor pre;
    for (const RawColumn& col : raw.columns) {
        if (col.kind == ColumnKind::Continuous) {
            double sum = 0.0;
            std::size_t n_obs = 0;
            for (std::size_t i = 0; i < raw.size(); ++i) {
                if (col.missing[i]) continue;
                sum += col.numeric[i];
                ++n_obs;
            }
            if (n_obs == 0)
                throw ValidationError("column '" + col.name + "' is entirely missing");
            double mean = sum / static_cast<double>(n_obs);
            double ss = 0.0;
            for (std::size_t i = 0; i < raw.size(); ++i) {
                if (col.missing[i]) continue;
                double d = col.numeric[i] - mean;
                ss += d * d;
            }
            double stddev = std::sqrt(ss / static_cast<double>(n_obs)); // population convention
            if (stddev == 0.0) stddev = 1.0;
            pre.continuous_.push_back({col.name, mean, stddev, mean});
        } else {
            std::map<std::string, std::size_t> counts;
            for (std::size_t i = 0; i < raw.size(); ++i)
                if (!col.missing[i]) ++counts[col.category[i]];
            if (counts.empty())
                throw ValidationError("column '" + col.name + "' is entirely missing");
            CategoricalStats stats;
            stats.column = col.name;
            std::size_t best = 0;
            for (const auto& [value, count] : counts) {
                stats.vocabulary.push_back(value); // std::map keeps it sorted
                if (count > best) {
                    best = count;
                    stats.impute_mode = value;
                }
            }
            pre.categorical_.push_back(std::move(stats));
        }
    }
    pre.rebuild_output_columns();
    return pre;
}

Preprocessor Preprocessor::from_stats(std::vector<ContinuousStats> cont,
                                      std::vector<CategoricalStats> cat) {
    Preprocessor pre;
    pre.continuous_ = std::move(cont);
    pre.categorical_ = std::move(cat);
    pre.rebuild_output_columns();
    return pre;
}

void Preprocessor::rebuild_output_columns() {
    output_columns_.clear();
    for (const auto& c : continuous_) {
        OutputColumn oc;
        oc.name = c.column;
        oc.source = c.column;
        oc.mean = c.mean;
        oc.stddev = c.stddev;
        output_columns_.push_back(std::move(oc));
    }
    for (const auto& c : categorical_) {
        for (const std::string& v : c.vocabulary) {
            OutputColumn oc;
            oc.name = c.column + "=" + v;
            oc.source = c.column;
            oc.one_hot = true;
            oc.category = v;
            output_columns_.push_back(std::move(oc));
        }
    }
}

SurvivalDataset Preprocessor::transform(const RawDataset& raw) const {
    // schema must match what the preprocessor was fitted on
    std::map<std::string, const RawColumn*> by_name;
    for (const RawColumn& col : raw.columns) by_name[col.name] = &col;
    auto lookup = [&](const std::string& name, ColumnKind kind) -> const RawColumn* {
        auto it = by_name.find(name);
        require(it != by_name.end(), "column '" + name + "' missing at transform time");
        require(it->second->kind == kind, "column '" + name + "' changed kind since fitting");
        return it->second;
    };

    std::size_t n = raw.size();
    SurvivalDataset ds;
    ds.features.setZero(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(output_columns_.size()));
    ds.times = raw.times;
    ds.events = raw.events;
    ds.num_risks = raw.num_risks;
    for (const OutputColumn& oc : output_columns_) ds.feature_names.push_back(oc.name);

    Eigen::Index j = 0;
    for (const auto& stats : continuous_) {
        const RawColumn* col = lookup(stats.column, ColumnKind::Continuous);
        for (std::size_t i = 0; i < n; ++i) {
            double v = col->missing[i] ? stats.impute : col->numeric[i];
            ds.features(static_cast<Eigen::Index>(i), j) = (v - stats.mean) / stats.stddev;
        }
        ++j;
    }
    for (const auto& stats : categorical_) {
        const RawColumn* col = lookup(stats.column, ColumnKind::Categorical);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& v = col->missing[i] ? stats.impute_mode : col->category[i];
            auto it = std::lower_bound(stats.vocabulary.begin(), stats.vocabulary.end(), v);
            if (it != stats.vocabulary.end() && *it == v) {
                Eigen::Index offset = static_cast<Eigen::Index>(it - stats.vocabulary.begin());
                ds.features(static_cast<Eigen::Index>(i), j + offset) = 1.0;
            }
            // unseen category: whole block stays zero
        }
        j += static_cast<Eigen::Index>(stats.vocabulary.size());
    }
    return ds;
}

} // namespace crispnam
