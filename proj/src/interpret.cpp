#include "crispnam/interpret.hpp"

#include "crispnam/csv.hpp"
#include "crispnam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

namespace crispnam {

ShapeCurve shape_function(const ModelParams& model, const Preprocessor& pre,
                          const SurvivalDataset& ds, int feature, int risk, int grid_size) {
    require(feature >= 0 && feature < model.num_features(), "feature index out of range");
    require(risk >= 0 && risk < model.num_risks(), "risk index out of range");
    require(ds.num_features() == model.num_features(),
            "dataset feature count does not match the model");
    const auto& cols = pre.output_columns();
    require(cols.size() == static_cast<std::size_t>(model.num_features()),
            "preprocessor does not match the model");
    const OutputColumn& oc = cols[static_cast<std::size_t>(feature)];

    ShapeCurve curve;
    curve.feature = feature;
    curve.risk = risk;
    curve.feature_name = oc.name;

    std::vector<double> observed;
    observed.reserve(ds.size());
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i)
        observed.push_back(ds.features(i, feature));

    std::vector<double> grid;
    if (oc.one_hot) {
        grid = {0.0, 1.0};
    } else {
        double lo = *std::min_element(observed.begin(), observed.end());
        double hi = *std::max_element(observed.begin(), observed.end());
        std::set<double> points;
        if (grid_size <= 1 || lo == hi) {
            points.insert(lo);
        } else {
            for (int g = 0; g < grid_size; ++g)
                points.insert(lo + (hi - lo) * static_cast<double>(g) /
                                       static_cast<double>(grid_size - 1));
            for (int d = 1; d <= 9; ++d)
                points.insert(quantile_linear(observed, 0.1 * static_cast<double>(d)));
        }
        grid.assign(points.begin(), points.end());
    }

    Vector x = Eigen::Map<const Vector>(grid.data(), static_cast<Eigen::Index>(grid.size()));
    Matrix h = eval_feature_net(model, feature, x);
    const Matrix& raw = model.projections[static_cast<std::size_t>(feature)];
    Vector w = raw.col(risk) / (raw.col(risk).norm() + model.epsilon);
    Vector s = h * w;

    curve.x_preprocessed = grid;
    curve.contribution.assign(s.data(), s.data() + s.size());
    auto to_original = [&](double v) { return oc.one_hot ? v : oc.mean + oc.stddev * v; };
    for (double v : grid) curve.x_original.push_back(to_original(v));
    curve.rug_preprocessed = observed;
    for (double v : observed) curve.rug_original.push_back(to_original(v));
    return curve;
}

ImportanceTable importance(const ModelParams& model, const SurvivalDataset& ds) {
    require(ds.size() > 0, "importance needs a nonempty dataset");
    const int p = model.num_features();
    const int K = model.num_risks();
    RiskScores scores = forward_eval(model, ds.features);

    ImportanceTable table;
    table.importance.setZero(p, K);
    table.signed_mean.setZero(p, K);
    table.feature_names = ds.feature_names;
    const double n = static_cast<double>(ds.size());
    for (int k = 0; k < K; ++k) {
        const Matrix& c = scores.contributions[static_cast<std::size_t>(k)];
        table.importance.col(k) = c.cwiseAbs().colwise().sum().transpose() / n;
        table.signed_mean.col(k) = c.colwise().sum().transpose() / n;
        std::vector<int> rank(static_cast<std::size_t>(p));
        std::iota(rank.begin(), rank.end(), 0);
        std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
            return table.importance(a, k) > table.importance(b, k);
        });
        table.ranking.push_back(std::move(rank));
    }
    return table;
}

void write_shape_csv(std::ostream& out, const std::vector<ShapeCurve>& curves,
                     const std::string& fingerprint) {
    if (!fingerprint.empty()) out << "# config_fingerprint=" << fingerprint << "\n";
    csv::write_row(out, {"feature", "risk", "x_original", "x_preprocessed", "contribution"});
    for (const ShapeCurve& c : curves)
        for (std::size_t g = 0; g < c.x_preprocessed.size(); ++g)
            csv::write_row(out, {c.feature_name, std::to_string(c.risk + 1),
                                 csv::format_double(c.x_original[g]),
                                 csv::format_double(c.x_preprocessed[g]),
                                 csv::format_double(c.contribution[g])});
}

void write_rug_csv(std::ostream& out, const std::vector<ShapeCurve>& curves,
                   const std::string& fingerprint) {
    if (!fingerprint.empty()) out << "# config_fingerprint=" << fingerprint << "\n";
    csv::write_row(out, {"feature", "x_original", "x_preprocessed"});
    std::set<std::string> seen;
    for (const ShapeCurve& c : curves) {
        if (!seen.insert(c.feature_name).second) continue; // rug is risk-independent
        for (std::size_t g = 0; g < c.rug_preprocessed.size(); ++g)
            csv::write_row(out, {c.feature_name, csv::format_double(c.rug_original[g]),
                                 csv::format_double(c.rug_preprocessed[g])});
    }
}

void write_importance_csv(std::ostream& out, const ImportanceTable& table,
                          const std::string& fingerprint) {
    if (!fingerprint.empty()) out << "# config_fingerprint=" << fingerprint << "\n";
    csv::write_row(out, {"feature", "risk", "importance", "signed_mean", "rank"});
    const int K = static_cast<int>(table.importance.cols());
    for (int k = 0; k < K; ++k) {
        for (std::size_t r = 0; r < table.ranking[static_cast<std::size_t>(k)].size(); ++r) {
            int i = table.ranking[static_cast<std::size_t>(k)][r];
            csv::write_row(out, {table.feature_names[static_cast<std::size_t>(i)],
                                 std::to_string(k + 1),
                                 csv::format_double(table.importance(i, k)),
                                 csv::format_double(table.signed_mean(i, k)),
                                 std::to_string(r + 1)});
        }
    }
}

} // namespace crispnam
