#include "crispnam/checkpoint.hpp"
#include "crispnam/config.hpp"
#include "crispnam/csv.hpp"
#include "crispnam/interpret.hpp"
#include "crispnam/kfold.hpp"
#include "crispnam/synth.hpp"
#include "crispnam/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace crispnam;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write: " + path);
    return out;
}

RawDataset load_data(const RunConfig& cfg, const std::string& path) {
    require(!path.empty(), "no data path given (config data.path or --data)");
    return load_csv(path, cfg.time_col, cfg.event_col, cfg.schema);
}

void write_metric_cells(std::ostream& out, const std::vector<CvCell>& cells,
                        const std::string& fingerprint) {
    if (!fingerprint.empty()) out << "# config_fingerprint=" << fingerprint << "\n";
    csv::write_row(out, {"fold", "risk", "horizon_quantile", "metric", "value"});
    for (const CvCell& c : cells)
        csv::write_row(out, {std::to_string(c.fold), std::to_string(c.risk), c.quantile,
                             c.metric, c.value ? csv::format_double(*c.value) : ""});
}

void write_training_log(const std::string& path, const FitResult& fit_result,
                        const std::string& fingerprint) {
    std::ofstream out = open_out(path);
    nlohmann::json meta{{"type", "meta"}, {"config_fingerprint", fingerprint}};
    out << meta.dump() << "\n";
    for (const EpochRecord& rec : fit_result.log) {
        nlohmann::json j{{"type", "epoch"},
                         {"epoch", rec.epoch},
                         {"train_loss", rec.train_loss},
                         {"val_loss", rec.val_loss},
                         {"penalty", rec.penalty},
                         {"seconds", rec.seconds}};
        std::vector<double> pr(rec.val_per_risk.data(),
                               rec.val_per_risk.data() + rec.val_per_risk.size());
        j["val_per_risk"] = pr;
        out << j.dump() << "\n";
    }
}

int cmd_synth(std::size_t n, double gamma_t, double censor_fraction, std::uint64_t seed,
              int dims_per_group, const std::string& out_path) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.gamma_t = gamma_t;
    cfg.censor_fraction = censor_fraction;
    cfg.seed = seed;
    cfg.dim_per_group = dims_per_group;
    SurvivalDataset ds = synth_generate(cfg);

    nlohmann::json canon{{"command", "synth"}, {"n", n},    {"gamma_t", gamma_t},
                         {"censor_fraction", censor_fraction}, {"seed", seed},
                         {"dim_per_group", dims_per_group}};
    std::ofstream out = open_out(out_path);
    write_csv(out, ds, "time", "event", fnv1a_hex(canon.dump()));
    std::cerr << "wrote " << ds.size() << " subjects to " << out_path << "\n";
    return 0;
}

Checkpoint train_checkpoint(const RunConfig& cfg, const RawDataset& raw, FitResult* fit_out) {
    Preprocessor pre = Preprocessor::fit(raw);
    SurvivalDataset ds = pre.transform(raw);
    ds.check_class_presence();

    TrainConfig tc = cfg.train;
    FitResult fitted = fit(ds, cfg.model, tc);

    RiskScores scores = forward_eval(fitted.params, ds.features);
    Checkpoint ck;
    ck.model = fitted.params;
    ck.preprocessor = pre;
    ck.schema = cfg.schema;
    ck.time_col = cfg.time_col;
    ck.event_col = cfg.event_col;
    ck.num_risks = ds.num_risks;
    ck.baselines = breslow(scores.eta, ds.times, ds.events);
    ck.horizons = horizons(ds.times, ds.events, ds.num_risks);
    ck.weights = fitted.weights;
    ck.config_fingerprint = cfg.fingerprint;
    if (fit_out) *fit_out = std::move(fitted);
    return ck;
}

int cmd_train(const std::string& config_path, std::string out_dir) {
    RunConfig cfg = load_run_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    RawDataset raw = load_data(cfg, cfg.data_path);
    FitResult fitted;
    Checkpoint ck = train_checkpoint(cfg, raw, &fitted);

    std::string ck_path = (fs::path(out_dir) / "checkpoint.json").string();
    save_checkpoint(ck_path, ck);
    write_training_log((fs::path(out_dir) / "training_log.jsonl").string(), fitted,
                       cfg.fingerprint);
    std::cerr << "best epoch " << fitted.best_epoch << " (validation loss "
              << fitted.best_val_loss << "); checkpoint at " << ck_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& ck_path, const std::string& data_path,
                 const std::string& out_path, bool no_ipcw) {
    Checkpoint ck = load_checkpoint(ck_path);
    RawDataset raw = load_csv(data_path, ck.time_col, ck.event_col, ck.schema);
    SurvivalDataset ds = ck.preprocessor.transform(raw);
    require(ds.num_risks <= ck.num_risks,
            "data contains event labels above the checkpoint's risk count");
    ds.num_risks = ck.num_risks;

    RiskScores scores = forward_eval(ck.model, ds.features);
    MetricOptions opts;
    opts.ipcw = !no_ipcw;
    std::vector<CvCell> cells =
        evaluate_metrics(scores.eta, ds, ck.baselines, ck.horizons, opts, 0);
    std::ofstream out = open_out(out_path);
    write_metric_cells(out, cells, ck.config_fingerprint);
    std::cerr << "wrote " << cells.size() << " metric rows to " << out_path << "\n";
    return 0;
}

int cmd_cv(const std::string& config_path, const std::string& out_path) {
    RunConfig cfg = load_run_config(config_path);
    RawDataset raw = load_data(cfg, cfg.data_path);
    Preprocessor pre = Preprocessor::fit(raw);
    SurvivalDataset ds = pre.transform(raw);
    ds.check_class_presence();

    CvResult cv = nested_cv(ds, cfg.search, cfg.outer_folds, cfg.inner_folds, cfg.train,
                            cfg.metrics, cfg.seed, cfg.threads);
    std::ofstream out = open_out(out_path);
    write_metric_cells(out, cv.cells, cfg.fingerprint);

    for (const auto& agg : cv.aggregate())
        std::cerr << "risk " << agg.risk << " " << agg.quantile << " " << agg.metric << ": "
                  << agg.mean << " +/- " << agg.stddev << " (n=" << agg.count << ")\n";
    return 0;
}

int cmd_explain(const std::string& ck_path, const std::string& data_path,
                const std::string& out_dir, int grid_size) {
    Checkpoint ck = load_checkpoint(ck_path);
    RawDataset raw = load_csv(data_path, ck.time_col, ck.event_col, ck.schema);
    SurvivalDataset ds = ck.preprocessor.transform(raw);
    fs::create_directories(out_dir);

    std::vector<ShapeCurve> curves;
    for (int k = 0; k < ck.num_risks; ++k)
        for (int i = 0; i < ck.model.num_features(); ++i)
            curves.push_back(shape_function(ck.model, ck.preprocessor, ds, i, k, grid_size));
    ImportanceTable table = importance(ck.model, ds);

    {
        std::ofstream out = open_out((fs::path(out_dir) / "shapes.csv").string());
        write_shape_csv(out, curves, ck.config_fingerprint);
    }
    {
        std::ofstream out = open_out((fs::path(out_dir) / "rug.csv").string());
        write_rug_csv(out, curves, ck.config_fingerprint);
    }
    {
        std::ofstream out = open_out((fs::path(out_dir) / "importance.csv").string());
        write_importance_csv(out, table, ck.config_fingerprint);
    }
    std::cerr << "wrote shapes.csv, rug.csv, importance.csv to " << out_dir << "\n";
    return 0;
}

int cmd_predict(const std::string& ck_path, const std::string& data_path, double horizon,
                const std::string& out_path) {
    Checkpoint ck = load_checkpoint(ck_path);
    RawDataset raw = load_csv(data_path, ck.time_col, ck.event_col, ck.schema);
    SurvivalDataset ds = ck.preprocessor.transform(raw);

    RiskScores scores = forward_eval(ck.model, ds.features);
    std::ofstream out = open_out(out_path);
    out << "# config_fingerprint=" << ck.config_fingerprint << "\n";
    csv::write_row(out, {"subject", "time", "risk", "cif", "survival"});
    for (Eigen::Index s = 0; s < scores.eta.rows(); ++s) {
        CifCurves curves = predict_cif(ck.baselines, scores.eta.row(s).transpose(), horizon);
        for (std::size_t m = 0; m < curves.grid.size(); ++m)
            for (int k = 0; k < ck.num_risks; ++k)
                csv::write_row(out, {std::to_string(s), csv::format_double(curves.grid[m]),
                                     std::to_string(k + 1),
                                     csv::format_double(curves.cif(static_cast<Eigen::Index>(m), k)),
                                     csv::format_double(curves.survival[static_cast<Eigen::Index>(m)])});
    }
    std::cerr << "wrote CIF curves for " << scores.eta.rows() << " subjects to " << out_path
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"competing-risks neural additive survival model"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "generate the synthetic two-risk benchmark CSV");
    std::size_t n = 1000;
    double gamma_t = 10.0, censor_fraction = 0.5;
    std::uint64_t seed = 0;
    int dims_per_group = 4;
    std::string out_path = "synth.csv";
    synth->add_option("--n", n, "number of subjects");
    synth->add_option("--gamma-t", gamma_t, "rate scale");
    synth->add_option("--censor-fraction", censor_fraction, "fraction relabeled censored");
    synth->add_option("--seed", seed, "random seed");
    synth->add_option("--dims-per-group", dims_per_group, "dimensions per covariate group");
    synth->add_option("--out", out_path, "output CSV path");

    auto* train_cmd = app.add_subcommand("train", "fit a model and write a checkpoint");
    std::string config_path, out_dir;
    train_cmd->add_option("--config", config_path, "run config JSON")->required();
    train_cmd->add_option("--out-dir", out_dir, "output directory (default: config output_dir)");

    auto* eval_cmd = app.add_subcommand("evaluate", "metric report for a checkpoint on a CSV");
    std::string ck_path, data_path, out_file = "metrics.csv";
    bool no_ipcw = false;
    eval_cmd->add_option("--checkpoint", ck_path, "checkpoint JSON")->required();
    eval_cmd->add_option("--data", data_path, "evaluation CSV")->required();
    eval_cmd->add_option("--out", out_file, "output metric CSV");
    eval_cmd->add_flag("--no-ipcw", no_ipcw, "disable censoring reweighting");

    auto* cv_cmd = app.add_subcommand("cv", "nested cross-validation with random search");
    std::string cv_config, cv_out = "cv_metrics.csv";
    cv_cmd->add_option("--config", cv_config, "run config JSON")->required();
    cv_cmd->add_option("--out", cv_out, "output per-fold metric CSV");

    auto* explain_cmd = app.add_subcommand("explain", "shape, rug and importance CSV exports");
    std::string ex_ck, ex_data, ex_dir = "explain";
    int grid_size = 256;
    explain_cmd->add_option("--checkpoint", ex_ck, "checkpoint JSON")->required();
    explain_cmd->add_option("--data", ex_data, "data CSV")->required();
    explain_cmd->add_option("--out-dir", ex_dir, "output directory");
    explain_cmd->add_option("--grid-size", grid_size, "grid points per continuous feature");

    auto* predict_cmd = app.add_subcommand("predict", "CIF curves up to a horizon");
    std::string pr_ck, pr_data, pr_out = "cif.csv";
    double horizon = 0.0;
    predict_cmd->add_option("--checkpoint", pr_ck, "checkpoint JSON")->required();
    predict_cmd->add_option("--data", pr_data, "covariate CSV")->required();
    predict_cmd->add_option("--horizon", horizon, "prediction horizon")->required();
    predict_cmd->add_option("--out", pr_out, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(n, gamma_t, censor_fraction, seed, dims_per_group, out_path);
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir);
        if (eval_cmd->parsed()) return cmd_evaluate(ck_path, data_path, out_file, no_ipcw);
        if (cv_cmd->parsed()) return cmd_cv(cv_config, cv_out);
        if (explain_cmd->parsed()) return cmd_explain(ex_ck, ex_data, ex_dir, grid_size);
        if (predict_cmd->parsed()) return cmd_predict(pr_ck, pr_data, horizon, pr_out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
