#pragma once

#include "crispnam/dataset.hpp"
#include "crispnam/hazard.hpp"
#include "crispnam/loss.hpp"
#include "crispnam/metrics.hpp"
#include "crispnam/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace crispnam {

struct ModelSpec {
    std::vector<int> hidden{32};
    bool use_batchnorm = false;
    double dropout = 0.0;
    double feature_dropout = 0.0;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0; // gamma
    int batch_size = 256;
    int max_epochs = 100;
    int patience = 10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
    bool penalize_all_params = false; // include biases/batch-norm in ||theta||^2
    bool coupled_l2 = false;          // add 2*gamma*theta to the loss gradient instead
                                      // of decoupled AdamW decay
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0; // summed over batches, penalty included when coupled
    double val_loss = 0.0;   // full validation set, eval mode
    Vector val_per_risk;
    double penalty = 0.0;
    double seconds = 0.0;
};

struct FitResult {
    ModelParams params; // best validation epoch
    RiskWeights weights;
    std::vector<EpochRecord> log;
    int best_epoch = -1;
    double best_val_loss = std::numeric_limits<double>::infinity();
};

// AdamW training with stratified early-stopping validation carved from the
// input (validation_fraction), risk-frequency weights computed on the train
// part, mini-batch risk sets inside each batch, and full-set risk sets for
// the per-epoch validation loss. Returns the parameters of the best
// validation epoch. Throws TrainingDiverged on non-finite gradients.
FitResult fit(const SurvivalDataset& ds, const ModelSpec& spec, const TrainConfig& cfg);

struct SearchSpace {
    std::pair<double, double> learning_rate{1e-4, 1e-2};    // log-uniform
    std::pair<double, double> weight_decay{1e-6, 1e-2};     // log-uniform
    std::pair<double, double> dropout{0.0, 0.5};            // uniform
    std::pair<double, double> feature_dropout{0.0, 0.2};    // uniform
    std::pair<int, int> hidden_layers{1, 3};
    std::pair<int, int> width{8, 128};
    std::vector<bool> batchnorm_choices{false, true};
    int budget = 25;
    std::uint64_t seed = 0;
};

struct TrialResult {
    int index = 0;
    ModelSpec spec;
    TrainConfig config;
    std::vector<double> fold_losses;
    double mean_val_loss = std::numeric_limits<double>::infinity();
    std::string error; // nonempty when the trial failed
};

struct SearchResult {
    TrialResult best;
    std::vector<TrialResult> trials;
};

// Random search over the space, scored by mean inner-fold validation loss
// (weighted partial likelihood on each held-out inner fold, eval mode).
// Deterministic given the space seed; trials may run on `threads` workers.
SearchResult random_search(const SurvivalDataset& ds, const SearchSpace& space, int inner_folds,
                           const TrainConfig& base, int threads = 1);

struct MetricOptions {
    bool ipcw = true;
};

struct CvCell {
    int fold = 0;
    int risk = 0;                 // 1-based
    std::string quantile;         // "q25" | "q50" | "q75"
    std::string metric;           // "td_auc" | "td_ci" | "brier"
    std::optional<double> value;  // absent when undefined (no cases/controls)
};

struct CvFoldArtifacts {
    TrialResult best_trial;
    FitResult fit;
    BaselineHazards baselines;
    EvalHorizons horizons;
};

struct CvResult {
    std::vector<CvCell> cells;
    std::vector<CvFoldArtifacts> folds;

    // mean and population stddev over folds with defined values
    struct Aggregate {
        int risk;
        std::string quantile, metric;
        double mean, stddev;
        int count;
    };
    std::vector<Aggregate> aggregate() const;
};

// Nested cross-validation: per outer fold, random search on the training
// partition, refit of the winning configuration, Breslow baselines and metric
// horizons from the training partition, metrics on the held-out partition.
CvResult nested_cv(const SurvivalDataset& ds, const SearchSpace& space, int outer_folds,
                   int inner_folds, const TrainConfig& base, const MetricOptions& opts,
                   std::uint64_t seed, int threads = 1);

// Shared by nested_cv and the `evaluate` subcommand: metric cells for one
// evaluated partition given fitted scores and train-side baselines/horizons.
std::vector<CvCell> evaluate_metrics(const Matrix& eta_test, const SurvivalDataset& test,
                                     const BaselineHazards& baselines,
                                     const EvalHorizons& horizons, const MetricOptions& opts,
                                     int fold_index);

} // namespace crispnam
