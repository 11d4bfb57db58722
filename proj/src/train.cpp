#include "crispnam/train.hpp"

#include "crispnam/kfold.hpp"
#include "crispnam/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>

namespace crispnam {

namespace {

double weighted_loss_eval(const ModelParams& params, const SurvivalDataset& ds,
                          const RiskWeights& weights, Vector* per_risk = nullptr) {
    RiskScores scores = forward_eval(params, ds.features);
    PartialLikelihoodResult pl =
        neg_log_partial_likelihood(scores.eta, ds.times, ds.events, weights);
    if (per_risk) *per_risk = pl.loss.per_risk;
    return pl.loss.total;
}

} // namespace

FitResult fit(const SurvivalDataset& ds, const ModelSpec& spec, const TrainConfig& cfg) {
    ds.check_class_presence();
    require(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0,
            "validation_fraction must be in (0,1)");
    require(cfg.patience >= 1, "patience must be >= 1");
    require(cfg.batch_size >= 1, "batch_size must be >= 1");

    FoldSplit split = stratified_holdout(ds.events, cfg.validation_fraction,
                                         substream_seed(cfg.seed, "split"));
    SurvivalDataset train = ds.subset(split.train);
    SurvivalDataset val = ds.subset(split.test);
    for (int k = 1; k <= ds.num_risks; ++k) {
        auto has = [k](const std::vector<int>& ev) {
            return std::find(ev.begin(), ev.end(), k) != ev.end();
        };
        if (!has(train.events))
            throw ValidationError("training split lacks event type " + std::to_string(k));
        if (!has(val.events))
            throw ValidationError("validation split lacks event type " + std::to_string(k) +
                                  "; use a smaller validation fraction or fewer folds");
    }

    FitResult result;
    result.weights = compute_weights(train.events, ds.num_risks);

    ModelParams params = init_model(train.num_features(), ds.num_risks, spec.hidden,
                                    spec.use_batchnorm, substream_seed(cfg.seed, "init"));
    params.dropout_rate = spec.dropout;
    params.feature_dropout_rate = spec.feature_dropout;

    AdamWConfig opt_cfg;
    opt_cfg.learning_rate = cfg.learning_rate;
    opt_cfg.weight_decay = cfg.coupled_l2 ? 0.0 : cfg.weight_decay;
    opt_cfg.beta1 = cfg.adam_beta1;
    opt_cfg.beta2 = cfg.adam_beta2;
    opt_cfg.eps = cfg.adam_eps;
    AdamW optimizer(static_cast<Eigen::Index>(num_trainable(params)),
                    weight_mask(params, cfg.penalize_all_params));

    Rng shuffle_rng = substream(cfg.seed, "shuffle");
    Rng dropout_rng = substream(cfg.seed, "dropout");

    std::vector<std::size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});

    int since_best = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(idx);
        double train_loss = 0.0;
        double penalty_logged = 0.0;

        for (std::size_t start = 0; start < idx.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t stop = std::min(idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::size_t> batch(idx.begin() + static_cast<std::ptrdiff_t>(start),
                                           idx.begin() + static_cast<std::ptrdiff_t>(stop));
            // descending time keeps risk-set sums as suffix sums inside the loss
            std::sort(batch.begin(), batch.end(), [&](std::size_t a, std::size_t b) {
                return train.times[a] > train.times[b];
            });
            SurvivalDataset sub = train.subset(batch);

            ForwardCache cache;
            RiskScores scores = forward_train(params, sub.features, dropout_rng, cache);
            PartialLikelihoodResult pl =
                neg_log_partial_likelihood(scores.eta, sub.times, sub.events, result.weights);
            ModelGrad grad = backward(params, cache, pl.dl_deta);
            Vector flat_grad = pack_grad(grad);

            PenaltyResult pen = l2_penalty(params, cfg.weight_decay, cfg.penalize_all_params);
            penalty_logged = pen.value;
            double batch_loss = pl.loss.total;
            if (cfg.coupled_l2) {
                flat_grad += pen.grad;
                batch_loss += pen.value;
            }
            train_loss += batch_loss;

            Vector flat = pack_params(params);
            optimizer.step(flat, flat_grad, opt_cfg);
            unpack_params(params, flat);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_loss;
        rec.penalty = penalty_logged;
        rec.val_loss = weighted_loss_eval(params, val, result.weights, &rec.val_per_risk);
        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(rec);

        if (std::isfinite(rec.val_loss) && rec.val_loss < result.best_val_loss) {
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.params = params; // snapshot, batch-norm state included
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }
    if (result.best_epoch < 0)
        throw TrainingDiverged("no epoch produced a finite validation loss");
    return result;
}

namespace {

TrialResult run_trial(const SurvivalDataset& ds, const SearchSpace& space,
                      const std::vector<FoldSplit>& folds, const TrainConfig& base, int index) {
    TrialResult trial;
    trial.index = index;
    Rng rng = substream(space.seed, "trial:" + std::to_string(index));

    trial.config = base;
    trial.config.learning_rate = rng.log_uniform(space.learning_rate.first,
                                                 space.learning_rate.second);
    trial.config.weight_decay =
        rng.log_uniform(space.weight_decay.first, space.weight_decay.second);
    trial.spec.dropout = rng.uniform(space.dropout.first, space.dropout.second);
    trial.spec.feature_dropout =
        rng.uniform(space.feature_dropout.first, space.feature_dropout.second);
    int layers = rng.uniform_int(space.hidden_layers.first, space.hidden_layers.second);
    trial.spec.hidden.clear();
    for (int l = 0; l < layers; ++l)
        trial.spec.hidden.push_back(rng.uniform_int(space.width.first, space.width.second));
    trial.spec.use_batchnorm =
        space.batchnorm_choices[rng.below(space.batchnorm_choices.size())];

    try {
        double sum = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            SurvivalDataset inner_train = ds.subset(folds[f].train);
            SurvivalDataset inner_val = ds.subset(folds[f].test);
            TrainConfig cfg = trial.config;
            cfg.seed = substream_seed(space.seed,
                                      "trial:" + std::to_string(index) +
                                          ":fold:" + std::to_string(f));
            FitResult res = fit(inner_train, trial.spec, cfg);
            double loss = weighted_loss_eval(res.params, inner_val, res.weights);
            trial.fold_losses.push_back(loss);
            sum += loss;
        }
        trial.mean_val_loss = sum / static_cast<double>(folds.size());
        if (!std::isfinite(trial.mean_val_loss)) {
            trial.error = "non-finite validation loss";
            trial.mean_val_loss = std::numeric_limits<double>::infinity();
        }
    } catch (const std::exception& e) {
        trial.error = e.what();
        trial.mean_val_loss = std::numeric_limits<double>::infinity();
    }
    return trial;
}

} // namespace

SearchResult random_search(const SurvivalDataset& ds, const SearchSpace& space, int inner_folds,
                           const TrainConfig& base, int threads) {
    require(space.budget >= 1, "search budget must be >= 1");
    require(inner_folds >= 2, "inner_folds must be >= 2");
    std::vector<FoldSplit> folds =
        stratified_kfold(ds.events, inner_folds, substream_seed(space.seed, "inner-folds"));

    SearchResult result;
    result.trials.resize(static_cast<std::size_t>(space.budget));
    threads = std::max(1, threads);

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= space.budget) return;
            result.trials[static_cast<std::size_t>(i)] = run_trial(ds, space, folds, base, i);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::future<void>> pool;
        for (int t = 0; t < threads; ++t)
            pool.push_back(std::async(std::launch::async, worker));
        for (auto& f : pool) f.get();
    }

    const TrialResult* best = nullptr;
    for (const TrialResult& t : result.trials)
        if (!best || t.mean_val_loss < best->mean_val_loss) best = &t;
    if (!best || !std::isfinite(best->mean_val_loss)) {
        std::string diag = "all search trials failed:";
        for (const TrialResult& t : result.trials)
            diag += "\n  trial " + std::to_string(t.index) + ": " +
                    (t.error.empty() ? "non-finite loss" : t.error);
        throw ValidationError(diag);
    }
    result.best = *best;
    return result;
}

std::vector<CvCell> evaluate_metrics(const Matrix& eta_test, const SurvivalDataset& test,
                                     const BaselineHazards& baselines,
                                     const EvalHorizons& horizons, const MetricOptions& opts,
                                     int fold_index) {
    static const char* kQuantiles[3] = {"q25", "q50", "q75"};
    std::vector<CvCell> cells;
    for (int k = 0; k < test.num_risks; ++k) {
        const auto& hk = horizons.per_risk[static_cast<std::size_t>(k)];
        if (!hk) continue;

        // CIF values at the case times, for the time-dependent concordance
        std::vector<double> case_times;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (test.events[i] == k + 1) case_times.push_back(test.times[i]);
        std::sort(case_times.begin(), case_times.end());
        case_times.erase(std::unique(case_times.begin(), case_times.end()), case_times.end());
        Matrix cif_cases = cif_at_times(baselines, eta_test, k, case_times);

        std::vector<double> horizon_times(hk->begin(), hk->end());
        Matrix cif_horizons = cif_at_times(baselines, eta_test, k, horizon_times);

        for (int q = 0; q < 3; ++q) {
            double t = (*hk)[static_cast<std::size_t>(q)];
            Vector score = cif_horizons.col(q);

            CvCell auc{fold_index, k + 1, kQuantiles[q], "td_auc",
                       td_auc(score, test.times, test.events, t, k, opts.ipcw)};
            CvCell ci{fold_index, k + 1, kQuantiles[q], "td_ci",
                      td_concordance(cif_cases, case_times, test.times, test.events, k, t)};
            CvCell bs{fold_index, k + 1, kQuantiles[q], "brier",
                      brier(score, test.times, test.events, t, k, opts.ipcw)};
            cells.push_back(auc);
            cells.push_back(ci);
            cells.push_back(bs);
        }
    }
    return cells;
}

CvResult nested_cv(const SurvivalDataset& ds, const SearchSpace& space, int outer_folds,
                   int inner_folds, const TrainConfig& base, const MetricOptions& opts,
                   std::uint64_t seed, int threads) {
    std::vector<FoldSplit> folds =
        stratified_kfold(ds.events, outer_folds, substream_seed(seed, "outer-folds"));

    CvResult result;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        SurvivalDataset train = ds.subset(folds[f].train);
        SurvivalDataset test = ds.subset(folds[f].test);

        SearchSpace fold_space = space;
        fold_space.seed = substream_seed(seed, "search:" + std::to_string(f));
        SearchResult search = random_search(train, fold_space, inner_folds, base, threads);

        TrainConfig refit_cfg = search.best.config;
        refit_cfg.seed = substream_seed(seed, "refit:" + std::to_string(f));
        FitResult fitted = fit(train, search.best.spec, refit_cfg);

        RiskScores train_scores = forward_eval(fitted.params, train.features);
        CvFoldArtifacts art;
        art.best_trial = search.best;
        art.baselines = breslow(train_scores.eta, train.times, train.events);
        art.horizons = horizons(train.times, train.events, train.num_risks);

        RiskScores test_scores = forward_eval(fitted.params, test.features);
        std::vector<CvCell> cells = evaluate_metrics(test_scores.eta, test, art.baselines,
                                                     art.horizons, opts, static_cast<int>(f));
        result.cells.insert(result.cells.end(), cells.begin(), cells.end());
        art.fit = std::move(fitted);
        result.folds.push_back(std::move(art));
    }
    return result;
}

std::vector<CvResult::Aggregate> CvResult::aggregate() const {
    std::vector<Aggregate> aggs;
    for (const CvCell& cell : cells) {
        if (!cell.value) continue;
        auto it = std::find_if(aggs.begin(), aggs.end(), [&](const Aggregate& a) {
            return a.risk == cell.risk && a.quantile == cell.quantile && a.metric == cell.metric;
        });
        if (it == aggs.end()) {
            aggs.push_back({cell.risk, cell.quantile, cell.metric, 0.0, 0.0, 0});
            it = aggs.end() - 1;
        }
        it->mean += *cell.value;
        ++it->count;
    }
    for (Aggregate& a : aggs) a.mean /= static_cast<double>(a.count);
    for (Aggregate& a : aggs) {
        double ss = 0.0;
        int n = 0;
        for (const CvCell& cell : cells) {
            if (!cell.value || cell.risk != a.risk || cell.quantile != a.quantile ||
                cell.metric != a.metric)
                continue;
            double d = *cell.value - a.mean;
            ss += d * d;
            ++n;
        }
        a.stddev = n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
    }
    return aggs;
}

} // namespace crispnam
