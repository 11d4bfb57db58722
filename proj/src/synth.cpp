#include "crispnam/synth.hpp"

#include "crispnam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crispnam {

namespace {
constexpr double kMinRate = 1e-6;
}

SurvivalDataset synth_generate(const SynthConfig& cfg) {
    require(cfg.n >= 1, "n must be >= 1");
    require(cfg.gamma_t > 0.0, "gamma_t must be positive");
    require(cfg.censor_fraction >= 0.0 && cfg.censor_fraction <= 1.0,
            "censor_fraction must be in [0,1]");
    require(cfg.dim_per_group >= 1, "dim_per_group must be >= 1");

    const int g = cfg.dim_per_group;
    const int p = 3 * g;
    Rng rng = substream(cfg.seed, "synth");

    SurvivalDataset ds;
    ds.num_risks = 2;
    ds.features.resize(static_cast<Eigen::Index>(cfg.n), p);
    ds.times.resize(cfg.n);
    ds.events.resize(cfg.n);
    for (int group = 1; group <= 3; ++group)
        for (int d = 0; d < g; ++d)
            ds.feature_names.push_back("x" + std::to_string(group) + "_" + std::to_string(d));

    std::vector<double> latent_min(cfg.n);
    Vector x(p);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double rate1 = 0.0, rate2 = 0.0;
        for (;;) {
            for (int j = 0; j < p; ++j) x[j] = rng.normal();
            double quad = x.segment(2 * g, g).squaredNorm();
            rate1 = cfg.gamma_t * (quad + x.segment(0, g).sum());
            rate2 = cfg.gamma_t * (quad + x.segment(g, g).sum());
            if (rate1 > kMinRate && rate2 > kMinRate) break;
        }
        ds.features.row(static_cast<Eigen::Index>(i)) = x.transpose();
        double t1 = rng.exponential(rate1);
        double t2 = rng.exponential(rate2);
        latent_min[i] = std::min(t1, t2);
        ds.times[i] = latent_min[i];
        ds.events[i] = t1 <= t2 ? 1 : 2;
    }

    // exactly floor(censor_fraction * n) subjects censored, chosen without replacement
    std::size_t n_censor = static_cast<std::size_t>(
        std::floor(cfg.censor_fraction * static_cast<double>(cfg.n)));
    std::vector<std::size_t> order(cfg.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t i = 0; i < n_censor; ++i) {
        std::size_t s = order[i];
        ds.events[s] = 0;
        ds.times[s] = rng.uniform_open0() * latent_min[s]; // in (0, min(T1,T2)]
    }
    return ds;
}

} // namespace crispnam
