#pragma once

#include "crispnam/dataset.hpp"

#include <cstdint>

namespace crispnam {

// Two-cause competing-risks benchmark. Each subject gets a 12-dimensional
// standard-normal covariate vector split into three groups (x1, x2, x3 with
// dim_per_group dimensions each). Latent times are exponential with rates
//   rate_1 = gamma_t * (||x3||^2 + 1'x1)
//   rate_2 = gamma_t * (||x3||^2 + 1'x2)
// so x1 drives cause 1 only, x2 drives cause 2 only, x3 drives both. The
// covariate vector is resampled whenever either rate falls below 1e-6 (the
// linear term can push a rate nonpositive). A censor_fraction share of
// subjects, chosen uniformly without replacement, is relabeled censored at
// t_c ~ U(0, min(T1,T2)].
struct SynthConfig {
    std::size_t n = 1000;
    double gamma_t = 10.0;
    double censor_fraction = 0.5;
    std::uint64_t seed = 0;
    int dim_per_group = 4;
};

SurvivalDataset synth_generate(const SynthConfig& cfg);

} // namespace crispnam
