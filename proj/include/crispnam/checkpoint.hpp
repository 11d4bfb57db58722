#pragma once

#include "crispnam/dataset.hpp"
#include "crispnam/hazard.hpp"
#include "crispnam/loss.hpp"
#include "crispnam/metrics.hpp"
#include "crispnam/model.hpp"
#include "crispnam/preprocess.hpp"

#include <string>

namespace crispnam {

// Everything needed to reproduce predictions: preprocessor state, network
// parameters (including batch-norm running statistics), Breslow baselines,
// training-partition metric horizons, and the fingerprint of the config that
// produced it. One self-describing JSON document; float arrays are
// base64-encoded little-endian doubles with explicit shapes, so save/load
// round-trips bit-exactly.
struct Checkpoint {
    ModelParams model;
    Preprocessor preprocessor;
    Schema schema;
    std::string time_col = "time";
    std::string event_col = "event";
    int num_risks = 0;
    BaselineHazards baselines;
    EvalHorizons horizons;
    RiskWeights weights{Vector()};
    std::string config_fingerprint;
};

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// base64 of the raw little-endian bytes
std::string encode_doubles(const double* data, std::size_t count);
std::vector<double> decode_doubles(const std::string& b64);

} // namespace crispnam
