#pragma once

#include "crispnam/dataset.hpp"
#include "crispnam/train.hpp"

#include <cstdint>
#include <string>

namespace crispnam {

// Structured run configuration for the CLI. Parsing is strict: unknown keys
// anywhere in the document are rejected. A single master seed feeds named
// substreams for every randomized stage.
struct RunConfig {
    std::uint64_t seed = 42;

    std::string data_path;
    std::string time_col = "time";
    std::string event_col = "event";
    Schema schema;

    ModelSpec model;
    TrainConfig train;
    SearchSpace search;
    MetricOptions metrics;
    int outer_folds = 5;
    int inner_folds = 5;

    std::string output_dir = ".";
    int threads = 1;

    std::string fingerprint; // FNV-1a over the canonical serialized document
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

std::string fnv1a_hex(const std::string& text);

} // namespace crispnam
