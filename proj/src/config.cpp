#include "crispnam/config.hpp"

#include "crispnam/rng.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>

namespace crispnam {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ValidationError("unknown key '" + key + "' in config section '" + where + "'");
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_range(const json& obj, const char* key, std::pair<double, double>& out) {
    if (!obj.contains(key)) return;
    auto v = obj.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw ValidationError(std::string("config range '") + key +
                                             "' must hold exactly two values");
    out = {v[0], v[1]};
}

void read_int_range(const json& obj, const char* key, std::pair<int, int>& out) {
    if (!obj.contains(key)) return;
    auto v = obj.at(key).get<std::vector<int>>();
    if (v.size() != 2) throw ValidationError(std::string("config range '") + key +
                                             "' must hold exactly two values");
    out = {v[0], v[1]};
}

} // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }

    check_keys(j, "<root>",
               {"seed", "data", "model", "train", "search", "metrics", "cv", "output_dir",
                "threads"});

    RunConfig cfg;
    read_if(j, "seed", cfg.seed);
    read_if(j, "output_dir", cfg.output_dir);
    read_if(j, "threads", cfg.threads);

    if (j.contains("data")) {
        const json& d = j.at("data");
        check_keys(d, "data", {"path", "time_col", "event_col", "schema"});
        read_if(d, "path", cfg.data_path);
        read_if(d, "time_col", cfg.time_col);
        read_if(d, "event_col", cfg.event_col);
        if (d.contains("schema")) {
            for (const auto& [name, kind] : d.at("schema").items()) {
                std::string k = kind.get<std::string>();
                if (k == "continuous") cfg.schema[name] = ColumnKind::Continuous;
                else if (k == "categorical") cfg.schema[name] = ColumnKind::Categorical;
                else
                    throw ValidationError("schema column '" + name + "' has unknown kind '" + k +
                                          "' (use continuous or categorical)");
            }
        }
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, "model", {"hidden", "batchnorm", "dropout", "feature_dropout"});
        read_if(m, "hidden", cfg.model.hidden);
        read_if(m, "batchnorm", cfg.model.use_batchnorm);
        read_if(m, "dropout", cfg.model.dropout);
        read_if(m, "feature_dropout", cfg.model.feature_dropout);
    }

    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, "train",
                   {"learning_rate", "weight_decay", "batch_size", "max_epochs", "patience",
                    "validation_fraction", "penalize_all_params", "coupled_l2"});
        read_if(t, "learning_rate", cfg.train.learning_rate);
        read_if(t, "weight_decay", cfg.train.weight_decay);
        read_if(t, "batch_size", cfg.train.batch_size);
        read_if(t, "max_epochs", cfg.train.max_epochs);
        read_if(t, "patience", cfg.train.patience);
        read_if(t, "validation_fraction", cfg.train.validation_fraction);
        read_if(t, "penalize_all_params", cfg.train.penalize_all_params);
        read_if(t, "coupled_l2", cfg.train.coupled_l2);
    }

    if (j.contains("search")) {
        const json& s = j.at("search");
        check_keys(s, "search",
                   {"budget", "learning_rate", "weight_decay", "dropout", "feature_dropout",
                    "hidden_layers", "width", "batchnorm"});
        read_if(s, "budget", cfg.search.budget);
        read_range(s, "learning_rate", cfg.search.learning_rate);
        read_range(s, "weight_decay", cfg.search.weight_decay);
        read_range(s, "dropout", cfg.search.dropout);
        read_range(s, "feature_dropout", cfg.search.feature_dropout);
        read_int_range(s, "hidden_layers", cfg.search.hidden_layers);
        read_int_range(s, "width", cfg.search.width);
        read_if(s, "batchnorm", cfg.search.batchnorm_choices);
    }

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        check_keys(m, "metrics", {"ipcw"});
        read_if(m, "ipcw", cfg.metrics.ipcw);
    }

    if (j.contains("cv")) {
        const json& c = j.at("cv");
        check_keys(c, "cv", {"outer_folds", "inner_folds"});
        read_if(c, "outer_folds", cfg.outer_folds);
        read_if(c, "inner_folds", cfg.inner_folds);
    }

    cfg.train.seed = substream_seed(cfg.seed, "train");
    cfg.search.seed = substream_seed(cfg.seed, "search");
    cfg.fingerprint = fnv1a_hex(j.dump());
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

} // namespace crispnam
