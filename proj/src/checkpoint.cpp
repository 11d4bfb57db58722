#include "crispnam/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace crispnam {

using nlohmann::json;

namespace {

constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

json encode_matrix(const Matrix& m) {
    return json{{"rows", m.rows()},
                {"cols", m.cols()},
                {"data", encode_doubles(m.data(), static_cast<std::size_t>(m.size()))}};
}

Matrix decode_matrix(const json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    std::vector<double> data = decode_doubles(j.at("data").get<std::string>());
    if (data.size() != static_cast<std::size_t>(m.size()))
        throw ValidationError("checkpoint matrix size does not match its shape");
    std::memcpy(m.data(), data.data(), data.size() * sizeof(double));
    return m;
}

json encode_vector(const Vector& v) {
    return json{{"size", v.size()},
                {"data", encode_doubles(v.data(), static_cast<std::size_t>(v.size()))}};
}

Vector decode_vector(const json& j) {
    Vector v(j.at("size").get<Eigen::Index>());
    std::vector<double> data = decode_doubles(j.at("data").get<std::string>());
    if (data.size() != static_cast<std::size_t>(v.size()))
        throw ValidationError("checkpoint vector size does not match its shape");
    std::memcpy(v.data(), data.data(), data.size() * sizeof(double));
    return v;
}

} // namespace

std::string encode_doubles(const double* data, std::size_t count) {
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
    std::size_t n = count * sizeof(double);
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    for (std::size_t i = 0; i < n; i += 3) {
        unsigned v = static_cast<unsigned>(bytes[i]) << 16;
        if (i + 1 < n) v |= static_cast<unsigned>(bytes[i + 1]) << 8;
        if (i + 2 < n) v |= static_cast<unsigned>(bytes[i + 2]);
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += i + 1 < n ? kB64[(v >> 6) & 63] : '=';
        out += i + 2 < n ? kB64[v & 63] : '=';
    }
    return out;
}

std::vector<double> decode_doubles(const std::string& b64) {
    std::vector<unsigned char> bytes;
    bytes.reserve(b64.size() / 4 * 3);
    unsigned acc = 0;
    int bits = 0;
    for (char c : b64) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = b64_value(c);
        if (v < 0) throw ValidationError("invalid base64 in checkpoint");
        acc = (acc << 6) | static_cast<unsigned>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            bytes.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
        }
    }
    if (bytes.size() % sizeof(double) != 0)
        throw ValidationError("checkpoint float array has a truncated payload");
    std::vector<double> out(bytes.size() / sizeof(double));
    std::memcpy(out.data(), bytes.data(), bytes.size());
    return out;
}

std::string checkpoint_to_json(const Checkpoint& ck) {
    json j;
    j["format"] = "crispnam-checkpoint";
    j["version"] = 1;
    j["config_fingerprint"] = ck.config_fingerprint;
    j["time_col"] = ck.time_col;
    j["event_col"] = ck.event_col;
    j["num_risks"] = ck.num_risks;

    json schema = json::object();
    for (const auto& [name, kind] : ck.schema)
        schema[name] = kind == ColumnKind::Continuous ? "continuous" : "categorical";
    j["schema"] = schema;

    json pre;
    pre["continuous"] = json::array();
    for (const auto& c : ck.preprocessor.continuous())
        pre["continuous"].push_back({{"column", c.column},
                                     {"mean", c.mean},
                                     {"stddev", c.stddev},
                                     {"impute", c.impute}});
    pre["categorical"] = json::array();
    for (const auto& c : ck.preprocessor.categorical())
        pre["categorical"].push_back({{"column", c.column},
                                      {"vocabulary", c.vocabulary},
                                      {"impute_mode", c.impute_mode}});
    j["preprocessor"] = pre;

    json model;
    model["hidden"] = ck.model.architecture();
    model["use_batchnorm"] = ck.model.use_batchnorm;
    model["epsilon"] = ck.model.epsilon;
    model["dropout_rate"] = ck.model.dropout_rate;
    model["feature_dropout_rate"] = ck.model.feature_dropout_rate;
    model["nets"] = json::array();
    for (const FeatureNetParams& net : ck.model.nets) {
        json jn;
        jn["weights"] = json::array();
        jn["biases"] = json::array();
        for (const Matrix& w : net.weights) jn["weights"].push_back(encode_matrix(w));
        for (const Vector& b : net.biases) jn["biases"].push_back(encode_vector(b));
        if (!net.batchnorm.empty()) {
            jn["batchnorm"] = json::array();
            for (const BatchNormParams& bn : net.batchnorm)
                jn["batchnorm"].push_back({{"scale", encode_vector(bn.scale)},
                                           {"shift", encode_vector(bn.shift)},
                                           {"running_mean", encode_vector(bn.running_mean)},
                                           {"running_var", encode_vector(bn.running_var)},
                                           {"momentum", bn.momentum},
                                           {"eps", bn.eps}});
        }
        model["nets"].push_back(std::move(jn));
    }
    model["projections"] = json::array();
    for (const Matrix& proj : ck.model.projections)
        model["projections"].push_back(encode_matrix(proj));
    j["model"] = model;

    j["baseline_hazards"] = {
        {"grid", encode_doubles(ck.baselines.grid.data(), ck.baselines.grid.size())},
        {"increments", encode_matrix(ck.baselines.increments)}};

    json hz = json::array();
    for (const auto& h : ck.horizons.per_risk) {
        if (h) hz.push_back(std::vector<double>{(*h)[0], (*h)[1], (*h)[2]});
        else hz.push_back(nullptr);
    }
    j["horizons"] = hz;
    j["risk_weights"] = encode_vector(ck.weights.omega);
    return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("format").get<std::string>() != "crispnam-checkpoint")
        throw ValidationError("not a crispnam checkpoint file");

    Checkpoint ck;
    ck.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    ck.time_col = j.at("time_col").get<std::string>();
    ck.event_col = j.at("event_col").get<std::string>();
    ck.num_risks = j.at("num_risks").get<int>();

    for (const auto& [name, kind] : j.at("schema").items())
        ck.schema[name] = kind.get<std::string>() == "continuous" ? ColumnKind::Continuous
                                                                  : ColumnKind::Categorical;

    std::vector<Preprocessor::ContinuousStats> cont;
    for (const auto& c : j.at("preprocessor").at("continuous"))
        cont.push_back({c.at("column").get<std::string>(), c.at("mean").get<double>(),
                        c.at("stddev").get<double>(), c.at("impute").get<double>()});
    std::vector<Preprocessor::CategoricalStats> cat;
    for (const auto& c : j.at("preprocessor").at("categorical"))
        cat.push_back({c.at("column").get<std::string>(),
                       c.at("vocabulary").get<std::vector<std::string>>(),
                       c.at("impute_mode").get<std::string>()});
    ck.preprocessor = Preprocessor::from_stats(std::move(cont), std::move(cat));

    const json& jm = j.at("model");
    ck.model.use_batchnorm = jm.at("use_batchnorm").get<bool>();
    ck.model.epsilon = jm.at("epsilon").get<double>();
    ck.model.dropout_rate = jm.at("dropout_rate").get<double>();
    ck.model.feature_dropout_rate = jm.at("feature_dropout_rate").get<double>();
    for (const auto& jn : jm.at("nets")) {
        FeatureNetParams net;
        for (const auto& w : jn.at("weights")) net.weights.push_back(decode_matrix(w));
        for (const auto& b : jn.at("biases")) net.biases.push_back(decode_vector(b));
        if (jn.contains("batchnorm")) {
            for (const auto& bn : jn.at("batchnorm")) {
                BatchNormParams p;
                p.scale = decode_vector(bn.at("scale"));
                p.shift = decode_vector(bn.at("shift"));
                p.running_mean = decode_vector(bn.at("running_mean"));
                p.running_var = decode_vector(bn.at("running_var"));
                p.momentum = bn.at("momentum").get<double>();
                p.eps = bn.at("eps").get<double>();
                net.batchnorm.push_back(std::move(p));
            }
        }
        ck.model.nets.push_back(std::move(net));
    }
    for (const auto& proj : jm.at("projections"))
        ck.model.projections.push_back(decode_matrix(proj));

    ck.baselines.grid = decode_doubles(j.at("baseline_hazards").at("grid").get<std::string>());
    ck.baselines.increments = decode_matrix(j.at("baseline_hazards").at("increments"));

    for (const auto& h : j.at("horizons")) {
        if (h.is_null()) {
            ck.horizons.per_risk.push_back(std::nullopt);
        } else {
            auto v = h.get<std::vector<double>>();
            if (v.size() != 3) throw ValidationError("horizon entries must hold 3 values");
            ck.horizons.per_risk.push_back(std::array<double, 3>{v[0], v[1], v[2]});
        }
    }
    ck.weights.omega = decode_vector(j.at("risk_weights"));
    return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint: " + path);
    out << checkpoint_to_json(ck);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_json(text);
}

} // namespace crispnam
