#include "crispnam/model.hpp"

#include <cmath>

namespace crispnam {

std::vector<int> ModelParams::architecture() const {
    std::vector<int> arch;
    if (nets.empty()) return arch;
    for (const Matrix& w : nets.front().weights) arch.push_back(static_cast<int>(w.rows()));
    return arch;
}

ModelParams init_model(int num_features, int num_risks, const std::vector<int>& hidden,
                       bool use_batchnorm, std::uint64_t seed) {
    require(num_features >= 1, "need at least one feature");
    require(num_risks >= 1, "need at least one risk");
    require(!hidden.empty(), "need at least one hidden layer");
    for (int w : hidden) require(w >= 1, "hidden layer width must be >= 1");

    Rng rng = substream(seed, "init");
    ModelParams params;
    params.use_batchnorm = use_batchnorm;
    const int d = hidden.back();

    for (int i = 0; i < num_features; ++i) {
        FeatureNetParams net;
        int fan_in = 1;
        for (int width : hidden) {
            double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            Matrix w(width, fan_in);
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c)
                    w(r, c) = rng.uniform(-bound, bound);
            Vector b(width);
            for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = rng.uniform(-bound, bound);
            net.weights.push_back(std::move(w));
            net.biases.push_back(std::move(b));
            if (use_batchnorm) {
                BatchNormParams bn;
                bn.scale = Vector::Ones(width);
                bn.shift = Vector::Zero(width);
                bn.running_mean = Vector::Zero(width);
                bn.running_var = Vector::Ones(width);
                net.batchnorm.push_back(std::move(bn));
            }
            fan_in = width;
        }
        params.nets.push_back(std::move(net));
    }
    double bound = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < num_features; ++i) {
        Matrix proj(d, num_risks);
        for (Eigen::Index c = 0; c < proj.cols(); ++c)
            for (Eigen::Index r = 0; r < proj.rows(); ++r)
                proj(r, c) = rng.uniform(-bound, bound);
        params.projections.push_back(std::move(proj));
    }
    return params;
}

namespace {

void check_input(const Matrix& X, int p) {
    if (static_cast<int>(X.cols()) != p)
        throw ValidationError("input has " + std::to_string(X.cols()) +
                              " columns, model expects " + std::to_string(p));
    if (!X.allFinite()) {
        for (Eigen::Index n = 0; n < X.rows(); ++n)
            for (Eigen::Index j = 0; j < X.cols(); ++j)
                if (!std::isfinite(X(n, j)))
                    throw ValidationError("non-finite input at row " + std::to_string(n) +
                                          ", column " + std::to_string(j));
    }
}

// d x K normalized projections and raw column norms for one feature
void normalize_projection(const Matrix& raw, double eps, Matrix& w_tilde, Vector& norms) {
    w_tilde.resize(raw.rows(), raw.cols());
    norms.resize(raw.cols());
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
        norms[k] = raw.col(k).norm();
        w_tilde.col(k) = raw.col(k) / (norms[k] + eps);
    }
}

Vector inv_std(const Vector& var, double eps) {
    return (var.array() + eps).sqrt().inverse().matrix();
}

} // namespace

Matrix eval_feature_net(const ModelParams& params, int feature, const Vector& x) {
    const FeatureNetParams& net = params.nets[static_cast<std::size_t>(feature)];
    Matrix a = x;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        Matrix z = a * net.weights[l].transpose();
        z.rowwise() += net.biases[l].transpose();
        if (params.use_batchnorm) {
            const BatchNormParams& bn = net.batchnorm[l];
            z.rowwise() -= bn.running_mean.transpose();
            z = z * inv_std(bn.running_var, bn.eps).asDiagonal();
            z = z * bn.scale.asDiagonal();
            z.rowwise() += bn.shift.transpose();
        }
        a = z.array().tanh().matrix();
    }
    return a;
}

RiskScores forward_eval(const ModelParams& params, const Matrix& X) {
    const int p = params.num_features();
    const int K = params.num_risks();
    check_input(X, p);
    const Eigen::Index n = X.rows();

    RiskScores scores;
    scores.eta.setZero(n, K);
    scores.contributions.assign(static_cast<std::size_t>(K), Matrix::Zero(n, p));

    Matrix w_tilde;
    Vector norms;
    for (int i = 0; i < p; ++i) {
        Matrix a = eval_feature_net(params, i, X.col(i));
        normalize_projection(params.projections[static_cast<std::size_t>(i)], params.epsilon,
                             w_tilde, norms);
        Matrix s = a * w_tilde; // n x K
        for (int k = 0; k < K; ++k) {
            scores.contributions[static_cast<std::size_t>(k)].col(i) = s.col(k);
            scores.eta.col(k) += s.col(k);
        }
    }
    return scores;
}

RiskScores forward_train(ModelParams& params, const Matrix& X, Rng& rng, ForwardCache& cache) {
    const int p = params.num_features();
    const int K = params.num_risks();
    check_input(X, p);
    const Eigen::Index n = X.rows();
    const double nd = static_cast<double>(n);

    cache.nets.assign(static_cast<std::size_t>(p), FeatureNetCache{});
    cache.w_tilde.assign(static_cast<std::size_t>(p), Matrix());
    cache.w_norm.assign(static_cast<std::size_t>(p), Vector());
    cache.feature_dropout_mask.resize(0, 0);

    RiskScores scores;
    scores.eta.setZero(n, K);
    scores.contributions.assign(static_cast<std::size_t>(K), Matrix::Zero(n, p));

    const double keep = 1.0 - params.dropout_rate;
    for (int i = 0; i < p; ++i) {
        FeatureNetParams& net = params.nets[static_cast<std::size_t>(i)];
        FeatureNetCache& net_cache = cache.nets[static_cast<std::size_t>(i)];
        net_cache.layers.resize(net.weights.size());
        Matrix a = X.col(i);
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            LayerCache& lc = net_cache.layers[l];
            lc.input = a;
            Matrix z = a * net.weights[l].transpose();
            z.rowwise() += net.biases[l].transpose();
            if (params.use_batchnorm) {
                BatchNormParams& bn = net.batchnorm[l];
                Vector mean = z.colwise().mean().transpose();
                Matrix centered = z.rowwise() - mean.transpose();
                Vector var = centered.cwiseProduct(centered).colwise().sum().transpose() / nd;
                lc.batch_var = var;
                lc.normalized = centered * inv_std(var, bn.eps).asDiagonal();
                z = lc.normalized * bn.scale.asDiagonal();
                z.rowwise() += bn.shift.transpose();
                bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * mean;
                bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * var;
            }
            lc.activated = z.array().tanh().matrix();
            if (params.dropout_rate > 0.0) {
                lc.dropout_mask.resize(n, lc.activated.cols());
                for (Eigen::Index r = 0; r < n; ++r)
                    for (Eigen::Index c = 0; c < lc.dropout_mask.cols(); ++c)
                        lc.dropout_mask(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
                lc.output = lc.activated.cwiseProduct(lc.dropout_mask);
            } else {
                lc.output = lc.activated;
            }
            a = lc.output;
        }
        normalize_projection(params.projections[static_cast<std::size_t>(i)], params.epsilon,
                             cache.w_tilde[static_cast<std::size_t>(i)],
                             cache.w_norm[static_cast<std::size_t>(i)]);
    }

    const double fkeep = 1.0 - params.feature_dropout_rate;
    if (params.feature_dropout_rate > 0.0) {
        cache.feature_dropout_mask.resize(n, p);
        for (Eigen::Index r = 0; r < n; ++r)
            for (int i = 0; i < p; ++i)
                cache.feature_dropout_mask(r, i) = rng.uniform() < fkeep ? 1.0 / fkeep : 0.0;
    }

    for (int i = 0; i < p; ++i) {
        const Matrix& h = cache.nets[static_cast<std::size_t>(i)].layers.back().output;
        Matrix s = h * cache.w_tilde[static_cast<std::size_t>(i)]; // n x K
        if (params.feature_dropout_rate > 0.0)
            s.array().colwise() *= cache.feature_dropout_mask.col(i).array();
        for (int k = 0; k < K; ++k) {
            scores.contributions[static_cast<std::size_t>(k)].col(i) = s.col(k);
            scores.eta.col(k) += s.col(k);
        }
    }
    return scores;
}

ModelGrad zero_grad_like(const ModelParams& params) {
    ModelGrad grad;
    for (const FeatureNetParams& net : params.nets) {
        FeatureNetGrad g;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            g.weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
            g.biases.push_back(Vector::Zero(net.biases[l].size()));
            if (!net.batchnorm.empty())
                g.batchnorm.push_back({Vector::Zero(net.batchnorm[l].scale.size()),
                                       Vector::Zero(net.batchnorm[l].shift.size())});
        }
        grad.nets.push_back(std::move(g));
    }
    for (const Matrix& proj : params.projections)
        grad.projections.push_back(Matrix::Zero(proj.rows(), proj.cols()));
    return grad;
}

ModelGrad backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dL_deta) {
    const int p = params.num_features();
    const int K = params.num_risks();
    if (static_cast<int>(dL_deta.cols()) != K ||
        cache.nets.size() != static_cast<std::size_t>(p))
        throw ValidationError("backward: shape mismatch between cache and dL_deta");
    const Eigen::Index n = dL_deta.rows();
    const double nd = static_cast<double>(n);

    ModelGrad grad = zero_grad_like(params);
    const bool has_fdrop = cache.feature_dropout_mask.size() > 0;

    for (int i = 0; i < p; ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const FeatureNetParams& net = params.nets[ui];
        const FeatureNetCache& net_cache = cache.nets[ui];
        if (net_cache.layers.empty() || net_cache.layers.front().input.rows() != n)
            throw ValidationError("backward: cache does not match dL_deta batch size");
        const Matrix& h = net_cache.layers.back().output; // n x d
        const Matrix& w_tilde = cache.w_tilde[ui];
        const Vector& w_norm = cache.w_norm[ui];

        // upstream gradient on s_{i,k}, including the feature-dropout scaling
        Matrix b = dL_deta; // n x K
        if (has_fdrop) b.array().colwise() *= cache.feature_dropout_mask.col(i).array();

        // projection gradient through the normalization Jacobian
        Matrix g_tilde = h.transpose() * b; // d x K, gradient w.r.t. w_tilde columns
        for (int k = 0; k < K; ++k) {
            double norm = w_norm[k];
            double denom = norm + params.epsilon;
            Vector gk = g_tilde.col(k);
            if (norm > 0.0) {
                double radial = w_tilde.col(k).dot(gk) * (denom / norm);
                gk -= w_tilde.col(k) * radial;
            }
            grad.projections[ui].col(k) = gk / denom;
        }

        // through the FeatureNet, last layer first
        Matrix d_out = b * w_tilde.transpose(); // n x d
        for (std::size_t l = net.weights.size(); l-- > 0;) {
            const LayerCache& lc = net_cache.layers[l];
            Matrix d_act =
                lc.dropout_mask.size() > 0 ? d_out.cwiseProduct(lc.dropout_mask) : std::move(d_out);
            // tanh'(z) = 1 - tanh(z)^2
            Matrix d_pre = d_act.cwiseProduct(
                (1.0 - lc.activated.array().square()).matrix());
            Matrix d_z;
            if (params.use_batchnorm) {
                const BatchNormParams& bn = net.batchnorm[l];
                grad.nets[ui].batchnorm[l].scale +=
                    d_pre.cwiseProduct(lc.normalized).colwise().sum().transpose();
                grad.nets[ui].batchnorm[l].shift += d_pre.colwise().sum().transpose();
                Matrix d_xhat = d_pre * bn.scale.asDiagonal();
                Eigen::RowVectorXd mean_dxhat = d_xhat.colwise().sum() / nd;
                Eigen::RowVectorXd mean_dxhat_xhat =
                    d_xhat.cwiseProduct(lc.normalized).colwise().sum() / nd;
                d_z = d_xhat;
                d_z.rowwise() -= mean_dxhat;
                d_z -= lc.normalized * mean_dxhat_xhat.asDiagonal();
                d_z = d_z * inv_std(lc.batch_var, bn.eps).asDiagonal();
            } else {
                d_z = std::move(d_pre);
            }
            grad.nets[ui].weights[l] += d_z.transpose() * lc.input;
            grad.nets[ui].biases[l] += d_z.colwise().sum().transpose();
            d_out = d_z * net.weights[l];
        }
    }
    return grad;
}

namespace {

template <typename ParamsT, typename F>
void visit_tensors(ParamsT& params, F&& f) {
    for (auto& net : params.nets) {
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            f(net.weights[l], true);
            f(net.biases[l], false);
            if (!net.batchnorm.empty()) {
                f(net.batchnorm[l].scale, false);
                f(net.batchnorm[l].shift, false);
            }
        }
    }
    for (auto& proj : params.projections) f(proj, true);
}

} // namespace

std::size_t num_trainable(const ModelParams& params) {
    std::size_t n = 0;
    visit_tensors(params, [&](const auto& t, bool) { n += static_cast<std::size_t>(t.size()); });
    return n;
}

Vector pack_params(const ModelParams& params) {
    Vector flat(static_cast<Eigen::Index>(num_trainable(params)));
    Eigen::Index pos = 0;
    visit_tensors(params, [&](const auto& t, bool) {
        flat.segment(pos, t.size()) = Eigen::Map<const Vector>(t.data(), t.size());
        pos += t.size();
    });
    return flat;
}

void unpack_params(ModelParams& params, const Vector& flat) {
    if (static_cast<std::size_t>(flat.size()) != num_trainable(params))
        throw ValidationError("unpack_params: size mismatch");
    Eigen::Index pos = 0;
    visit_tensors(params, [&](auto& t, bool) {
        Eigen::Map<Vector>(t.data(), t.size()) = flat.segment(pos, t.size());
        pos += t.size();
    });
}

Vector pack_grad(const ModelGrad& grad) {
    std::size_t total = 0;
    visit_tensors(grad, [&](const auto& t, bool) { total += static_cast<std::size_t>(t.size()); });
    Vector flat(static_cast<Eigen::Index>(total));
    Eigen::Index pos = 0;
    visit_tensors(grad, [&](const auto& t, bool) {
        flat.segment(pos, t.size()) = Eigen::Map<const Vector>(t.data(), t.size());
        pos += t.size();
    });
    return flat;
}

std::vector<char> weight_mask(const ModelParams& params, bool penalize_all) {
    std::vector<char> mask;
    mask.reserve(num_trainable(params));
    visit_tensors(params, [&](const auto& t, bool is_weight) {
        char flag = (is_weight || penalize_all) ? 1 : 0;
        mask.insert(mask.end(), static_cast<std::size_t>(t.size()), flag);
    });
    return mask;
}

} // namespace crispnam
