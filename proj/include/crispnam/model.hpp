#pragma once

#include "crispnam/common.hpp"
#include "crispnam/rng.hpp"

#include <vector>

namespace crispnam {

// The network: one small tanh MLP per input feature (a FeatureNet) mapping the
// scalar covariate to a d-dimensional representation, one learnable projection
// vector per (feature, risk) pair, and additive aggregation of the projected
// contributions into per-risk log-hazard scores. Projection vectors are
// L2-normalized at every forward pass (w_tilde = w / (||w|| + epsilon)), so
// contributions are on a common scale across risks.

struct BatchNormParams {
    Vector scale, shift;
    Vector running_mean, running_var;
    double momentum = 0.9;
    double eps = 1e-5;
};

struct FeatureNetParams {
    std::vector<Matrix> weights; // layer l: d_l x d_{l-1}, d_0 = 1
    std::vector<Vector> biases;  // d_l
    std::vector<BatchNormParams> batchnorm; // parallel to layers when enabled
};

struct ModelParams {
    std::vector<FeatureNetParams> nets; // one per feature
    std::vector<Matrix> projections;    // per feature: d x K raw vectors, column k = w_{i,k}
    bool use_batchnorm = false;
    double epsilon = 1e-8;          // norm stabilizer
    double dropout_rate = 0.0;
    double feature_dropout_rate = 0.0;

    int num_features() const { return static_cast<int>(nets.size()); }
    int num_risks() const {
        return nets.empty() ? 0 : static_cast<int>(projections.front().cols());
    }
    int hidden_dim() const {
        return nets.empty() ? 0 : static_cast<int>(nets.front().weights.back().rows());
    }
    std::vector<int> architecture() const;
};

struct RiskScores {
    Matrix eta;                        // N x K
    std::vector<Matrix> contributions; // per risk: N x p, rows sum to eta column
};

enum class Mode { Train, Eval };

struct LayerCache {
    Matrix input;          // N x d_{l-1}
    Matrix normalized;     // batch-norm x-hat (train mode)
    Vector batch_var;      // batch-norm population variance
    Matrix activated;      // tanh output
    Matrix dropout_mask;   // empty when dropout off; entries 0 or 1/(1-p)
    Matrix output;         // layer output after dropout
};

struct FeatureNetCache {
    std::vector<LayerCache> layers;
};

struct ForwardCache {
    std::vector<FeatureNetCache> nets;
    Matrix feature_dropout_mask; // N x p, empty when off; entries 0 or 1/(1-p)
    std::vector<Matrix> w_tilde; // per feature: d x K normalized projections
    std::vector<Vector> w_norm;  // per feature: raw column norms, length K
};

struct BatchNormGrad {
    Vector scale, shift;
};

struct FeatureNetGrad {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::vector<BatchNormGrad> batchnorm;
};

struct ModelGrad {
    std::vector<FeatureNetGrad> nets;
    std::vector<Matrix> projections;
};

// Symmetric uniform initialization on [-1/sqrt(fan_in), 1/sqrt(fan_in)];
// deterministic given seed.
ModelParams init_model(int num_features, int num_risks, const std::vector<int>& hidden,
                       bool use_batchnorm, std::uint64_t seed);

// Eval mode: no dropout, batch-norm uses running statistics, pure function.
RiskScores forward_eval(const ModelParams& params, const Matrix& X);

// One FeatureNet in eval mode on raw scalar inputs; rows of the result are
// the hidden representations h_i. forward_eval and the shape-function export
// share this code path.
Matrix eval_feature_net(const ModelParams& params, int feature, const Vector& x);

// Train mode: dropout with inverted scaling, batch-norm uses batch statistics
// and updates the running ones. The cache feeds backward().
RiskScores forward_train(ModelParams& params, const Matrix& X, Rng& rng, ForwardCache& cache);

// Exact gradient of sum_{n,k} dL_deta(n,k) * eta_k(x_n) w.r.t. every trainable
// parameter, including the epsilon-stabilized normalization Jacobian
//   d w_tilde / d w = (I - w_tilde w_tilde' (||w||+eps)/||w||) / (||w||+eps).
ModelGrad backward(const ModelParams& params, const ForwardCache& cache, const Matrix& dL_deta);

ModelGrad zero_grad_like(const ModelParams& params);

// Flat views over trainable parameters (weights, biases, batch-norm scale and
// shift, raw projections) in a fixed traversal order. Running batch-norm
// statistics are state, not parameters, and are excluded.
Vector pack_params(const ModelParams& params);
void unpack_params(ModelParams& params, const Vector& flat);
Vector pack_grad(const ModelGrad& grad);
std::size_t num_trainable(const ModelParams& params);

// True where the flat slot is a weight (matrix entry or projection); biases
// and batch-norm parameters are false unless penalize_all.
std::vector<char> weight_mask(const ModelParams& params, bool penalize_all = false);

} // namespace crispnam
