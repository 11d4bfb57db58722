#pragma once

#include "crispnam/common.hpp"
#include "crispnam/model.hpp"

#include <vector>

namespace crispnam {

// Per-risk weights, inversely proportional to event frequency and scaled so
// they sum to K; with equal event counts every weight is exactly 1.
struct RiskWeights {
    Vector omega;

    static RiskWeights uniform(int num_risks) { return {Vector::Ones(num_risks)}; }
};

RiskWeights compute_weights(const std::vector<int>& events, int num_risks);

struct LossValue {
    double total = 0.0;   // sum of per_risk + penalty
    Vector per_risk;      // weighted negative log partial likelihood per cause
    double penalty = 0.0; // gamma * ||theta||^2, logging only under decoupled decay
};

struct PartialLikelihoodResult {
    LossValue loss;
    Matrix dl_deta; // N x K
};

// Weighted cause-specific negative log partial likelihood
//   L_{k,w} = -w_k sum_{n: E_n=k} [ eta_k(x_n) - log sum_{j: T_j >= T_n} exp(eta_k(x_j)) ]
// with Breslow handling of ties (tied events share the full risk set, and the
// risk set includes the event subject itself). Log-sum-exp uses
// max-subtraction. The gradient comes back analytically:
//   dL/deta_k(x_m) = w_k [ exp(eta_k(x_m)) * H_k(T_m) - 1{E_m = k} ]
// where H_k(t) accumulates d_k(u) / riskset_sum(u) over event times u <= t.
PartialLikelihoodResult neg_log_partial_likelihood(const Matrix& eta,
                                                   const std::vector<double>& times,
                                                   const std::vector<int>& events,
                                                   const RiskWeights& weights);

// gamma * sum theta^2 over the selected parameters, plus the 2*gamma*theta
// gradient in pack order. Biases and batch-norm parameters are excluded
// unless penalize_all.
struct PenaltyResult {
    double value = 0.0;
    Vector grad; // flat, aligned with pack_params
};

PenaltyResult l2_penalty(const ModelParams& params, double gamma, bool penalize_all = false);

} // namespace crispnam
