#pragma once

#include "crispnam/common.hpp"

#include <vector>

namespace crispnam {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// AdamW over a flat parameter vector. Decoupled weight decay is applied
// multiplicatively (theta -= lr * wd * theta) before the bias-corrected Adam
// update, and only to slots flagged in decay_mask.
class AdamW {
  public:
    AdamW(Eigen::Index size, std::vector<char> decay_mask);

    void step(Vector& params, const Vector& grads, const AdamWConfig& cfg);

    long step_count() const { return t_; }

  private:
    Vector m_, v_;
    std::vector<char> decay_mask_;
    long t_ = 0;
};

} // namespace crispnam
