#include "crispnam/optimizer.hpp"

#include <cmath>

namespace crispnam {

AdamW::AdamW(Eigen::Index size, std::vector<char> decay_mask)
    : m_(Vector::Zero(size)), v_(Vector::Zero(size)), decay_mask_(std::move(decay_mask)) {
    if (decay_mask_.size() != static_cast<std::size_t>(size))
        throw ValidationError("AdamW: decay mask length must match parameter count");
}

void AdamW::step(Vector& params, const Vector& grads, const AdamWConfig& cfg) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ValidationError("AdamW: parameter/gradient size mismatch");
    if (!grads.allFinite())
        throw TrainingDiverged("non-finite gradient; aborting the optimizer step");

    ++t_;
    if (cfg.weight_decay > 0.0) {
        double decay = cfg.learning_rate * cfg.weight_decay;
        for (Eigen::Index i = 0; i < params.size(); ++i)
            if (decay_mask_[static_cast<std::size_t>(i)]) params[i] -= decay * params[i];
    }
    m_ = cfg.beta1 * m_ + (1.0 - cfg.beta1) * grads;
    v_ = cfg.beta2 * v_ + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        double m_hat = m_[i] / bc1;
        double v_hat = v_[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

} // namespace crispnam
