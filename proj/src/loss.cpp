#include "crispnam/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crispnam {

RiskWeights compute_weights(const std::vector<int>& events, int num_risks) {
    require(num_risks >= 1, "need at least one risk");
    std::vector<int> counts(static_cast<std::size_t>(num_risks) + 1, 0);
    for (int e : events) {
        require(e >= 0 && e <= num_risks, "event label outside {0..K}");
        ++counts[static_cast<std::size_t>(e)];
    }
    Vector omega(num_risks);
    for (int k = 1; k <= num_risks; ++k) {
        int c = counts[static_cast<std::size_t>(k)];
        if (c == 0)
            throw ValidationError("cannot compute risk weights: no events of type " +
                                  std::to_string(k));
        omega[k - 1] = 1.0 / static_cast<double>(c);
    }
    omega *= static_cast<double>(num_risks) / omega.sum();
    return {omega};
}

PartialLikelihoodResult neg_log_partial_likelihood(const Matrix& eta,
                                                   const std::vector<double>& times,
                                                   const std::vector<int>& events,
                                                   const RiskWeights& weights) {
    const Eigen::Index n = eta.rows();
    const int K = static_cast<int>(eta.cols());
    require(times.size() == static_cast<std::size_t>(n) &&
                events.size() == static_cast<std::size_t>(n),
            "eta, times and events must agree in length");
    require(weights.omega.size() == K, "weight vector length must equal the number of risks");
    if (!eta.allFinite()) throw ValidationError("non-finite risk score passed to the loss");

    // ascending time order; tied times form one group sharing a risk set
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return times[a] < times[b]; });

    PartialLikelihoodResult res;
    res.loss.per_risk = Vector::Zero(K);
    res.dl_deta.setZero(n, K);

    for (int k = 0; k < K; ++k) {
        const double w = weights.omega[k];
        const double shift = eta.col(k).maxCoeff();

        // suffix sums over descending time; riskset sums kept in exp(eta - shift) units
        std::vector<double> group_time;
        std::vector<double> group_log_running; // log sum_{T_j >= t} exp(eta_j - shift)
        std::vector<int> group_event_count;    // d_k at this time
        std::vector<double> group_eta_sum;     // sum of eta over cause-k events at this time

        double running = 0.0;
        std::size_t pos = order.size();
        while (pos > 0) {
            std::size_t end = pos;
            double t = times[order[pos - 1]];
            while (pos > 0 && times[order[pos - 1]] == t) {
                running += std::exp(eta(order[pos - 1], k) - shift);
                --pos;
            }
            int d = 0;
            double eta_sum = 0.0;
            for (std::size_t q = pos; q < end; ++q) {
                Eigen::Index idx = order[q];
                if (events[static_cast<std::size_t>(idx)] == k + 1) {
                    ++d;
                    eta_sum += eta(idx, k);
                }
            }
            if (d > 0) {
                group_time.push_back(t);
                group_log_running.push_back(std::log(running));
                group_event_count.push_back(d);
                group_eta_sum.push_back(eta_sum);
            }
        }
        std::reverse(group_time.begin(), group_time.end());
        std::reverse(group_log_running.begin(), group_log_running.end());
        std::reverse(group_event_count.begin(), group_event_count.end());
        std::reverse(group_eta_sum.begin(), group_eta_sum.end());

        double loss_k = 0.0;
        for (std::size_t g = 0; g < group_time.size(); ++g)
            loss_k -= group_eta_sum[g] - static_cast<double>(group_event_count[g]) *
                                             (shift + group_log_running[g]);
        res.loss.per_risk[k] = w * loss_k;

        // cumulative hazard trick, shift-relative:
        //   H_k(t) * exp(shift) = sum_{u <= t} d_k(u) / riskset_sum_rel(u)
        std::vector<double> cumhaz_rel(group_time.size());
        double acc = 0.0;
        for (std::size_t g = 0; g < group_time.size(); ++g) {
            acc += static_cast<double>(group_event_count[g]) * std::exp(-group_log_running[g]);
            cumhaz_rel[g] = acc;
        }
        for (Eigen::Index m = 0; m < n; ++m) {
            double t = times[static_cast<std::size_t>(m)];
            auto it = std::upper_bound(group_time.begin(), group_time.end(), t);
            double h = it == group_time.begin() ? 0.0 : cumhaz_rel[static_cast<std::size_t>(
                                                            it - group_time.begin() - 1)];
            double g = std::exp(eta(m, k) - shift) * h;
            if (events[static_cast<std::size_t>(m)] == k + 1) g -= 1.0;
            res.dl_deta(m, k) = w * g;
        }
    }
    res.loss.total = res.loss.per_risk.sum();
    return res;
}

PenaltyResult l2_penalty(const ModelParams& params, double gamma, bool penalize_all) {
    require(gamma >= 0.0, "gamma must be nonnegative");
    Vector flat = pack_params(params);
    std::vector<char> mask = weight_mask(params, penalize_all);
    PenaltyResult res;
    res.grad = Vector::Zero(flat.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        res.value += gamma * flat[i] * flat[i];
        res.grad[i] = 2.0 * gamma * flat[i];
    }
    return res;
}

} // namespace crispnam
