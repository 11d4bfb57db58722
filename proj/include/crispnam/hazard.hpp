#pragma once

#include "crispnam/common.hpp"

#include <vector>

namespace crispnam {

// Baseline hazard increments on the shared grid of observed event times (any
// cause). increments(m, k) = d_k(t_m) / sum_{j: T_j >= t_m} exp(eta_k(x_j));
// zero at grid times with no cause-k event. Step-function convention:
// right-continuous, last value carried forward.
struct BaselineHazards {
    std::vector<double> grid; // sorted unique event times
    Matrix increments;        // M x K, nonnegative

    int num_risks() const { return static_cast<int>(increments.cols()); }
};

BaselineHazards breslow(const Matrix& eta, const std::vector<double>& times,
                        const std::vector<int>& events);

// Absolute-risk curves for one subject on the baseline grid truncated at the
// horizon. cif(m, k) accumulates S(t_{m-1}|x) * lambda_k(t_m|x) with
// S(t_0^-) = 1; survival(m) is the post-step value exp(-sum of increments up
// to and including t_m).
struct CifCurves {
    std::vector<double> grid;
    Matrix cif;      // M x K, nondecreasing columns
    Vector survival; // M, nonincreasing, in (0, 1]

    double cif_at(int risk, double t) const;   // 0 before the first grid time
    double survival_at(double t) const;        // 1 before the first grid time
};

CifCurves predict_cif(const BaselineHazards& bh, const Vector& eta_row, double horizon);

// Batch evaluation used by the metrics pipeline: F_k(t | x_n) for every
// subject n and requested time t, one risk at a time.
Matrix cif_at_times(const BaselineHazards& bh, const Matrix& eta, int risk,
                    const std::vector<double>& eval_times);

} // namespace crispnam
