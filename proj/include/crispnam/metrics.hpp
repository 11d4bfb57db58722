#pragma once

#include "crispnam/common.hpp"

#include <array>
#include <limits>
#include <optional>
#include <vector>

namespace crispnam {

// Kaplan-Meier estimate of the censoring distribution G(t) = P(C > t),
// treating censorings (E = 0) as the events of interest. Used for
// inverse-probability-of-censoring weights.
struct KaplanMeier {
    std::vector<double> times; // sorted unique censoring times
    std::vector<double> surv;  // G right after each time

    double at(double t) const;      // G(t), right-continuous
    double at_left(double t) const; // G(t-)
};

KaplanMeier censoring_km(const std::vector<double>& times, const std::vector<int>& events);

// Cumulative/dynamic time-dependent AUC at horizon t for cause k. Cases are
// subjects with T <= t and E = k; controls are event-free subjects (T > t)
// plus competing-event subjects (T <= t, E not in {0, k}). Censored-before-t
// subjects are excluded. Ties in score count one half. Optional IPCW from the
// censoring Kaplan-Meier. Returns nothing when there is no case or no control.
std::optional<double> td_auc(const Vector& score, const std::vector<double>& times,
                             const std::vector<int>& events, double t, int risk,
                             bool ipcw = false);

// Antolini-style time-dependent concordance for cause k: over pairs (a, b)
// with E_a = k and (T_a < T_b, or T_a = T_b with b not a cause-k event),
// concordant when F_k(T_a | x_a) > F_k(T_a | x_b). cif_values(n, q) holds
// F_k evaluated at case_times[q] (sorted unique times of cause-k events) for
// subject n. An optional truncation horizon restricts cases to T_a <= tau.
std::optional<double> td_concordance(const Matrix& cif_values,
                                     const std::vector<double>& case_times,
                                     const std::vector<double>& times,
                                     const std::vector<int>& events, int risk,
                                     double tau = std::numeric_limits<double>::infinity());

// Brier score at horizon t for cause k: mean of (1{T <= t, E = k} - score)^2
// over all N subjects. With ipcw, subjects censored before t get weight 0,
// observed events before t get 1/G(T-), and survivors get 1/G(t).
double brier(const Vector& score, const std::vector<double>& times,
             const std::vector<int>& events, double t, int risk, bool ipcw = false);

// 25th/50th/75th percentiles (linear interpolation) of observed times among
// subjects with E = k; risks without events get no horizons.
struct EvalHorizons {
    std::vector<std::optional<std::array<double, 3>>> per_risk; // index k-1
};

EvalHorizons horizons(const std::vector<double>& times, const std::vector<int>& events,
                      int num_risks);

double quantile_linear(std::vector<double> values, double q);

} // namespace crispnam
