#include "crispnam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crispnam {

namespace {

double step_lookup(const std::vector<double>& times, const std::vector<double>& values,
                   double t, bool strict) {
    auto it = strict ? std::lower_bound(times.begin(), times.end(), t)
                     : std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return values[static_cast<std::size_t>(it - times.begin() - 1)];
}

} // namespace

double KaplanMeier::at(double t) const { return step_lookup(times, surv, t, false); }
double KaplanMeier::at_left(double t) const { return step_lookup(times, surv, t, true); }

KaplanMeier censoring_km(const std::vector<double>& times, const std::vector<int>& events) {
    require(times.size() == events.size(), "times and events must agree in length");
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    KaplanMeier km;
    double g = 1.0;
    std::size_t at_risk = times.size();
    std::size_t pos = 0;
    while (pos < order.size()) {
        double t = times[order[pos]];
        std::size_t d = 0, tied = 0;
        while (pos < order.size() && times[order[pos]] == t) {
            if (events[order[pos]] == 0) ++d;
            ++tied;
            ++pos;
        }
        if (d > 0) {
            g *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
            km.times.push_back(t);
            km.surv.push_back(g);
        }
        at_risk -= tied;
    }
    return km;
}

std::optional<double> td_auc(const Vector& score, const std::vector<double>& times,
                             const std::vector<int>& events, double t, int risk, bool ipcw) {
    const std::size_t n = times.size();
    require(score.size() == static_cast<Eigen::Index>(n) && events.size() == n,
            "score, times and events must agree in length");

    KaplanMeier km;
    if (ipcw) km = censoring_km(times, events);

    struct Unit {
        double score, weight;
        bool is_case;
    };
    std::vector<Unit> units;
    double case_total = 0.0, control_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        bool is_case = times[i] <= t && events[i] == risk + 1;
        bool is_control = times[i] > t || (times[i] <= t && events[i] != 0 &&
                                           events[i] != risk + 1);
        if (!is_case && !is_control) continue; // censored before the horizon
        double w = 1.0;
        if (ipcw) {
            double g = times[i] > t ? km.at(t) : km.at_left(times[i]);
            if (g <= 0.0) continue;
            w = 1.0 / g;
        }
        units.push_back({score[static_cast<Eigen::Index>(i)], w, is_case});
        (is_case ? case_total : control_total) += w;
    }
    if (case_total <= 0.0 || control_total <= 0.0) return std::nullopt;

    std::sort(units.begin(), units.end(),
              [](const Unit& a, const Unit& b) { return a.score < b.score; });

    // sweep ascending scores; a case earns the control mass strictly below it
    // plus half of the tied control mass
    double concordant = 0.0, controls_below = 0.0;
    std::size_t pos = 0;
    while (pos < units.size()) {
        double s = units[pos].score;
        double case_w = 0.0, control_w = 0.0;
        while (pos < units.size() && units[pos].score == s) {
            (units[pos].is_case ? case_w : control_w) += units[pos].weight;
            ++pos;
        }
        concordant += case_w * (controls_below + 0.5 * control_w);
        controls_below += control_w;
    }
    return concordant / (case_total * control_total);
}

std::optional<double> td_concordance(const Matrix& cif_values,
                                     const std::vector<double>& case_times,
                                     const std::vector<double>& times,
                                     const std::vector<int>& events, int risk, double tau) {
    const std::size_t n = times.size();
    require(events.size() == n, "times and events must agree in length");
    require(cif_values.rows() == static_cast<Eigen::Index>(n),
            "cif_values must have one row per subject");
    require(cif_values.cols() == static_cast<Eigen::Index>(case_times.size()),
            "cif_values must have one column per case time");

    double concordant = 0.0, comparable = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        if (events[a] != risk + 1 || times[a] > tau) continue;
        auto it = std::lower_bound(case_times.begin(), case_times.end(), times[a]);
        if (it == case_times.end() || *it != times[a])
            throw ValidationError("case time missing from the evaluation grid");
        Eigen::Index q = it - case_times.begin();
        double sa = cif_values(static_cast<Eigen::Index>(a), q);
        for (std::size_t b = 0; b < n; ++b) {
            bool cmp = times[b] > times[a] ||
                       (times[b] == times[a] && b != a && events[b] != risk + 1);
            if (!cmp) continue;
            double sb = cif_values(static_cast<Eigen::Index>(b), q);
            comparable += 1.0;
            if (sa > sb) concordant += 1.0;
            else if (sa == sb) concordant += 0.5;
        }
    }
    if (comparable == 0.0) return std::nullopt;
    return concordant / comparable;
}

double brier(const Vector& score, const std::vector<double>& times,
             const std::vector<int>& events, double t, int risk, bool ipcw) {
    const std::size_t n = times.size();
    require(n >= 1, "brier needs at least one subject");
    require(score.size() == static_cast<Eigen::Index>(n) && events.size() == n,
            "score, times and events must agree in length");

    KaplanMeier km;
    if (ipcw) km = censoring_km(times, events);

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double outcome = (times[i] <= t && events[i] == risk + 1) ? 1.0 : 0.0;
        double w = 1.0;
        if (ipcw) {
            if (times[i] <= t && events[i] == 0) {
                w = 0.0; // censored before the horizon carries no information
            } else {
                double g = times[i] > t ? km.at(t) : km.at_left(times[i]);
                w = g > 0.0 ? 1.0 / g : 0.0;
            }
        }
        double d = outcome - score[static_cast<Eigen::Index>(i)];
        sum += w * d * d;
    }
    return sum / static_cast<double>(n);
}

double quantile_linear(std::vector<double> values, double q) {
    require(!values.empty(), "quantile of an empty set");
    require(q >= 0.0 && q <= 1.0, "quantile level must be in [0,1]");
    std::sort(values.begin(), values.end());
    double h = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

EvalHorizons horizons(const std::vector<double>& times, const std::vector<int>& events,
                      int num_risks) {
    require(times.size() == events.size(), "times and events must agree in length");
    EvalHorizons out;
    out.per_risk.resize(static_cast<std::size_t>(num_risks));
    for (int k = 1; k <= num_risks; ++k) {
        std::vector<double> event_times;
        for (std::size_t i = 0; i < times.size(); ++i)
            if (events[i] == k) event_times.push_back(times[i]);
        if (event_times.empty()) continue;
        out.per_risk[static_cast<std::size_t>(k - 1)] = std::array<double, 3>{
            quantile_linear(event_times, 0.25), quantile_linear(event_times, 0.50),
            quantile_linear(event_times, 0.75)};
    }
    return out;
}

} // namespace crispnam
