#include "crispnam/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace crispnam {

BaselineHazards breslow(const Matrix& eta, const std::vector<double>& times,
                        const std::vector<int>& events) {
    const Eigen::Index n = eta.rows();
    const int K = static_cast<int>(eta.cols());
    require(times.size() == static_cast<std::size_t>(n) &&
                events.size() == static_cast<std::size_t>(n),
            "eta, times and events must agree in length");
    if (!eta.allFinite()) throw ValidationError("non-finite risk score passed to breslow");

    // shared grid: unique observed event times of any cause
    std::vector<double> grid;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (events[i] > 0) grid.push_back(times[i]);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    require(!grid.empty(), "breslow needs at least one observed event");

    BaselineHazards bh;
    bh.grid = grid;
    bh.increments.setZero(static_cast<Eigen::Index>(grid.size()), K);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return times[a] < times[b]; });

    for (int k = 0; k < K; ++k) {
        const double shift = eta.col(k).maxCoeff();
        double running = 0.0; // sum exp(eta - shift) over subjects with T >= current grid time
        std::size_t pos = order.size();
        for (std::size_t m = grid.size(); m-- > 0;) {
            double t = grid[m];
            while (pos > 0 && times[static_cast<std::size_t>(order[pos - 1])] >= t) {
                running += std::exp(eta(order[pos - 1], k) - shift);
                --pos;
            }
            int d = 0;
            for (std::size_t q = pos; q < order.size(); ++q) {
                std::size_t idx = static_cast<std::size_t>(order[q]);
                if (times[idx] > t) break;
                if (times[idx] == t && events[idx] == k + 1) ++d;
            }
            if (d > 0) {
                if (running <= 0.0)
                    throw InternalError("empty risk set at an observed event time");
                bh.increments(static_cast<Eigen::Index>(m), k) =
                    static_cast<double>(d) * std::exp(-shift - std::log(running));
            }
        }
    }
    return bh;
}

double CifCurves::cif_at(int risk, double t) const {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 0.0;
    return cif(static_cast<Eigen::Index>(it - grid.begin() - 1), risk);
}

double CifCurves::survival_at(double t) const {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 1.0;
    return survival[static_cast<Eigen::Index>(it - grid.begin() - 1)];
}

CifCurves predict_cif(const BaselineHazards& bh, const Vector& eta_row, double horizon) {
    require(horizon >= 0.0, "horizon must be nonnegative");
    const int K = bh.num_risks();
    require(eta_row.size() == K, "eta_row length must equal the number of risks");

    CifCurves out;
    for (double t : bh.grid) {
        if (t > horizon) break;
        out.grid.push_back(t);
    }
    const Eigen::Index m = static_cast<Eigen::Index>(out.grid.size());
    out.cif.setZero(m, K);
    out.survival.resize(m);

    Vector rel_risk = eta_row.array().exp().matrix();
    double cum = 0.0;          // total hazard strictly before the current grid time
    Vector cif_acc = Vector::Zero(K);
    for (Eigen::Index i = 0; i < m; ++i) {
        double surv_before = std::exp(-cum);
        double step_total = 0.0;
        for (int k = 0; k < K; ++k) {
            double lam = bh.increments(i, k) * rel_risk[k];
            cif_acc[k] += surv_before * lam;
            step_total += lam;
        }
        cum += step_total;
        out.cif.row(i) = cif_acc.transpose();
        out.survival[i] = std::exp(-cum);
    }
    return out;
}

Matrix cif_at_times(const BaselineHazards& bh, const Matrix& eta, int risk,
                    const std::vector<double>& eval_times) {
    const int K = bh.num_risks();
    require(risk >= 0 && risk < K, "risk index out of range");
    require(static_cast<int>(eta.cols()) == K, "eta column count must equal the number of risks");
    const Eigen::Index n = eta.rows();
    const Eigen::Index m = static_cast<Eigen::Index>(bh.grid.size());

    // map each eval time to the number of grid points <= it
    std::vector<Eigen::Index> cut(eval_times.size());
    for (std::size_t q = 0; q < eval_times.size(); ++q)
        cut[q] = std::upper_bound(bh.grid.begin(), bh.grid.end(), eval_times[q]) -
                 bh.grid.begin();

    Matrix out(n, static_cast<Eigen::Index>(eval_times.size()));
    Vector cif_grid(m);
    for (Eigen::Index s = 0; s < n; ++s) {
        Vector rel_risk = eta.row(s).transpose().array().exp().matrix();
        double cum = 0.0, acc = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double surv_before = std::exp(-cum);
            double step_total = 0.0;
            for (int k = 0; k < K; ++k) {
                double lam = bh.increments(i, k) * rel_risk[k];
                if (k == risk) acc += surv_before * lam;
                step_total += lam;
            }
            cum += step_total;
            cif_grid[i] = acc;
        }
        for (std::size_t q = 0; q < eval_times.size(); ++q)
            out(s, static_cast<Eigen::Index>(q)) = cut[q] == 0 ? 0.0 : cif_grid[cut[q] - 1];
    }
    return out;
}

} // namespace crispnam
