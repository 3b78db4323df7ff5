#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "reload/errors.hpp"
#include "reload/linalg.hpp"
#include "reload/oracle.hpp"
#include "reload/solvers.hpp"

namespace reload {

/// Task value minus the multiplier-weighted constraint overshoot.
inline double weighted_reward(double v0, const Vector& v_constraints, const Vector& thetas,
                              const Vector& mu_hat_star) {
    if (v_constraints.size() != thetas.size() || v_constraints.size() != mu_hat_star.size())
        throw validation_error("weighted_reward: shape mismatch");
    double out = v0;
    for (std::size_t n = 0; n < v_constraints.size(); ++n) {
        if (mu_hat_star[n] < 0.0) throw validation_error("weighted_reward: negative weight");
        out -= mu_hat_star[n] * std::max(v_constraints[n] - thetas[n], 0.0);
    }
    return out;
}

/// Task value minus the raw constraint overshoot (unit weights).
inline double penalized_reward(double v0, const Vector& v_constraints, const Vector& thetas) {
    if (v_constraints.size() != thetas.size())
        throw validation_error("penalized_reward: shape mismatch");
    double out = v0;
    for (std::size_t n = 0; n < v_constraints.size(); ++n)
        out -= std::max(v_constraints[n] - thetas[n], 0.0);
    return out;
}

/// Normalization used when a multiplier was sigmoid-bounded during learning:
/// sigma(mu) / (1 - sigma(mu)) = exp(mu).
inline double mu_hat_from_sigmoid_bounded(double mu) { return std::exp(mu); }

/// Per-record Euclidean distance to the oracle saddle, measured in
/// (v_0, v_1..N, mu) space. The primal optimum can be a face, so occupancy
/// coordinates are deliberately not part of the metric.
inline Vector distance_to_saddle(const CmdpTrace& trace, const SaddlePoint& saddle,
                                 const Cmdp& m) {
    if (saddle.status == SaddleStatus::kInfeasible)
        throw validation_error("distance_to_saddle: infeasible saddle");
    const std::size_t N = m.n_constraints();
    Vector target(1 + N + N);
    target[0] = saddle.primal_value;
    for (std::size_t n = 0; n < N; ++n) {
        target[1 + n] = dot(m.constraint_rewards[n], saddle.d_star.d);
        target[1 + N + n] = saddle.mu_star.mu[n];
    }
    Vector out;
    out.reserve(trace.records.size());
    for (const auto& rec : trace.records) {
        double s = (rec.values[0] - target[0]) * (rec.values[0] - target[0]);
        for (std::size_t n = 0; n < N; ++n) {
            const double dv = rec.values[n + 1] - target[1 + n];
            const double dm = rec.mu[n] - target[1 + N + n];
            s += dv * dv + dm * dm;
        }
        out.push_back(std::sqrt(s));
    }
    return out;
}

struct LicVerdict {
    bool converged = false;
    double amplitude = 0.0;  // max - min over the final window
    double final_value = 0.0;
};

/// Verdict over the final window of a distance (or value-error) series:
/// converged iff both the window amplitude and the final entry are within tol.
inline LicVerdict lic_diagnostic(const Vector& series, double window_fraction = 0.1,
                                 double tol = 1e-3) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw validation_error("lic_diagnostic: window fraction in (0, 1]");
    if (static_cast<double>(series.size()) < 10.0 / window_fraction)
        throw validation_error("lic_diagnostic: series too short for the window");
    const std::size_t start =
        series.size() - static_cast<std::size_t>(window_fraction * static_cast<double>(series.size()));
    double lo = series[start], hi = series[start];
    for (std::size_t i = start; i < series.size(); ++i) {
        lo = std::min(lo, series[i]);
        hi = std::max(hi, series[i]);
    }
    LicVerdict v;
    v.amplitude = hi - lo;
    v.final_value = series.back();
    v.converged = v.amplitude <= tol && std::abs(v.final_value) <= tol;
    return v;
}

/// Tail oscillation amplitude (max - min over the trailing fraction).
inline double tail_amplitude(const Vector& series, double fraction = 0.2) {
    if (series.empty()) throw validation_error("tail_amplitude: empty series");
    const std::size_t start =
        series.size() - std::max<std::size_t>(
                            1, static_cast<std::size_t>(fraction * static_cast<double>(series.size())));
    double lo = series[start], hi = series[start];
    for (std::size_t i = start; i < series.size(); ++i) {
        lo = std::min(lo, series[i]);
        hi = std::max(hi, series[i]);
    }
    return hi - lo;
}

}  // namespace reload
