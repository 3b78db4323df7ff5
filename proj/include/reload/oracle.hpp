#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "reload/cmdp.hpp"
#include "reload/errors.hpp"
#include "reload/projection.hpp"
#include "reload/simplex.hpp"

namespace reload {

enum class SaddleStatus { kOptimal, kInfeasible, kThresholdExtreme };

enum class ThresholdClass { kExtremeLow, kExtremeHigh, kIntermediate };

/// Oracle-certified saddle point of the CMDP Lagrangian. When optimal, the
/// primal/dual values agree to 1e-8 and complementary slackness holds.
struct SaddlePoint {
    OccupancyMeasure d_star;
    Multipliers mu_star;
    double primal_value = 0.0;  // optimal v_0
    double dual_value = 0.0;
    SaddleStatus status = SaddleStatus::kOptimal;
    bool degenerate = false;
    double dual_infeasibility = 0.0;
};

namespace detail {

/// Equality-form LP over d (SA columns) plus one slack per constraint row:
///   rows 0..S-1:   flow constraints
///   rows S..S+N-1: r_n^T d + u_n = theta_n
struct CmdpLp {
    Matrix a;
    Vector b;
    Vector c;
    std::size_t n_vars;  // SA + N

    CmdpLp(const Cmdp& m, bool include_constraints) {
        const std::size_t S = m.n_states, SA = m.sa_size();
        const std::size_t N = include_constraints ? m.n_constraints() : 0;
        const FlowSystem flow(m);
        n_vars = SA + N;
        a = Matrix(S + N, n_vars);
        b.assign(S + N, 0.0);
        c.assign(n_vars, 0.0);
        for (std::size_t i = 0; i < S; ++i) {
            for (std::size_t j = 0; j < SA; ++j) a(i, j) = flow.matrix()(i, j);
            b[i] = flow.rhs()[i];
        }
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t j = 0; j < SA; ++j) a(S + n, j) = m.constraint_rewards[n][j];
            a(S + n, SA + n) = 1.0;
            b[S + n] = m.thresholds[n];
        }
    }
};

/// min or max of <r, d> over the flow polytope alone.
inline double flow_extremum(const Cmdp& m, const Vector& r, bool minimize) {
    CmdpLp lp(m, /*include_constraints=*/false);
    Vector c(lp.n_vars, 0.0);
    for (std::size_t j = 0; j < m.sa_size(); ++j) c[j] = minimize ? r[j] : -r[j];
    const auto sol = solve_lp(lp.a, lp.b, c);
    if (sol.status != LpSolution::Status::kOptimal)
        throw oracle_error("auxiliary LP over the flow polytope failed");
    return minimize ? sol.objective : -sol.objective;
}

}  // namespace detail

/// Min/max achievable <r_n, d> over K; a threshold within 1% of either end of
/// that range is extreme.
inline ThresholdClass classify_threshold(const Cmdp& m, std::size_t n) {
    if (n >= m.n_constraints()) throw validation_error("classify_threshold: index out of range");
    const double lo = detail::flow_extremum(m, m.constraint_rewards[n], true);
    const double hi = detail::flow_extremum(m, m.constraint_rewards[n], false);
    const double span = hi - lo;
    const double theta = m.thresholds[n];
    if (span <= 0.0) return ThresholdClass::kIntermediate;
    if (theta <= lo + 0.01 * span) return ThresholdClass::kExtremeLow;
    if (theta >= hi - 0.01 * span) return ThresholdClass::kExtremeHigh;
    return ThresholdClass::kIntermediate;
}

/// Achievable [min, max] of <r_n, d> over K.
inline std::pair<double, double> achievable_range(const Cmdp& m, std::size_t n) {
    if (n >= m.n_constraints()) throw validation_error("achievable_range: index out of range");
    return {detail::flow_extremum(m, m.constraint_rewards[n], true),
            detail::flow_extremum(m, m.constraint_rewards[n], false)};
}

/// Solves max <r_0, d> over K subject to <r_n, d> <= theta_n by dense revised
/// simplex; mu* comes from the duals of the inequality rows.
inline SaddlePoint solve_cmdp_lp(const Cmdp& m) {
    m.validate();
    detail::CmdpLp lp(m, true);
    const std::size_t S = m.n_states, SA = m.sa_size(), N = m.n_constraints();
    Vector c(lp.n_vars, 0.0);
    for (std::size_t j = 0; j < SA; ++j) c[j] = -m.task_reward[j];

    LpSolution sol;
    try {
        sol = solve_lp(lp.a, lp.b, c);
    } catch (const solver_error& e) {
        throw oracle_error(std::string("cmdp lp: ") + e.what());
    }
    SaddlePoint sp;
    if (sol.status == LpSolution::Status::kInfeasible) {
        sp.status = SaddleStatus::kInfeasible;
        return sp;
    }
    if (sol.status == LpSolution::Status::kUnbounded)
        throw oracle_error("cmdp lp: unbounded (invalid model)");

    sp.d_star.d.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(SA));
    sp.mu_star.mu.resize(N);
    for (std::size_t n = 0; n < N; ++n) sp.mu_star.mu[n] = std::max(-sol.duals[S + n], 0.0);
    sp.primal_value = -sol.objective;
    sp.dual_value = -dot(sol.duals, lp.b);
    sp.degenerate = sol.degenerate;
    sp.dual_infeasibility = sol.dual_infeasibility;
    sp.status = SaddleStatus::kOptimal;
    for (std::size_t n = 0; n < N; ++n)
        if (classify_threshold(m, n) != ThresholdClass::kIntermediate) {
            sp.status = SaddleStatus::kThresholdExtreme;
            break;
        }
    return sp;
}

/// Grid-search verifier for tiny instances (S*A <= 6, N <= 2): enumerates the
/// policy simplex at the given resolution, evaluates each policy exactly, and
/// reads a mu* estimate off the dual function's grid minimizer. Agreement with
/// the LP is expected to within 2/resolution.
inline SaddlePoint brute_force_verify(const Cmdp& m, std::size_t resolution) {
    m.validate();
    if (m.sa_size() > 6 || m.n_constraints() > 2)
        throw validation_error("brute_force_verify: instance too large (S*A <= 6, N <= 2)");
    if (resolution < 2) throw validation_error("brute_force_verify: resolution too small");
    const std::size_t S = m.n_states, A = m.n_actions, N = m.n_constraints();

    // All compositions of `resolution` into A parts, as one policy row each.
    std::vector<Vector> rows;
    {
        Vector row(A, 0.0);
        std::vector<std::size_t> counts(A, 0);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t a, std::size_t left) {
            if (a + 1 == A) {
                counts[a] = left;
                for (std::size_t i = 0; i < A; ++i)
                    row[i] = static_cast<double>(counts[i]) / static_cast<double>(resolution);
                rows.push_back(row);
                return;
            }
            for (std::size_t k = 0; k <= left; ++k) {
                counts[a] = k;
                rec(a + 1, left - k);
            }
        };
        rec(0, resolution);
    }
    double total_points = 1.0;
    for (std::size_t s = 0; s < S; ++s) total_points *= static_cast<double>(rows.size());
    if (total_points > 2.5e7)
        throw validation_error("brute_force_verify: grid too large at this resolution");

    const std::size_t n_policies = static_cast<std::size_t>(total_points);
    std::vector<Vector> values(N + 1, Vector(n_policies));
    Policy pi = Policy::uniform(S, A);
    std::vector<std::size_t> idx(S, 0);
    for (std::size_t p = 0; p < n_policies; ++p) {
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) pi(s, a) = rows[idx[s]][a];
        const auto ev = evaluate_policy(m, pi);
        for (std::size_t n = 0; n <= N; ++n) values[n][p] = ev.values[n];
        for (std::size_t s = 0; s < S; ++s) {
            if (++idx[s] < rows.size()) break;
            idx[s] = 0;
        }
    }

    SaddlePoint sp;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_p = n_policies;
    for (std::size_t p = 0; p < n_policies; ++p) {
        bool feasible = true;
        for (std::size_t n = 0; n < N; ++n)
            if (values[n + 1][p] > m.thresholds[n] + 1e-12) feasible = false;
        if (feasible && values[0][p] > best) {
            best = values[0][p];
            best_p = p;
        }
    }
    if (best_p == n_policies) {
        sp.status = SaddleStatus::kInfeasible;
        return sp;
    }
    sp.primal_value = best;
    // Reconstruct the best policy's occupancy.
    {
        std::vector<std::size_t> at(S);
        std::size_t rem = best_p;
        for (std::size_t s = 0; s < S; ++s) {
            at[s] = rem % rows.size();
            rem /= rows.size();
        }
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) pi(s, a) = rows[at[s]][a];
        sp.d_star = occupancy_from_policy(m, pi);
    }

    // Dual function on a mu grid: g(mu) = max_p v0 - sum mu_n (v_n - theta_n);
    // the minimizer of the gap g(mu) - best estimates mu*. Coarse pass then a
    // refinement around the incumbent.
    sp.mu_star.mu.assign(N, 0.0);
    if (N > 0) {
        const double mu_hi = 10.0;
        auto dual_at = [&](const Vector& mu) {
            double g = -std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < n_policies; ++p) {
                double v = values[0][p];
                for (std::size_t n = 0; n < N; ++n)
                    v -= mu[n] * (values[n + 1][p] - m.thresholds[n]);
                g = std::max(g, v);
            }
            return g;
        };
        Vector mu(N, 0.0), best_mu(N, 0.0);
        const std::size_t coarse = N == 1 ? 101 : 41;
        double best_gap = std::numeric_limits<double>::infinity();
        std::function<void(std::size_t, const Vector&, double)> scan =
            [&](std::size_t n, const Vector& center, double width) {
                for (std::size_t k = 0; k < coarse; ++k) {
                    mu[n] = std::max(
                        0.0, center[n] - width / 2.0 +
                                 width * static_cast<double>(k) / static_cast<double>(coarse - 1));
                    if (n + 1 < N) {
                        scan(n + 1, center, width);
                    } else {
                        const double gap = dual_at(mu) - best;
                        if (gap < best_gap) {
                            best_gap = gap;
                            best_mu = mu;
                        }
                    }
                }
            };
        Vector center(N, mu_hi / 2.0);
        scan(0, center, mu_hi);
        const double coarse_step = mu_hi / static_cast<double>(coarse - 1);
        center = best_mu;
        scan(0, center, 2.0 * coarse_step);
        sp.mu_star.mu = best_mu;
        sp.dual_value = best_gap + best;
    } else {
        sp.dual_value = best;
    }
    sp.status = SaddleStatus::kOptimal;
    return sp;
}

inline nlohmann::json saddle_to_json(const SaddlePoint& sp) {
    nlohmann::json j;
    j["d_star"] = sp.d_star.d;  // flattened row-major (s, a)
    j["mu_star"] = sp.mu_star.mu;
    j["primal_value"] = sp.primal_value;
    j["dual_value"] = sp.dual_value;
    j["degenerate"] = sp.degenerate;
    switch (sp.status) {
        case SaddleStatus::kOptimal: j["status"] = "optimal"; break;
        case SaddleStatus::kInfeasible: j["status"] = "infeasible"; break;
        case SaddleStatus::kThresholdExtreme: j["status"] = "threshold_extreme"; break;
    }
    return j;
}

}  // namespace reload
