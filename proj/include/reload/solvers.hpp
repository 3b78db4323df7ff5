#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "reload/cmdp.hpp"
#include "reload/errors.hpp"
#include "reload/geometry.hpp"
#include "reload/projection.hpp"
#include "reload/rng.hpp"

namespace reload {

/// Shared solver configuration. eta_pi is the policy player's mirror-descent
/// temperature (the update exponent is divided by it); eta_mu multiplies the
/// multiplier gradient. When no explicit policy_init is given, a nonzero seed
/// draws a Dirichlet-random initial policy and seed 0 means uniform.
struct SolverConfig {
    double eta_pi = 0.1;
    double eta_mu = 0.1;
    std::size_t iterations = 1000;
    std::size_t stride = 1;
    Vector mu_init;                    // empty = zeros
    std::optional<Policy> policy_init;
    double mu_cap = 100.0;
    bool optimism = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 1) throw validation_error("solver config: iterations must be >= 1");
        if (stride < 1) throw validation_error("solver config: stride must be >= 1");
        if (!(eta_pi > 0.0) || !(eta_mu > 0.0))
            throw validation_error("solver config: step sizes must be positive");
        if (!(mu_cap > 0.0)) throw validation_error("solver config: mu_cap must be positive");
    }
};

struct CmdpRecord {
    std::size_t iter = 0;
    Policy policy;
    Vector occupancy;  // (s, a)
    Vector mu;
    Vector values;  // index 0 = task value, then constraints
    double lagrangian = 0.0;
};

struct CmdpTrace {
    std::size_t stride = 1;
    std::vector<CmdpRecord> records;

    const CmdpRecord& back() const { return records.back(); }
};

struct SaddleEstimate {
    Policy policy;
    OccupancyMeasure occupancy;
    Multipliers mu;
};

namespace detail {

inline Policy initial_policy(const Cmdp& m, const SolverConfig& cfg) {
    if (cfg.policy_init) {
        Policy p = *cfg.policy_init;
        if (p.n_states != m.n_states || p.n_actions != m.n_actions)
            throw validation_error("solver: policy_init shape mismatch");
        p.validate();
        return p;
    }
    if (cfg.seed == 0) return Policy::uniform(m.n_states, m.n_actions);
    SplitMix64 rng(cfg.seed);
    Policy p = Policy::uniform(m.n_states, m.n_actions);
    for (std::size_t s = 0; s < m.n_states; ++s) {
        const auto row = rng.dirichlet(m.n_actions);
        for (std::size_t a = 0; a < m.n_actions; ++a) p(s, a) = row[a];
    }
    return p;
}

inline Vector initial_mu(const Cmdp& m, const SolverConfig& cfg) {
    Vector mu = cfg.mu_init.empty() ? Vector(m.n_constraints(), 0.0) : cfg.mu_init;
    if (mu.size() != m.n_constraints())
        throw validation_error("solver: mu_init shape mismatch");
    for (auto& v : mu) v = std::clamp(v, 0.0, cfg.mu_cap);
    return mu;
}

/// a = q_0 - sum_n mu_n q_n, the weighted return the policy player ascends
/// (the negated mixed q-value).
inline Vector ascent_direction(const PolicyEvaluation& ev, const Vector& mu) {
    Vector a = ev.q[0].q;
    for (std::size_t n = 0; n < mu.size(); ++n) {
        const double w = mu[n];
        if (w == 0.0) continue;
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= w * ev.q[n + 1].q[i];
    }
    return a;
}

/// One MWU policy improvement; log-space with max subtraction, exponent
/// weights / eta_pi per state row.
inline void mwu_update(const Cmdp& m, Policy& pi, const Vector& weights, double eta_pi) {
    const std::size_t A = m.n_actions;
    const BregmanGeometry geom = BregmanGeometry::entropy_simplex();
    Vector row(A), grad(A);
    for (std::size_t s = 0; s < m.n_states; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            row[a] = pi(s, a);
            grad[a] = -weights[s * A + a];
        }
        const Vector next = md_step(geom, row, grad, 1.0 / eta_pi);
        for (std::size_t a = 0; a < A; ++a) pi(s, a) = next[a];
    }
}

inline void record(CmdpTrace& trace, const Cmdp& m, std::size_t k, const Policy& pi,
                   const PolicyEvaluation& ev, const Vector& mu) {
    CmdpRecord rec;
    rec.iter = k;
    rec.policy = pi;
    rec.occupancy = ev.occupancy.d;
    rec.mu = mu;
    rec.values = ev.values;
    rec.lagrangian = -ev.values[0];
    for (std::size_t n = 0; n < mu.size(); ++n)
        rec.lagrangian += mu[n] * (ev.values[n + 1] - m.thresholds[n]);
    trace.records.push_back(std::move(rec));
}

}  // namespace detail

/// Mirror-descent policy iteration on the Lagrangian: exact policy evaluation,
/// MWU policy improvement on the weighted return, projected gradient ascent on
/// the multipliers. config.optimism switches between the plain and the
/// doubled-current-minus-previous gradients; both players step simultaneously
/// from iteration-k quantities.
inline CmdpTrace solve_mdpi(const Cmdp& m, const SolverConfig& cfg) {
    m.validate();
    cfg.validate();
    const std::size_t N = m.n_constraints();
    Policy pi = detail::initial_policy(m, cfg);
    Vector mu = detail::initial_mu(m, cfg);
    const BregmanGeometry mu_geom = BregmanGeometry::euclidean_box(0.0, cfg.mu_cap);

    CmdpTrace trace;
    trace.stride = cfg.stride;
    Vector a_prev, v_prev;
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        const auto ev = evaluate_policy(m, pi);
        const Vector a = detail::ascent_direction(ev, mu);
        if (k == 0) {
            a_prev = a;  // no previous gradient: the optimistic hint cancels
            v_prev = ev.values;
        }
        if (k % cfg.stride == 0) detail::record(trace, m, k, pi, ev, mu);

        Vector weights(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            weights[i] = cfg.optimism ? 2.0 * a[i] - a_prev[i] : a[i];
        detail::mwu_update(m, pi, weights, cfg.eta_pi);

        if (N > 0) {
            Vector grad(N);  // descent gradient of the ascent objective
            for (std::size_t n = 0; n < N; ++n) {
                const double g = cfg.optimism
                                     ? 2.0 * ev.values[n + 1] - v_prev[n + 1] - m.thresholds[n]
                                     : ev.values[n + 1] - m.thresholds[n];
                grad[n] = -g;
            }
            mu = md_step(mu_geom, mu, grad, cfg.eta_mu);
        }
        a_prev = a;
        v_prev = ev.values;
    }
    detail::record(trace, m, cfg.iterations, pi, evaluate_policy(m, pi), mu);
    return trace;
}

/// Optimistic instantiation (requires config.optimism).
inline CmdpTrace reload_mdpi(const Cmdp& m, const SolverConfig& cfg) {
    if (!cfg.optimism) throw validation_error("reload_mdpi: config.optimism must be true");
    return solve_mdpi(m, cfg);
}

/// Non-optimistic baseline (requires !config.optimism). Converges on average
/// but orbits the saddle in the last iterate.
inline CmdpTrace mu_mdpi(const Cmdp& m, const SolverConfig& cfg) {
    if (cfg.optimism) throw validation_error("mu_mdpi: config.optimism must be false");
    return solve_mdpi(m, cfg);
}

/// Past-extragradient policy iteration: a half step driven by the previous
/// half-step evaluation, one evaluation at the half point, and a full step
/// from the iteration-k pair using the half-step gradients.
inline CmdpTrace peg_mdpi(const Cmdp& m, const SolverConfig& cfg) {
    m.validate();
    cfg.validate();
    const std::size_t N = m.n_constraints();
    Policy pi = detail::initial_policy(m, cfg);
    Vector mu = detail::initial_mu(m, cfg);
    const BregmanGeometry mu_geom = BregmanGeometry::euclidean_box(0.0, cfg.mu_cap);

    // Previous half-step quantities start at the initial point.
    auto ev0 = evaluate_policy(m, pi);
    Vector a_half = detail::ascent_direction(ev0, mu);
    Vector v_half = ev0.values;

    CmdpTrace trace;
    trace.stride = cfg.stride;
    auto mu_ascent = [&](const Vector& base, const Vector& values) {
        Vector out = base;
        if (N == 0) return out;
        Vector grad(N);
        for (std::size_t n = 0; n < N; ++n) grad[n] = -(values[n + 1] - m.thresholds[n]);
        return md_step(mu_geom, base, grad, cfg.eta_mu);
    };

    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        if (k % cfg.stride == 0) detail::record(trace, m, k, pi, evaluate_policy(m, pi), mu);

        Policy pi_half = pi;
        detail::mwu_update(m, pi_half, a_half, cfg.eta_pi);
        const Vector mu_half = mu_ascent(mu, v_half);

        const auto ev_half = evaluate_policy(m, pi_half);
        a_half = detail::ascent_direction(ev_half, mu_half);
        v_half = ev_half.values;

        detail::mwu_update(m, pi, a_half, cfg.eta_pi);
        mu = mu_ascent(mu, v_half);
    }
    detail::record(trace, m, cfg.iterations, pi, evaluate_policy(m, pi), mu);
    return trace;
}

/// Occupancy-space optimistic gradient with Euclidean projection onto K. The
/// step size is 0.4 / L where L is the power-iteration estimate of the
/// Lipschitz constant of the stacked constraint-coupling matrix.
inline CmdpTrace reload_occupancy(const Cmdp& m, const SolverConfig& cfg) {
    m.validate();
    cfg.validate();
    const std::size_t N = m.n_constraints(), SA = m.sa_size();
    const FlowSystem flow(m);
    double lipschitz = 0.0;
    if (N > 0) {
        Matrix coupling(N, SA);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t j = 0; j < SA; ++j) coupling(n, j) = m.constraint_rewards[n][j];
        lipschitz = spectral_norm(coupling);
    }
    const double eta = lipschitz > 0.0 ? 0.4 / lipschitz : 0.4;

    Vector d;
    if (cfg.policy_init || cfg.seed != 0) {
        d = occupancy_from_policy(m, detail::initial_policy(m, cfg)).d;
    } else {
        d.assign(SA, 1.0 / static_cast<double>(SA));
        d = project_onto_K(flow, d).d;
    }
    Vector mu = detail::initial_mu(m, cfg);

    CmdpTrace trace;
    trace.stride = cfg.stride;
    auto values_of = [&](const Vector& occ) {
        Vector v(N + 1);
        for (std::size_t n = 0; n <= N; ++n) v[n] = dot(m.reward(n), occ);
        return v;
    };
    auto record_occ = [&](std::size_t k, const Vector& occ, const Vector& mult) {
        CmdpRecord rec;
        rec.iter = k;
        OccupancyMeasure om{occ};
        rec.policy = policy_from_occupancy(m, om);
        rec.occupancy = occ;
        rec.mu = mult;
        rec.values = values_of(occ);
        rec.lagrangian = -rec.values[0];
        for (std::size_t n = 0; n < N; ++n)
            rec.lagrangian += mult[n] * (rec.values[n + 1] - m.thresholds[n]);
        trace.records.push_back(std::move(rec));
    };

    Vector r_prev, v_prev;
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        const Vector r_mu = mixed_reward(m, Multipliers{mu});
        const Vector v = values_of(d);
        if (k == 0) {
            r_prev = r_mu;
            v_prev = v;
        }
        if (k % cfg.stride == 0) record_occ(k, d, mu);

        Vector step(SA);
        for (std::size_t i = 0; i < SA; ++i)
            step[i] = d[i] - eta * (2.0 * r_mu[i] - r_prev[i]);
        Vector d_next = project_onto_K(flow, step).d;
        for (std::size_t n = 0; n < N; ++n) {
            const double g = 2.0 * v[n + 1] - v_prev[n + 1] - m.thresholds[n];
            mu[n] = std::clamp(mu[n] + eta * g, 0.0, cfg.mu_cap);
        }
        d = std::move(d_next);
        r_prev = r_mu;
        v_prev = v;
    }
    record_occ(cfg.iterations, d, mu);
    return trace;
}

/// Entropic MDPI on the stationary scalarized reward r_0 - sum mu*_n r_n; the
/// multipliers never move. Optimal for the scalarized objective but not
/// necessarily at the saddle: the returned policy depends on initialization.
inline CmdpTrace fixed_mu_solver(const Cmdp& m, const Multipliers& mu_star,
                                 const SolverConfig& cfg) {
    m.validate();
    cfg.validate();
    mu_star.validate();
    if (mu_star.mu.size() != m.n_constraints())
        throw validation_error("fixed_mu_solver: multiplier count mismatch");
    Policy pi = detail::initial_policy(m, cfg);

    CmdpTrace trace;
    trace.stride = cfg.stride;
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        const auto ev = evaluate_policy(m, pi);
        if (k % cfg.stride == 0) detail::record(trace, m, k, pi, ev, mu_star.mu);
        const Vector a = detail::ascent_direction(ev, mu_star.mu);
        detail::mwu_update(m, pi, a, cfg.eta_pi);
    }
    detail::record(trace, m, cfg.iterations, pi, evaluate_policy(m, pi), mu_star.mu);
    return trace;
}

/// Final record of the trace.
inline SaddleEstimate extract_saddle_estimate(const CmdpTrace& trace) {
    if (trace.records.empty()) throw validation_error("extract_saddle_estimate: empty trace");
    const auto& rec = trace.back();
    return {rec.policy, OccupancyMeasure{rec.occupancy}, Multipliers{rec.mu}};
}

/// Uniform means over the recorded iterates; the policy is averaged in
/// occupancy space and renormalized. Requires stride 1.
inline SaddleEstimate extract_averaged_estimate(const Cmdp& m, const CmdpTrace& trace) {
    if (trace.records.empty()) throw validation_error("extract_averaged_estimate: empty trace");
    if (trace.stride != 1)
        throw validation_error("extract_averaged_estimate: trace must be recorded at stride 1");
    Vector d(trace.records[0].occupancy.size(), 0.0);
    Vector mu(trace.records[0].mu.size(), 0.0);
    for (const auto& rec : trace.records) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += rec.occupancy[i];
        for (std::size_t n = 0; n < mu.size(); ++n) mu[n] += rec.mu[n];
    }
    const double inv = 1.0 / static_cast<double>(trace.records.size());
    for (auto& v : d) v *= inv;
    for (auto& v : mu) v *= inv;
    OccupancyMeasure occ{d};
    return {policy_from_occupancy(m, occ), occ, Multipliers{mu}};
}

}  // namespace reload
