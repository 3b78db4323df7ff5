#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reload/errors.hpp"
#include "reload/linalg.hpp"

namespace reload {

/// Discounted tabular CMDP: kernel, task reward, constraint rewards with
/// thresholds, discount, initial state distribution. All state-action arrays
/// are flattened row-major as s * n_actions + a; the kernel adds a trailing
/// next-state index.
struct Cmdp {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    Vector kernel;                          // (s, a, s')
    Vector task_reward;                     // (s, a)
    std::vector<Vector> constraint_rewards; // each (s, a)
    Vector thresholds;
    double discount = 0.9;
    Vector initial_dist;

    std::size_t sa_size() const { return n_states * n_actions; }
    std::size_t n_constraints() const { return constraint_rewards.size(); }

    double p(std::size_t s, std::size_t a, std::size_t s2) const {
        return kernel[(s * n_actions + a) * n_states + s2];
    }
    double& p(std::size_t s, std::size_t a, std::size_t s2) {
        return kernel[(s * n_actions + a) * n_states + s2];
    }

    const Vector& reward(std::size_t n) const {
        return n == 0 ? task_reward : constraint_rewards[n - 1];
    }

    void validate() const {
        if (n_states == 0 || n_actions == 0)
            throw validation_error("cmdp: empty state or action space");
        if (!(discount >= 0.0 && discount < 1.0))
            throw validation_error("cmdp: discount must lie in [0, 1)");
        if (kernel.size() != sa_size() * n_states || task_reward.size() != sa_size() ||
            initial_dist.size() != n_states)
            throw validation_error("cmdp: array shape mismatch");
        if (constraint_rewards.size() != thresholds.size())
            throw validation_error("cmdp: constraint/threshold count mismatch");
        for (const auto& r : constraint_rewards)
            if (r.size() != sa_size()) throw validation_error("cmdp: constraint reward shape");
        for (std::size_t s = 0; s < n_states; ++s)
            for (std::size_t a = 0; a < n_actions; ++a) {
                double row = 0.0;
                for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                    const double v = p(s, a, s2);
                    if (v < 0.0) throw validation_error("cmdp: negative kernel entry");
                    row += v;
                }
                if (std::abs(row - 1.0) > 1e-12)
                    throw validation_error("cmdp: kernel row does not sum to 1");
            }
        double rho = 0.0;
        for (double v : initial_dist) {
            if (v < 0.0) throw validation_error("cmdp: negative initial probability");
            rho += v;
        }
        if (std::abs(rho - 1.0) > 1e-12)
            throw validation_error("cmdp: initial distribution does not sum to 1");
    }
};

struct Policy {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    Vector probs;  // (s, a)

    static Policy uniform(std::size_t S, std::size_t A) {
        Policy p;
        p.n_states = S;
        p.n_actions = A;
        p.probs.assign(S * A, 1.0 / static_cast<double>(A));
        return p;
    }

    double operator()(std::size_t s, std::size_t a) const { return probs[s * n_actions + a]; }
    double& operator()(std::size_t s, std::size_t a) { return probs[s * n_actions + a]; }

    void validate() const {
        if (probs.size() != n_states * n_actions) throw validation_error("policy: shape mismatch");
        for (std::size_t s = 0; s < n_states; ++s) {
            double row = 0.0;
            for (std::size_t a = 0; a < n_actions; ++a) {
                const double v = (*this)(s, a);
                if (v < 0.0) throw validation_error("policy: negative probability");
                row += v;
            }
            if (std::abs(row - 1.0) > 1e-12)
                throw validation_error("policy: row does not sum to 1");
        }
    }
};

/// State-action occupancy d in the flow polytope K; total mass 1 under the
/// (1 - gamma) normalization.
struct OccupancyMeasure {
    Vector d;  // (s, a)

    double mass() const {
        double s = 0.0;
        for (double v : d) s += v;
        return s;
    }
};

struct Multipliers {
    Vector mu;

    void validate() const {
        for (double v : mu)
            if (v < 0.0) throw validation_error("multipliers: negative entry");
    }
};

struct QValues {
    Vector q;  // (s, a)
};

namespace detail {

inline Matrix policy_transition(const Cmdp& m, const Policy& pi) {
    Matrix t(m.n_states, m.n_states);
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a) {
            const double w = pi(s, a);
            if (w == 0.0) continue;
            for (std::size_t s2 = 0; s2 < m.n_states; ++s2) t(s, s2) += w * m.p(s, a, s2);
        }
    return t;
}

}  // namespace detail

/// Everything one exact evaluation of a policy yields: the occupancy measure,
/// per-reward q-values, and scalar values <r_n, d>. One LU factorization of
/// (I - gamma P_pi) serves all solves.
struct PolicyEvaluation {
    OccupancyMeasure occupancy;
    std::vector<QValues> q;  // index 0 = task reward, then constraints
    Vector values;           // <r_n, d_pi>, index 0 = task
    Vector state_values_task;  // v_0(s), for the unnormalized diagnostics
};

inline PolicyEvaluation evaluate_policy(const Cmdp& m, const Policy& pi) {
    const std::size_t S = m.n_states, A = m.n_actions, N = m.n_constraints();
    Matrix sys(S, S);
    const Matrix ppi = detail::policy_transition(m, pi);
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < S; ++j)
            sys(i, j) = (i == j ? 1.0 : 0.0) - m.discount * ppi(i, j);
    const auto lu = LuFactorization::compute(sys);

    PolicyEvaluation out;
    Vector rhs(S);
    for (std::size_t s = 0; s < S; ++s) rhs[s] = (1.0 - m.discount) * m.initial_dist[s];
    const Vector ds = lu.solve_transposed(rhs);
    out.occupancy.d.resize(S * A);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) out.occupancy.d[s * A + a] = ds[s] * pi(s, a);

    out.q.resize(N + 1);
    out.values.resize(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        const Vector& r = m.reward(n);
        Vector rpi(S, 0.0);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) rpi[s] += pi(s, a) * r[s * A + a];
        const Vector v = lu.solve(rpi);
        QValues q;
        q.q.resize(S * A);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                double pv = 0.0;
                for (std::size_t s2 = 0; s2 < S; ++s2) pv += m.p(s, a, s2) * v[s2];
                q.q[s * A + a] = r[s * A + a] + m.discount * pv;
            }
        out.q[n] = std::move(q);
        out.values[n] = dot(r, out.occupancy.d);
        if (n == 0) out.state_values_task = v;
    }
    return out;
}

/// Solves the flow system for d_pi by dense LU and spreads state mass over
/// actions with pi.
inline OccupancyMeasure occupancy_from_policy(const Cmdp& m, const Policy& pi) {
    return evaluate_policy(m, pi).occupancy;
}

/// Conditional policy of an occupancy measure; zero-mass states get the
/// uniform row.
inline Policy policy_from_occupancy(const Cmdp& m, const OccupancyMeasure& occ) {
    Policy pi;
    pi.n_states = m.n_states;
    pi.n_actions = m.n_actions;
    pi.probs.resize(m.sa_size());
    for (std::size_t s = 0; s < m.n_states; ++s) {
        double row = 0.0;
        for (std::size_t a = 0; a < m.n_actions; ++a) row += occ.d[s * m.n_actions + a];
        if (row < 1e-12) {
            for (std::size_t a = 0; a < m.n_actions; ++a)
                pi(s, a) = 1.0 / static_cast<double>(m.n_actions);
        } else {
            for (std::size_t a = 0; a < m.n_actions; ++a)
                pi(s, a) = std::max(occ.d[s * m.n_actions + a], 0.0) / row;
        }
    }
    return pi;
}

/// Exact q-values for reward index n (0 = task, 1..N = constraints).
inline QValues policy_eval(const Cmdp& m, const Policy& pi, std::size_t n) {
    if (n > m.n_constraints()) throw validation_error("policy_eval: reward index out of range");
    return evaluate_policy(m, pi).q[n];
}

/// <r_n, d_pi>; equals (1 - gamma) rho^T v_n.
inline double value_of(const Cmdp& m, const Policy& pi, std::size_t n) {
    if (n > m.n_constraints()) throw validation_error("value_of: reward index out of range");
    const auto ev = evaluate_policy(m, pi);
    return ev.values[n];
}

/// r_mu = -r_0 + sum_n mu_n r_n, the gradient of the Lagrangian in d.
inline Vector mixed_reward(const Cmdp& m, const Multipliers& mu) {
    if (mu.mu.size() != m.n_constraints())
        throw validation_error("mixed_reward: multiplier count mismatch");
    mu.validate();
    Vector r(m.sa_size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        double v = -m.task_reward[i];
        for (std::size_t n = 0; n < m.n_constraints(); ++n)
            v += mu.mu[n] * m.constraint_rewards[n][i];
        r[i] = v;
    }
    return r;
}

/// q_mu = -q_0 + sum_n mu_n q_n.
inline Vector mixed_q(const QValues& q0, const std::vector<QValues>& qn, const Multipliers& mu) {
    if (qn.size() != mu.mu.size()) throw validation_error("mixed_q: count mismatch");
    for (const auto& q : qn)
        if (q.q.size() != q0.q.size()) throw validation_error("mixed_q: shape mismatch");
    Vector out(q0.q.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = -q0.q[i];
        for (std::size_t n = 0; n < qn.size(); ++n) v += mu.mu[n] * qn[n].q[i];
        out[i] = v;
    }
    return out;
}

/// L(d, mu) = -<r_0, d> + sum_n mu_n (<r_n, d> - theta_n).
inline double lagrangian(const Cmdp& m, const OccupancyMeasure& occ, const Multipliers& mu) {
    if (mu.mu.size() != m.n_constraints())
        throw validation_error("lagrangian: multiplier count mismatch");
    double v = -dot(m.task_reward, occ.d);
    for (std::size_t n = 0; n < m.n_constraints(); ++n)
        v += mu.mu[n] * (dot(m.constraint_rewards[n], occ.d) - m.thresholds[n]);
    return v;
}

// ---------------------------------------------------------------------------
// JSON serialization. Schema: n_states, n_actions, gamma, rho, kernel
// ([s][a][s']), r0 ([s][a]), constraints: [{reward, threshold}].
// ---------------------------------------------------------------------------

inline nlohmann::json cmdp_to_json(const Cmdp& m) {
    nlohmann::json j;
    j["n_states"] = m.n_states;
    j["n_actions"] = m.n_actions;
    j["gamma"] = m.discount;
    j["rho"] = m.initial_dist;
    auto grid = [&](const Vector& r) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t s = 0; s < m.n_states; ++s) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t a = 0; a < m.n_actions; ++a) row.push_back(r[s * m.n_actions + a]);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    nlohmann::json kernel = nlohmann::json::array();
    for (std::size_t s = 0; s < m.n_states; ++s) {
        nlohmann::json per_a = nlohmann::json::array();
        for (std::size_t a = 0; a < m.n_actions; ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t s2 = 0; s2 < m.n_states; ++s2) row.push_back(m.p(s, a, s2));
            per_a.push_back(std::move(row));
        }
        kernel.push_back(std::move(per_a));
    }
    j["kernel"] = std::move(kernel);
    j["r0"] = grid(m.task_reward);
    nlohmann::json cons = nlohmann::json::array();
    for (std::size_t n = 0; n < m.n_constraints(); ++n)
        cons.push_back({{"reward", grid(m.constraint_rewards[n])}, {"threshold", m.thresholds[n]}});
    j["constraints"] = std::move(cons);
    return j;
}

inline Cmdp cmdp_from_json(const nlohmann::json& j) {
    Cmdp m;
    try {
        m.n_states = j.at("n_states").get<std::size_t>();
        m.n_actions = j.at("n_actions").get<std::size_t>();
        m.discount = j.at("gamma").get<double>();
        m.initial_dist = j.at("rho").get<Vector>();
        auto flat = [&](const nlohmann::json& rows) {
            Vector r;
            r.reserve(m.sa_size());
            for (const auto& row : rows)
                for (const auto& v : row) r.push_back(v.get<double>());
            return r;
        };
        m.kernel.reserve(m.sa_size() * m.n_states);
        for (const auto& per_s : j.at("kernel"))
            for (const auto& per_a : per_s)
                for (const auto& v : per_a) m.kernel.push_back(v.get<double>());
        m.task_reward = flat(j.at("r0"));
        for (const auto& c : j.at("constraints")) {
            m.constraint_rewards.push_back(flat(c.at("reward")));
            m.thresholds.push_back(c.at("threshold").get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("cmdp json: ") + e.what());
    }
    m.validate();
    return m;
}

inline void save_cmdp(const Cmdp& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open for writing: " + path);
    out << cmdp_to_json(m).dump(2) << "\n";
}

inline Cmdp load_cmdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("cmdp json parse: ") + e.what());
    }
    return cmdp_from_json(j);
}

}  // namespace reload
