#pragma once

#include <algorithm>
#include <map>
#include <string>

#include "reload/cmdp.hpp"
#include "reload/errors.hpp"
#include "reload/oracle.hpp"
#include "reload/rng.hpp"

namespace reload {

/// Two-state CMDP whose single constraint reward equals the task reward:
/// action a1 moves to s1 with reward 1 from either state, a2 moves to s2 with
/// reward 0. theta = 1/2, gamma = 0.9, uniform start. The optimal policy must
/// randomize, so plain descent-ascent orbits the saddle.
inline Cmdp paradoxical_cmdp() {
    Cmdp m;
    m.n_states = 2;
    m.n_actions = 2;
    m.kernel.assign(8, 0.0);
    for (std::size_t s = 0; s < 2; ++s) {
        m.p(s, 0, 0) = 1.0;
        m.p(s, 1, 1) = 1.0;
    }
    m.task_reward = {1.0, 0.0, 1.0, 0.0};
    m.constraint_rewards = {m.task_reward};
    m.thresholds = {0.5};
    m.discount = 0.9;
    m.initial_dist = {0.5, 0.5};
    m.validate();
    return m;
}

/// Tabular constrained Catch. State = (ball_row, ball_col, paddle_col); the
/// ball falls one row per step while the paddle moves by the chosen action.
/// Bottom-row states pay +1 on a catch (paddle under ball) and -1 otherwise,
/// for every action, and transition to the start distribution (ball at the
/// top in a uniformly random column, paddle at the center column). The
/// constraint reward pays 0.2 whenever the paddle column is one of the
/// leftmost three.
///
/// The default budget theta = 0.04 sits strictly below the least left-region
/// occupancy of any always-catching policy (0.0461 for 10x5 at gamma 0.9), so
/// catching everything and obeying the constraint genuinely conflict.
inline Cmdp constrained_catch(std::size_t rows = 10, std::size_t cols = 5) {
    if (rows < 2) throw validation_error("constrained_catch: rows must be >= 2");
    if (cols < 3) throw validation_error("constrained_catch: cols must be >= 3");
    const std::size_t S = rows * cols * cols;
    const std::size_t A = 3;  // left, stay, right
    const std::size_t start_paddle = cols / 2;
    auto sid = [&](std::size_t ball_row, std::size_t ball_col, std::size_t paddle_col) {
        return (ball_row * cols + ball_col) * cols + paddle_col;
    };

    Cmdp m;
    m.n_states = S;
    m.n_actions = A;
    m.discount = 0.9;
    m.kernel.assign(S * A * S, 0.0);
    m.task_reward.assign(S * A, 0.0);
    Vector r1(S * A, 0.0);
    for (std::size_t br = 0; br < rows; ++br)
        for (std::size_t bc = 0; bc < cols; ++bc)
            for (std::size_t pc = 0; pc < cols; ++pc) {
                const std::size_t s = sid(br, bc, pc);
                for (std::size_t a = 0; a < A; ++a) {
                    if (pc < 3) r1[s * A + a] = 0.2;
                    if (br == rows - 1) {
                        m.task_reward[s * A + a] = pc == bc ? 1.0 : -1.0;
                        for (std::size_t nbc = 0; nbc < cols; ++nbc)
                            m.p(s, a, sid(0, nbc, start_paddle)) +=
                                1.0 / static_cast<double>(cols);
                    } else {
                        const long moved = static_cast<long>(pc) + static_cast<long>(a) - 1;
                        const std::size_t npc = static_cast<std::size_t>(
                            std::clamp<long>(moved, 0, static_cast<long>(cols) - 1));
                        m.p(s, a, sid(br + 1, bc, npc)) = 1.0;
                    }
                }
            }
    m.constraint_rewards = {std::move(r1)};
    m.thresholds = {0.04};
    m.initial_dist.assign(S, 0.0);
    for (std::size_t bc = 0; bc < cols; ++bc)
        m.initial_dist[sid(0, bc, start_paddle)] = 1.0 / static_cast<double>(cols);
    m.validate();
    return m;
}

/// Seeded random CMDP: Dirichlet kernel rows, uniform [0,1] rewards, and each
/// threshold at the midpoint of its achievable range so constraints are
/// intermediate. If the midpoints are jointly infeasible (possible with
/// several constraints) they are deterministically relaxed toward the top of
/// the range. Fully determined by the seed via SplitMix64.
inline Cmdp random_cmdp(std::uint64_t seed, std::size_t n_states, std::size_t n_actions,
                        std::size_t n_constraints) {
    if (n_states < 1 || n_actions < 1)
        throw validation_error("random_cmdp: sizes must be >= 1");
    SplitMix64 rng(seed);
    Cmdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.discount = 0.9;
    m.kernel.resize(n_states * n_actions * n_states);
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a) {
            const auto row = rng.dirichlet(n_states);
            for (std::size_t s2 = 0; s2 < n_states; ++s2) m.p(s, a, s2) = row[s2];
        }
    m.task_reward.resize(m.sa_size());
    for (auto& v : m.task_reward) v = rng.next_unit();
    for (std::size_t n = 0; n < n_constraints; ++n) {
        Vector r(m.sa_size());
        for (auto& v : r) v = rng.next_unit();
        m.constraint_rewards.push_back(std::move(r));
    }
    m.initial_dist.assign(n_states, 1.0 / static_cast<double>(n_states));
    m.thresholds.assign(n_constraints, 0.0);
    if (n_constraints > 0) {
        std::vector<std::pair<double, double>> ranges(n_constraints);
        for (std::size_t n = 0; n < n_constraints; ++n) ranges[n] = achievable_range(m, n);
        for (double f : {0.5, 0.75, 0.9}) {
            for (std::size_t n = 0; n < n_constraints; ++n)
                m.thresholds[n] = ranges[n].first + f * (ranges[n].second - ranges[n].first);
            if (solve_cmdp_lp(m).status != SaddleStatus::kInfeasible) break;
        }
    }
    m.validate();
    return m;
}

/// Copy with constraint n's threshold replaced.
inline Cmdp with_threshold(const Cmdp& m, std::size_t n, double theta) {
    if (n >= m.n_constraints()) throw validation_error("with_threshold: index out of range");
    Cmdp out = m;
    out.thresholds[n] = theta;
    return out;
}

/// CLI-facing registry: paradox | catch | random. Parameters: catch takes
/// rows/cols; random takes seed/states/actions/constraints.
inline Cmdp make_env(const std::string& name, const std::map<std::string, double>& params = {}) {
    auto get = [&](const char* key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "paradox") return paradoxical_cmdp();
    if (name == "catch")
        return constrained_catch(static_cast<std::size_t>(get("rows", 10)),
                                 static_cast<std::size_t>(get("cols", 5)));
    if (name == "random")
        return random_cmdp(static_cast<std::uint64_t>(get("seed", 1)),
                           static_cast<std::size_t>(get("states", 5)),
                           static_cast<std::size_t>(get("actions", 3)),
                           static_cast<std::size_t>(get("constraints", 1)));
    throw validation_error("unknown environment: " + name);
}

}  // namespace reload
