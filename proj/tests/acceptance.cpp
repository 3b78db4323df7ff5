// Acceptance suite: runs the project's numbered correctness criteria and
// prints one pass/fail line each. Exit status is the number of failures.

#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "reload/reload.hpp"

using namespace reload;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome& out;
    void require(bool ok, const std::string& msg) {
        if (!ok) {
            out.pass = false;
            if (!out.detail.empty()) out.detail += "; ";
            out.detail += msg;
        }
    }
    void note(const std::string& msg) {
        if (!out.detail.empty()) out.detail += "; ";
        out.detail += msg;
    }
};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

IterateTrace xy_run(GameAlgo algo, double eta, std::size_t iters, double m = 0.0) {
    BilinearGame game = BilinearGame::xy();
    game.strong_monotonicity = m;
    return solve_game(game, algo, StepSchedule::constant(eta), {{1.0}, {1.0}}, iters, 1);
}

Vector series_v0(const CmdpTrace& t) {
    Vector out;
    for (const auto& rec : t.records) out.push_back(rec.values[0]);
    return out;
}

double tail_min(const Vector& s, std::size_t count) {
    double m = s.back();
    for (std::size_t i = s.size() - std::min(count, s.size()); i < s.size(); ++i)
        m = std::min(m, s[i]);
    return m;
}

// --- criterion 1: the gda distance recursion is exact -----------------------
Outcome criterion1() {
    Outcome out;
    Check c{out};
    for (double eta : {0.01, 0.1, 0.5}) {
        const auto tr = xy_run(GameAlgo::kGda, eta, 100);
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < tr.iterates.size(); ++k) {
            const double dk = tr.iterates[k].x[0] * tr.iterates[k].x[0] +
                              tr.iterates[k].y[0] * tr.iterates[k].y[0];
            const double dk1 = tr.iterates[k + 1].x[0] * tr.iterates[k + 1].x[0] +
                               tr.iterates[k + 1].y[0] * tr.iterates[k + 1].y[0];
            worst = std::max(worst, std::abs(dk1 - (1.0 + eta * eta) * dk) / dk1);
        }
        c.require(worst <= 1e-12, "eta=" + fmt(eta) + " rel err " + fmt(worst));
    }
    return out;
}

// --- criterion 2: optimism separates the three xy-game behaviors ------------
Outcome criterion2() {
    Outcome out;
    Check c{out};
    const auto ogda = xy_run(GameAlgo::kOgda, 0.1, 10000);
    c.require(ogda.diagnostics.at("norm").back() <= 1e-3,
              "ogda final " + fmt(ogda.diagnostics.at("norm").back()));
    const auto gda = xy_run(GameAlgo::kGda, 0.1, 10000);
    c.require(gda.diagnostics.at("norm").back() >= std::sqrt(2.0),
              "gda final " + fmt(gda.diagnostics.at("norm").back()));
    const auto singly = xy_run(GameAlgo::kSinglyOptimistic, 0.1, 10000);
    const double smin = tail_min(singly.diagnostics.at("norm"), 1000);
    c.require(smin >= 0.1, "singly tail min " + fmt(smin));
    return out;
}

// --- criterion 3: the one-optimistic-player spectrum exceeds one ------------
Outcome criterion3() {
    Outcome out;
    Check c{out};
    const double at_zero = singly_optimistic_spectral_radius(0.0);
    c.require(std::abs(at_zero - 1.0) <= 1e-9, "rho(0) = " + fmt(at_zero));
    double min_margin = 1e300;
    bool all_above_one = true;
    for (int i = 0; i < 50; ++i) {
        const double eta =
            std::pow(10.0, -3.0 + (std::log10(0.5) + 3.0) * static_cast<double>(i) / 49.0);
        const double rho = singly_optimistic_spectral_radius(eta);
        min_margin = std::min(min_margin, rho - 1.0);
        if (!(rho > 1.0)) all_above_one = false;
    }
    c.note(std::string("strictly above 1 at every grid point: ") +
           (all_above_one ? "yes" : "NO") + ", min margin " + fmt(min_margin));
    c.require(min_margin > 1e-6, "margin 1e-6 not met (rho - 1 ~ eta^4/2 at small eta)");
    return out;
}

// --- criterion 4: strong monotonicity gives a linear rate -------------------
Outcome criterion4() {
    Outcome out;
    Check c{out};
    const auto tr = xy_run(GameAlgo::kOgda, 0.2, 200, 0.5);
    const auto fit = fit_linear_rate(tr.diagnostics.at("norm"));
    c.require(fit.alpha >= 1.01, "alpha " + fmt(fit.alpha));
    c.require(fit.r_squared >= 0.99, "r2 " + fmt(fit.r_squared));
    c.note("alpha " + fmt(fit.alpha) + ", r2 " + fmt(fit.r_squared));
    return out;
}

// --- criterion 5: the lp oracle is certified --------------------------------
Outcome criterion5() {
    Outcome out;
    Check c{out};
    const Cmdp paradox = paradoxical_cmdp();
    const auto sp = solve_cmdp_lp(paradox);
    c.require(std::abs(sp.primal_value - 0.5) <= 1e-8, "primal " + fmt(sp.primal_value));
    c.require(std::abs(sp.mu_star.mu[0] - 1.0) <= 1e-6, "mu* " + fmt(sp.mu_star.mu[0]));
    const auto bf = brute_force_verify(paradox, 1000);
    c.require(std::abs(bf.primal_value - sp.primal_value) <= 2e-3,
              "brute force gap " + fmt(std::abs(bf.primal_value - sp.primal_value)));

    SplitMix64 rng(501);
    for (int i = 0; i < 20; ++i) {
        const Cmdp m = random_cmdp(600 + static_cast<std::uint64_t>(i), 5, 3, 1 + (i % 2));
        const auto s = solve_cmdp_lp(m);
        if (s.status == SaddleStatus::kInfeasible) {
            c.require(false, "instance " + std::to_string(i) + " infeasible");
            continue;
        }
        c.require(std::abs(s.primal_value - s.dual_value) <= 1e-8,
                  "instance " + std::to_string(i) + " duality gap");
        const double l_star = lagrangian(m, s.d_star, s.mu_star);
        for (int probe = 0; probe < 100; ++probe) {
            Policy pi = Policy::uniform(5, 3);
            for (std::size_t st = 0; st < 5; ++st) {
                const auto row = rng.dirichlet(3);
                for (std::size_t a = 0; a < 3; ++a) pi(st, a) = row[a];
            }
            const auto d = occupancy_from_policy(m, pi);
            bool feasible = true;
            for (std::size_t n = 0; n < m.n_constraints(); ++n)
                if (dot(m.constraint_rewards[n], d.d) > m.thresholds[n]) feasible = false;
            Multipliers mu{Vector(m.n_constraints())};
            for (auto& v : mu.mu) v = 3.0 * rng.next_unit();
            c.require(lagrangian(m, s.d_star, mu) <= l_star + 1e-7, "saddle ineq (mu side)");
            if (feasible)
                c.require(l_star <= lagrangian(m, d, s.mu_star) + 1e-7, "saddle ineq (d side)");
        }
    }
    return out;
}

// --- criterion 6: last-iterate vs average-iterate on the paradoxical cmdp ---
Outcome criterion6() {
    Outcome out;
    Check c{out};
    const Cmdp m = paradoxical_cmdp();
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        SolverConfig cfg;
        cfg.eta_pi = 0.1;
        cfg.eta_mu = 0.02;
        cfg.iterations = 30000;
        cfg.seed = seed;
        cfg.optimism = true;
        const auto opt = reload_mdpi(m, cfg);
        c.require(std::abs(opt.back().values[0] - 0.5) <= 1e-3,
                  "seed " + std::to_string(seed) + " v0 " + fmt(opt.back().values[0]));
        c.require(std::abs(opt.back().mu[0] - 1.0) <= 1e-2,
                  "seed " + std::to_string(seed) + " mu " + fmt(opt.back().mu[0]));

        cfg.optimism = false;
        const auto base = mu_mdpi(m, cfg);
        const double amp = tail_amplitude(series_v0(base), 0.2);
        c.require(amp >= 0.05, "seed " + std::to_string(seed) + " baseline amp " + fmt(amp));
        const auto averaged = extract_averaged_estimate(m, base);
        const double v0bar = dot(m.task_reward, averaged.occupancy.d);
        c.require(std::abs(v0bar - 0.5) <= 1e-2,
                  "seed " + std::to_string(seed) + " averaged v0 " + fmt(v0bar));
    }
    return out;
}

// --- criterion 7: occupancy-space optimism reaches the saddle ---------------
Outcome criterion7() {
    Outcome out;
    Check c{out};
    const Cmdp paradox = paradoxical_cmdp();
    const auto sp = solve_cmdp_lp(paradox);
    SolverConfig cfg;
    cfg.iterations = 2000;
    const auto tr = reload_occupancy(paradox, cfg);
    const double dist = std::hypot(tr.back().values[0] - sp.primal_value,
                                   tr.back().mu[0] - sp.mu_star.mu[0]);
    c.require(dist <= 1e-3, "paradox dist " + fmt(dist));

    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const Cmdp m = random_cmdp(seed, 5, 3, 1);
        const auto s = solve_cmdp_lp(m);
        SolverConfig rc;
        rc.iterations = 4000;
        const auto t = reload_occupancy(m, rc);
        const double d = std::hypot(t.back().values[0] - s.primal_value,
                                    t.back().mu[0] - s.mu_star.mu[0]);
        c.require(d <= 1e-2, "seed " + std::to_string(seed) + " dist " + fmt(d));
    }
    return out;
}

// --- criterion 8: past-extragradient policy iteration converges -------------
Outcome criterion8() {
    Outcome out;
    Check c{out};
    const Cmdp m = paradoxical_cmdp();
    SolverConfig cfg;
    cfg.eta_pi = 0.1;
    cfg.eta_mu = 0.1;
    cfg.iterations = 5000;
    const auto tr = peg_mdpi(m, cfg);
    c.require(std::abs(tr.back().values[0] - 0.5) <= 1e-3, "v0 " + fmt(tr.back().values[0]));
    return out;
}

// --- criterion 9: a fixed optimal multiplier is not a saddle ----------------
Outcome criterion9() {
    Outcome out;
    Check c{out};
    const Cmdp m = paradoxical_cmdp();
    const auto sp = solve_cmdp_lp(m);
    SolverConfig cfg;
    cfg.eta_pi = 0.1;
    cfg.iterations = 2000;
    const auto run_a = fixed_mu_solver(m, sp.mu_star, cfg);
    Policy skew = Policy::uniform(2, 2);
    skew(0, 0) = 0.9;
    skew(0, 1) = 0.1;
    skew(1, 0) = 0.9;
    skew(1, 1) = 0.1;
    cfg.policy_init = skew;
    const auto run_b = fixed_mu_solver(m, sp.mu_star, cfg);
    const double gap = std::abs(run_a.back().values[0] - run_b.back().values[0]);
    c.require(gap >= 0.1, "init dependence only " + fmt(gap));
    c.note("fixed-mu v0: " + fmt(run_a.back().values[0]) + " vs " + fmt(run_b.back().values[0]));

    SolverConfig rc;
    rc.eta_pi = 0.1;
    rc.eta_mu = 0.02;
    rc.iterations = 30000;
    for (std::uint64_t seed : {0ULL, 11ULL, 12ULL}) {
        rc.seed = seed;
        const auto tr = reload_mdpi(m, rc);
        c.require(std::abs(tr.back().values[0] - 0.5) <= 1e-3,
                  "reload init " + std::to_string(seed) + " v0 " + fmt(tr.back().values[0]));
    }
    return out;
}

// --- criterion 10: extreme thresholds remove the tug of war -----------------
Outcome criterion10() {
    Outcome out;
    Check c{out};
    {
        const Cmdp m = with_threshold(paradoxical_cmdp(), 0, 0.0);
        SolverConfig cfg;
        cfg.eta_pi = 0.1;
        cfg.eta_mu = 0.1;
        cfg.iterations = 1000;
        cfg.optimism = false;
        const auto tr = mu_mdpi(m, cfg);
        for (std::size_t k = 0; k + 1 < tr.records.size(); ++k)
            if (tr.records[k + 1].mu[0] < tr.records[k].mu[0] - 1e-12) {
                c.require(false, "mu decreased at step " + std::to_string(k));
                break;
            }
    }
    {
        const Cmdp m = with_threshold(paradoxical_cmdp(), 0, 1.0);
        SolverConfig cfg;
        cfg.eta_pi = 2.0;
        cfg.eta_mu = 0.5;
        cfg.iterations = 1000;
        cfg.optimism = false;
        cfg.mu_init = {1.0};
        const auto tr = mu_mdpi(m, cfg);
        double mn = 1e300;
        for (const auto& rec : tr.records) mn = std::min(mn, rec.mu[0]);
        c.require(mn <= 1e-12, "mu never reached 0 (min " + fmt(mn) + ")");
        Cmdp free = m;
        free.constraint_rewards.clear();
        free.thresholds.clear();
        const double v_free = solve_cmdp_lp(free).primal_value;
        c.require(std::abs(tr.back().values[0] - v_free) <= 1e-3,
                  "final v0 " + fmt(tr.back().values[0]) + " vs free optimum " + fmt(v_free));
    }
    return out;
}

// --- criterion 11: catch at desk scale ---------------------------------------
Outcome criterion11() {
    Outcome out;
    Check c{out};
    const Cmdp m = constrained_catch();
    const double theta = m.thresholds[0];
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SolverConfig cfg;
        cfg.eta_pi = 0.1;
        cfg.eta_mu = 20.0;
        cfg.iterations = 1200;
        cfg.seed = seed;
        cfg.optimism = true;
        const auto opt = reload_mdpi(m, cfg);
        const double v1 = opt.back().values[1];
        c.require(std::abs(v1 - theta) <= 0.1,
                  "seed " + std::to_string(seed) + " |v1-theta| " + fmt(std::abs(v1 - theta)));
        cfg.optimism = false;
        const auto base = mu_mdpi(m, cfg);
        const double amp_opt = tail_amplitude(series_v0(opt), 0.2);
        const double amp_base = tail_amplitude(series_v0(base), 0.2);
        c.require(amp_opt <= 0.5 * amp_base, "seed " + std::to_string(seed) + " amp " +
                                                 fmt(amp_opt) + " vs baseline " + fmt(amp_base));
        if (seed == 1)
            c.note("amp " + fmt(amp_opt) + " vs baseline " + fmt(amp_base) + ", |v1-theta| " +
                   fmt(std::abs(v1 - theta)));
    }
    return out;
}

// --- criterion 12: module invariants as property sweeps ----------------------
Outcome criterion12() {
    Outcome out;
    Check c{out};
    SplitMix64 rng(777);

    // Bregman bounds, identity, zero-gradient step, optimistic hint cancel.
    for (int trial = 0; trial < 40; ++trial) {
        const auto u = rng.dirichlet(4);
        const auto v = rng.dirichlet(4);
        for (auto geom :
             {BregmanGeometry::euclidean_simplex(), BregmanGeometry::entropy_simplex()}) {
            double sq = 0.0;
            for (std::size_t i = 0; i < 4; ++i) sq += (u[i] - v[i]) * (u[i] - v[i]);
            c.require(bregman_divergence(geom, u, u) <= 1e-12, "D(u;u) != 0");
            c.require(bregman_divergence(geom, u, v) >= 0.5 * sq - 1e-12, "D below 0.5|u-v|^2");
            const auto fix = md_step(geom, u, Vector(4, 0.0), 0.5);
            for (std::size_t i = 0; i < 4; ++i)
                c.require(std::abs(fix[i] - u[i]) <= 1e-12, "zero-grad step moved");
            Vector g(4);
            for (auto& e : g) e = 2.0 * rng.next_unit() - 1.0;
            const auto a = omd_step(geom, u, g, g, 0.3, 0.3);
            const auto b = md_step(geom, u, g, 0.3);
            for (std::size_t i = 0; i < 4; ++i)
                c.require(std::abs(a[i] - b[i]) <= 1e-14, "hint did not cancel");
        }
    }

    // Simultaneity: the recorded gda run is the textbook two-variable recursion.
    {
        const auto tr = xy_run(GameAlgo::kGda, 0.1, 100);
        double x = 1.0, y = 1.0;
        for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
            c.require(std::abs(tr.iterates[k].x[0] - x) <= 1e-14 * std::max(1.0, std::abs(x)),
                      "gda recursion x");
            c.require(std::abs(tr.iterates[k].y[0] - y) <= 1e-14 * std::max(1.0, std::abs(y)),
                      "gda recursion y");
            const double xn = x - 0.1 * y, yn = y + 0.1 * x;
            x = xn;
            y = yn;
        }
    }

    // Convergence split across the algorithm family at eta = 0.1.
    for (auto algo : {GameAlgo::kOgda, GameAlgo::kEg, GameAlgo::kPeg, GameAlgo::kRg}) {
        const auto tr = xy_run(algo, 0.1, 10000);
        c.require(tr.diagnostics.at("norm").back() <= 1e-3, "extragradient variant stalled");
    }
    c.require(tail_min(xy_run(GameAlgo::kGda, 0.1, 10000).diagnostics.at("norm"), 1000) >=
                  std::sqrt(2.0),
              "gda tail fell");
    c.require(tail_min(xy_run(GameAlgo::kSinglyOptimistic, 0.1, 10000).diagnostics.at("norm"),
                       1000) >= 0.1,
              "singly tail fell");

    // Spectrum strictly above one on the log grid, exactly one at zero.
    for (int i = 0; i < 50; ++i) {
        const double eta =
            std::pow(10.0, -3.0 + (std::log10(0.5) + 3.0) * static_cast<double>(i) / 49.0);
        c.require(singly_optimistic_spectral_radius(eta) > 1.0, "rho(eta) <= 1");
    }
    c.require(std::abs(singly_optimistic_spectral_radius(0.0) - 1.0) <= 1e-9, "rho(0) != 1");

    // Strong monotonicity rate fit.
    {
        const auto fit = fit_linear_rate(xy_run(GameAlgo::kOgda, 0.2, 200, 0.5).diagnostics.at("norm"));
        c.require(fit.alpha > 1.0 && fit.r_squared >= 0.99, "rate fit");
    }

    // Occupancy/value duality at 1e-9 over 50 random policies.
    for (int i = 0; i < 5; ++i) {
        const Cmdp m = random_cmdp(850 + static_cast<std::uint64_t>(i), 4, 3, 1);
        for (int t = 0; t < 10; ++t) {
            Policy pi = Policy::uniform(4, 3);
            for (std::size_t s = 0; s < 4; ++s) {
                const auto row = rng.dirichlet(3);
                for (std::size_t a = 0; a < 3; ++a) pi(s, a) = row[a];
            }
            const auto ev = evaluate_policy(m, pi);
            for (std::size_t n = 0; n <= 1; ++n) {
                Vector v(4, 0.0);
                for (std::size_t s = 0; s < 4; ++s)
                    for (std::size_t a = 0; a < 3; ++a) v[s] += pi(s, a) * ev.q[n].q[s * 3 + a];
                const double lhs = ev.values[n];
                const double rhs = (1.0 - m.discount) * dot(m.initial_dist, v);
                c.require(std::abs(lhs - rhs) <= 1e-9, "value duality");
            }
            const FlowSystem flow(m);
            c.require(flow.residual_norm(ev.occupancy.d) <= 1e-9, "flow residual");
            c.require(std::abs(ev.occupancy.mass() - 1.0) <= 1e-9, "occupancy mass");
        }
    }

    // Projection idempotence and nonexpansiveness.
    {
        const Cmdp m = random_cmdp(860, 4, 2, 0);
        const FlowSystem flow(m);
        for (int t = 0; t < 10; ++t) {
            Vector z1(m.sa_size()), z2(m.sa_size());
            for (auto& v : z1) v = rng.next_unit() - 0.3;
            for (auto& v : z2) v = rng.next_unit() - 0.3;
            const auto p1 = project_onto_K(flow, z1);
            const auto p2 = project_onto_K(flow, z2);
            const auto q1 = project_onto_K(flow, p1.d);
            double dp = 0.0, dz = 0.0, di = 0.0;
            for (std::size_t i = 0; i < z1.size(); ++i) {
                dp += (p1.d[i] - p2.d[i]) * (p1.d[i] - p2.d[i]);
                dz += (z1[i] - z2[i]) * (z1[i] - z2[i]);
                di += (q1.d[i] - p1.d[i]) * (q1.d[i] - p1.d[i]);
            }
            c.require(std::sqrt(di) <= 2e-8, "projection not idempotent");
            c.require(std::sqrt(dp) <= std::sqrt(dz) + 1e-8, "projection expanded");
        }
    }

    // Mixing linearity and gradient identities at the stated tolerances.
    {
        const Cmdp m = random_cmdp(870, 4, 2, 2);
        Policy pi = Policy::uniform(4, 2);
        const Multipliers mu{{0.6, 0.9}};
        const auto ev = evaluate_policy(m, pi);
        Cmdp scalar = m;
        scalar.task_reward = mixed_reward(m, mu);
        scalar.constraint_rewards.clear();
        scalar.thresholds.clear();
        const auto direct = policy_eval(scalar, pi, 0);
        const auto mixed = mixed_q(ev.q[0], {ev.q[1], ev.q[2]}, mu);
        for (std::size_t i = 0; i < mixed.size(); ++i)
            c.require(std::abs(direct.q[i] - mixed[i]) <= 1e-9, "mixing linearity");

        auto occ = ev.occupancy;
        const auto grad = mixed_reward(m, mu);
        const double h = 1e-6;
        for (std::size_t i = 0; i < occ.d.size(); ++i) {
            auto hi = occ, lo = occ;
            hi.d[i] += h;
            lo.d[i] -= h;
            const double fd = (lagrangian(m, hi, mu) - lagrangian(m, lo, mu)) / (2.0 * h);
            c.require(std::abs(fd - grad[i]) <= 1e-5 * std::max(1.0, std::abs(grad[i])),
                      "d-gradient identity");
        }
        for (std::size_t n = 0; n < 2; ++n) {
            Multipliers hi = mu, lo = mu;
            hi.mu[n] += h;
            lo.mu[n] -= h;
            const double fd = (lagrangian(m, occ, hi) - lagrangian(m, occ, lo)) / (2.0 * h);
            const double expect = dot(m.constraint_rewards[n], occ.d) - m.thresholds[n];
            c.require(std::abs(fd - expect) <= 1e-5 * std::max(1.0, std::abs(expect)),
                      "mu-gradient identity");
        }
    }

    // LP certificates and lp-vs-brute agreement on small instances.
    for (std::uint64_t seed : {880ULL, 881ULL, 882ULL}) {
        const Cmdp m = random_cmdp(seed, 3, 2, 1);
        const auto lp = solve_cmdp_lp(m);
        c.require(lp.dual_infeasibility <= 1e-9, "reduced costs");
        c.require(std::abs(lp.primal_value - lp.dual_value) <= 1e-8, "duality gap");
        const auto bf = brute_force_verify(m, 120);
        c.require(std::abs(lp.primal_value - bf.primal_value) <= 2.0 / 120.0, "brute force gap");
    }

    // Solver trace hygiene: stochastic rows, capped multipliers, value match.
    {
        const Cmdp m = paradoxical_cmdp();
        SolverConfig cfg;
        cfg.iterations = 500;
        cfg.seed = 3;
        cfg.mu_cap = 2.5;
        const auto tr = reload_mdpi(m, cfg);
        for (const auto& rec : tr.records) {
            rec.policy.validate();
            for (double v : rec.mu) c.require(v >= 0.0 && v <= 2.5, "mu out of range");
            c.require(std::abs(value_of(m, rec.policy, 0) - rec.values[0]) <= 1e-9,
                      "trace values inconsistent");
        }
        // Optimistic damping beats the baseline on window amplitudes.
        SolverConfig wcfg;
        wcfg.eta_pi = 1.0;
        wcfg.eta_mu = 0.1;
        wcfg.iterations = 1000;
        wcfg.mu_init = {1.3};
        const auto damp = series_v0(reload_mdpi(m, wcfg));
        wcfg.optimism = false;
        const auto orbit = series_v0(mu_mdpi(m, wcfg));
        bool decreasing = true;
        for (int w = 0; w + 1 < 5; ++w) {
            auto amp_in = [&](const Vector& s, int i) {
                double lo = s[static_cast<std::size_t>(i) * 200], hi = lo;
                for (std::size_t k = static_cast<std::size_t>(i) * 200;
                     k < static_cast<std::size_t>(i + 1) * 200; ++k) {
                    lo = std::min(lo, s[k]);
                    hi = std::max(hi, s[k]);
                }
                return hi - lo;
            };
            if (!(amp_in(damp, w + 1) < amp_in(damp, w))) decreasing = false;
            c.require(amp_in(orbit, w) > 0.05, "baseline window collapsed");
        }
        c.require(decreasing, "optimistic window amplitudes not strictly decreasing");
    }

    // Metric invariants.
    for (int t = 0; t < 50; ++t) {
        const double v0 = 2.0 * rng.next_unit() - 1.0;
        const Vector vc{rng.next_unit()};
        const Vector th{rng.next_unit()};
        const Vector w{2.0 * rng.next_unit()};
        c.require(weighted_reward(v0, vc, th, w) <= v0 + 1e-15, "weighted above v0");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries = {
        {1, "gda distance recursion", criterion1},
        {2, "xy game: ogda converges, gda diverges, one-sided optimism cycles", criterion2},
        {3, "one-optimistic-player spectral radius exceeds one", criterion3},
        {4, "strongly monotone ogda has a linear rate", criterion4},
        {5, "lp oracle certificates and brute-force agreement", criterion5},
        {6, "paradoxical cmdp: last-iterate vs average-iterate", criterion6},
        {7, "occupancy-space optimism reaches the saddle", criterion7},
        {8, "past-extragradient policy iteration converges", criterion8},
        {9, "fixed optimal multiplier is initialization-dependent", criterion9},
        {10, "extreme thresholds give one-sided multiplier dynamics", criterion10},
        {11, "constrained catch: optimism halves the oscillation", criterion11},
        {12, "module invariant property sweeps", criterion12},
    };
    int failures = 0;
    for (const auto& e : entries) {
        if (only != 0 && e.id != only) continue;
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out.pass = false;
            out.detail = std::string("exception: ") + ex.what();
        }
        if (!out.pass) ++failures;
        std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << e.id << ": " << e.name;
        if (!out.detail.empty()) std::cout << " (" << out.detail << ")";
        std::cout << std::endl;
    }
    return failures;
}
