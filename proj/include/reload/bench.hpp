#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reload/envs.hpp"
#include "reload/errors.hpp"
#include "reload/games.hpp"
#include "reload/metrics.hpp"
#include "reload/oracle.hpp"
#include "reload/solvers.hpp"

namespace reload {

/// One experiment: an environment, a solver, a base configuration, and the
/// seed list. Each seed draws its own initial policy.
struct RunConfig {
    std::string env = "paradox";
    std::map<std::string, double> env_params;
    std::string solver = "reload-mdpi";
    SolverConfig base;
    bool use_oracle = false;
    Vector mu_star;  // fixed-mu weights when no oracle is requested
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir;  // empty: no files written
    double lic_tol = 1e-3;
    double aic_tol = 1e-2;  // averaged iterates settle to an O(eta) bias

    void validate() const {
        base.validate();
        if (seeds.empty()) throw validation_error("run config: seeds must be nonempty");
        static const char* known[] = {"reload-mdpi", "mu-mdpi", "peg-mdpi", "reload-occ",
                                      "fixed-mu"};
        for (const char* k : known)
            if (solver == k) return;
        throw validation_error("run config: unknown solver " + solver);
    }
};

struct SeedReport {
    std::uint64_t seed = 0;
    Vector final_values;
    Vector final_mu;
    Vector v0_series;
    Vector dist_series;  // empty without an oracle
    double tail_osc_amplitude = 0.0;
    bool diagnosed = false;  // verdicts need at least 100 records
    LicVerdict lic;
    LicVerdict aic;
    double fitted_alpha = std::numeric_limits<double>::quiet_NaN();
    std::string error;  // nonempty when this seed failed
    CmdpTrace trace;
};

struct ConvergenceReport {
    std::vector<SeedReport> per_seed;
    std::optional<SaddlePoint> saddle;
    Vector mean_final_values, stderr_final_values;
    Vector mean_final_mu, stderr_final_mu;
};

/// Mean of the time-averaged multipliers of the baseline traces. Averaging
/// over iterates is what the average-iterate guarantee certifies; final
/// iterates of an orbiting baseline sit at an arbitrary phase of the cycle.
inline Multipliers estimate_mu_star_empirical(const std::vector<CmdpTrace>& traces) {
    if (traces.empty()) throw validation_error("estimate_mu_star_empirical: no traces");
    const std::size_t n = traces[0].records.empty() ? 0 : traces[0].records[0].mu.size();
    Vector acc(n, 0.0);
    for (const auto& t : traces) {
        if (t.records.empty() || t.records[0].mu.size() != n)
            throw validation_error("estimate_mu_star_empirical: inconsistent traces");
        Vector mean(n, 0.0);
        for (const auto& rec : t.records)
            for (std::size_t i = 0; i < n; ++i) mean[i] += rec.mu[i];
        for (std::size_t i = 0; i < n; ++i)
            acc[i] += mean[i] / static_cast<double>(t.records.size());
    }
    for (auto& v : acc) v /= static_cast<double>(traces.size());
    return Multipliers{acc};
}

namespace detail {

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw validation_error("cannot open for writing: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

inline CmdpTrace dispatch_solver(const std::string& name, const Cmdp& env, SolverConfig cfg,
                                 const Vector& mu_star) {
    if (name == "reload-mdpi") {
        cfg.optimism = true;
        return reload_mdpi(env, cfg);
    }
    if (name == "mu-mdpi") {
        cfg.optimism = false;
        return mu_mdpi(env, cfg);
    }
    if (name == "peg-mdpi") return peg_mdpi(env, cfg);
    if (name == "reload-occ") return reload_occupancy(env, cfg);
    if (name == "fixed-mu") return fixed_mu_solver(env, Multipliers{mu_star}, cfg);
    throw validation_error("unknown solver: " + name);
}

inline std::string trace_csv(const Cmdp& env, const CmdpTrace& trace, const Vector& dist) {
    const std::size_t N = env.n_constraints();
    std::ostringstream out;
    out << "iter";
    for (std::size_t n = 0; n <= N; ++n) out << ",v" << n;
    for (std::size_t n = 1; n <= N; ++n) out << ",mu" << n;
    out << ",lagrangian,dist_to_saddle\n";
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& rec = trace.records[i];
        out << rec.iter;
        for (double v : rec.values) out << ',' << format_g17(v);
        for (double v : rec.mu) out << ',' << format_g17(v);
        out << ',' << format_g17(rec.lagrangian) << ','
            << format_g17(dist.empty() ? std::numeric_limits<double>::quiet_NaN() : dist[i])
            << '\n';
    }
    return out.str();
}

/// Minimal self-contained line chart: one polyline per series plus axes.
inline std::string svg_line_chart(const std::vector<std::pair<std::string, Vector>>& series,
                                  const std::vector<Vector>& xs, const std::string& title,
                                  std::optional<double> hline = std::nullopt) {
    const double W = 760, H = 420, L = 64, R = 16, T = 34, B = 40;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (std::size_t k = 0; k < series.size(); ++k)
        for (std::size_t i = 0; i < series[k].second.size(); ++i) {
            const double x = xs[k][i], y = series[k].second[i];
            if (!std::isfinite(y)) continue;
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (hline) {
        ymin = std::min(ymin, *hline);
        ymax = std::max(ymax, *hline);
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0;
        const double yv = ymin + (ymax - ymin) * k / 4.0;
        s << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16
          << "\" text-anchor=\"middle\" font-size=\"10\">" << format_g17(std::round(xv))
          << "</text>\n";
        char lab[32];
        std::snprintf(lab, sizeof(lab), "%.3g", yv);
        s << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 3
          << "\" text-anchor=\"end\" font-size=\"10\">" << lab << "</text>\n";
    }
    if (hline)
        s << "<line x1=\"" << L << "\" y1=\"" << py(*hline) << "\" x2=\"" << W - R << "\" y2=\""
          << py(*hline) << "\" stroke=\"#555\" stroke-dasharray=\"5,4\"/>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        s << "<polyline fill=\"none\" stroke=\"" << palette[k % 8] << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < series[k].second.size(); ++i) {
            if (!std::isfinite(series[k].second[i])) continue;
            s << px(xs[k][i]) << ',' << py(series[k].second[i]) << ' ';
        }
        s << "\"/>\n";
        s << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (static_cast<double>(k) + 1)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << palette[k % 8] << "\">"
          << series[k].first << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace detail

/// Runs the configured solver for every seed, computes the oracle once when
/// requested, and aggregates diagnostics (mean and one standard error across
/// seeds). Per-seed failures are recorded without aborting the other seeds.
inline ConvergenceReport run_experiment(const RunConfig& cfg) {
    cfg.validate();
    const Cmdp env = make_env(cfg.env, cfg.env_params);
    ConvergenceReport report;
    Vector mu_star = cfg.mu_star;
    if (cfg.use_oracle) {
        try {
            report.saddle = solve_cmdp_lp(env);
        } catch (const std::exception& e) {
            throw oracle_error(std::string("oracle failed: ") + e.what());
        }
        if (report.saddle->status == SaddleStatus::kInfeasible)
            throw oracle_error("oracle: CMDP is infeasible");
        if (mu_star.empty()) mu_star = report.saddle->mu_star.mu;
    }
    if (cfg.solver == "fixed-mu" && mu_star.empty())
        throw validation_error("fixed-mu needs --oracle or explicit multipliers");

    // Seeds are independent; fan out and join in seed order.
    std::vector<std::future<SeedReport>> futures;
    futures.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
        futures.push_back(std::async(std::launch::async, [&, seed]() {
            SeedReport rep;
            rep.seed = seed;
            try {
                SolverConfig sc = cfg.base;
                sc.seed = seed;
                rep.trace = detail::dispatch_solver(cfg.solver, env, sc, mu_star);
                rep.final_values = rep.trace.back().values;
                rep.final_mu = rep.trace.back().mu;
                for (const auto& rec : rep.trace.records) rep.v0_series.push_back(rec.values[0]);
                if (report.saddle)
                    rep.dist_series = distance_to_saddle(rep.trace, *report.saddle, env);
                const Vector& series = rep.dist_series.empty() ? rep.v0_series : rep.dist_series;
                rep.tail_osc_amplitude = tail_amplitude(rep.v0_series, 0.2);
                if (static_cast<double>(series.size()) >= 100.0) {
                    rep.diagnosed = true;
                    rep.lic = lic_diagnostic(series, 0.1, cfg.lic_tol);
                    if (rep.dist_series.empty()) rep.lic.converged = rep.lic.amplitude <= cfg.lic_tol;
                    // Average-iterate verdict: distance of the running-mean
                    // iterate (values and multipliers average linearly in the
                    // occupancy), not the mean of the distances.
                    const std::size_t n_rec = rep.trace.records.size();
                    CmdpTrace averaged;
                    averaged.stride = rep.trace.stride;
                    Vector vacc(rep.trace.records[0].values.size(), 0.0);
                    Vector macc(rep.trace.records[0].mu.size(), 0.0);
                    for (std::size_t i = 0; i < n_rec; ++i) {
                        const auto& rec = rep.trace.records[i];
                        for (std::size_t j = 0; j < vacc.size(); ++j) vacc[j] += rec.values[j];
                        for (std::size_t j = 0; j < macc.size(); ++j) macc[j] += rec.mu[j];
                        CmdpRecord mean;
                        mean.iter = rec.iter;
                        mean.values = vacc;
                        mean.mu = macc;
                        const double inv = 1.0 / static_cast<double>(i + 1);
                        for (auto& v : mean.values) v *= inv;
                        for (auto& v : mean.mu) v *= inv;
                        averaged.records.push_back(std::move(mean));
                    }
                    if (report.saddle) {
                        rep.aic = lic_diagnostic(distance_to_saddle(averaged, *report.saddle, env),
                                                 0.1, cfg.aic_tol);
                    } else {
                        Vector avg_v0(n_rec);
                        for (std::size_t i = 0; i < n_rec; ++i)
                            avg_v0[i] = averaged.records[i].values[0];
                        rep.aic = lic_diagnostic(avg_v0, 0.1, cfg.aic_tol);
                        rep.aic.converged = rep.aic.amplitude <= cfg.aic_tol;
                    }
                }
                if (!rep.dist_series.empty() && rep.dist_series.size() >= 10) {
                    bool positive = true;
                    for (double d : rep.dist_series)
                        if (!(d > 0.0)) positive = false;
                    if (positive) rep.fitted_alpha = fit_linear_rate(rep.dist_series).alpha;
                }
            } catch (const std::exception& e) {
                rep.error = e.what();
            }
            return rep;
        }));
    }
    for (auto& f : futures) report.per_seed.push_back(f.get());

    std::size_t ok = 0;
    for (const auto& rep : report.per_seed)
        if (rep.error.empty()) ++ok;
    if (ok == 0) throw solver_error("run_experiment: every seed failed");

    const std::size_t nv = env.n_constraints() + 1, nm = env.n_constraints();
    auto aggregate = [&](auto pick, std::size_t width, Vector& mean, Vector& se) {
        mean.assign(width, 0.0);
        se.assign(width, 0.0);
        for (const auto& rep : report.per_seed) {
            if (!rep.error.empty()) continue;
            for (std::size_t i = 0; i < width; ++i) mean[i] += pick(rep)[i];
        }
        for (auto& v : mean) v /= static_cast<double>(ok);
        if (ok > 1) {
            for (const auto& rep : report.per_seed) {
                if (!rep.error.empty()) continue;
                for (std::size_t i = 0; i < width; ++i) {
                    const double d = pick(rep)[i] - mean[i];
                    se[i] += d * d;
                }
            }
            for (auto& v : se)
                v = std::sqrt(v / static_cast<double>(ok - 1)) /
                    std::sqrt(static_cast<double>(ok));
        }
    };
    aggregate([](const SeedReport& r) -> const Vector& { return r.final_values; }, nv,
              report.mean_final_values, report.stderr_final_values);
    if (nm > 0)
        aggregate([](const SeedReport& r) -> const Vector& { return r.final_mu; }, nm,
                  report.mean_final_mu, report.stderr_final_mu);

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        detail::write_file_atomic((fs::path(cfg.out_dir) / "cmdp.json").string(),
                                  cmdp_to_json(env).dump(2) + "\n");
        for (const auto& rep : report.per_seed) {
            if (!rep.error.empty()) continue;
            detail::write_file_atomic(
                (fs::path(cfg.out_dir) / ("seed_" + std::to_string(rep.seed) + ".csv")).string(),
                detail::trace_csv(env, rep.trace, rep.dist_series));
        }
        // Multiplier weights for the weighted reward: oracle when available,
        // otherwise the empirical time-average of this run's own traces. Both
        // the raw-mu and the exp(mu) (sigmoid-bounded) conventions get a column.
        Vector mu_hat_raw = mu_star.size() == nm ? mu_star : Vector{};
        if (mu_hat_raw.empty() && nm > 0) {
            std::vector<CmdpTrace> ok_traces;
            for (const auto& rep : report.per_seed)
                if (rep.error.empty()) ok_traces.push_back(rep.trace);
            if (!ok_traces.empty()) mu_hat_raw = estimate_mu_star_empirical(ok_traces).mu;
        }
        Vector mu_hat_exp(mu_hat_raw.size());
        for (std::size_t n = 0; n < mu_hat_raw.size(); ++n)
            mu_hat_exp[n] = mu_hat_from_sigmoid_bounded(mu_hat_raw[n]);

        std::ostringstream sum;
        sum << "seed";
        for (std::size_t n = 0; n < nv; ++n) sum << ",v" << n;
        for (std::size_t n = 1; n <= nm; ++n) sum << ",mu" << n;
        sum << ",tail_amplitude,lic,aic,fitted_alpha,weighted_reward_raw_mu,"
               "weighted_reward_exp_mu,error\n";
        for (const auto& rep : report.per_seed) {
            sum << rep.seed;
            if (rep.error.empty()) {
                for (double v : rep.final_values) sum << ',' << detail::format_g17(v);
                for (double v : rep.final_mu) sum << ',' << detail::format_g17(v);
                const Vector vc(rep.final_values.begin() + 1, rep.final_values.end());
                const char* lic_label =
                    !rep.diagnosed ? "short" : rep.lic.converged ? "converged" : "oscillating";
                const char* aic_label =
                    !rep.diagnosed ? "short" : rep.aic.converged ? "converged" : "oscillating";
                sum << ',' << detail::format_g17(rep.tail_osc_amplitude) << ',' << lic_label << ','
                    << aic_label << ','
                    << detail::format_g17(rep.fitted_alpha) << ','
                    << detail::format_g17(
                           weighted_reward(rep.final_values[0], vc, env.thresholds, mu_hat_raw))
                    << ','
                    << detail::format_g17(
                           weighted_reward(rep.final_values[0], vc, env.thresholds, mu_hat_exp))
                    << ',' << '\n';
            } else {
                for (std::size_t i = 0; i < nv + nm + 4; ++i) sum << ',';
                sum << ",\"" << rep.error << "\"\n";
            }
        }
        sum << "mean";
        for (double v : report.mean_final_values) sum << ',' << detail::format_g17(v);
        for (double v : report.mean_final_mu) sum << ',' << detail::format_g17(v);
        sum << ",,,,,,\nstderr";
        for (double v : report.stderr_final_values) sum << ',' << detail::format_g17(v);
        for (double v : report.stderr_final_mu) sum << ',' << detail::format_g17(v);
        sum << ",,,,,,\n";
        detail::write_file_atomic((fs::path(cfg.out_dir) / "summary.csv").string(), sum.str());

        std::vector<std::pair<std::string, Vector>> series;
        std::vector<Vector> xs;
        for (const auto& rep : report.per_seed) {
            if (!rep.error.empty()) continue;
            series.push_back({"seed " + std::to_string(rep.seed), rep.v0_series});
            Vector x;
            for (const auto& rec : rep.trace.records) x.push_back(static_cast<double>(rec.iter));
            xs.push_back(std::move(x));
        }
        std::optional<double> target;
        if (report.saddle) target = report.saddle->primal_value;
        detail::write_file_atomic(
            (fs::path(cfg.out_dir) / "v0.svg").string(),
            detail::svg_line_chart(series, xs, cfg.env + " / " + cfg.solver + ": task value",
                                   target));
        if (report.saddle)
            detail::write_file_atomic((fs::path(cfg.out_dir) / "saddle.json").string(),
                                      saddle_to_json(*report.saddle).dump(2) + "\n");
    }
    return report;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        cfg.env = j.value("env", cfg.env);
        if (j.contains("env_params"))
            for (auto it = j["env_params"].begin(); it != j["env_params"].end(); ++it)
                cfg.env_params[it.key()] = it.value().get<double>();
        cfg.solver = j.value("solver", cfg.solver);
        cfg.base.eta_pi = j.value("eta_pi", cfg.base.eta_pi);
        cfg.base.eta_mu = j.value("eta_mu", cfg.base.eta_mu);
        cfg.base.iterations = j.value("iterations", cfg.base.iterations);
        cfg.base.stride = j.value("stride", cfg.base.stride);
        cfg.base.mu_cap = j.value("mu_cap", cfg.base.mu_cap);
        if (j.contains("mu_init")) cfg.base.mu_init = j["mu_init"].get<Vector>();
        cfg.use_oracle = j.value("oracle", cfg.use_oracle);
        if (j.contains("mu_star")) cfg.mu_star = j["mu_star"].get<Vector>();
        if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        cfg.out_dir = j.value("out", cfg.out_dir);
        cfg.lic_tol = j.value("lic_tol", cfg.lic_tol);
        cfg.aic_tol = j.value("aic_tol", cfg.aic_tol);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("run config json: ") + e.what());
    }
    return cfg;
}

}  // namespace reload
