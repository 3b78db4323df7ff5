// Command-line front end: bilinear game runs, CMDP solver runs with optional
// LP oracle diagnostics, and batch sweeps from a JSON config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reload/reload.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitOracle = 4;

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
    }
    if (seeds.empty()) throw reload::validation_error("--seeds: no seeds given");
    return seeds;
}

void run_game(const std::string& alg, double eta, std::size_t iters, double m,
              std::size_t stride, const std::string& out_dir) {
    using namespace reload;
    BilinearGame game = BilinearGame::xy();
    game.strong_monotonicity = m;
    GamePoint init{{1.0}, {1.0}};
    if (alg == "mwu" || alg == "omwu") {
        game.x_geom = BregmanGeometry::entropy_simplex();
        game.y_geom = BregmanGeometry::entropy_simplex();
        game.payoff = Matrix(2, 2);  // matching pennies
        game.payoff(0, 0) = 1.0;
        game.payoff(0, 1) = -1.0;
        game.payoff(1, 0) = -1.0;
        game.payoff(1, 1) = 1.0;
        init = {{0.6, 0.4}, {0.4, 0.6}};
    }
    const auto trace = solve_game(game, parse_game_algo(alg), StepSchedule::constant(eta), init,
                                  iters, stride);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "iter";
    for (std::size_t i = 0; i < trace.iterates[0].x.size(); ++i) csv << ",x" << i;
    for (std::size_t i = 0; i < trace.iterates[0].y.size(); ++i) csv << ",y" << i;
    csv << ",norm,objective\n";
    const auto& norms = trace.diagnostics.at("norm");
    const auto& objs = trace.diagnostics.at("objective");
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        csv << (k == 0 ? 0 : std::min((k - 1 + 1) * stride, iters));
        for (double v : trace.iterates[k].x) csv << ',' << reload::detail::format_g17(v);
        for (double v : trace.iterates[k].y) csv << ',' << reload::detail::format_g17(v);
        csv << ',' << reload::detail::format_g17(norms[k]) << ','
            << reload::detail::format_g17(objs[k]) << '\n';
    }
    reload::detail::write_file_atomic((fs::path(out_dir) / "trace.csv").string(), csv.str());
    std::vector<reload::Vector> xs(1);
    for (std::size_t k = 0; k < norms.size(); ++k)
        xs[0].push_back(static_cast<double>(k == 0 ? 0 : std::min(k * stride, iters)));
    reload::detail::write_file_atomic(
        (fs::path(out_dir) / "norm.svg").string(),
        reload::detail::svg_line_chart({{alg + " |(x,y)|", norms}}, xs,
                                       "xy game: distance from the saddle", 0.0));
    std::cout << alg << ": final norm " << norms.back() << " after " << iters << " iterations\n";
}

void print_report(const reload::RunConfig& cfg, const reload::ConvergenceReport& report) {
    std::cout << cfg.env << " / " << cfg.solver << " (" << cfg.seeds.size() << " seeds)\n";
    if (report.saddle) {
        std::cout << "  oracle: v0* = " << report.saddle->primal_value
                  << ", mu* =";
        for (double v : report.saddle->mu_star.mu) std::cout << ' ' << v;
        if (report.saddle->degenerate) std::cout << "  [degenerate vertex]";
        std::cout << '\n';
    }
    for (const auto& rep : report.per_seed) {
        std::cout << "  seed " << rep.seed << ": ";
        if (!rep.error.empty()) {
            std::cout << "FAILED: " << rep.error << '\n';
            continue;
        }
        std::cout << "v0 = " << rep.final_values[0] << ", mu =";
        for (double v : rep.final_mu) std::cout << ' ' << v;
        std::cout << ", tail amp = " << rep.tail_osc_amplitude
                  << (!rep.diagnosed      ? ""
                      : rep.lic.converged ? " [LIC]"
                                          : " [oscillating]")
                  << '\n';
    }
    std::cout << "  mean final v0 = " << report.mean_final_values[0] << " +/- "
              << (report.stderr_final_values.empty() ? 0.0 : report.stderr_final_values[0])
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimistic primal-dual solvers for constrained MDPs"};
    app.require_subcommand(1);

    auto* game = app.add_subcommand("game", "Run a bilinear-game algorithm on the xy game");
    std::string g_alg = "ogda", g_out = "out/game";
    double g_eta = 0.1, g_m = 0.0;
    std::size_t g_iters = 10000, g_stride = 1;
    game->add_option("--alg", g_alg, "gda|ogda|mwu|omwu|eg|peg|rg|singly");
    game->add_option("--eta", g_eta, "step size");
    game->add_option("--iters", g_iters, "iteration count");
    game->add_option("--m", g_m, "strong monotonicity modulus");
    game->add_option("--stride", g_stride, "recording stride");
    game->add_option("--out", g_out, "output directory");

    auto* cmdp = app.add_subcommand("cmdp", "Run a CMDP saddle-point solver");
    std::string c_env = "paradox", c_solver = "reload-mdpi", c_out = "out/cmdp", c_seeds = "1";
    std::vector<std::string> c_env_params;
    std::vector<double> c_mu_star;
    double c_eta_pi = 0.1, c_eta_mu = 0.1, c_lic_tol = 1e-3, c_mu_cap = 100.0;
    std::size_t c_iters = 5000, c_stride = 1;
    bool c_oracle = false;
    cmdp->add_option("--env", c_env, "paradox|catch|random");
    cmdp->add_option("--env-param", c_env_params, "environment parameter key=value")
        ->take_all();
    cmdp->add_option("--solver", c_solver, "reload-mdpi|mu-mdpi|peg-mdpi|reload-occ|fixed-mu");
    cmdp->add_option("--eta-pi", c_eta_pi, "policy temperature");
    cmdp->add_option("--eta-mu", c_eta_mu, "multiplier step size");
    cmdp->add_option("--iters", c_iters, "iteration count");
    cmdp->add_option("--stride", c_stride, "recording stride");
    cmdp->add_option("--seeds", c_seeds, "comma-separated seed list");
    cmdp->add_option("--mu-cap", c_mu_cap, "multiplier projection cap");
    cmdp->add_option("--mu-star", c_mu_star, "fixed multipliers for fixed-mu")->take_all();
    cmdp->add_option("--lic-tol", c_lic_tol, "last-iterate verdict tolerance");
    cmdp->add_flag("--oracle", c_oracle, "solve the LP oracle and report distances");
    cmdp->add_option("--out", c_out, "output directory");

    auto* sweep = app.add_subcommand("sweep", "Run a batch of experiments from a JSON config");
    std::string s_config;
    sweep->add_option("--config", s_config, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (game->parsed()) {
            run_game(g_alg, g_eta, g_iters, g_m, g_stride, g_out);
        } else if (cmdp->parsed()) {
            reload::RunConfig cfg;
            cfg.env = c_env;
            for (const auto& kv : c_env_params) {
                const auto pos = kv.find('=');
                if (pos == std::string::npos)
                    throw reload::validation_error("--env-param expects key=value: " + kv);
                cfg.env_params[kv.substr(0, pos)] = std::stod(kv.substr(pos + 1));
            }
            cfg.solver = c_solver;
            cfg.base.eta_pi = c_eta_pi;
            cfg.base.eta_mu = c_eta_mu;
            cfg.base.iterations = c_iters;
            cfg.base.stride = c_stride;
            cfg.base.mu_cap = c_mu_cap;
            cfg.use_oracle = c_oracle;
            cfg.mu_star = c_mu_star;
            cfg.seeds = parse_seeds(c_seeds);
            cfg.out_dir = c_out;
            cfg.lic_tol = c_lic_tol;
            print_report(cfg, reload::run_experiment(cfg));
        } else if (sweep->parsed()) {
            std::ifstream in(s_config);
            if (!in) throw reload::validation_error("cannot open config: " + s_config);
            nlohmann::json j;
            in >> j;
            if (!j.contains("runs") || !j["runs"].is_array())
                throw reload::validation_error("sweep config needs a 'runs' array");
            for (const auto& run : j["runs"]) {
                const auto cfg = reload::run_config_from_json(run);
                print_report(cfg, reload::run_experiment(cfg));
            }
        }
    } catch (const reload::validation_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const reload::oracle_error& e) {
        std::cerr << "oracle error: " << e.what() << '\n';
        return kExitOracle;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }
    return 0;
}
