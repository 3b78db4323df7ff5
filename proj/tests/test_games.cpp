#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "reload/games.hpp"

using namespace reload;

namespace {

IterateTrace run_xy(GameAlgo algo, double eta, std::size_t iters, double m = 0.0,
                    std::size_t stride = 1) {
    BilinearGame game = BilinearGame::xy();
    game.strong_monotonicity = m;
    return solve_game(game, algo, StepSchedule::constant(eta), {{1.0}, {1.0}}, iters, stride);
}

/// Oracle for the spectral radius: Durand-Kerner iteration on the cubic
/// l^3 - 2 l^2 + (2 e^2 + 1) l - e^2, independent of the QR path.
double rho_oracle(double eta) {
    using C = std::complex<double>;
    const double t = eta * eta;
    auto p = [&](C z) { return ((z - 2.0) * z + (2.0 * t + 1.0)) * z - t; };
    C r[3] = {C(0.4, 0.9), C(0.4, 0.9) * C(0.4, 0.9), C(0.4, 0.9) * C(0.4, 0.9) * C(0.4, 0.9)};
    for (int it = 0; it < 200; ++it) {
        for (int i = 0; i < 3; ++i) {
            C denom(1.0, 0.0);
            for (int j = 0; j < 3; ++j)
                if (j != i) denom *= r[i] - r[j];
            r[i] -= p(r[i]) / denom;
        }
    }
    return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

}  // namespace

TEST_CASE("gda on the xy game grows by exactly (1 + eta^2) per step") {
    for (double eta : {0.01, 0.1, 0.5}) {
        const auto tr = run_xy(GameAlgo::kGda, eta, 100);
        for (std::size_t k = 0; k + 1 < tr.iterates.size(); ++k) {
            const double dk = tr.iterates[k].x[0] * tr.iterates[k].x[0] +
                              tr.iterates[k].y[0] * tr.iterates[k].y[0];
            const double dk1 = tr.iterates[k + 1].x[0] * tr.iterates[k + 1].x[0] +
                               tr.iterates[k + 1].y[0] * tr.iterates[k + 1].y[0];
            CHECK(std::abs(dk1 - (1.0 + eta * eta) * dk) <= 1e-12 * dk1);
        }
    }
}

TEST_CASE("solve_game(gda) matches the explicit two-variable recursion") {
    const double eta = 0.1;
    const auto tr = run_xy(GameAlgo::kGda, eta, 200);
    double x = 1.0, y = 1.0;
    for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
        CHECK(std::abs(tr.iterates[k].x[0] - x) <= 1e-14 * std::max(1.0, std::abs(x)));
        CHECK(std::abs(tr.iterates[k].y[0] - y) <= 1e-14 * std::max(1.0, std::abs(y)));
        const double xn = x - eta * y;
        const double yn = y + eta * x;
        x = xn;
        y = yn;
    }
}

TEST_CASE("first optimistic step equals the plain step") {
    const auto ogda = run_xy(GameAlgo::kOgda, 0.1, 1);
    const auto gda = run_xy(GameAlgo::kGda, 0.1, 1);
    CHECK(ogda.iterates[1].x[0] == gda.iterates[1].x[0]);
    CHECK(ogda.iterates[1].y[0] == gda.iterates[1].y[0]);
}

TEST_CASE("single-call and two-call extragradient variants all reach the saddle") {
    for (auto algo : {GameAlgo::kOgda, GameAlgo::kEg, GameAlgo::kPeg, GameAlgo::kRg}) {
        const auto tr = run_xy(algo, 0.1, 10000, 0.0, 100);
        CHECK(tr.diagnostics.at("norm").back() <= 1e-3);
    }
    const auto ogda = run_xy(GameAlgo::kOgda, 0.1, 2000);
    CHECK(ogda.diagnostics.at("norm").back() <= 1e-3);
}

TEST_CASE("gda and the one-optimistic-player dynamics do not converge") {
    const auto gda = run_xy(GameAlgo::kGda, 0.1, 10000, 0.0, 10);
    const auto& gn = gda.diagnostics.at("norm");
    double tail_min = gn.back();
    for (std::size_t i = gn.size() - 100; i < gn.size(); ++i) tail_min = std::min(tail_min, gn[i]);
    CHECK(tail_min >= std::sqrt(2.0));

    const auto singly = run_xy(GameAlgo::kSinglyOptimistic, 0.1, 10000, 0.0, 1);
    const auto& sn = singly.diagnostics.at("norm");
    double smin = sn.back();
    for (std::size_t i = sn.size() - 1000; i < sn.size(); ++i) smin = std::min(smin, sn[i]);
    CHECK(smin >= 0.1);
}

TEST_CASE("trace shape and diagnostics keys") {
    const auto tr = run_xy(GameAlgo::kGda, 0.1, 103, 0.0, 10);
    CHECK(tr.iterates.size() == 12);  // ceil(103 / 10) + 1
    CHECK(tr.diagnostics.at("norm").size() == tr.iterates.size());
    CHECK(tr.diagnostics.at("objective").size() == tr.iterates.size());
    CHECK_THROWS_AS(run_xy(GameAlgo::kGda, 0.1, 0), validation_error);
}

TEST_CASE("average_trace running means") {
    IterateTrace tr;
    tr.stride = 1;
    for (double v : {1.0, -1.0, 1.0, -1.0}) tr.iterates.push_back({{v}, {0.0}});
    const auto avg = average_trace(tr);
    CHECK(avg[0].x[0] == Catch::Approx(1.0));
    CHECK(avg[1].x[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(avg[2].x[0] == Catch::Approx(1.0 / 3.0));
    CHECK(avg[3].x[0] == Catch::Approx(0.0).margin(1e-15));

    IterateTrace constant;
    constant.stride = 1;
    for (int i = 0; i < 5; ++i) constant.iterates.push_back({{2.5}, {2.5}});
    for (const auto& p : average_trace(constant)) CHECK(p.x[0] == 2.5);

    tr.stride = 2;
    CHECK_THROWS_AS(average_trace(tr), validation_error);
}

TEST_CASE("gda averages shrink toward the origin while its last iterates diverge") {
    const auto tr = run_xy(GameAlgo::kGda, 0.02, 3000);
    const auto avg = average_trace(tr);
    const double last = std::hypot(tr.iterates.back().x[0], tr.iterates.back().y[0]);
    const double avg_last = std::hypot(avg.back().x[0], avg.back().y[0]);
    CHECK(last > std::sqrt(2.0));
    CHECK(avg_last < 0.1);
    CHECK(avg_last < std::hypot(avg[avg.size() / 4].x[0], avg[avg.size() / 4].y[0]));
}

TEST_CASE("spectral radius of the one-optimistic-player jacobian") {
    CHECK(singly_optimistic_spectral_radius(0.0) == Catch::Approx(1.0).margin(1e-12));
    for (double eta : {0.01, 0.05, 0.1, 0.25, 0.5}) {
        const double rho = singly_optimistic_spectral_radius(eta);
        CHECK(rho > 1.0);
        CHECK(rho == Catch::Approx(rho_oracle(eta)).epsilon(1e-11));
    }
    // Strictly above one across the whole grid.
    for (int i = 0; i < 50; ++i) {
        const double eta =
            std::pow(10.0, -3.0 + (std::log10(0.5) + 3.0) * static_cast<double>(i) / 49.0);
        CHECK(singly_optimistic_spectral_radius(eta) > 1.0);
    }
    CHECK_THROWS_AS(singly_optimistic_spectral_radius(-0.1), validation_error);
}

TEST_CASE("rate fit on synthetic and solver sequences") {
    Vector geo(40);
    for (std::size_t k = 0; k < geo.size(); ++k) geo[k] = std::pow(2.0, -static_cast<double>(k));
    const auto fit = fit_linear_rate(geo);
    CHECK(fit.alpha == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));

    const Vector constant(30, 0.7);
    const auto cfit = fit_linear_rate(constant);
    CHECK(cfit.alpha == Catch::Approx(1.0).margin(1e-12));

    // Strongly monotone OGDA contracts linearly.
    const auto tr = run_xy(GameAlgo::kOgda, 0.2, 200, 0.5);
    const auto sfit = fit_linear_rate(tr.diagnostics.at("norm"));
    CHECK(sfit.alpha > 1.01);
    CHECK(sfit.r_squared >= 0.99);

    CHECK_THROWS_AS(fit_linear_rate(Vector{1.0, 0.5}), validation_error);
    Vector bad(20, 1.0);
    bad[7] = 0.0;
    CHECK_THROWS_AS(fit_linear_rate(bad), validation_error);
}

TEST_CASE("ogda with a varying bounded schedule still converges") {
    // Exercises the two-step-size optimistic update: eta_k g + eta_{k-1} (g - g_prev).
    Vector etas;
    for (std::size_t k = 0; k < 4000; ++k) etas.push_back(k % 2 == 0 ? 0.05 : 0.35);
    const auto schedule = StepSchedule::bounded_sequence(etas, 0.05, 1.0);
    const auto tr = solve_game(BilinearGame::xy(), GameAlgo::kOgda, schedule, {{1.0}, {1.0}},
                               4000, 100);
    CHECK(tr.diagnostics.at("norm").back() <= 1e-3);
}

TEST_CASE("lipschitz estimate via power iteration") {
    BilinearGame game = BilinearGame::xy();
    CHECK(game.lipschitz_estimate() == Catch::Approx(1.0).epsilon(1e-9));
    game.strong_monotonicity = 0.5;
    CHECK(game.lipschitz_estimate() == Catch::Approx(1.5).epsilon(1e-9));

    // Oracle: largest singular value of a 2x2 computed from the closed form.
    BilinearGame wide;
    wide.payoff = Matrix(2, 2);
    wide.payoff(0, 0) = 3.0;
    wide.payoff(0, 1) = 1.0;
    wide.payoff(1, 0) = -1.0;
    wide.payoff(1, 1) = 2.0;
    const double a = 3.0, b = 1.0, c = -1.0, d = 2.0;
    const double t = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    const double smax = std::sqrt((t + std::sqrt(t * t - 4.0 * det * det)) / 2.0);
    CHECK(wide.lipschitz_estimate() == Catch::Approx(smax).epsilon(1e-9));
}

TEST_CASE("schedule validation and algorithm validation") {
    CHECK_THROWS_AS(StepSchedule::constant(0.0), validation_error);
    CHECK_THROWS_AS(StepSchedule::bounded_sequence({0.5}, 0.1, 1.0), validation_error);
    const auto ok = StepSchedule::bounded_sequence({0.15, 0.2, 0.1}, 0.1, 2.0);
    CHECK(ok.at(1) == 0.2);
    CHECK(ok.at(9) == 0.1);

    BilinearGame game = BilinearGame::xy();
    CHECK_THROWS_AS(
        solve_game(game, GameAlgo::kMwu, StepSchedule::constant(0.1), {{1.0}, {1.0}}, 5),
        validation_error);
    CHECK_THROWS_AS(parse_game_algo("newton"), validation_error);
}

TEST_CASE("mwu and omwu on a simplex game") {
    // Matching pennies; the unique equilibrium is the uniform pair.
    BilinearGame game;
    game.payoff = Matrix(2, 2);
    game.payoff(0, 0) = 1.0;
    game.payoff(0, 1) = -1.0;
    game.payoff(1, 0) = -1.0;
    game.payoff(1, 1) = 1.0;
    game.x_geom = BregmanGeometry::entropy_simplex();
    game.y_geom = BregmanGeometry::entropy_simplex();
    const GamePoint init{{0.7, 0.3}, {0.4, 0.6}};
    const auto omwu =
        solve_game(game, GameAlgo::kOmwu, StepSchedule::constant(0.2), init, 4000);
    const auto& last = omwu.iterates.back();
    CHECK(std::abs(last.x[0] - 0.5) <= 1e-3);
    CHECK(std::abs(last.y[0] - 0.5) <= 1e-3);

    // Plain MWU orbits: the final point stays away from the equilibrium.
    const auto mwu = solve_game(game, GameAlgo::kMwu, StepSchedule::constant(0.2), init, 4000);
    CHECK(std::abs(mwu.iterates.back().x[0] - 0.5) > 0.05);
}
