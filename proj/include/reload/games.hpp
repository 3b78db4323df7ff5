#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reload/geometry.hpp"
#include "reload/linalg.hpp"

namespace reload {

/// min_x max_y  x^T M y + (m/2)(|x|^2 - |y|^2).
/// The gradient operator B(x,y) = (My + m x, -M^T x + m y) is monotone with
/// Lipschitz constant |M|_2 + m.
struct BilinearGame {
    Matrix payoff;
    BregmanGeometry x_geom = BregmanGeometry::euclidean_free();
    BregmanGeometry y_geom = BregmanGeometry::euclidean_free();
    double strong_monotonicity = 0.0;

    static BilinearGame xy() {
        BilinearGame g;
        g.payoff = Matrix(1, 1);
        g.payoff(0, 0) = 1.0;
        return g;
    }

    std::size_t x_dim() const { return payoff.rows(); }
    std::size_t y_dim() const { return payoff.cols(); }

    double objective(const Vector& x, const Vector& y) const {
        double v = dot(x, payoff.multiply(y));
        if (strong_monotonicity != 0.0)
            v += 0.5 * strong_monotonicity * (dot(x, x) - dot(y, y));
        return v;
    }

    /// x-component of the monotone operator B: d/dx = M y + m x.
    Vector operator_x(const Vector& x, const Vector& y) const {
        Vector g = payoff.multiply(y);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += strong_monotonicity * x[i];
        return g;
    }

    /// y-component of B (the negated ascent gradient): -M^T x + m y.
    Vector operator_y(const Vector& x, const Vector& y) const {
        Vector g = payoff.multiply_transposed(x);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = -g[i] + strong_monotonicity * y[i];
        return g;
    }

    double lipschitz_estimate() const { return spectral_norm(payoff) + strong_monotonicity; }
};

/// Per-iteration step sizes, constant or an explicit bounded sequence.
class StepSchedule {
public:
    static StepSchedule constant(double eta) {
        if (!(eta > 0.0)) throw validation_error("schedule: eta must be positive");
        StepSchedule s;
        s.etas_ = {eta};
        return s;
    }

    /// Explicit sequence; every entry must lie in [eps, (1 - 2 eps) / (2 L)].
    static StepSchedule bounded_sequence(Vector etas, double eps, double lipschitz) {
        if (etas.empty()) throw validation_error("schedule: empty sequence");
        const double hi = (1.0 - 2.0 * eps) / (2.0 * lipschitz);
        for (double e : etas)
            if (!(e >= eps && e <= hi))
                throw validation_error("schedule: entry outside [eps, (1-2eps)/(2L)]");
        StepSchedule s;
        s.etas_ = std::move(etas);
        return s;
    }

    double at(std::size_t k) const { return etas_.size() == 1 ? etas_[0] : etas_[std::min(k, etas_.size() - 1)]; }

private:
    Vector etas_;
};

enum class GameAlgo { kGda, kOgda, kMwu, kOmwu, kEg, kPeg, kRg, kSinglyOptimistic };

inline GameAlgo parse_game_algo(const std::string& name) {
    if (name == "gda") return GameAlgo::kGda;
    if (name == "ogda") return GameAlgo::kOgda;
    if (name == "mwu") return GameAlgo::kMwu;
    if (name == "omwu") return GameAlgo::kOmwu;
    if (name == "eg") return GameAlgo::kEg;
    if (name == "peg") return GameAlgo::kPeg;
    if (name == "rg") return GameAlgo::kRg;
    if (name == "singly") return GameAlgo::kSinglyOptimistic;
    throw validation_error("unknown game algorithm: " + name);
}

struct GamePoint {
    Vector x, y;
};

/// Recorded trajectory. Holds every stride-th iterate plus the initial and
/// final points; diagnostics keys are identical across records.
struct IterateTrace {
    std::size_t stride = 1;
    std::vector<GamePoint> iterates;
    std::map<std::string, Vector> diagnostics;
};

namespace detail {

inline void game_record(IterateTrace& t, const BilinearGame& g, const Vector& x, const Vector& y) {
    t.iterates.push_back({x, y});
    double n = 0.0;
    for (double e : x) n += e * e;
    for (double e : y) n += e * e;
    t.diagnostics["norm"].push_back(std::sqrt(n));
    t.diagnostics["objective"].push_back(g.objective(x, y));
}

}  // namespace detail

/// Runs the chosen dynamics with simultaneous player updates from iterate-k
/// quantities. MWU/OMWU require negative-entropy geometries, the rest Euclidean.
inline IterateTrace solve_game(const BilinearGame& game, GameAlgo algo,
                               const StepSchedule& schedule, const GamePoint& init,
                               std::size_t iters, std::size_t stride = 1) {
    if (iters < 1) throw validation_error("solve_game: iters must be >= 1");
    if (stride < 1) throw validation_error("solve_game: stride must be >= 1");
    if (init.x.size() != game.x_dim() || init.y.size() != game.y_dim())
        throw validation_error("solve_game: init dimension mismatch");
    const bool entropic = algo == GameAlgo::kMwu || algo == GameAlgo::kOmwu;
    if (entropic) {
        if (game.x_geom.kind != MirrorMap::kNegativeEntropy ||
            game.y_geom.kind != MirrorMap::kNegativeEntropy)
            throw validation_error("solve_game: MWU/OMWU need negative-entropy geometries");
    } else if (game.x_geom.kind != MirrorMap::kEuclidean ||
               game.y_geom.kind != MirrorMap::kEuclidean) {
        throw validation_error("solve_game: gradient algorithms need Euclidean geometries");
    }
    game.x_geom.require_member(init.x, "solve_game(init.x)");
    game.y_geom.require_member(init.y, "solve_game(init.y)");

    Vector x = init.x, y = init.y;
    // k = 0 hints: previous gradients equal the current ones, so the first
    // optimistic step is a plain mirror step.
    Vector gx_prev = game.operator_x(x, y), gy_prev = game.operator_y(x, y);
    Vector gx_half = gx_prev, gy_half = gy_prev;  // PEG: last half-step gradients
    Vector x_prev = x, y_prev = y;                // RG: previous iterate

    IterateTrace trace;
    trace.stride = stride;
    detail::game_record(trace, game, x, y);

    for (std::size_t k = 0; k < iters; ++k) {
        const double eta = schedule.at(k);
        const double eta_prev = k == 0 ? eta : schedule.at(k - 1);
        Vector gx = game.operator_x(x, y);
        Vector gy = game.operator_y(x, y);
        Vector xn, yn;
        switch (algo) {
            case GameAlgo::kGda:
            case GameAlgo::kMwu:
                xn = md_step(game.x_geom, x, gx, eta);
                yn = md_step(game.y_geom, y, gy, eta);
                break;
            case GameAlgo::kOgda:
            case GameAlgo::kOmwu:
                xn = omd_step(game.x_geom, x, gx, gx_prev, eta, eta_prev);
                yn = omd_step(game.y_geom, y, gy, gy_prev, eta, eta_prev);
                break;
            case GameAlgo::kSinglyOptimistic:
                xn = omd_step(game.x_geom, x, gx, gx_prev, eta, eta_prev);
                yn = md_step(game.y_geom, y, gy, eta);
                break;
            case GameAlgo::kEg: {
                Vector xh = md_step(game.x_geom, x, gx, eta);
                Vector yh = md_step(game.y_geom, y, gy, eta);
                xn = md_step(game.x_geom, x, game.operator_x(xh, yh), eta);
                yn = md_step(game.y_geom, y, game.operator_y(xh, yh), eta);
                break;
            }
            case GameAlgo::kPeg: {
                Vector xh = md_step(game.x_geom, x, gx_half, eta);
                Vector yh = md_step(game.y_geom, y, gy_half, eta);
                gx_half = game.operator_x(xh, yh);
                gy_half = game.operator_y(xh, yh);
                xn = md_step(game.x_geom, x, gx_half, eta);
                yn = md_step(game.y_geom, y, gy_half, eta);
                break;
            }
            case GameAlgo::kRg: {
                Vector xh(x.size()), yh(y.size());
                for (std::size_t i = 0; i < x.size(); ++i) xh[i] = 2.0 * x[i] - x_prev[i];
                for (std::size_t i = 0; i < y.size(); ++i) yh[i] = 2.0 * y[i] - y_prev[i];
                xn = md_step(game.x_geom, x, game.operator_x(xh, yh), eta);
                yn = md_step(game.y_geom, y, game.operator_y(xh, yh), eta);
                break;
            }
        }
        x_prev = x;
        y_prev = y;
        gx_prev = std::move(gx);
        gy_prev = std::move(gy);
        x = std::move(xn);
        y = std::move(yn);
        if ((k + 1) % stride == 0 || k + 1 == iters)
            detail::game_record(trace, game, x, y);
    }
    return trace;
}

/// Running uniform means of the recorded iterates. Requires stride 1: averages
/// of subsampled traces are biased.
inline std::vector<GamePoint> average_trace(const IterateTrace& trace) {
    if (trace.iterates.empty()) throw validation_error("average_trace: empty trace");
    if (trace.stride != 1) throw validation_error("average_trace: trace must be recorded at stride 1");
    std::vector<GamePoint> out;
    out.reserve(trace.iterates.size());
    Vector sx(trace.iterates[0].x.size(), 0.0), sy(trace.iterates[0].y.size(), 0.0);
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        for (std::size_t i = 0; i < sx.size(); ++i) sx[i] += trace.iterates[k].x[i];
        for (std::size_t i = 0; i < sy.size(); ++i) sy[i] += trace.iterates[k].y[i];
        GamePoint p;
        p.x.resize(sx.size());
        p.y.resize(sy.size());
        const double inv = 1.0 / static_cast<double>(k + 1);
        for (std::size_t i = 0; i < sx.size(); ++i) p.x[i] = sx[i] * inv;
        for (std::size_t i = 0; i < sy.size(); ++i) p.y[i] = sy[i] * inv;
        out.push_back(std::move(p));
    }
    return out;
}

namespace detail {

/// Shifted QR on a 3x3 Hessenberg matrix until one subdiagonal entry deflates.
/// Returns the deflated real eigenvalue estimate and the remaining 2x2 block.
struct QrDeflation {
    double real_root;
    double block[4];  // row-major 2x2
};

inline QrDeflation companion_qr_deflate(double h[3][3], double tol = 1e-12) {
    auto subdiag_small = [&](int i) {
        return std::abs(h[i + 1][i]) <= tol * (std::abs(h[i][i]) + std::abs(h[i + 1][i + 1]) + 1.0);
    };
    for (int iter = 0; iter < 200; ++iter) {
        if (subdiag_small(1)) {
            return {h[2][2], {h[0][0], h[0][1], h[1][0], h[1][1]}};
        }
        if (subdiag_small(0)) {
            return {h[0][0], {h[1][1], h[1][2], h[2][1], h[2][2]}};
        }
        // Wilkinson shift from the trailing 2x2; real part when complex.
        const double a = h[1][1], b = h[1][2], c = h[2][1], d = h[2][2];
        const double tr = a + d, det = a * d - b * c;
        const double disc = tr * tr / 4.0 - det;
        double shift;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            const double l1 = tr / 2.0 + s, l2 = tr / 2.0 - s;
            shift = std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
        } else {
            shift = tr / 2.0;
        }
        if (iter > 0 && iter % 16 == 0) shift += 0.75 * std::abs(h[2][1]);  // exceptional shift
        // Explicit QR of (H - shift I) by two Givens rotations, then RQ + shift I.
        double m[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = h[i][j] - (i == j ? shift : 0.0);
        double cth[2], sth[2];
        for (int k = 0; k < 2; ++k) {
            const double r = std::hypot(m[k][k], m[k + 1][k]);
            if (r == 0.0) {
                cth[k] = 1.0;
                sth[k] = 0.0;
                continue;
            }
            cth[k] = m[k][k] / r;
            sth[k] = m[k + 1][k] / r;
            for (int j = 0; j < 3; ++j) {
                const double u = m[k][j], v = m[k + 1][j];
                m[k][j] = cth[k] * u + sth[k] * v;
                m[k + 1][j] = -sth[k] * u + cth[k] * v;
            }
        }
        for (int k = 0; k < 2; ++k) {
            for (int i = 0; i < 3; ++i) {
                const double u = m[i][k], v = m[i][k + 1];
                m[i][k] = cth[k] * u + sth[k] * v;
                m[i][k + 1] = -sth[k] * u + cth[k] * v;
            }
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) h[i][j] = m[i][j] + (i == j ? shift : 0.0);
    }
    throw numerical_error("companion QR failed to deflate in 200 iterations");
}

}  // namespace detail

/// Largest eigenvalue modulus of the one-optimistic-player Jacobian
/// [[1, -2e, e], [e, 1, 0], [0, 1, 0]], i.e. the largest root modulus of
/// -l^3 + 2l^2 - (2e^2+1)l + e^2. Companion-matrix shifted QR locates the real
/// root, a Newton polish brings it to machine accuracy, and the conjugate pair
/// modulus comes from the deflated quadratic.
inline double singly_optimistic_spectral_radius(double eta) {
    if (eta < 0.0) throw validation_error("spectral radius: eta must be >= 0");
    const double t = eta * eta;
    // Monic form: l^3 + c2 l^2 + c1 l + c0.
    const double c2 = -2.0, c1 = 2.0 * t + 1.0, c0 = -t;
    if (c0 == 0.0) {
        // l (l^2 + c2 l + c1): quadratic factor has roots 1, 1 at eta = 0.
        const double disc = c2 * c2 / 4.0 - c1;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return std::max(std::abs(-c2 / 2.0 + s), std::abs(-c2 / 2.0 - s));
        }
        return std::sqrt(c1);
    }
    double h[3][3] = {{0.0, 0.0, -c0}, {1.0, 0.0, -c1}, {0.0, 1.0, -c2}};
    auto defl = detail::companion_qr_deflate(h);

    auto poly = [&](double l) { return ((l + c2) * l + c1) * l + c0; };
    auto dpoly = [&](double l) { return (3.0 * l + 2.0 * c2) * l + c1; };
    auto polish = [&](double l) {
        for (int i = 0; i < 50; ++i) {
            const double p = poly(l), dp = dpoly(l);
            if (dp == 0.0) break;
            const double step = p / dp;
            l -= step;
            if (std::abs(step) <= 1e-16 * std::abs(l) + 1e-300) break;
        }
        return l;
    };

    const double r = polish(defl.real_root);
    // Deflate the cubic by (l - r): quotient l^2 + (c2 + r) l + (c1 + r (c2 + r)).
    const double qb = c2 + r, qc = c1 + r * qb;
    const double disc = qb * qb / 4.0 - qc;
    double rho = std::abs(r);
    if (disc < 0.0) {
        rho = std::max(rho, std::sqrt(qc));  // conjugate pair modulus = sqrt(product)
    } else {
        const double s = std::sqrt(disc);
        rho = std::max({rho, std::abs(polish(-qb / 2.0 + s)), std::abs(polish(-qb / 2.0 - s))});
    }
    return rho;
}

struct RateFit {
    double alpha;
    double r_squared;
};

/// Least-squares fit of log d_k = a - k log(alpha) over the tail half of the
/// sequence. Returns alpha = exp(|slope|) and the fit quality.
inline RateFit fit_linear_rate(std::span<const double> distances) {
    if (distances.size() < 10) throw validation_error("fit_linear_rate: need at least 10 points");
    for (double d : distances)
        if (!(d > 0.0)) throw validation_error("fit_linear_rate: distances must be positive");
    const std::size_t lo = distances.size() / 2, n = distances.size() - lo;
    double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = static_cast<double>(lo + i);
        const double y = std::log(distances[lo + i]);
        sk += k;
        sy += y;
        skk += k * k;
        sky += k * y;
    }
    const double nn = static_cast<double>(n);
    const double denom = nn * skk - sk * sk;
    const double slope = (nn * sky - sk * sy) / denom;
    const double intercept = (sy - slope * sk) / nn;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ymean = sy / nn;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = static_cast<double>(lo + i);
        const double y = std::log(distances[lo + i]);
        const double e = y - (intercept + slope * k);
        ss_res += e * e;
        ss_tot += (y - ymean) * (y - ymean);
    }
    const double r2 = ss_tot < 1e-30 ? (ss_res < 1e-30 ? 1.0 : 0.0) : 1.0 - ss_res / ss_tot;
    return {std::exp(std::abs(slope)), r2};
}

}  // namespace reload
