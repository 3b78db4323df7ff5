#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "reload/errors.hpp"
#include "reload/linalg.hpp"

namespace reload {

enum class MirrorMap { kEuclidean, kNegativeEntropy };
enum class Domain { kFreeSpace, kSimplex, kNonnegativeOrthant, kBox };

/// A mirror map together with the constraint set it is used on.
/// Both supported maps are 1-strongly convex on their domains (negative
/// entropy on the simplex via Pinsker).
struct BregmanGeometry {
    MirrorMap kind = MirrorMap::kEuclidean;
    Domain domain = Domain::kFreeSpace;
    double box_lo = 0.0;
    double box_hi = 0.0;

    static BregmanGeometry euclidean_free() { return {MirrorMap::kEuclidean, Domain::kFreeSpace}; }
    static BregmanGeometry euclidean_orthant() {
        return {MirrorMap::kEuclidean, Domain::kNonnegativeOrthant};
    }
    static BregmanGeometry euclidean_simplex() {
        return {MirrorMap::kEuclidean, Domain::kSimplex};
    }
    static BregmanGeometry euclidean_box(double lo, double hi) {
        if (!(lo < hi)) throw validation_error("geometry: box requires lo < hi");
        return {MirrorMap::kEuclidean, Domain::kBox, lo, hi};
    }
    static BregmanGeometry entropy_simplex() {
        return {MirrorMap::kNegativeEntropy, Domain::kSimplex};
    }
    static BregmanGeometry entropy_orthant() {
        return {MirrorMap::kNegativeEntropy, Domain::kNonnegativeOrthant};
    }

    bool contains(const Vector& u, double tol = 1e-9) const {
        switch (domain) {
            case Domain::kFreeSpace:
                return true;
            case Domain::kSimplex: {
                double s = 0.0;
                for (double e : u) {
                    if (e < -tol) return false;
                    s += e;
                }
                return std::abs(s - 1.0) <= tol;
            }
            case Domain::kNonnegativeOrthant:
                return std::all_of(u.begin(), u.end(), [&](double e) { return e >= -tol; });
            case Domain::kBox:
                return std::all_of(u.begin(), u.end(), [&](double e) {
                    return e >= box_lo - tol && e <= box_hi + tol;
                });
        }
        return false;
    }

    void require_member(const Vector& u, const char* who) const {
        if (!contains(u))
            throw validation_error(std::string(who) + ": point outside geometry domain");
    }
};

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// Euclidean projection onto the probability simplex (sort-based).
inline Vector project_simplex(Vector v) {
    Vector u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) tau = t;
    }
    for (auto& e : v) e = std::max(e - tau, 0.0);
    return v;
}

/// Applies one mirror step with a pre-weighted gradient g (step size folded in):
/// argmin_domain <g, x'> + D(x'; x).
inline Vector mirror_apply(const BregmanGeometry& geom, const Vector& x, const Vector& g) {
    const std::size_t n = x.size();
    Vector out(n);
    if (geom.kind == MirrorMap::kEuclidean) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - g[i];
        switch (geom.domain) {
            case Domain::kFreeSpace:
                return out;
            case Domain::kNonnegativeOrthant:
                for (auto& e : out) e = std::max(e, 0.0);
                return out;
            case Domain::kBox:
                for (auto& e : out) e = std::clamp(e, geom.box_lo, geom.box_hi);
                return out;
            case Domain::kSimplex:
                return project_simplex(std::move(out));
        }
    }
    // Negative entropy: multiplicative update in log space with max subtraction.
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (x[i] > 0.0 ? std::log(x[i]) : -std::numeric_limits<double>::infinity()) - g[i];
        zmax = std::max(zmax, out[i]);
    }
    if (!std::isfinite(zmax)) throw numerical_error("mirror step: all-zero base point");
    if (geom.domain == Domain::kSimplex) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = std::exp(out[i] - zmax);
            total += out[i];
        }
        for (auto& e : out) e /= total;
        return out;
    }
    if (geom.domain == Domain::kNonnegativeOrthant) {
        for (auto& e : out) e = std::exp(e);
        return out;
    }
    throw validation_error("mirror step: negative entropy needs simplex or orthant domain");
}

}  // namespace detail

/// D(u; v) generated by the geometry's mirror map. For negative entropy this is
/// the generalized KL sum u_i log(u_i/v_i) - u_i + v_i (plain KL on the simplex).
inline double bregman_divergence(const BregmanGeometry& geom, const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw validation_error("bregman_divergence: size mismatch");
    geom.require_member(u, "bregman_divergence(u)");
    geom.require_member(v, "bregman_divergence(v)");
    if (geom.kind == MirrorMap::kEuclidean) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = u[i] - v[i];
            s += d * d;
        }
        return 0.5 * s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (v[i] <= 0.0)
            throw numerical_error("bregman_divergence: zero entry in base point under entropy map");
        s += detail::xlogx(u[i]) - u[i] * std::log(v[i]) - u[i] + v[i];
    }
    return std::max(s, 0.0);
}

/// argmin over the domain of <grad, x'> + D(x'; x) / eta.
inline Vector md_step(const BregmanGeometry& geom, const Vector& x, const Vector& grad,
                      double eta) {
    if (!(eta > 0.0)) throw validation_error("md_step: eta must be positive");
    if (x.size() != grad.size()) throw validation_error("md_step: size mismatch");
    geom.require_member(x, "md_step");
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = eta * grad[i];
    return detail::mirror_apply(geom, x, g);
}

/// Euclidean step followed by a caller-supplied projection (general polytopes).
inline Vector md_step_projected(const Vector& x, const Vector& grad, double eta,
                                const std::function<Vector(const Vector&)>& project) {
    if (!(eta > 0.0)) throw validation_error("md_step_projected: eta must be positive");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - eta * grad[i];
    return project(z);
}

/// Optimistic mirror step: effective gradient eta_cur*g + eta_prev*(g - g_prev).
/// With equal steps this is the doubled-current-minus-previous rule.
inline Vector omd_step(const BregmanGeometry& geom, const Vector& x, const Vector& grad_cur,
                       const Vector& grad_prev, double eta_cur, double eta_prev) {
    if (!(eta_cur > 0.0) || !(eta_prev > 0.0))
        throw validation_error("omd_step: step sizes must be positive");
    if (x.size() != grad_cur.size() || x.size() != grad_prev.size())
        throw validation_error("omd_step: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(grad_cur[i]) || !std::isfinite(grad_prev[i]))
            throw validation_error("omd_step: non-finite gradient");
    geom.require_member(x, "omd_step");
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g[i] = eta_cur * grad_cur[i] + eta_prev * (grad_cur[i] - grad_prev[i]);
    return detail::mirror_apply(geom, x, g);
}

}  // namespace reload
