#pragma once

#include <cmath>
#include <optional>

#include "reload/cmdp.hpp"
#include "reload/linalg.hpp"

namespace reload {

/// The affine part of the flow polytope K: rows are
///   sum_a d(s,a) - gamma sum_{s',a'} P(s|s',a') d(s',a') = (1-gamma) rho(s).
/// Caches an LU factorization of the normal equations A A^T for closed-form
/// projection onto the affine subspace.
class FlowSystem {
public:
    explicit FlowSystem(const Cmdp& m)
        : a_(m.n_states, m.sa_size()), b_(m.n_states) {
        const std::size_t S = m.n_states, A = m.n_actions;
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) a_(s, s * A + a) += 1.0;
            b_[s] = (1.0 - m.discount) * m.initial_dist[s];
        }
        for (std::size_t s2 = 0; s2 < S; ++s2)
            for (std::size_t a = 0; a < A; ++a)
                for (std::size_t s = 0; s < S; ++s)
                    a_(s, s2 * A + a) -= m.discount * m.p(s2, a, s);
        Matrix aat(S, S);
        for (std::size_t i = 0; i < S; ++i)
            for (std::size_t j = 0; j < S; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < a_.cols(); ++k) v += a_(i, k) * a_(j, k);
                aat(i, j) = v;
            }
        normal_lu_ = LuFactorization::compute(aat);
    }

    const Matrix& matrix() const { return a_; }
    const Vector& rhs() const { return b_; }

    Vector residual(const Vector& d) const {
        Vector r = a_.multiply(d);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
        return r;
    }

    double residual_norm(const Vector& d) const { return norm2(residual(d)); }

    /// Euclidean projection onto {d : A d = b}.
    Vector project_affine(const Vector& d) const {
        const Vector y = normal_lu_->solve(residual(d));
        Vector out = d;
        const Vector corr = a_.multiply_transposed(y);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= corr[i];
        return out;
    }

private:
    Matrix a_;
    Vector b_;
    std::optional<LuFactorization> normal_lu_;
};

/// Euclidean projection onto K = {d >= 0, flow constraints} by Dykstra's
/// alternating projections. The affine set needs no correction term; the
/// orthant keeps one. Terminates when successive iterates move less than tol.
inline OccupancyMeasure project_onto_K(const FlowSystem& flow, const Vector& z,
                                       double tol = 1e-10, std::size_t max_sweeps = 100000) {
    for (double v : z)
        if (!std::isfinite(v)) throw validation_error("project_onto_K: non-finite input");
    Vector x = z;
    Vector p(z.size(), 0.0);
    double move = 0.0;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        const Vector y = flow.project_affine(x);
        Vector xn(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double w = y[i] + p[i];
            xn[i] = std::max(w, 0.0);
            p[i] = w - xn[i];
        }
        move = 0.0;
        for (std::size_t i = 0; i < xn.size(); ++i) move += (xn[i] - x[i]) * (xn[i] - x[i]);
        move = std::sqrt(move);
        x = std::move(xn);
        if (move < tol && flow.residual_norm(x) < 1e-9) {
            OccupancyMeasure occ;
            // A final affine snap keeps the flow residual at solver accuracy;
            // the remaining negative mass is below tol.
            occ.d = flow.project_affine(x);
            for (auto& v : occ.d) v = std::max(v, 0.0);
            return occ;
        }
    }
    throw convergence_error("project_onto_K: sweep cap reached", move);
}

inline OccupancyMeasure project_onto_K(const Cmdp& m, const Vector& z, double tol = 1e-10,
                                       std::size_t max_sweeps = 100000) {
    return project_onto_K(FlowSystem(m), z, tol, max_sweeps);
}

}  // namespace reload
