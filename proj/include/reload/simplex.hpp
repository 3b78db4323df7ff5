#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "reload/errors.hpp"
#include "reload/linalg.hpp"

namespace reload {

/// Result of min c^T x subject to A x = b, x >= 0.
struct LpSolution {
    enum class Status { kOptimal, kInfeasible, kUnbounded };
    Status status = Status::kOptimal;
    Vector x;
    Vector duals;  // y = c_B^T B^{-1}, one entry per row
    double objective = 0.0;
    bool degenerate = false;
    double dual_infeasibility = 0.0;  // largest negative reduced cost at termination
    std::vector<std::size_t> basis;
};

namespace detail {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;

/// Dense revised simplex over the columns of A plus m implicit artificial
/// identity columns (indices n..n+m-1). Maintains an explicit basis inverse,
/// refactorized periodically. Dantzig pricing with a permanent switch to
/// Bland's rule for anti-cycling.
class SimplexTableau {
public:
    SimplexTableau(const Matrix& a, Vector b) : a_(a), b_(std::move(b)), m_(a.rows()), n_(a.cols()) {
        for (std::size_t i = 0; i < m_; ++i)
            if (b_[i] < 0.0) {
                b_[i] = -b_[i];
                for (std::size_t j = 0; j < n_; ++j) a_(i, j) = -a_(i, j);
                flipped_.push_back(i);
            }
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;  // artificials
        binv_ = identity();
        xb_ = b_;
    }

    /// Phase 1: minimize the artificial mass. Returns the residual infeasibility.
    double phase1() {
        Vector cost(n_ + m_, 0.0);
        for (std::size_t j = n_; j < n_ + m_; ++j) cost[j] = 1.0;
        iterate(cost, /*allow_artificial_entering=*/false);
        double infeas = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= n_) infeas += xb_[i];
        if (infeas > kFeasTol) return infeas;
        drive_out_artificials();
        return infeas;
    }

    /// Phase 2 on the real objective. Call after a feasible phase 1.
    LpSolution::Status phase2(const Vector& c) {
        Vector cost(n_ + m_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) cost[j] = c[j];
        return iterate(cost, false);
    }

    LpSolution extract(const Vector& c) const {
        LpSolution sol;
        sol.x.assign(n_, 0.0);
        sol.degenerate = false;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) sol.x[basis_[i]] = xb_[i];
            if (xb_[i] <= kPivotTol) sol.degenerate = true;
        }
        sol.objective = dot(c, sol.x);
        // y = c_B^T B^{-1}; undo the row flips applied for phase 1.
        Vector cb(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) cb[i] = c[basis_[i]];
        sol.duals.assign(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t k = 0; k < m_; ++k) sol.duals[i] += cb[k] * binv_(k, i);
        for (std::size_t i : flipped_) sol.duals[i] = -sol.duals[i];
        sol.basis = basis_;
        {
            Vector cost(n_ + m_, 0.0);
            for (std::size_t j = 0; j < n_; ++j) cost[j] = c[j];
            const Vector y = dual_row(cost);
            double worst = 0.0;
            for (std::size_t j = 0; j < n_; ++j)
                if (!is_basic(j)) worst = std::min(worst, reduced_cost(cost, y, j));
            sol.dual_infeasibility = -worst;
        }
        return sol;
    }

private:
    Matrix identity() const {
        Matrix e(m_, m_);
        for (std::size_t i = 0; i < m_; ++i) e(i, i) = 1.0;
        return e;
    }

    double a_entry(std::size_t i, std::size_t j) const {
        return j < n_ ? a_(i, j) : (j - n_ == i ? 1.0 : 0.0);
    }

    Vector column(std::size_t j) const {
        Vector col(m_);
        for (std::size_t i = 0; i < m_; ++i) col[i] = a_entry(i, j);
        return col;
    }

    bool is_basic(std::size_t j) const {
        return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
    }

    Vector dual_row(const Vector& cost) const {
        Vector y(m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t k = 0; k < m_; ++k) y[k] += cb * binv_(i, k);
        }
        return y;
    }

    double reduced_cost(const Vector& cost, const Vector& y, std::size_t j) const {
        double v = cost[j];
        if (j < n_) {
            for (std::size_t i = 0; i < m_; ++i) v -= y[i] * a_(i, j);
        } else {
            v -= y[j - n_];
        }
        return v;
    }

    void refactorize() {
        Matrix bmat(m_, m_);
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t k = 0; k < m_; ++k) bmat(i, k) = a_entry(i, basis_[k]);
        const auto lu = LuFactorization::compute(bmat);
        for (std::size_t k = 0; k < m_; ++k) {
            Vector e(m_, 0.0);
            e[k] = 1.0;
            const Vector col = lu.solve(e);
            for (std::size_t i = 0; i < m_; ++i) binv_(i, k) = col[i];
        }
        xb_ = binv_.multiply(b_);
    }

    void pivot(std::size_t entering, std::size_t leaving_row, const Vector& direction) {
        const double piv = direction[leaving_row];
        for (std::size_t k = 0; k < m_; ++k) binv_(leaving_row, k) /= piv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == leaving_row) continue;
            const double f = direction[i];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < m_; ++k) binv_(i, k) -= f * binv_(leaving_row, k);
        }
        const double step = xb_[leaving_row] / piv;
        for (std::size_t i = 0; i < m_; ++i) xb_[i] -= step * direction[i];
        xb_[leaving_row] = step;
        basis_[leaving_row] = entering;
    }

    LpSolution::Status iterate(const Vector& cost, bool allow_artificial_entering) {
        const std::size_t bland_after = 5 * (m_ + n_);
        const std::size_t cap = 2000 + 200 * (m_ + n_);
        const std::size_t ncols = allow_artificial_entering ? n_ + m_ : n_;
        for (std::size_t it = 0; it < cap; ++it) {
            if (it > 0 && it % 64 == 0) refactorize();
            const Vector y = dual_row(cost);
            const bool bland = it >= bland_after;
            std::size_t entering = ncols;
            double best = -kPivotTol;
            for (std::size_t j = 0; j < ncols; ++j) {
                if (is_basic(j)) continue;
                const double rc = reduced_cost(cost, y, j);
                if (rc < -kPivotTol) {
                    if (bland) {
                        entering = j;
                        break;
                    }
                    if (rc < best) {
                        best = rc;
                        entering = j;
                    }
                }
            }
            if (entering == ncols) return LpSolution::Status::kOptimal;
            const Vector direction = binv_.multiply(column(entering));
            std::size_t leaving = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                if (direction[i] > kPivotTol) {
                    const double ratio = std::max(xb_[i], 0.0) / direction[i];
                    if (ratio < best_ratio - 1e-15 ||
                        (ratio < best_ratio + 1e-15 && leaving < m_ &&
                         basis_[i] < basis_[leaving])) {
                        best_ratio = ratio;
                        leaving = i;
                    }
                }
            }
            if (leaving == m_) return LpSolution::Status::kUnbounded;
            pivot(entering, leaving, direction);
        }
        std::ostringstream dump;
        dump << "simplex: iteration cap exceeded; basis =";
        for (std::size_t v : basis_) dump << ' ' << v;
        throw solver_error(dump.str());
    }

    /// Replaces any artificial still basic at zero by a real column.
    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            bool swapped = false;
            for (std::size_t j = 0; j < n_ && !swapped; ++j) {
                if (is_basic(j)) continue;
                const Vector direction = binv_.multiply(column(j));
                if (std::abs(direction[i]) > kPivotTol) {
                    pivot(j, i, direction);
                    swapped = true;
                }
            }
            if (!swapped)
                throw numerical_error("simplex: redundant row, artificial cannot leave basis");
        }
    }

    Matrix a_;
    Vector b_;
    std::size_t m_, n_;
    std::vector<std::size_t> basis_;
    Matrix binv_;
    Vector xb_;
    std::vector<std::size_t> flipped_;
};

}  // namespace detail

inline LpSolution solve_lp(const Matrix& a, const Vector& b, const Vector& c) {
    if (a.rows() != b.size() || a.cols() != c.size())
        throw validation_error("solve_lp: shape mismatch");
    detail::SimplexTableau tab(a, b);
    if (tab.phase1() > detail::kFeasTol) {
        LpSolution sol;
        sol.status = LpSolution::Status::kInfeasible;
        return sol;
    }
    const auto status = tab.phase2(c);
    LpSolution sol = tab.extract(c);
    sol.status = status;
    return sol;
}

}  // namespace reload
