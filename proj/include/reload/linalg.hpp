#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "reload/errors.hpp"

namespace reload {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double linf_distance(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    Vector multiply(const Vector& x) const {
        Vector y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = &data_[i * cols_];
            for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    Vector multiply_transposed(const Vector& x) const {
        Vector y(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* row = &data_[i * cols_];
            for (std::size_t j = 0; j < cols_; ++j) y[j] += row[j] * x[i];
        }
        return y;
    }

private:
    std::size_t rows_, cols_;
    Vector data_;
};

/// LU factorization with partial pivoting; solves A x = b and A^T x = b.
class LuFactorization {
public:
    static LuFactorization compute(const Matrix& a) {
        if (a.rows() != a.cols()) throw validation_error("lu: matrix must be square");
        LuFactorization f;
        f.lu_ = a;
        const std::size_t n = a.rows();
        f.perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) f.perm_[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            double best = std::abs(f.lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(f.lu_(i, k));
                if (v > best) { best = v; piv = i; }
            }
            if (best < 1e-300)
                throw numerical_error("lu: singular matrix at pivot " + std::to_string(k));
            if (piv != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(f.lu_(k, j), f.lu_(piv, j));
                std::swap(f.perm_[k], f.perm_[piv]);
            }
            const double inv = 1.0 / f.lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double m = f.lu_(i, k) * inv;
                f.lu_(i, k) = m;
                if (m != 0.0)
                    for (std::size_t j = k + 1; j < n; ++j) f.lu_(i, j) -= m * f.lu_(k, j);
            }
        }
        return f;
    }

    Vector solve(const Vector& b) const {
        const std::size_t n = perm_.size();
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
        for (std::size_t i = 1; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(ii, j) * x[j];
            x[ii] = s / lu_(ii, ii);
        }
        return x;
    }

    /// Solves A^T x = b using A = P^T L U, i.e. U^T L^T P x = b.
    Vector solve_transposed(const Vector& b) const {
        const std::size_t n = perm_.size();
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * w[j];
            w[i] = s / lu_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = w[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu_(j, ii) * w[j];
            w[ii] = s;
        }
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = w[i];
        return x;
    }

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

/// Largest singular value by power iteration on A^T A. Deterministic start.
inline double spectral_norm(const Matrix& a, int max_iters = 200, double rel_tol = 1e-10) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    Vector v(a.cols());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = 1.0 + 1e-3 * static_cast<double>(j % 7);
    double nv = norm2(v);
    for (auto& e : v) e /= nv;
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Vector w = a.multiply_transposed(a.multiply(v));
        const double next = dot(v, w);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = w[j] / nw;
        if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace reload
