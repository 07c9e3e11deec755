#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "spgd/errors.hpp"

namespace spgd {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sqnorm(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(sqnorm(a)); }

// Overflow-safe Euclidean norm (scales by the largest component); used where
// the inputs may be near the floating-point range, e.g. divergence checks.
inline double norm_safe(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    if (m == 0.0 || !std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : a) {
        double r = x / m;
        s += r * r;
    }
    return m * std::sqrt(s);
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(double c, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

// r = a + c*b
inline Vec axpy(const Vec& a, double c, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
    return r;
}

inline double dist(const Vec& a, const Vec& b) { return norm(sub(a, b)); }

inline Vec zeros(std::size_t d) { return Vec(d, 0.0); }

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void require_dim(const Vec& x, std::size_t d, const char* who) {
    if (x.size() != d)
        throw InputError(std::string(who) + ": expected dimension " +
                         std::to_string(d) + ", got " + std::to_string(x.size()));
}

// Dense row-major matrix, just enough for the quadratic problems.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // rows*cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.data[i * n + i] = 1.0;
        return m;
    }

    static Matrix diagonal(const Vec& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m.data[i * d.size() + i] = d[i];
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool is_diagonal(double tol = 0.0) const {
        if (rows != cols) return false;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                if (i != j && std::abs((*this)(i, j)) > tol) return false;
        return true;
    }
};

inline Vec matvec(const Matrix& m, const Vec& x) {
    require_dim(x, m.cols, "matvec");
    Vec r(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) r[i] += m(i, j) * x[j];
    return r;
}

inline Vec matvec_t(const Matrix& m, const Vec& x) {
    require_dim(x, m.rows, "matvec_t");
    Vec r(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) r[j] += m(i, j) * x[i];
    return r;
}

}  // namespace spgd
