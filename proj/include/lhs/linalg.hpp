// Minimal dense linear algebra used by metric learning: a row-major matrix,
// a cyclic Jacobi eigensolver for small symmetric matrices, and subspace
// iteration with Rayleigh-Ritz for the top eigenpairs of a sample covariance.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "lhs/rng.hpp"
#include "lhs/util.hpp"

namespace lhs {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    std::span<const double> row_span(int i) const { return {row(i), static_cast<size_t>(cols)}; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

namespace detail {

// Orthonormalizes the columns of q (rows x cols, cols <= rows) with modified
// Gram-Schmidt plus one re-orthogonalization pass. A column that collapses is
// replaced by a fresh random direction.
inline void orthonormalize_columns(Matrix& q, Rng& rng) {
    int n = q.rows, d = q.cols;
    std::vector<double> v(n);
    for (int j = 0; j < d; ++j) {
        for (int attempt = 0;; ++attempt) {
            for (int i = 0; i < n; ++i) v[i] = q(i, j);
            for (int pass = 0; pass < 2; ++pass) {
                for (int k = 0; k < j; ++k) {
                    double proj = 0.0;
                    for (int i = 0; i < n; ++i) proj += q(i, k) * v[i];
                    for (int i = 0; i < n; ++i) v[i] -= proj * q(i, k);
                }
            }
            double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
            if (norm > 1e-12 || attempt > 4) {
                if (norm <= 1e-12) norm = 1.0;  // degenerate; leave whatever is there
                for (int i = 0; i < n; ++i) q(i, j) = v[i] / norm;
                break;
            }
            for (int i = 0; i < n; ++i) q(i, j) = rng.normal();
        }
    }
}

}  // namespace detail

struct EigenResult {
    std::vector<double> values;  // descending
    Matrix vectors;              // one eigenvector per row, matching values
};

// Cyclic Jacobi for a symmetric matrix; fine for the small projected problems
// this library solves (a few hundred rows at most).
inline EigenResult jacobi_eigen_symmetric(Matrix a, int max_sweeps = 64) {
    if (a.rows != a.cols) throw InvalidArgument("jacobi: matrix must be square");
    int n = a.rows;
    Matrix v(n, n);
    for (int i = 0; i < n; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });
    EigenResult r;
    r.values.resize(n);
    r.vectors = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        r.values[i] = a(order[i], order[i]);
        for (int j = 0; j < n; ++j) r.vectors(i, j) = v(j, order[i]);
    }
    return r;
}

// Top-d eigenpairs of the covariance of `data` (one sample per row), via
// subspace iteration on the implicit covariance operator (the dense
// covariance matrix is never formed), finished with a Rayleigh-Ritz step.
inline EigenResult top_eigen_covariance(const Matrix& data, int d, uint64_t seed,
                                        int max_iters = 200, double tol = 1e-11) {
    int n = data.rows, dim = data.cols;
    if (d < 1 || d > dim) throw InvalidArgument("top_eigen_covariance: bad target dimension");
    if (n < 2) throw InvalidArgument("top_eigen_covariance: need at least 2 samples");

    std::vector<double> mean(dim, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) mean[j] += data(i, j);
    for (double& m : mean) m /= n;

    // cov_op(Q) = Xc^T (Xc Q) / n with Xc the centered data
    auto cov_op = [&](const Matrix& q) {
        Matrix z(n, d);
        for (int i = 0; i < n; ++i) {
            const double* x = data.row(i);
            for (int c = 0; c < d; ++c) {
                double s = 0.0;
                for (int j = 0; j < dim; ++j) s += (x[j] - mean[j]) * q(j, c);
                z(i, c) = s;
            }
        }
        Matrix w(dim, d);
        for (int i = 0; i < n; ++i) {
            const double* x = data.row(i);
            for (int j = 0; j < dim; ++j) {
                double xc = x[j] - mean[j];
                for (int c = 0; c < d; ++c) w(j, c) += xc * z(i, c);
            }
        }
        double inv = 1.0 / n;
        for (double& x : w.a) x *= inv;
        return w;
    };

    Rng rng(seed);
    Matrix q(dim, d);
    for (double& x : q.a) x = rng.normal();
    detail::orthonormalize_columns(q, rng);

    std::vector<double> prev_est(d, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        Matrix z = cov_op(q);
        std::vector<double> est(d);
        for (int c = 0; c < d; ++c) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += z(j, c) * z(j, c);
            est[c] = std::sqrt(s);
        }
        q = z;
        detail::orthonormalize_columns(q, rng);
        double rel = 0.0;
        for (int c = 0; c < d; ++c)
            rel = std::max(rel, std::abs(est[c] - prev_est[c]) / std::max(est[c], 1e-30));
        prev_est = est;
        if (iter > 2 && rel < tol) break;
    }

    // Rayleigh-Ritz on the converged subspace
    Matrix w = cov_op(q);
    Matrix b(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int r = 0; r < dim; ++r) s += q(r, i) * w(r, j);
            b(i, j) = s;
        }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double s = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = b(j, i) = s;
        }
    EigenResult small = jacobi_eigen_symmetric(std::move(b));

    EigenResult out;
    out.values = small.values;
    out.vectors = Matrix(d, dim);
    for (int e = 0; e < d; ++e)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += q(j, c) * small.vectors(e, c);
            out.vectors(e, j) = s;
        }
    return out;
}

}  // namespace lhs
