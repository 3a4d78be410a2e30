// Joint Euclidean-plus-dot-product metric: D_J^2(x_i, x_j) = ||L x_i - L x_j||^2
// - x_i^T V^T V x_j, trained with whitened-PCA initialization and SGD on the
// pairwise hinge loss max(0, m - y_ij (b - D_J^2)).
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lhs/io.hpp"
#include "lhs/linalg.hpp"
#include "lhs/rng.hpp"
#include "lhs/util.hpp"

namespace lhs {

struct MetricModel {
    int proj_dim = 0;   // d, rows of L and V
    int input_dim = 0;  // d_0
    double bias = 1.0;
    double margin = 0.2;
    Matrix L;  // proj_dim x input_dim
    Matrix V;  // proj_dim x input_dim

    void validate() const {
        if (L.rows != proj_dim || V.rows != proj_dim || L.cols != input_dim ||
            V.cols != input_dim || proj_dim < 1 || proj_dim > input_dim)
            throw InvalidArgument("inconsistent metric model shape");
    }
};

// A training pair referencing rows of a descriptor matrix; label +1 means
// same identity, -1 different.
struct IndexPair {
    int a = 0;
    int b = 0;
    int label = 1;
};

struct SgdConfig {
    double rate = 0.002;
    long long iters = 1'000'000;
    uint64_t seed = 0;
    double bias = 1.0;
    double margin = 0.2;
    long long log_every = 10'000;
    // Alg. line 8 updates V with the asymmetric rule V <- V + r y V x_i x_j^T;
    // the symmetric-gradient alternative adds the mirrored term as well.
    bool symmetric_v_update = false;
};

namespace detail {

inline void check_dim(const MetricModel& m, size_t n) {
    if (n != static_cast<size_t>(m.input_dim))
        throw InvalidArgument("descriptor dimension " + std::to_string(n) +
                              " does not match metric input dimension " +
                              std::to_string(m.input_dim));
}

}  // namespace detail

// D_J^2 = ||L(x_i - x_j)||^2 - (V x_i) . (V x_j); symmetric in its arguments.
inline double joint_distance(const MetricModel& m, std::span<const double> xi,
                             std::span<const double> xj) {
    detail::check_dim(m, xi.size());
    detail::check_dim(m, xj.size());
    double d_l = 0.0, d_v = 0.0;
    for (int r = 0; r < m.proj_dim; ++r) {
        const double* lr = m.L.row(r);
        const double* vr = m.V.row(r);
        double lw = 0.0, pi = 0.0, pj = 0.0;
        for (int c = 0; c < m.input_dim; ++c) {
            lw += lr[c] * (xi[c] - xj[c]);
            pi += vr[c] * xi[c];
            pj += vr[c] * xj[c];
        }
        d_l += lw * lw;
        d_v += pi * pj;
    }
    return d_l - d_v;
}

// max(0, m - y (b - D_J^2)) for one pair.
inline double hinge_loss(const MetricModel& m, std::span<const double> xi,
                         std::span<const double> xj, int label) {
    double v = m.margin - label * (m.bias - joint_distance(m, xi, xj));
    return v > 0.0 ? v : 0.0;
}

inline double mean_hinge_loss(const MetricModel& m, const Matrix& descriptors,
                              std::span<const IndexPair> pairs) {
    if (pairs.empty()) throw InvalidArgument("mean_hinge_loss: no pairs");
    double s = 0.0;
    for (const IndexPair& p : pairs)
        s += hinge_loss(m, descriptors.row_span(p.a), descriptors.row_span(p.b), p.label);
    return s / static_cast<double>(pairs.size());
}

// Whitened PCA of the training descriptors: rows are the top-d eigenvectors of
// the sample covariance, each scaled by the inverse square root of its
// eigenvalue. Eigenvalues are floored at 1e-6 times the largest.
inline Matrix wpca_init(const Matrix& descriptors, int d, uint64_t seed) {
    if (descriptors.rows < d)
        throw InvalidArgument("wpca_init: fewer samples (" + std::to_string(descriptors.rows) +
                              ") than projection dimension (" + std::to_string(d) + ")");
    EigenResult eig = top_eigen_covariance(descriptors, d, seed);
    double floor = 1e-6 * std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
    floor = std::max(floor, 1e-300);
    Matrix p(d, descriptors.cols);
    for (int r = 0; r < d; ++r) {
        double lambda = std::max(eig.values[r], floor);
        double scale = 1.0 / std::sqrt(lambda);
        for (int c = 0; c < descriptors.cols; ++c) p(r, c) = scale * eig.vectors(r, c);
    }
    return p;
}

inline MetricModel make_metric_model(Matrix projection, double bias = 1.0, double margin = 0.2) {
    MetricModel m;
    m.proj_dim = projection.rows;
    m.input_dim = projection.cols;
    m.bias = bias;
    m.margin = margin;
    m.V = projection;
    m.L = std::move(projection);
    return m;
}

// SGD over uniformly sampled pairs (with replacement). When flipped
// descriptors are supplied, one of the 4 flipped/non-flipped variants is
// chosen at random per iteration. A pair updates the model only when
// y (b - D_J^2) < m:
//   L <- L - r y L (x_i - x_j)(x_i - x_j)^T
//   V <- V + r y V x_i x_j^T          (mirrored term added when symmetric)
// Deterministic under a fixed seed. If loss_log is given, the mean hinge loss
// over all training pairs is recorded before the first and after every
// log_every iterations.
inline MetricModel sgd_train(MetricModel model, const Matrix& descriptors,
                             std::span<const IndexPair> pairs, const SgdConfig& cfg,
                             const Matrix* flipped = nullptr,
                             std::vector<double>* loss_log = nullptr) {
    model.validate();
    if (pairs.empty()) throw InvalidArgument("sgd_train: empty training set");
    if (descriptors.cols != model.input_dim)
        throw InvalidArgument("sgd_train: descriptor dimension mismatch");
    if (flipped && (flipped->rows != descriptors.rows || flipped->cols != descriptors.cols))
        throw InvalidArgument("sgd_train: flipped descriptor matrix shape mismatch");
    model.bias = cfg.bias;
    model.margin = cfg.margin;

    const int d = model.proj_dim, d0 = model.input_dim;
    Rng rng(cfg.seed);
    std::vector<double> w(d0), u(d), pi(d), pj(d);

    if (loss_log) loss_log->push_back(mean_hinge_loss(model, descriptors, pairs));
    for (long long it = 0; it < cfg.iters; ++it) {
        const IndexPair& p = pairs[rng.uniform_index(pairs.size())];
        const double* xi = descriptors.row(p.a);
        const double* xj = descriptors.row(p.b);
        if (flipped) {
            if (rng.coin()) xi = flipped->row(p.a);
            if (rng.coin()) xj = flipped->row(p.b);
        }
        double y = p.label;

        double d_l = 0.0, d_v = 0.0;
        for (int r = 0; r < d; ++r) {
            const double* lr = model.L.row(r);
            const double* vr = model.V.row(r);
            double lw = 0.0, a = 0.0, b = 0.0;
            for (int c = 0; c < d0; ++c) {
                lw += lr[c] * (xi[c] - xj[c]);
                a += vr[c] * xi[c];
                b += vr[c] * xj[c];
            }
            u[r] = lw;
            pi[r] = a;
            pj[r] = b;
            d_l += lw * lw;
            d_v += a * b;
        }
        double dist = d_l - d_v;
        if (y * (model.bias - dist) < cfg.margin) {
            for (int c = 0; c < d0; ++c) w[c] = xi[c] - xj[c];
            double step = cfg.rate * y;
            for (int r = 0; r < d; ++r) {
                double* lr = model.L.row(r);
                double su = step * u[r];
                for (int c = 0; c < d0; ++c) lr[c] -= su * w[c];
            }
            for (int r = 0; r < d; ++r) {
                double* vr = model.V.row(r);
                double si = step * pi[r];
                if (cfg.symmetric_v_update) {
                    double sj = step * pj[r];
                    for (int c = 0; c < d0; ++c) vr[c] += si * xj[c] + sj * xi[c];
                } else {
                    for (int c = 0; c < d0; ++c) vr[c] += si * xj[c];
                }
            }
        }
        if (loss_log && cfg.log_every > 0 && (it + 1) % cfg.log_every == 0)
            loss_log->push_back(mean_hinge_loss(model, descriptors, pairs));
    }
    return model;
}

// Mean of D_J^2 over the four flipped/non-flipped combinations of a pair.
inline double score_pair_flipped(const MetricModel& m, std::span<const double> xi,
                                 std::span<const double> xi_flip, std::span<const double> xj,
                                 std::span<const double> xj_flip) {
    return 0.25 * (joint_distance(m, xi, xj) + joint_distance(m, xi, xj_flip) +
                   joint_distance(m, xi_flip, xj) + joint_distance(m, xi_flip, xj_flip));
}

inline constexpr char kMetricMagic[] = "LHSMET\n";
inline constexpr uint32_t kMetricVersion = 1;

inline void save_metric(const MetricModel& m, std::ostream& os) {
    m.validate();
    io::write_magic(os, kMetricMagic);
    io::write_u32(os, kMetricVersion);
    io::write_u32(os, static_cast<uint32_t>(m.proj_dim));
    io::write_u32(os, static_cast<uint32_t>(m.input_dim));
    io::write_f64(os, m.bias);
    io::write_f64(os, m.margin);
    io::write_f64_array(os, m.L.a.data(), m.L.a.size());
    io::write_f64_array(os, m.V.a.data(), m.V.a.size());
}

inline MetricModel load_metric(std::istream& is) {
    io::expect_magic(is, kMetricMagic, "metric model");
    uint32_t version = io::read_u32(is);
    if (version != kMetricVersion) throw IoError("unsupported metric model version");
    MetricModel m;
    m.proj_dim = static_cast<int>(io::read_u32(is));
    m.input_dim = static_cast<int>(io::read_u32(is));
    m.bias = io::read_f64(is);
    m.margin = io::read_f64(is);
    m.L = Matrix(m.proj_dim, m.input_dim);
    m.V = Matrix(m.proj_dim, m.input_dim);
    io::read_f64_array(is, m.L.a.data(), m.L.a.size());
    io::read_f64_array(is, m.V.a.data(), m.V.a.size());
    m.validate();
    return m;
}

inline void save_metric(const MetricModel& m, const std::string& path) {
    auto os = io::open_output(path);
    save_metric(m, os);
    if (!os) throw IoError("write failed: " + path);
}

inline MetricModel load_metric(const std::string& path) {
    auto is = io::open_input(path);
    return load_metric(is);
}

}  // namespace lhs
