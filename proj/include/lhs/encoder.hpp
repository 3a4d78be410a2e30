// Fisher-score encoding: per-vector scores against the GMM, per-image (or
// per-cell) averaging, whitening against training statistics, power and l2
// normalization, and the descriptor file format shared with the LBP/LTP
// baselines.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lhs/gmm.hpp"
#include "lhs/image.hpp"
#include "lhs/io.hpp"
#include "lhs/patterns.hpp"
#include "lhs/util.hpp"

namespace lhs {

// 8 mean-derivatives plus 8 inverse-variance-derivatives per component.
inline constexpr int kScorePerComponent = 2 * kDiffDim;

inline int fisher_dim(int components) { return kScorePerComponent * components; }

inline constexpr double kWhiteningFloor = 1e-8;

// Score layout: [d/dmu_1 (8), d/dSigma^-1_1 (8), d/dmu_2, ...]. The mean block
// of component k is gamma_k (v - mu_k) / var_k elementwise; the inverse-variance
// block is (gamma_k / 2)(var_k - (v - mu_k)^2) elementwise. Weight derivatives
// are not part of the score.
inline void fisher_score_into(const GmmEval& eval, const DiffVector& v, std::span<double> out,
                              std::span<double> gamma_scratch) {
    const GmmModel& m = eval.model();
    int k = m.components();
    eval.posteriors_into(v, gamma_scratch);
    for (int c = 0; c < k; ++c) {
        double g = gamma_scratch[c];
        double* mu_block = out.data() + kScorePerComponent * c;
        double* var_block = mu_block + kDiffDim;
        for (int i = 0; i < kDiffDim; ++i) {
            double d = v[i] - m.means[c][i];
            mu_block[i] = g * d * eval.inv_var(c, i);
            var_block[i] = 0.5 * g * (m.vars[c][i] - d * d);
        }
    }
}

inline std::vector<double> fisher_score(const GmmModel& m, const DiffVector& v) {
    GmmEval eval(m);
    std::vector<double> out(fisher_dim(m.components()));
    std::vector<double> gamma(m.components());
    fisher_score_into(eval, v, out, gamma);
    return out;
}

// Arithmetic mean of the Fisher scores of all vectors.
inline std::vector<double> average_scores(const GmmModel& m, std::span<const DiffVector> vectors) {
    if (vectors.empty()) throw InvalidArgument("average_scores: empty vector sequence");
    GmmEval eval(m);
    int dim = fisher_dim(m.components());
    std::vector<double> acc(dim, 0.0);
    std::vector<double> score(dim);
    std::vector<double> gamma(m.components());
    for (const DiffVector& v : vectors) {
        fisher_score_into(eval, v, score, gamma);
        for (int i = 0; i < dim; ++i) acc[i] += score[i];
    }
    double inv = 1.0 / static_cast<double>(vectors.size());
    for (double& x : acc) x *= inv;
    return acc;
}

// Per-coordinate mean and standard deviation of the individual Fisher scores
// of the training samples. Standard deviations are floored.
struct WhiteningStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    size_t dim() const { return mean.size(); }

    void apply(std::span<double> x) const {
        for (size_t i = 0; i < x.size(); ++i) x[i] = (x[i] - mean[i]) / stddev[i];
    }
};

inline WhiteningStats compute_whitening(const GmmModel& m, std::span<const DiffVector> samples) {
    if (samples.size() < 2) throw InvalidArgument("compute_whitening: need at least 2 samples");
    GmmEval eval(m);
    int dim = fisher_dim(m.components());
    std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
    std::vector<double> score(dim);
    std::vector<double> gamma(m.components());
    for (const DiffVector& v : samples) {
        fisher_score_into(eval, v, score, gamma);
        for (int i = 0; i < dim; ++i) {
            sum[i] += score[i];
            sumsq[i] += score[i] * score[i];
        }
    }
    WhiteningStats stats;
    stats.mean.resize(dim);
    stats.stddev.resize(dim);
    double inv = 1.0 / static_cast<double>(samples.size());
    for (int i = 0; i < dim; ++i) {
        stats.mean[i] = sum[i] * inv;
        double var = sumsq[i] * inv - stats.mean[i] * stats.mean[i];
        stats.stddev[i] = std::max(var > 0.0 ? std::sqrt(var) : 0.0, kWhiteningFloor);
    }
    return stats;
}

// Elementwise signed square root.
inline void power_normalize_inplace(std::span<double> x) {
    for (double& v : x) v = v < 0.0 ? -std::sqrt(-v) : std::sqrt(v);
}

inline std::vector<double> power_normalize(std::vector<double> x) {
    power_normalize_inplace(x);
    return x;
}

inline void l2_normalize_inplace(std::span<double> x) {
    double norm_sq = 0.0;
    for (double v : x) norm_sq += v * v;
    if (norm_sq <= 0.0) throw InvalidArgument("cannot l2-normalize a zero vector");
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : x) v *= inv;
}

inline std::vector<double> l2_normalize(std::vector<double> x) {
    l2_normalize_inplace(x);
    return x;
}

enum class DescriptorKind : uint32_t { Lhs = 0, Lbp = 1, Ltp = 2 };

inline const char* to_string(DescriptorKind k) {
    switch (k) {
        case DescriptorKind::Lhs: return "lhs";
        case DescriptorKind::Lbp: return "lbp";
        default: return "ltp";
    }
}

inline DescriptorKind descriptor_kind_from_string(const std::string& s) {
    if (s == "lhs") return DescriptorKind::Lhs;
    if (s == "lbp") return DescriptorKind::Lbp;
    if (s == "ltp") return DescriptorKind::Ltp;
    throw InvalidArgument("unknown descriptor kind: " + s);
}

struct Descriptor {
    DescriptorKind kind = DescriptorKind::Lhs;
    GridSpec grid;
    int components = 0;  // GMM components for lhs, 0 for pattern histograms
    SamplingMode mode = SamplingMode::Rectangular;
    double tolerance = 0.0;  // LTP threshold, 0 otherwise
    std::vector<double> values;

    int dim() const { return static_cast<int>(values.size()); }
};

// Alg.: per cell extract the differential vectors, average their Fisher
// scores and whiten with the shared training stats; the concatenation over
// cells is then power- and l2-normalized once as a whole.
inline Descriptor encode_image(const GmmModel& model, const WhiteningStats& stats,
                               const GrayImage& img, SamplingMode mode, GridSpec grid = {}) {
    int dim = fisher_dim(model.components());
    if (stats.dim() != static_cast<size_t>(dim))
        throw InvalidArgument("whitening stats dimension " + std::to_string(stats.dim()) +
                              " does not match model score dimension " + std::to_string(dim));
    Descriptor d;
    d.kind = DescriptorKind::Lhs;
    d.grid = grid;
    d.components = model.components();
    d.mode = mode;
    d.values.reserve(static_cast<size_t>(dim) * grid.cells());
    for (const GrayImage& cell : grid_cells(img, grid)) {
        std::vector<DiffSample> ds = extract_diff_vectors(cell, mode);
        std::vector<DiffVector> vecs;
        vecs.reserve(ds.size());
        for (const DiffSample& s : ds) vecs.push_back(s.v);
        std::vector<double> x = average_scores(model, vecs);
        stats.apply(x);
        d.values.insert(d.values.end(), x.begin(), x.end());
    }
    power_normalize_inplace(d.values);
    l2_normalize_inplace(d.values);
    return d;
}

// LBP/LTP baseline descriptor: per-cell uniform-pattern histogram, L1
// normalized and square-rooted, concatenated over cells, l2-normalized as a
// whole (a no-op for a single cell).
inline Descriptor pattern_descriptor(const GrayImage& img, SamplingMode mode,
                                     const PatternVariant& variant, GridSpec grid = {}) {
    Descriptor d;
    d.kind = variant.kind == PatternVariant::Kind::Lbp ? DescriptorKind::Lbp : DescriptorKind::Ltp;
    d.grid = grid;
    d.mode = mode;
    d.tolerance = variant.kind == PatternVariant::Kind::Ltp ? variant.tolerance : 0.0;
    for (const GrayImage& cell : grid_cells(img, grid)) {
        std::vector<double> h = normalize_hist(pattern_histogram(cell, mode, variant));
        d.values.insert(d.values.end(), h.begin(), h.end());
    }
    l2_normalize_inplace(d.values);
    return d;
}

inline constexpr char kDescriptorMagic[] = "LHSDESC\n";
inline constexpr uint32_t kDescriptorVersion = 1;

// Descriptor payloads are stored as 32-bit floats.
inline void save_descriptor(const Descriptor& d, std::ostream& os) {
    io::write_magic(os, kDescriptorMagic);
    io::write_u32(os, kDescriptorVersion);
    io::write_u32(os, static_cast<uint32_t>(d.kind));
    io::write_u32(os, static_cast<uint32_t>(d.values.size()));
    io::write_u32(os, static_cast<uint32_t>(d.grid.rows));
    io::write_u32(os, static_cast<uint32_t>(d.grid.cols));
    io::write_u32(os, static_cast<uint32_t>(d.components));
    io::write_u32(os, static_cast<uint32_t>(d.mode));
    io::write_f64(os, d.tolerance);
    for (double v : d.values) io::write_f32(os, static_cast<float>(v));
}

inline Descriptor load_descriptor(std::istream& is) {
    io::expect_magic(is, kDescriptorMagic, "descriptor");
    uint32_t version = io::read_u32(is);
    if (version != kDescriptorVersion) throw IoError("unsupported descriptor version");
    Descriptor d;
    d.kind = static_cast<DescriptorKind>(io::read_u32(is));
    uint32_t dim = io::read_u32(is);
    d.grid.rows = static_cast<int>(io::read_u32(is));
    d.grid.cols = static_cast<int>(io::read_u32(is));
    d.components = static_cast<int>(io::read_u32(is));
    d.mode = static_cast<SamplingMode>(io::read_u32(is));
    d.tolerance = io::read_f64(is);
    d.values.resize(dim);
    for (uint32_t i = 0; i < dim; ++i) d.values[i] = static_cast<double>(io::read_f32(is));
    return d;
}

inline void save_descriptor(const Descriptor& d, const std::string& path) {
    auto os = io::open_output(path);
    save_descriptor(d, os);
    if (!os) throw IoError("write failed: " + path);
}

inline Descriptor load_descriptor(const std::string& path) {
    auto is = io::open_input(path);
    return load_descriptor(is);
}

inline constexpr char kStatsMagic[] = "LHSSTAT\n";
inline constexpr uint32_t kStatsVersion = 1;

inline void save_whitening(const WhiteningStats& s, std::ostream& os) {
    io::write_magic(os, kStatsMagic);
    io::write_u32(os, kStatsVersion);
    io::write_u32(os, static_cast<uint32_t>(s.dim()));
    io::write_f64_array(os, s.mean.data(), s.mean.size());
    io::write_f64_array(os, s.stddev.data(), s.stddev.size());
}

inline WhiteningStats load_whitening(std::istream& is) {
    io::expect_magic(is, kStatsMagic, "whitening stats");
    uint32_t version = io::read_u32(is);
    if (version != kStatsVersion) throw IoError("unsupported whitening stats version");
    uint32_t dim = io::read_u32(is);
    WhiteningStats s;
    s.mean.resize(dim);
    s.stddev.resize(dim);
    io::read_f64_array(is, s.mean.data(), dim);
    io::read_f64_array(is, s.stddev.data(), dim);
    return s;
}

inline void save_whitening(const WhiteningStats& s, const std::string& path) {
    auto os = io::open_output(path);
    save_whitening(s, os);
    if (!os) throw IoError("write failed: " + path);
}

inline WhiteningStats load_whitening(const std::string& path) {
    auto is = io::open_input(path);
    return load_whitening(is);
}

}  // namespace lhs
