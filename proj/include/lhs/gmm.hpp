// Diagonal-covariance Gaussian mixture over 8-d differential vectors:
// feature subsampling, k-means++ initialization, EM, density and posteriors.
// All mixture math runs in the log domain.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lhs/image.hpp"
#include "lhs/io.hpp"
#include "lhs/rng.hpp"
#include "lhs/util.hpp"

namespace lhs {

inline constexpr int kDiffDim = 8;
inline constexpr double kVarianceFloor = 1e-4;  // intensity^2 units
inline constexpr double kLog2Pi = 1.8378770664093454836;

struct GmmModel {
    SamplingMode mode = SamplingMode::Rectangular;
    std::vector<double> weights;                 // K, positive, sums to 1
    std::vector<std::array<double, 8>> means;    // K x 8
    std::vector<std::array<double, 8>> vars;     // K x 8 diagonal, >= floor

    int components() const { return static_cast<int>(weights.size()); }

    void validate() const {
        if (weights.empty() || means.size() != weights.size() || vars.size() != weights.size())
            throw InvalidArgument("inconsistent GMM parameter sizes");
        for (double w : weights)
            if (!(w > 0.0)) throw InvalidArgument("GMM weights must be positive");
        for (const auto& v : vars)
            for (double x : v)
                if (!(x > 0.0)) throw InvalidArgument("GMM variances must be positive");
    }
};

struct TrainConfig {
    int components = 16;
    int em_max_iters = 200;
    double em_rel_tol = 1e-6;     // relative mean-log-likelihood improvement
    int kmeans_iters = 50;
    uint64_t seed = 0;
    size_t max_samples = 1'000'000;
};

// Precomputed per-component constants for repeated density evaluation.
class GmmEval {
public:
    explicit GmmEval(const GmmModel& m) : model_(&m) {
        m.validate();
        int k = m.components();
        log_weight_.resize(k);
        log_norm_.resize(k);
        inv_var_.resize(k);
        for (int j = 0; j < k; ++j) {
            log_weight_[j] = std::log(m.weights[j]);
            double log_det = 0.0;
            for (int i = 0; i < kDiffDim; ++i) {
                log_det += std::log(m.vars[j][i]);
                inv_var_[j][i] = 1.0 / m.vars[j][i];
            }
            log_norm_[j] = -0.5 * (kDiffDim * kLog2Pi + log_det);
        }
    }

    const GmmModel& model() const { return *model_; }

    double log_component(int k, const DiffVector& v) const {
        double q = 0.0;
        for (int i = 0; i < kDiffDim; ++i) {
            double d = v[i] - model_->means[k][i];
            q += d * d * inv_var_[k][i];
        }
        return log_norm_[k] - 0.5 * q;
    }

    // log p(v) via log-sum-exp; optionally fills the weighted component
    // log-densities (log alpha_k + log N_k) into scratch.
    double log_density(const DiffVector& v, std::span<double> scratch = {}) const {
        int k = model_->components();
        double best = -std::numeric_limits<double>::infinity();
        double local[64];
        double* lw = scratch.size() >= static_cast<size_t>(k) ? scratch.data() : local;
        std::vector<double> heap;
        if (lw == local && k > 64) {
            heap.resize(k);
            lw = heap.data();
        }
        for (int j = 0; j < k; ++j) {
            lw[j] = log_weight_[j] + log_component(j, v);
            best = std::max(best, lw[j]);
        }
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += std::exp(lw[j] - best);
        double lse = best + std::log(sum);
        if (scratch.size() >= static_cast<size_t>(k) && lw != scratch.data())
            std::copy(lw, lw + k, scratch.data());
        return lse;
    }

    // gamma_k = alpha_k N_k / sum_j alpha_j N_j, stabilized in the log domain.
    // Returns log p(v).
    double posteriors_into(const DiffVector& v, std::span<double> gamma) const {
        int k = model_->components();
        if (gamma.size() < static_cast<size_t>(k)) throw InvalidArgument("posterior buffer too small");
        double lse = log_density(v, gamma);
        for (int j = 0; j < k; ++j) gamma[j] = std::exp(gamma[j] - lse);
        return lse;
    }

    double inv_var(int k, int i) const { return inv_var_[k][i]; }

private:
    const GmmModel* model_;
    std::vector<double> log_weight_;
    std::vector<double> log_norm_;
    std::vector<std::array<double, 8>> inv_var_;
};

inline double log_density(const GmmModel& m, const DiffVector& v) {
    return GmmEval(m).log_density(v);
}

inline std::vector<double> posteriors(const GmmModel& m, const DiffVector& v) {
    std::vector<double> g(m.components());
    GmmEval(m).posteriors_into(v, g);
    return g;
}

// Uniform sample without replacement of up to cfg.max_samples differential
// vectors across all images, in deterministic order under a fixed seed.
inline std::vector<DiffVector> subsample_features(std::span<const GrayImage> images,
                                                  SamplingMode mode, const TrainConfig& cfg) {
    if (images.empty()) throw InvalidArgument("subsample_features: empty image set");
    size_t total = 0;
    for (const GrayImage& img : images) {
        if (img.width < 3 || img.height < 3)
            throw InvalidArgument("subsample_features: image smaller than 3x3");
        total += static_cast<size_t>(img.width - 2) * static_cast<size_t>(img.height - 2);
    }
    std::vector<DiffVector> out;
    if (total <= cfg.max_samples) {
        out.reserve(total);
        for (const GrayImage& img : images) append_diff_vectors(img, mode, out);
        return out;
    }
    // Partial Fisher-Yates over global vector indices, then a single ordered pass.
    Rng rng(cfg.seed);
    std::vector<uint64_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = 0; i < cfg.max_samples; ++i) {
        size_t j = i + static_cast<size_t>(rng.uniform_index(total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cfg.max_samples);
    std::sort(idx.begin(), idx.end());
    out.reserve(cfg.max_samples);
    size_t base = 0, next = 0;
    for (const GrayImage& img : images) {
        size_t count = static_cast<size_t>(img.width - 2) * static_cast<size_t>(img.height - 2);
        if (next < idx.size() && idx[next] < base + count) {
            std::vector<DiffSample> all = extract_diff_vectors(img, mode);
            while (next < idx.size() && idx[next] < base + count)
                out.push_back(all[idx[next++] - base].v);
        }
        base += count;
    }
    return out;
}

namespace detail {

inline double sq_dist(const DiffVector& a, const std::array<double, 8>& b) {
    double s = 0.0;
    for (int i = 0; i < kDiffDim; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace detail

// k-means++ seeding followed by Lloyd iterations. Weights are cluster
// fractions; variances are per-dimension within-cluster variances, floored.
// An emptied cluster is reseeded from the point farthest from its centroid.
inline GmmModel kmeans_init(std::span<const DiffVector> samples, int k, uint64_t seed,
                            int lloyd_iters = 50) {
    size_t n = samples.size();
    if (k < 1) throw InvalidArgument("kmeans_init: need at least one component");
    if (n < static_cast<size_t>(k))
        throw InvalidArgument("kmeans_init: fewer samples (" + std::to_string(n) +
                              ") than components (" + std::to_string(k) + ")");
    Rng rng(seed);
    std::vector<std::array<double, 8>> centers(k);

    // k-means++ seeding
    centers[0] = samples[rng.uniform_index(n)];
    std::vector<double> d2(n);
    for (size_t i = 0; i < n; ++i) d2[i] = detail::sq_dist(samples[i], centers[0]);
    for (int c = 1; c < k; ++c) {
        double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        size_t pick;
        if (total > 0.0) {
            double target = rng.uniform_real() * total;
            double acc = 0.0;
            pick = n - 1;
            for (size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_index(n);
        }
        centers[c] = samples[pick];
        for (size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], detail::sq_dist(samples[i], centers[c]));
    }

    std::vector<int> assign(n, -1);
    std::vector<size_t> counts(k, 0);
    for (int iter = 0; iter < lloyd_iters; ++iter) {
        bool changed = false;
        for (size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = detail::sq_dist(samples[i], centers[0]);
            for (int c = 1; c < k; ++c) {
                double d = detail::sq_dist(samples[i], centers[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        std::vector<std::array<double, 8>> sums(k, std::array<double, 8>{});
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < n; ++i) {
            counts[assign[i]]++;
            for (int d = 0; d < kDiffDim; ++d) sums[assign[i]][d] += samples[i][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // reseed from the globally farthest point
                size_t far = 0;
                double fd = -1.0;
                for (size_t i = 0; i < n; ++i) {
                    double d = detail::sq_dist(samples[i], centers[assign[i]]);
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centers[c] = samples[far];
                assign[far] = c;
            } else {
                for (int d = 0; d < kDiffDim; ++d) centers[c][d] = sums[c][d] / counts[c];
            }
        }
    }

    // final assignment for weights/variances
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < n; ++i) {
        int best = 0;
        double bd = detail::sq_dist(samples[i], centers[0]);
        for (int c = 1; c < k; ++c) {
            double d = detail::sq_dist(samples[i], centers[c]);
            if (d < bd) {
                bd = d;
                best = c;
            }
        }
        assign[i] = best;
        counts[best]++;
    }
    GmmModel m;
    m.weights.assign(k, 0.0);
    m.means.assign(k, {});
    m.vars.assign(k, {});
    std::vector<std::array<double, 8>> sq(k, std::array<double, 8>{});
    for (size_t i = 0; i < n; ++i) {
        int c = assign[i];
        for (int d = 0; d < kDiffDim; ++d) {
            m.means[c][d] += samples[i][d];
            sq[c][d] += samples[i][d] * samples[i][d];
        }
    }
    for (int c = 0; c < k; ++c) {
        size_t cnt = std::max<size_t>(counts[c], 1);
        m.weights[c] = static_cast<double>(std::max<size_t>(counts[c], 1)) / n;
        for (int d = 0; d < kDiffDim; ++d) {
            m.means[c][d] /= cnt;
            double var = sq[c][d] / cnt - m.means[c][d] * m.means[c][d];
            m.vars[c][d] = std::max(var, kVarianceFloor);
        }
    }
    double wsum = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
    for (double& w : m.weights) w /= wsum;
    return m;
}

struct EmTrace {
    std::vector<double> avg_log_likelihood;  // one entry per iteration
    int iterations = 0;
    bool converged = false;
};

// Standard EM for the diagonal GMM. The mean log-likelihood is non-decreasing
// per iteration; variances are floored every M-step. Aborts with a diagnostic
// if the responsibilities turn NaN.
inline GmmModel em_fit(std::span<const DiffVector> samples, GmmModel model,
                       const TrainConfig& cfg, EmTrace* trace = nullptr) {
    model.validate();
    size_t n = samples.size();
    if (n == 0) throw InvalidArgument("em_fit: no samples");
    int k = model.components();
    double prev_ll = -std::numeric_limits<double>::infinity();
    if (trace) *trace = EmTrace{};

    constexpr size_t kBlocks = 64;  // fixed partition so reductions are thread-count independent
    size_t block = (n + kBlocks - 1) / kBlocks;
    struct Acc {
        std::vector<double> nk;
        std::vector<std::array<double, 8>> sum;
        std::vector<std::array<double, 8>> sumsq;
        double ll = 0.0;
    };

    for (int iter = 0; iter < cfg.em_max_iters; ++iter) {
        GmmEval eval(model);
        std::vector<Acc> acc(kBlocks);
        parallel_for((n + block - 1) / block, [&](size_t b) {
            size_t lo = b * block;
            size_t hi = std::min(n, lo + block);
            Acc& a = acc[b];
            a.nk.assign(k, 0.0);
            a.sum.assign(k, {});
            a.sumsq.assign(k, {});
            std::vector<double> gamma(k);
            for (size_t i = lo; i < hi; ++i) {
                a.ll += eval.posteriors_into(samples[i], gamma);
                for (int c = 0; c < k; ++c) {
                    double g = gamma[c];
                    if (g == 0.0) continue;
                    a.nk[c] += g;
                    for (int d = 0; d < kDiffDim; ++d) {
                        double x = samples[i][d];
                        a.sum[c][d] += g * x;
                        a.sumsq[c][d] += g * x * x;
                    }
                }
            }
        });
        std::vector<double> nk(k, 0.0);
        std::vector<std::array<double, 8>> sum(k, std::array<double, 8>{});
        std::vector<std::array<double, 8>> sumsq(k, std::array<double, 8>{});
        double ll = 0.0;
        for (const Acc& a : acc) {
            if (a.nk.empty()) continue;
            ll += a.ll;
            for (int c = 0; c < k; ++c) {
                nk[c] += a.nk[c];
                for (int d = 0; d < kDiffDim; ++d) {
                    sum[c][d] += a.sum[c][d];
                    sumsq[c][d] += a.sumsq[c][d];
                }
            }
        }
        double avg_ll = ll / static_cast<double>(n);
        if (std::isnan(avg_ll))
            throw Error("em_fit: NaN log-likelihood at iteration " + std::to_string(iter));
        if (trace) {
            trace->avg_log_likelihood.push_back(avg_ll);
            trace->iterations = iter + 1;
        }

        // M-step
        for (int c = 0; c < k; ++c) {
            double denom = std::max(nk[c], 1e-10 * static_cast<double>(n));
            if (std::isnan(nk[c]))
                throw Error("em_fit: NaN responsibilities at iteration " + std::to_string(iter));
            model.weights[c] = denom / static_cast<double>(n);
            for (int d = 0; d < kDiffDim; ++d) {
                double mean = sum[c][d] / denom;
                model.means[c][d] = mean;
                model.vars[c][d] = std::max(sumsq[c][d] / denom - mean * mean, kVarianceFloor);
            }
        }
        double wsum = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
        for (double& w : model.weights) w /= wsum;

        double improvement = (avg_ll - prev_ll) / std::max(std::abs(prev_ll), 1e-30);
        if (iter > 0 && improvement < cfg.em_rel_tol) {
            if (trace) trace->converged = true;
            break;
        }
        prev_ll = avg_ll;
    }
    return model;
}

struct GmmTrainResult {
    GmmModel model;
    EmTrace trace;
    std::vector<DiffVector> samples;  // the subsampled training features
};

inline GmmTrainResult train_gmm(std::span<const GrayImage> images, SamplingMode mode,
                                const TrainConfig& cfg) {
    GmmTrainResult r;
    r.samples = subsample_features(images, mode, cfg);
    GmmModel init = kmeans_init(r.samples, cfg.components, cfg.seed, cfg.kmeans_iters);
    init.mode = mode;
    r.model = em_fit(r.samples, init, cfg, &r.trace);
    r.model.mode = mode;
    return r;
}

inline constexpr char kGmmMagic[] = "LHSGMM\n";
inline constexpr uint32_t kGmmVersion = 1;

inline void save_gmm(const GmmModel& m, std::ostream& os) {
    m.validate();
    io::write_magic(os, kGmmMagic);
    io::write_u32(os, kGmmVersion);
    io::write_u32(os, static_cast<uint32_t>(m.components()));
    io::write_u32(os, kDiffDim);
    io::write_u32(os, static_cast<uint32_t>(m.mode));
    io::write_f64_array(os, m.weights.data(), m.weights.size());
    for (const auto& mu : m.means) io::write_f64_array(os, mu.data(), kDiffDim);
    for (const auto& var : m.vars) io::write_f64_array(os, var.data(), kDiffDim);
}

inline GmmModel load_gmm(std::istream& is) {
    io::expect_magic(is, kGmmMagic, "GMM model");
    uint32_t version = io::read_u32(is);
    if (version != kGmmVersion) throw IoError("unsupported GMM model version");
    uint32_t k = io::read_u32(is);
    uint32_t d = io::read_u32(is);
    if (d != kDiffDim) throw IoError("GMM model has unexpected dimensionality");
    uint32_t mode = io::read_u32(is);
    if (mode > 1) throw IoError("GMM model has unknown sampling mode");
    GmmModel m;
    m.mode = static_cast<SamplingMode>(mode);
    m.weights.resize(k);
    m.means.resize(k);
    m.vars.resize(k);
    io::read_f64_array(is, m.weights.data(), k);
    for (auto& mu : m.means) io::read_f64_array(is, mu.data(), kDiffDim);
    for (auto& var : m.vars) io::read_f64_array(is, var.data(), kDiffDim);
    m.validate();
    return m;
}

inline void save_gmm(const GmmModel& m, const std::string& path) {
    auto os = io::open_output(path);
    save_gmm(m, os);
    if (!os) throw IoError("write failed: " + path);
}

inline GmmModel load_gmm(const std::string& path) {
    auto is = io::open_input(path);
    return load_gmm(is);
}

}  // namespace lhs
