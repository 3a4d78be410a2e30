// LBP and LTP baselines: sign codes of the differential vector, uniform-pattern
// bucketing and sqrt-of-L1 histogram normalization.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lhs/image.hpp"
#include "lhs/util.hpp"

namespace lhs {

// Bit i is set iff component i of the differential vector is >= 0 (ties count
// as 1, following the original LBP convention).
inline uint8_t lbp_code(const DiffVector& v) {
    uint8_t code = 0;
    for (int i = 0; i < 8; ++i)
        if (v[i] >= 0.0) code |= static_cast<uint8_t>(1u << i);
    return code;
}

// Split ternary coding: the positive code thresholds at > t, the negative code
// at < -t. Components within [-t, t] set no bit in either half.
inline std::pair<uint8_t, uint8_t> ltp_split_codes(const DiffVector& v, double t) {
    if (t < 0.0) throw InvalidArgument("LTP tolerance must be non-negative");
    uint8_t pos = 0, neg = 0;
    for (int i = 0; i < 8; ++i) {
        if (v[i] > t) pos |= static_cast<uint8_t>(1u << i);
        if (v[i] < -t) neg |= static_cast<uint8_t>(1u << i);
    }
    return {pos, neg};
}

inline int circular_transitions(uint8_t code) {
    int n = 0;
    for (int i = 0; i < 8; ++i) {
        int a = code >> i & 1;
        int b = code >> ((i + 1) & 7) & 1;
        n += a != b;
    }
    return n;
}

inline constexpr int kUniformBuckets = 59;  // 58 uniform codes + 1 catch-all
inline constexpr int kNonUniformBucket = 58;

// Maps each 8-bit code to a histogram bucket: the 58 uniform codes (at most
// one 0->1 and one 1->0 circular transition) fill buckets 0..57 in ascending
// code order, everything else lands in bucket 58.
struct UniformTable {
    std::array<uint8_t, 256> bucket{};
    int operator[](uint8_t code) const { return bucket[code]; }
};

inline UniformTable build_uniform_table() {
    UniformTable t;
    int next = 0;
    for (int code = 0; code < 256; ++code) {
        if (circular_transitions(static_cast<uint8_t>(code)) <= 2)
            t.bucket[code] = static_cast<uint8_t>(next++);
        else
            t.bucket[code] = kNonUniformBucket;
    }
    return t;
}

inline const UniformTable& uniform_table() {
    static const UniformTable table = build_uniform_table();
    return table;
}

struct PatternVariant {
    enum class Kind { Lbp, Ltp };
    Kind kind = Kind::Lbp;
    double tolerance = 5.0;  // LTP only; intensity units on [0, 255]

    static PatternVariant lbp() { return {Kind::Lbp, 0.0}; }
    static PatternVariant ltp(double t) { return {Kind::Ltp, t}; }
};

// Bucketed code counts over all interior pixels: 59 bins for LBP, 2x59
// (positive half then negative half) for LTP.
inline std::vector<double> pattern_histogram(const GrayImage& img, SamplingMode mode,
                                             const PatternVariant& variant) {
    const UniformTable& table = uniform_table();
    bool ternary = variant.kind == PatternVariant::Kind::Ltp;
    std::vector<double> h(ternary ? 2 * kUniformBuckets : kUniformBuckets, 0.0);
    for (const DiffSample& s : extract_diff_vectors(img, mode)) {
        if (ternary) {
            auto [pos, neg] = ltp_split_codes(s.v, variant.tolerance);
            h[table[pos]] += 1.0;
            h[kUniformBuckets + table[neg]] += 1.0;
        } else {
            h[table[lbp_code(s.v)]] += 1.0;
        }
    }
    return h;
}

// h <- sqrt(h / ||h||_1), elementwise; the result has unit l2 norm.
inline std::vector<double> normalize_hist(std::vector<double> h) {
    double sum = 0.0;
    for (double v : h) sum += v;
    if (sum <= 0.0) throw InvalidArgument("cannot normalize an all-zero histogram");
    for (double& v : h) v = std::sqrt(v / sum);
    return h;
}

}  // namespace lhs
