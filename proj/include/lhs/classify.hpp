// Linear one-vs-rest SVM (L2-regularized hinge loss, solved by dual
// coordinate descent), cross-validated cost selection, verification threshold
// search and accuracy/EER reporting.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lhs/io.hpp"
#include "lhs/linalg.hpp"
#include "lhs/rng.hpp"
#include "lhs/util.hpp"

namespace lhs {

struct LinearSvmModel {
    std::vector<std::string> labels;  // sorted class order
    int dim = 0;                      // feature dimension (bias excluded)
    Matrix weights;                   // one row per class, dim + 1 with trailing bias

    double decision(int cls, std::span<const double> x) const {
        const double* w = weights.row(cls);
        double s = w[dim];
        for (int i = 0; i < dim; ++i) s += w[i] * x[i];
        return s;
    }
};

namespace detail {

// Dual coordinate descent for min_w 0.5 w.w + C sum max(0, 1 - y_i w.x_i),
// with the bias folded in as a constant 1 feature. Follows the usual
// projected-gradient bookkeeping: stop when the epoch's projected-gradient
// spread drops below tol.
inline std::vector<double> dcd_binary(const Matrix& x, std::span<const int> y, double c,
                                      uint64_t seed, double tol, int max_epochs) {
    int n = x.rows, dim = x.cols;
    std::vector<double> w(dim + 1, 0.0);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qii(n);
    for (int i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double s = 1.0;  // bias feature
        for (int j = 0; j < dim; ++j) s += xi[j] * xi[j];
        qii[i] = s;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        rng.shuffle(order);
        double pg_max = -std::numeric_limits<double>::infinity();
        double pg_min = std::numeric_limits<double>::infinity();
        for (int i : order) {
            const double* xi = x.row(i);
            double wx = w[dim];
            for (int j = 0; j < dim; ++j) wx += w[j] * xi[j];
            double g = y[i] * wx - 1.0;
            double pg;
            if (alpha[i] <= 0.0)
                pg = std::min(g, 0.0);
            else if (alpha[i] >= c)
                pg = std::max(g, 0.0);
            else
                pg = g;
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (std::abs(pg) > 1e-12) {
                double old = alpha[i];
                alpha[i] = std::min(std::max(old - g / qii[i], 0.0), c);
                double delta = (alpha[i] - old) * y[i];
                for (int j = 0; j < dim; ++j) w[j] += delta * xi[j];
                w[dim] += delta;
            }
        }
        if (pg_max - pg_min < tol) break;
    }
    return w;
}

inline std::vector<std::string> distinct_sorted_labels(std::span<const std::string> y) {
    std::vector<std::string> labels(y.begin(), y.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

}  // namespace detail

inline LinearSvmModel svm_train(const Matrix& x, std::span<const std::string> y, double c,
                                uint64_t seed, double tol = 1e-4, int max_epochs = 1000) {
    if (x.rows != static_cast<int>(y.size()))
        throw InvalidArgument("svm_train: sample/label count mismatch");
    LinearSvmModel m;
    m.labels = detail::distinct_sorted_labels(y);
    if (m.labels.size() < 2) throw InvalidArgument("svm_train: need at least 2 classes");
    m.dim = x.cols;
    m.weights = Matrix(static_cast<int>(m.labels.size()), x.cols + 1);
    std::vector<int> ybin(x.rows);
    for (size_t cls = 0; cls < m.labels.size(); ++cls) {
        for (int i = 0; i < x.rows; ++i) ybin[i] = y[i] == m.labels[cls] ? 1 : -1;
        std::vector<double> w = detail::dcd_binary(x, ybin, c, seed + cls, tol, max_epochs);
        std::copy(w.begin(), w.end(), m.weights.row(static_cast<int>(cls)));
    }
    return m;
}

inline std::string svm_predict(const LinearSvmModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.dim)
        throw InvalidArgument("svm_predict: descriptor dimension mismatch");
    int best = 0;
    double best_score = m.decision(0, x);
    for (size_t c = 1; c < m.labels.size(); ++c) {
        double s = m.decision(static_cast<int>(c), x);
        if (s > best_score) {  // ties keep the earlier class
            best_score = s;
            best = static_cast<int>(c);
        }
    }
    return m.labels[best];
}

inline std::vector<std::string> svm_predict_batch(const LinearSvmModel& m, const Matrix& x) {
    std::vector<std::string> out(x.rows);
    for (int i = 0; i < x.rows; ++i) out[i] = svm_predict(m, x.row_span(i));
    return out;
}

// Seed-deterministic stratified fold assignment; the folds partition [0, n).
inline std::vector<int> cv_fold_assignment(std::span<const std::string> y, int folds,
                                           uint64_t seed) {
    std::vector<int> fold(y.size(), 0);
    Rng rng(seed);
    for (const std::string& label : detail::distinct_sorted_labels(y)) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < y.size(); ++i)
            if (y[i] == label) idx.push_back(i);
        rng.shuffle(idx);
        for (size_t p = 0; p < idx.size(); ++p) fold[idx[p]] = static_cast<int>(p % folds);
    }
    return fold;
}

struct CvResult {
    double c = 1.0;
    double accuracy = 0.0;
};

// Returns the grid value maximizing mean fold accuracy; ties go to the
// smaller C.
inline CvResult svm_cv_select_c(const Matrix& x, std::span<const std::string> y,
                                std::span<const double> c_grid, int folds, uint64_t seed) {
    if (c_grid.empty()) throw InvalidArgument("svm_cv_select_c: empty C grid");
    if (x.rows < folds)
        throw InvalidArgument("svm_cv_select_c: fewer samples than folds");
    std::vector<double> grid(c_grid.begin(), c_grid.end());
    std::sort(grid.begin(), grid.end());
    std::vector<int> fold = cv_fold_assignment(y, folds, seed);

    CvResult best{grid[0], -1.0};
    for (double c : grid) {
        double acc_sum = 0.0;
        int used_folds = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<int> train_idx, val_idx;
            for (int i = 0; i < x.rows; ++i) (fold[i] == f ? val_idx : train_idx).push_back(i);
            if (val_idx.empty()) continue;
            Matrix xt(static_cast<int>(train_idx.size()), x.cols);
            std::vector<std::string> yt(train_idx.size());
            for (size_t i = 0; i < train_idx.size(); ++i) {
                std::copy(x.row(train_idx[i]), x.row(train_idx[i]) + x.cols, xt.row(static_cast<int>(i)));
                yt[i] = y[train_idx[i]];
            }
            LinearSvmModel m = svm_train(xt, yt, c, seed + f);
            int hits = 0;
            for (int i : val_idx)
                if (svm_predict(m, x.row_span(i)) == y[i]) ++hits;
            acc_sum += static_cast<double>(hits) / val_idx.size();
            ++used_folds;
        }
        if (used_folds == 0) throw InvalidArgument("svm_cv_select_c: fold underflow");
        double acc = acc_sum / used_folds;
        if (acc > best.accuracy) best = {c, acc};
    }
    return best;
}

// Threshold on verification scores (lower score = more similar). Scans the
// midpoints between consecutive distinct sorted scores plus one position
// beyond each extreme, maximizes training accuracy, and breaks ties toward
// the lower threshold. Same-pairs are those with score strictly below the
// threshold.
inline double verify_threshold(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw InvalidArgument("verify_threshold: score/label count mismatch");
    size_t n = scores.size();
    bool has_pos = false, has_neg = false;
    for (int l : labels) (l > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw InvalidArgument("verify_threshold: need both same and different pairs");

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    size_t total_pos = 0;
    for (int l : labels) total_pos += l > 0;
    size_t total_neg = n - total_pos;

    // Walking the sorted scores: with threshold below everything, all pairs
    // predict "different", so correct = total_neg.
    double best_acc = -1.0, best_thr = 0.0;
    size_t pos_below = 0, neg_below = 0;
    for (size_t i = 0; i <= n; ++i) {
        bool boundary = i == 0 || i == n || scores[order[i - 1]] < scores[order[i]];
        if (boundary) {
            double thr;
            if (i == 0)
                thr = scores[order[0]] - 1.0;
            else if (i == n)
                thr = scores[order[n - 1]] + 1.0;
            else
                thr = 0.5 * (scores[order[i - 1]] + scores[order[i]]);
            double acc = static_cast<double>(pos_below + (total_neg - neg_below)) / n;
            if (acc > best_acc) {
                best_acc = acc;
                best_thr = thr;
            }
        }
        if (i < n) (labels[order[i]] > 0 ? pos_below : neg_below) += 1;
    }
    return best_thr;
}

// Equal error rate of the score distribution (lower = same), with linear
// interpolation between the operating points where FAR crosses FRR.
inline double roc_eer(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InvalidArgument("roc_eer: score/label count mismatch");
    size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    double total_pos = 0, total_neg = 0;
    for (int l : labels) (l > 0 ? total_pos : total_neg) += 1;
    if (total_pos == 0 || total_neg == 0)
        throw InvalidArgument("roc_eer: need both same and different pairs");

    double prev_far = 0.0, prev_frr = 1.0;
    double pos_below = 0, neg_below = 0;
    for (size_t i = 0; i <= n; ++i) {
        double far = neg_below / total_neg;        // different pairs accepted as same
        double frr = 1.0 - pos_below / total_pos;  // same pairs rejected
        if (far >= frr) {
            double d_prev = prev_far - prev_frr;
            double d_cur = far - frr;
            if (d_cur == d_prev) return far;
            double t = (0.0 - d_prev) / (d_cur - d_prev);
            return prev_far + t * (far - prev_far);
        }
        prev_far = far;
        prev_frr = frr;
        if (i < n) (labels[order[i]] > 0 ? pos_below : neg_below) += 1;
    }
    return 1.0;  // unreachable: far reaches 1 and frr reaches 0
}

struct EvalReport {
    double accuracy = 0.0;
    std::vector<std::string> labels;
    std::vector<std::vector<int>> confusion;  // confusion[truth][prediction]
    std::map<std::string, double> per_class_accuracy;
    // verification only
    bool verification = false;
    double threshold = 0.0;
    double eer = 0.0;
};

inline EvalReport eval_classification(std::span<const std::string> predictions,
                                      std::span<const std::string> truth) {
    if (predictions.size() != truth.size())
        throw InvalidArgument("eval_report: prediction/truth length mismatch");
    if (truth.empty()) throw InvalidArgument("eval_report: empty evaluation set");
    EvalReport r;
    std::vector<std::string> all(truth.begin(), truth.end());
    all.insert(all.end(), predictions.begin(), predictions.end());
    r.labels = detail::distinct_sorted_labels(all);
    std::map<std::string, int> index;
    for (size_t i = 0; i < r.labels.size(); ++i) index[r.labels[i]] = static_cast<int>(i);
    r.confusion.assign(r.labels.size(), std::vector<int>(r.labels.size(), 0));
    int hits = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        r.confusion[index[truth[i]]][index[predictions[i]]]++;
        hits += predictions[i] == truth[i];
    }
    r.accuracy = static_cast<double>(hits) / truth.size();
    for (size_t c = 0; c < r.labels.size(); ++c) {
        int row_total = 0;
        for (int v : r.confusion[c]) row_total += v;
        if (row_total > 0)
            r.per_class_accuracy[r.labels[c]] =
                static_cast<double>(r.confusion[c][c]) / row_total;
    }
    return r;
}

inline EvalReport eval_verification(std::span<const double> scores, std::span<const int> labels,
                                    double threshold) {
    if (scores.size() != labels.size())
        throw InvalidArgument("eval_report: score/label length mismatch");
    if (scores.empty()) throw InvalidArgument("eval_report: empty evaluation set");
    EvalReport r;
    r.verification = true;
    r.threshold = threshold;
    r.labels = {"different", "same"};
    r.confusion.assign(2, std::vector<int>(2, 0));
    int hits = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        int truth = labels[i] > 0 ? 1 : 0;
        int pred = scores[i] < threshold ? 1 : 0;
        r.confusion[truth][pred]++;
        hits += truth == pred;
    }
    r.accuracy = static_cast<double>(hits) / scores.size();
    r.eer = roc_eer(scores, labels);
    for (int c = 0; c < 2; ++c) {
        int row_total = r.confusion[c][0] + r.confusion[c][1];
        if (row_total > 0)
            r.per_class_accuracy[r.labels[c]] = static_cast<double>(r.confusion[c][c]) / row_total;
    }
    return r;
}

inline constexpr char kSvmMagic[] = "LHSSVM\n";
inline constexpr uint32_t kSvmVersion = 1;

inline void save_svm(const LinearSvmModel& m, std::ostream& os) {
    io::write_magic(os, kSvmMagic);
    io::write_u32(os, kSvmVersion);
    io::write_u32(os, static_cast<uint32_t>(m.labels.size()));
    io::write_u32(os, static_cast<uint32_t>(m.dim));
    for (const std::string& l : m.labels) io::write_string(os, l);
    io::write_f64_array(os, m.weights.a.data(), m.weights.a.size());
}

inline LinearSvmModel load_svm(std::istream& is) {
    io::expect_magic(is, kSvmMagic, "SVM model");
    uint32_t version = io::read_u32(is);
    if (version != kSvmVersion) throw IoError("unsupported SVM model version");
    LinearSvmModel m;
    uint32_t n_classes = io::read_u32(is);
    m.dim = static_cast<int>(io::read_u32(is));
    m.labels.resize(n_classes);
    for (auto& l : m.labels) l = io::read_string(is);
    m.weights = Matrix(static_cast<int>(n_classes), m.dim + 1);
    io::read_f64_array(is, m.weights.a.data(), m.weights.a.size());
    return m;
}

inline void save_svm(const LinearSvmModel& m, const std::string& path) {
    auto os = io::open_output(path);
    save_svm(m, os);
    if (!os) throw IoError("write failed: " + path);
}

inline LinearSvmModel load_svm(const std::string& path) {
    auto is = io::open_input(path);
    return load_svm(is);
}

}  // namespace lhs
