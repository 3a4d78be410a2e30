// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances and runtime budget in code.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lhs/lhs.hpp"

using namespace lhs;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail,
            double seconds) {
    std::ostringstream line;
    line << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name;
    if (!detail.empty()) line << " (" << detail << ")";
    line.setf(std::ios::fixed);
    line.precision(1);
    line << " [" << seconds << "s]";
    std::cout << line.str() << std::endl;
    if (!pass) ++failures;
}

void report_skip(int id, const std::string& name, const std::string& why) {
    std::cout << "[SKIP] criterion " << id << ": " << name << " (" << why << ")" << std::endl;
}

GmmModel random_model(int k, Rng& rng) {
    GmmModel m;
    m.weights.assign(k, 0.0);
    m.means.assign(k, {});
    m.vars.assign(k, {});
    double wsum = 0;
    for (int c = 0; c < k; ++c) {
        m.weights[c] = rng.uniform_real(0.5, 1.5);
        wsum += m.weights[c];
        for (int i = 0; i < 8; ++i) {
            m.means[c][i] = rng.uniform_real(-15, 15);
            m.vars[c][i] = rng.uniform_real(0.3, 25);
        }
    }
    for (double& w : m.weights) w /= wsum;
    return m;
}

DiffVector sample_from(const GmmModel& m, Rng& rng) {
    double u = rng.uniform_real();
    size_t k = 0;
    double acc = 0.0;
    for (size_t j = 0; j < m.weights.size(); ++j) {
        acc += m.weights[j];
        k = j;
        if (u < acc) break;
    }
    DiffVector v;
    for (int i = 0; i < kDiffDim; ++i)
        v[i] = m.means[k][i] + std::sqrt(m.vars[k][i]) * rng.normal();
    return v;
}

GrayImage random_integer_image(int w, int h, uint64_t seed) {
    Rng rng(seed);
    GrayImage img(w, h);
    for (double& v : img.data) v = static_cast<double>(rng.uniform_index(200));
    return img;
}

// scratch directory for the criteria that touch disk
struct Scratch {
    std::filesystem::path path;
    Scratch() {
        path = std::filesystem::temp_directory_path() /
               ("lhs-acceptance-" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~Scratch() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// --------------------------------------------------------------------------
// 1. Fisher scores match central finite differences of log_density.
// --------------------------------------------------------------------------
void criterion_1() {
    auto t0 = Clock::now();
    Rng rng(1001);
    const int ks[3] = {1, 2, 8};
    double worst = 0.0;
    bool pass = true;
    for (int inst = 0; inst < 200; ++inst) {
        GmmModel m = random_model(ks[inst % 3], rng);
        DiffVector v;
        for (double& x : v) x = rng.uniform_real(-25, 25);
        std::vector<double> fs = fisher_score(m, v);
        auto stencil = [](auto&& f, double h) {  // 4th-order five-point central difference
            return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
        };
        for (int c = 0; c < m.components() && pass; ++c) {
            for (int i = 0; i < 8; ++i) {
                double h = 3e-4 * std::sqrt(m.vars[c][i]);
                double fd_mu = stencil(
                    [&](double step) {
                        GmmModel p = m;
                        p.means[c][i] += step;
                        return log_density(p, v);
                    },
                    h);
                double prec = 1.0 / m.vars[c][i];
                double fd_var = stencil(
                    [&](double step) {
                        GmmModel p = m;
                        p.vars[c][i] = 1.0 / (prec + step);
                        return log_density(p, v);
                    },
                    3e-4 * prec);

                double got_mu = fs[kScorePerComponent * c + i];
                double got_var = fs[kScorePerComponent * c + kDiffDim + i];
                for (auto [got, want] : {std::pair{got_mu, fd_mu}, std::pair{got_var, fd_var}}) {
                    double err = std::abs(got - want);
                    double bound = std::max(1e-8, 1e-4 * std::max(std::abs(got), std::abs(want)));
                    if (err > bound) pass = false;
                    double rel = err / std::max(1e-30, std::max(std::abs(got), std::abs(want)));
                    worst = std::max(worst, rel);
                }
            }
        }
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs >= 10.0) pass = false;
    std::ostringstream d;
    d << "200 instances, K in {1,2,8}, max rel err " << std::scientific << worst;
    report(1, pass, "fisher scores match central finite differences", d.str(), secs);
}

// --------------------------------------------------------------------------
// 2. EM soundness on a separated two-component mixture.
// --------------------------------------------------------------------------
void criterion_2() {
    auto t0 = Clock::now();
    GmmModel truth;
    truth.weights = {0.5, 0.5};
    truth.means.assign(2, {});
    truth.vars.assign(2, {});
    for (int i = 0; i < 8; ++i) {
        truth.means[1][i] = 10.0 / std::sqrt(8.0);  // ||mu1 - mu0|| = 10 sigma
        truth.vars[0][i] = truth.vars[1][i] = 1.0;
    }
    Rng rng(2002);
    std::vector<DiffVector> samples;
    samples.reserve(50000);
    for (int i = 0; i < 50000; ++i) samples.push_back(sample_from(truth, rng));

    TrainConfig cfg;
    cfg.components = 2;
    cfg.seed = 7;
    EmTrace trace;
    GmmModel fit = em_fit(samples, kmeans_init(samples, 2, 7, cfg.kmeans_iters), cfg, &trace);

    bool monotone = true;
    for (size_t i = 1; i < trace.avg_log_likelihood.size(); ++i)
        if (trace.avg_log_likelihood[i] < trace.avg_log_likelihood[i - 1] - 1e-8)
            monotone = false;
    double w_err = std::max(std::abs(fit.weights[0] - 0.5), std::abs(fit.weights[1] - 0.5));
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    bool pass = monotone && w_err <= 0.05 && secs < 30.0;
    std::ostringstream d;
    d << trace.iterations << " iterations, monotone=" << (monotone ? "yes" : "no")
      << ", weight err " << w_err;
    report(2, pass, "EM log-likelihood monotone and weights recovered", d.str(), secs);
}

// --------------------------------------------------------------------------
// 3. Expected Fisher score under the generating model is zero.
// --------------------------------------------------------------------------
void criterion_3() {
    auto t0 = Clock::now();
    Rng rng(3003);
    GmmModel m = random_model(3, rng);
    GmmEval eval(m);
    const size_t n = 100'000;
    int dim = fisher_dim(3);
    std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0), score(dim), gamma(3);
    for (size_t i = 0; i < n; ++i) {
        DiffVector v = sample_from(m, rng);
        fisher_score_into(eval, v, score, gamma);
        for (int j = 0; j < dim; ++j) {
            sum[j] += score[j];
            sumsq[j] += score[j] * score[j];
        }
    }
    bool pass = true;
    double worst_sigmas = 0.0;
    for (int j = 0; j < dim; ++j) {
        double mean = sum[j] / n;
        double var = sumsq[j] / n - mean * mean;
        double se = std::sqrt(var / n);
        double sigmas = std::abs(mean) / std::max(se, 1e-300);
        worst_sigmas = std::max(worst_sigmas, sigmas);
        if (std::abs(mean) >= 5.0 * se) pass = false;
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "100k samples, worst |mean|/SE = " << worst_sigmas;
    report(3, pass, "mean Fisher score of model samples is zero", d.str(), secs);
}

// --------------------------------------------------------------------------
// 4. Descriptor dimension arithmetic with the 7x4 grid.
// --------------------------------------------------------------------------
void criterion_4() {
    auto t0 = Clock::now();
    Rng rng(4004);
    GrayImage img = random_integer_image(40, 70, 44);
    const int ks[5] = {4, 8, 16, 24, 32};
    const int want[5] = {1792, 3584, 7168, 10752, 14336};
    bool pass = true;
    std::ostringstream d;
    for (int i = 0; i < 5; ++i) {
        GmmModel m = random_model(ks[i], rng);
        WhiteningStats stats;
        stats.mean.assign(fisher_dim(ks[i]), 0.0);
        stats.stddev.assign(fisher_dim(ks[i]), 1.0);
        Descriptor desc = encode_image(m, stats, img, SamplingMode::Circular, GridSpec{7, 4});
        if (desc.dim() != want[i]) pass = false;
        d << (i ? " " : "") << "K=" << ks[i] << ":" << desc.dim();
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(4, pass, "7x4-grid dimensions are {1792,3584,7168,10752,14336}", d.str(), secs);
}

// --------------------------------------------------------------------------
// 5. LBP fast path equals brute force; exactly 58 uniform codes.
// --------------------------------------------------------------------------
void criterion_5() {
    auto t0 = Clock::now();
    const int dr[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
    const int dc[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
    bool pass = true;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        GrayImage img = random_integer_image(5, 5, 50000 + seed);
        auto samples = extract_diff_vectors(img, SamplingMode::Rectangular);
        size_t pos = 0;
        for (int r = 1; r < 4; ++r)
            for (int c = 1; c < 4; ++c, ++pos) {
                uint8_t brute = 0;
                for (int k = 0; k < 8; ++k)
                    if (img.at(r + dr[k], c + dc[k]) >= img.at(r, c))
                        brute |= static_cast<uint8_t>(1u << k);
                if (lbp_code(samples[pos].v) != brute) pass = false;
            }
    }
    int uniform = 0;
    for (int code = 0; code < 256; ++code)
        if (circular_transitions(static_cast<uint8_t>(code)) <= 2) ++uniform;
    if (uniform != 58) pass = false;
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream d;
    d << "1000 images, " << uniform << " uniform codes";
    report(5, pass, "LBP equals brute force; 58 uniform patterns", d.str(), secs);
}

// --------------------------------------------------------------------------
// 6. Descriptor invariances: bit-identical under intensity shift, unit norm.
// --------------------------------------------------------------------------
void criterion_6() {
    auto t0 = Clock::now();
    Rng rng(6006);
    bool pass = true;
    std::ostringstream d;

    GmmModel m = random_model(4, rng);
    std::vector<DiffVector> train;
    for (int i = 0; i < 2000; ++i) train.push_back(sample_from(m, rng));
    WhiteningStats stats = compute_whitening(m, train);

    auto bytes = [](const Descriptor& desc) {
        std::ostringstream os;
        save_descriptor(desc, os);
        return os.str();
    };

    GrayImage img = random_integer_image(40, 70, 66);
    GrayImage shifted = img;
    for (double& v : shifted.data) v += 10.0;

    double worst_norm_err = 0.0;
    std::vector<Descriptor> emitted;
    for (SamplingMode mode : {SamplingMode::Rectangular, SamplingMode::Circular}) {
        for (GridSpec grid : {GridSpec{}, GridSpec{7, 4}}) {
            Descriptor a = encode_image(m, stats, img, mode, grid);
            Descriptor b = encode_image(m, stats, shifted, mode, grid);
            if (bytes(a) != bytes(b)) pass = false;
            emitted.push_back(a);
        }
        emitted.push_back(pattern_descriptor(img, mode, PatternVariant::lbp(), GridSpec{7, 4}));
        emitted.push_back(pattern_descriptor(img, mode, PatternVariant::ltp(5.0)));
        Descriptor pl = pattern_descriptor(img, mode, PatternVariant::lbp());
        Descriptor ps = pattern_descriptor(shifted, mode, PatternVariant::lbp());
        if (bytes(pl) != bytes(ps)) pass = false;
        emitted.push_back(pl);
    }
    for (const Descriptor& desc : emitted) {
        double norm = 0;
        for (double v : desc.values) norm += v * v;
        worst_norm_err = std::max(worst_norm_err, std::abs(std::sqrt(norm) - 1.0));
    }
    if (worst_norm_err >= 1e-6) pass = false;
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    d << emitted.size() << " descriptors, worst norm err " << std::scientific << worst_norm_err;
    report(6, pass, "shifted images give bit-identical descriptors; unit norms", d.str(), secs);
}

// --------------------------------------------------------------------------
// 7. Synthetic texture classification: LHS >= 0.95 and LHS >= LBP.
// --------------------------------------------------------------------------
void criterion_7() {
    ::setenv("LHS_THREADS", "1", 1);  // the budget is single-threaded
    auto t0 = Clock::now();
    Scratch scratch;
    auto specs = default_texture_classes(4);
    Manifest manifest =
        generate_synthetic_textures(specs, 64, 64, 777, scratch.file("textures"));

    Protocol protocol;
    protocol.kind = Protocol::Kind::RandomSplit;
    protocol.fraction = 0.5;
    protocol.runs = 5;
    protocol.seed = 99;

    PipelineConfig lhs_cfg;
    lhs_cfg.kind = DescriptorKind::Lhs;
    lhs_cfg.mode = SamplingMode::Circular;
    lhs_cfg.gmm.components = 16;
    lhs_cfg.gmm.max_samples = 60'000;
    lhs_cfg.gmm.em_max_iters = 100;
    lhs_cfg.gmm.kmeans_iters = 25;
    lhs_cfg.gmm.seed = 5;
    lhs_cfg.seed = 5;

    PipelineConfig lbp_cfg = lhs_cfg;
    lbp_cfg.kind = DescriptorKind::Lbp;

    AggregateReport lhs_rep = run_protocol(manifest, protocol, lhs_cfg);
    AggregateReport lbp_rep = run_protocol(manifest, protocol, lbp_cfg);

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    bool pass = lhs_rep.mean_accuracy >= 0.95 && lhs_rep.mean_accuracy >= lbp_rep.mean_accuracy &&
                secs < 300.0;
    ::unsetenv("LHS_THREADS");
    std::ostringstream d;
    d << "LHS " << lhs_rep.mean_accuracy << " +/- " << lhs_rep.std_accuracy << ", LBP "
      << lbp_rep.mean_accuracy << " +/- " << lbp_rep.std_accuracy;
    report(7, pass, "synthetic textures: LHS >= 0.95 and LHS >= LBP", d.str(), secs);
}

// --------------------------------------------------------------------------
// 8. Metric learning on synthetic identities with the stated defaults.
// --------------------------------------------------------------------------
void criterion_8() {
    auto t0 = Clock::now();
    Rng rng(8008);
    const int d0 = 32, ids = 20, per_id = 10, train_ids = 14;
    const int subspace = 6;      // identities share a low-dimensional subspace
    const double noise = 0.12;   // within-identity noise << between-identity spread
    Matrix basis(subspace, d0);
    for (double& v : basis.a) v = rng.normal();
    for (int r = 0; r < subspace; ++r) {  // Gram-Schmidt
        for (int p = 0; p < r; ++p) {
            double proj = dot(basis.row_span(r), basis.row_span(p));
            for (int j = 0; j < d0; ++j) basis(r, j) -= proj * basis(p, j);
        }
        double n = std::sqrt(dot(basis.row_span(r), basis.row_span(r)));
        for (int j = 0; j < d0; ++j) basis(r, j) /= n;
    }
    Matrix desc(ids * per_id, d0);
    for (int id = 0; id < ids; ++id) {
        std::vector<double> center(d0, 0.0);
        for (int r = 0; r < subspace; ++r) {
            double w = rng.normal();
            for (int j = 0; j < d0; ++j) center[j] += w * basis(r, j);
        }
        l2_normalize_inplace(center);
        for (int k = 0; k < per_id; ++k) {
            std::vector<double> x(d0);
            for (int j = 0; j < d0; ++j) x[j] = center[j] + noise * rng.normal();
            l2_normalize_inplace(x);
            std::copy(x.begin(), x.end(), desc.row(id * per_id + k));
        }
    }
    auto make_pairs = [&](int id_lo, int id_hi) {
        std::vector<IndexPair> pairs;
        for (int id = id_lo; id < id_hi; ++id)
            for (int a = 0; a < per_id; ++a)
                for (int b = a + 1; b < per_id; ++b)
                    pairs.push_back({id * per_id + a, id * per_id + b, +1});
        size_t same = pairs.size();
        while (pairs.size() < 2 * same) {
            int a = id_lo * per_id +
                    static_cast<int>(rng.uniform_index((id_hi - id_lo) * per_id));
            int b = id_lo * per_id +
                    static_cast<int>(rng.uniform_index((id_hi - id_lo) * per_id));
            if (a / per_id != b / per_id) pairs.push_back({a, b, -1});
        }
        return pairs;
    };
    std::vector<IndexPair> train_pairs = make_pairs(0, train_ids);
    std::vector<IndexPair> test_pairs = make_pairs(train_ids, ids);

    Matrix train_desc(train_ids * per_id, d0);
    std::copy(desc.a.begin(), desc.a.begin() + static_cast<size_t>(train_ids) * per_id * d0,
              train_desc.a.begin());
    MetricModel init = make_metric_model(wpca_init(train_desc, 12, 11), 1.0, 0.2);

    SgdConfig cfg;  // the stated defaults: b = 1.0, m = 0.2, r = 0.002
    cfg.iters = 300'000;
    cfg.seed = 13;
    cfg.log_every = 0;
    double loss0 = mean_hinge_loss(init, desc, train_pairs);
    MetricModel trained = sgd_train(init, desc, train_pairs, cfg);
    double loss1 = mean_hinge_loss(trained, desc, train_pairs);

    std::vector<double> train_scores, test_scores;
    std::vector<int> train_labels, test_labels;
    for (const IndexPair& p : train_pairs) {
        train_scores.push_back(joint_distance(trained, desc.row_span(p.a), desc.row_span(p.b)));
        train_labels.push_back(p.label);
    }
    for (const IndexPair& p : test_pairs) {
        test_scores.push_back(joint_distance(trained, desc.row_span(p.a), desc.row_span(p.b)));
        test_labels.push_back(p.label);
    }
    double threshold = verify_threshold(train_scores, train_labels);
    EvalReport eval = eval_verification(test_scores, test_labels, threshold);

    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    bool pass = loss1 <= 0.5 * loss0 && eval.accuracy >= 0.9 && secs < 120.0;
    std::ostringstream d;
    d << "loss " << loss0 << " -> " << loss1 << ", held-out accuracy " << eval.accuracy;
    report(8, pass, "SGD metric: loss halves and held-out accuracy >= 0.9", d.str(), secs);
}

// --------------------------------------------------------------------------
// 9. Determinism of every training entry point.
// --------------------------------------------------------------------------
void criterion_9() {
    auto t0 = Clock::now();
    bool pass = true;
    std::ostringstream d;

    {  // GMM + whitening stats
        std::vector<GrayImage> imgs;
        for (int i = 0; i < 6; ++i) imgs.push_back(random_integer_image(20, 20, 900 + i));
        TrainConfig cfg;
        cfg.components = 3;
        cfg.seed = 21;
        cfg.em_max_iters = 25;
        auto run = [&] {
            GmmTrainResult r = train_gmm(imgs, SamplingMode::Circular, cfg);
            WhiteningStats stats = compute_whitening(r.model, r.samples);
            std::ostringstream os;
            save_gmm(r.model, os);
            save_whitening(stats, os);
            return os.str();
        };
        if (run() != run()) {
            pass = false;
            d << "gmm differs; ";
        }
    }
    {  // SVM
        Rng rng(91);
        Matrix x(40, 6);
        std::vector<std::string> y(40);
        for (int i = 0; i < 40; ++i) {
            y[i] = i % 2 ? "a" : "b";
            for (int j = 0; j < 6; ++j) x(i, j) = rng.normal() + (i % 2 ? 1.0 : -1.0);
        }
        auto run = [&] {
            LinearSvmModel m = svm_train(x, y, 1.0, 33);
            std::ostringstream os;
            save_svm(m, os);
            return os.str();
        };
        if (run() != run()) {
            pass = false;
            d << "svm differs; ";
        }
    }
    {  // metric: WPCA + SGD
        Rng rng(92);
        Matrix desc(30, 8);
        for (double& v : desc.a) v = rng.normal();
        std::vector<IndexPair> pairs;
        for (int i = 0; i < 30; ++i) pairs.push_back({i, (i + 3) % 30, i % 2 ? 1 : -1});
        auto run = [&] {
            MetricModel m = make_metric_model(wpca_init(desc, 4, 55), 1.0, 0.2);
            SgdConfig cfg;
            cfg.iters = 2000;
            cfg.seed = 55;
            cfg.log_every = 0;
            MetricModel t = sgd_train(m, desc, pairs, cfg);
            std::ostringstream os;
            save_metric(t, os);
            return os.str();
        };
        if (run() != run()) {
            pass = false;
            d << "metric differs; ";
        }
    }
    {  // synthetic data generator
        Scratch scratch;
        auto specs = default_texture_classes(2);
        Manifest a = generate_synthetic_textures(specs, 3, 24, 7, scratch.file("a"));
        Manifest b = generate_synthetic_textures(specs, 3, 24, 7, scratch.file("b"));
        auto slurp = [](const std::string& p) {
            std::ifstream is(p, std::ios::binary);
            std::ostringstream ss;
            ss << is.rdbuf();
            return ss.str();
        };
        for (size_t i = 0; i < a.entries.size(); ++i)
            if (slurp(a.entries[i].path) != slurp(b.entries[i].path)) {
                pass = false;
                d << "synth differs; ";
                break;
            }
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (pass) d << "gmm+stats, svm, metric, synth all bit-identical";
    report(9, pass, "training entry points are bit-identical under a fixed seed", d.str(), secs);
}

}  // namespace

int main() {
    std::cout << "acceptance suite" << std::endl;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    report_skip(10,
                "full-dataset accuracies (Brodatz-32/KTH/LFW)",
                "optional: requires user-supplied licensed datasets; the protocols are exercised "
                "at desk scale by criteria 7-8 and the harness tests");
    if (failures == 0)
        std::cout << "all criteria passed" << std::endl;
    else
        std::cout << failures << " criteria FAILED" << std::endl;
    return failures == 0 ? 0 : 1;
}
