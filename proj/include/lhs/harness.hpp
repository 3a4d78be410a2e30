// Dataset manifests, evaluation protocols (random splits, leave-one-group-out,
// pair verification), the per-fold train/encode/classify pipeline, and a
// synthetic texture generator for self-contained experiments.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lhs/classify.hpp"
#include "lhs/encoder.hpp"
#include "lhs/gmm.hpp"
#include "lhs/image.hpp"
#include "lhs/metric.hpp"
#include "lhs/rng.hpp"
#include "lhs/util.hpp"

namespace lhs {

struct ManifestEntry {
    std::string path;
    std::string label;
    std::string group;  // optional, for leave-one-group-out
};

struct Manifest {
    std::vector<ManifestEntry> entries;

    void validate() const {
        std::set<std::string> seen;
        for (const ManifestEntry& e : entries) {
            if (e.label.empty()) throw InvalidArgument("manifest entry with empty label: " + e.path);
            if (!seen.insert(e.path).second)
                throw InvalidArgument("duplicate manifest path: " + e.path);
        }
    }
};

// Lines are `path<TAB>label[<TAB>group]`; blank lines and lines starting with
// '#' are skipped. Relative paths are resolved against the manifest's
// directory.
inline Manifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open manifest: " + path);
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    Manifest m;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        size_t start = 0;
        while (true) {
            size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() < 2)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected path<TAB>label");
        ManifestEntry e;
        std::filesystem::path p(fields[0]);
        e.path = p.is_absolute() ? p.string() : (base / p).string();
        e.label = fields[1];
        if (fields.size() > 2) e.group = fields[2];
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

inline void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    for (const ManifestEntry& e : m.entries) {
        os << e.path << '\t' << e.label;
        if (!e.group.empty()) os << '\t' << e.group;
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

struct PairEntry {
    std::string path_a;
    std::string path_b;
    int label = 1;  // +1 same, -1 different
};

// One pair per line: `pathA pathB {1|-1}`.
inline std::vector<PairEntry> load_pairs(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open pairs file: " + path);
    std::vector<PairEntry> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        PairEntry p;
        if (!(ss >> p.path_a >> p.path_b >> p.label) || (p.label != 1 && p.label != -1))
            throw IoError(path + ":" + std::to_string(lineno) +
                          ": expected `pathA pathB {1|-1}`");
        out.push_back(std::move(p));
    }
    return out;
}

struct Protocol {
    enum class Kind { RandomSplit, LeaveOneGroupOut, PairVerification };
    Kind kind = Kind::RandomSplit;
    double fraction = 0.5;  // training fraction for random splits
    int runs = 10;
    uint64_t seed = 0;

    void validate() const {
        if (kind != Kind::LeaveOneGroupOut && (fraction <= 0.0 || fraction >= 1.0))
            throw InvalidArgument("random-split fraction must lie in (0, 1)");
        if (kind == Kind::RandomSplit && runs < 1)
            throw InvalidArgument("random-split needs at least one run");
    }
};

// Optional geometric preprocessing applied to every image right after
// loading; both face-crop recipes are expressed through these fields rather
// than hard-coded.
struct Preprocess {
    bool has_crop = false;
    int crop_left = 0, crop_top = 0, crop_right = 0, crop_bottom = 0;
    bool has_resize = false;
    int resize_width = 0, resize_height = 0;

    GrayImage apply(GrayImage img) const {
        if (has_crop) img = crop(img, crop_left, crop_top, crop_right, crop_bottom);
        if (has_resize) img = resize(img, resize_width, resize_height);
        return img;
    }
};

struct PipelineConfig {
    DescriptorKind kind = DescriptorKind::Lhs;
    SamplingMode mode = SamplingMode::Circular;
    GridSpec grid;
    Preprocess preprocess;
    TrainConfig gmm;                  // components, EM/k-means budgets, max samples
    double ltp_tolerance = 5.0;
    std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    int cv_folds = 5;
    uint64_t seed = 0;
    // pair-verification only
    int metric_dim = 128;
    SgdConfig sgd;
};

// Which manifest indices fed each trained component of one fold; used to
// assert train/test hygiene.
struct FitLog {
    std::vector<size_t> train_indices;
    std::vector<size_t> test_indices;
    std::vector<size_t> gmm_inputs;
    std::vector<size_t> stats_inputs;
    std::vector<size_t> classifier_inputs;
};

struct RunReport {
    EvalReport eval;
    double chosen_c = 0.0;
    double cv_accuracy = 0.0;
};

struct AggregateReport {
    std::vector<RunReport> runs;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation across runs

    void finalize() {
        if (runs.empty()) return;
        double sum = 0.0;
        for (const RunReport& r : runs) sum += r.eval.accuracy;
        mean_accuracy = sum / runs.size();
        if (runs.size() > 1) {
            double ss = 0.0;
            for (const RunReport& r : runs) {
                double d = r.eval.accuracy - mean_accuracy;
                ss += d * d;
            }
            std_accuracy = std::sqrt(ss / (runs.size() - 1));
        }
    }
};

namespace detail {

// Per-class random split: a deterministic shuffle of each class's indices,
// with the first round(fraction * count) going to training.
inline std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(
    const Manifest& m, double fraction, uint64_t seed) {
    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < m.entries.size(); ++i) by_class[m.entries[i].label].push_back(i);
    Rng rng(seed);
    std::vector<size_t> train, test;
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        size_t n_train = static_cast<size_t>(std::lround(fraction * idx.size()));
        n_train = std::min(std::max<size_t>(n_train, 1), idx.size() - 1);
        for (size_t p = 0; p < idx.size(); ++p)
            (p < n_train ? train : test).push_back(idx[p]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

inline std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> protocol_folds(
    const Manifest& m, const Protocol& p) {
    std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> folds;
    if (p.kind == Protocol::Kind::LeaveOneGroupOut) {
        std::map<std::string, std::vector<size_t>> by_group;
        for (size_t i = 0; i < m.entries.size(); ++i) {
            if (m.entries[i].group.empty())
                throw InvalidArgument("leave-one-group-out requires a group column in the manifest");
            by_group[m.entries[i].group].push_back(i);
        }
        if (by_group.size() < 2)
            throw InvalidArgument("leave-one-group-out needs at least 2 groups");
        for (const auto& [group, test] : by_group) {
            std::vector<size_t> train;
            for (size_t i = 0; i < m.entries.size(); ++i)
                if (m.entries[i].group != group) train.push_back(i);
            folds.emplace_back(std::move(train), test);
        }
    } else {
        for (int r = 0; r < p.runs; ++r)
            folds.push_back(stratified_split(m, p.fraction, p.seed + static_cast<uint64_t>(r)));
    }
    return folds;
}

inline std::vector<GrayImage> load_all_images(const Manifest& m, const Preprocess& pre) {
    std::vector<GrayImage> imgs(m.entries.size());
    parallel_for(m.entries.size(),
                 [&](size_t i) { imgs[i] = pre.apply(load_image(m.entries[i].path)); });
    return imgs;
}

// All within-identity pairs of the given indices plus an equal number of
// seed-deterministic cross-identity pairs; labels come from the manifest.
inline std::vector<IndexPair> build_identity_pairs(const Manifest& m,
                                                   std::span<const size_t> idx, uint64_t seed) {
    std::vector<IndexPair> pairs;
    for (size_t a = 0; a < idx.size(); ++a)
        for (size_t b = a + 1; b < idx.size(); ++b)
            if (m.entries[idx[a]].label == m.entries[idx[b]].label)
                pairs.push_back({static_cast<int>(idx[a]), static_cast<int>(idx[b]), +1});
    size_t same = pairs.size();
    if (same == 0) throw InvalidArgument("pair protocol needs identities with >= 2 images");
    Rng rng(seed);
    size_t guard = 0;
    while (pairs.size() < 2 * same && guard < 1000 * same) {
        ++guard;
        size_t a = idx[rng.uniform_index(idx.size())];
        size_t b = idx[rng.uniform_index(idx.size())];
        if (a == b || m.entries[a].label == m.entries[b].label) continue;
        pairs.push_back({static_cast<int>(a), static_cast<int>(b), -1});
    }
    if (pairs.size() == same) throw InvalidArgument("pair protocol needs >= 2 identities");
    return pairs;
}

// Splits whole identities into train/test by the protocol fraction.
inline std::pair<std::vector<size_t>, std::vector<size_t>> identity_split(const Manifest& m,
                                                                          double fraction,
                                                                          uint64_t seed) {
    std::map<std::string, std::vector<size_t>> by_id;
    for (size_t i = 0; i < m.entries.size(); ++i) by_id[m.entries[i].label].push_back(i);
    if (by_id.size() < 4)
        throw InvalidArgument("pair protocol needs at least 4 identities to split");
    std::vector<std::string> names;
    for (const auto& [name, _] : by_id) names.push_back(name);
    Rng rng(seed);
    rng.shuffle(names);
    size_t n_train = static_cast<size_t>(std::lround(fraction * names.size()));
    n_train = std::min(std::max<size_t>(n_train, 2), names.size() - 2);
    std::vector<size_t> train, test;
    for (size_t p = 0; p < names.size(); ++p) {
        const auto& members = by_id[names[p]];
        auto& dst = p < n_train ? train : test;
        dst.insert(dst.end(), members.begin(), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

}  // namespace detail

// Encodes every image with a pipeline trained on the training fold only:
// GMM and whitening statistics come from training images, the classifier or
// metric from training descriptors/pairs. Returns per-fold reports plus their
// mean/std.
inline AggregateReport run_protocol(const Manifest& manifest, const Protocol& protocol,
                                    const PipelineConfig& cfg,
                                    std::vector<FitLog>* fit_logs = nullptr) {
    manifest.validate();
    protocol.validate();
    bool pairs_mode = protocol.kind == Protocol::Kind::PairVerification;
    std::vector<GrayImage> images = detail::load_all_images(manifest, cfg.preprocess);

    std::vector<std::pair<std::vector<size_t>, std::vector<size_t>>> folds;
    if (pairs_mode) {
        for (int r = 0; r < protocol.runs; ++r)
            folds.push_back(detail::identity_split(manifest, protocol.fraction,
                                                   protocol.seed + static_cast<uint64_t>(r)));
    } else {
        folds = detail::protocol_folds(manifest, protocol);
    }
    if (fit_logs) fit_logs->clear();

    AggregateReport agg;
    for (size_t f = 0; f < folds.size(); ++f) {
        const auto& [train_idx, test_idx] = folds[f];
        if (train_idx.empty() || test_idx.empty())
            throw InvalidArgument("protocol produced an empty fold");
        FitLog log;
        log.train_indices = train_idx;
        log.test_indices = test_idx;

        GmmModel model;
        WhiteningStats stats;
        if (cfg.kind == DescriptorKind::Lhs) {
            std::vector<GrayImage> train_images;
            train_images.reserve(train_idx.size());
            for (size_t i : train_idx) train_images.push_back(images[i]);
            TrainConfig tc = cfg.gmm;
            tc.seed = cfg.gmm.seed + f;
            GmmTrainResult r = train_gmm(train_images, cfg.mode, tc);
            model = std::move(r.model);
            stats = compute_whitening(model, r.samples);
            log.gmm_inputs = train_idx;
            log.stats_inputs = train_idx;
        }

        std::vector<Descriptor> desc(images.size());
        PatternVariant variant = cfg.kind == DescriptorKind::Ltp
                                     ? PatternVariant::ltp(cfg.ltp_tolerance)
                                     : PatternVariant::lbp();
        parallel_for(images.size(), [&](size_t i) {
            desc[i] = cfg.kind == DescriptorKind::Lhs
                          ? encode_image(model, stats, images[i], cfg.mode, cfg.grid)
                          : pattern_descriptor(images[i], cfg.mode, variant, cfg.grid);
        });
        int dim = desc.empty() ? 0 : desc[0].dim();
        Matrix all(static_cast<int>(desc.size()), dim);
        for (size_t i = 0; i < desc.size(); ++i)
            std::copy(desc[i].values.begin(), desc[i].values.end(), all.row(static_cast<int>(i)));
        log.classifier_inputs = train_idx;

        RunReport run;
        if (pairs_mode) {
            std::vector<IndexPair> train_pairs =
                detail::build_identity_pairs(manifest, train_idx, protocol.seed + 31 * f);
            std::vector<IndexPair> test_pairs =
                detail::build_identity_pairs(manifest, test_idx, protocol.seed + 31 * f + 7);
            Matrix train_x(static_cast<int>(train_idx.size()), dim);
            for (size_t i = 0; i < train_idx.size(); ++i)
                std::copy(all.row(train_idx[i]), all.row(train_idx[i]) + dim,
                          train_x.row(static_cast<int>(i)));
            int proj = std::min(cfg.metric_dim, std::min(train_x.rows, dim));
            SgdConfig sgd = cfg.sgd;
            sgd.seed = cfg.sgd.seed + f;
            MetricModel metric = sgd_train(
                make_metric_model(wpca_init(train_x, proj, cfg.seed + f), sgd.bias, sgd.margin),
                all, train_pairs, sgd);
            auto score = [&](const std::vector<IndexPair>& pairs, std::vector<double>& s,
                             std::vector<int>& l) {
                for (const IndexPair& p : pairs) {
                    s.push_back(joint_distance(metric, all.row_span(p.a), all.row_span(p.b)));
                    l.push_back(p.label);
                }
            };
            std::vector<double> train_scores, test_scores;
            std::vector<int> train_labels, test_labels;
            score(train_pairs, train_scores, train_labels);
            score(test_pairs, test_scores, test_labels);
            double threshold = verify_threshold(train_scores, train_labels);
            run.eval = eval_verification(test_scores, test_labels, threshold);
        } else {
            Matrix x_train(static_cast<int>(train_idx.size()), dim);
            Matrix x_test(static_cast<int>(test_idx.size()), dim);
            std::vector<std::string> y_train(train_idx.size()), y_test(test_idx.size());
            for (size_t i = 0; i < train_idx.size(); ++i) {
                std::copy(all.row(train_idx[i]), all.row(train_idx[i]) + dim,
                          x_train.row(static_cast<int>(i)));
                y_train[i] = manifest.entries[train_idx[i]].label;
            }
            for (size_t i = 0; i < test_idx.size(); ++i) {
                std::copy(all.row(test_idx[i]), all.row(test_idx[i]) + dim,
                          x_test.row(static_cast<int>(i)));
                y_test[i] = manifest.entries[test_idx[i]].label;
            }
            CvResult cv =
                svm_cv_select_c(x_train, y_train, cfg.c_grid, cfg.cv_folds, cfg.seed + f);
            LinearSvmModel svm = svm_train(x_train, y_train, cv.c, cfg.seed + f);
            run.eval = eval_classification(svm_predict_batch(svm, x_test), y_test);
            run.chosen_c = cv.c;
            run.cv_accuracy = cv.accuracy;
        }
        agg.runs.push_back(std::move(run));
        if (fit_logs) fit_logs->push_back(std::move(log));
    }
    agg.finalize();
    return agg;
}

// ---------------------------------------------------------------------------
// Synthetic textures
// ---------------------------------------------------------------------------

struct TextureClassSpec {
    enum class Kind { Sinusoid, SmoothNoise, Checker, Constant };
    Kind kind = Kind::Sinusoid;
    std::string name = "class";
    // sinusoid
    double orientation_deg = 0.0;
    double frequency = 0.15;  // cycles per pixel
    double amplitude = 55.0;
    double noise = 10.0;
    // smooth noise
    int corr_length = 2;
    double contrast = 45.0;
    // checker
    int tile = 8;
    double tile_jitter = 20.0;
    // constant
    double value = 128.0;
};

// Distinct stationary processes; classes 0 and 1 are sinusoids of different
// orientation and frequency, class 2 is smoothed noise, class 3 a jittered
// checkerboard.
inline std::vector<TextureClassSpec> default_texture_classes(int n) {
    if (n < 2 || n > 4) throw InvalidArgument("default_texture_classes supports 2 to 4 classes");
    std::vector<TextureClassSpec> specs;
    TextureClassSpec a;
    a.kind = TextureClassSpec::Kind::Sinusoid;
    a.name = "grating_coarse";
    a.orientation_deg = 0.0;
    a.frequency = 0.09;
    specs.push_back(a);
    TextureClassSpec b;
    b.kind = TextureClassSpec::Kind::Sinusoid;
    b.name = "grating_steep";
    b.orientation_deg = 60.0;
    b.frequency = 0.23;
    specs.push_back(b);
    if (n >= 3) {
        TextureClassSpec c;
        c.kind = TextureClassSpec::Kind::SmoothNoise;
        c.name = "blotch";
        c.corr_length = 2;
        specs.push_back(c);
    }
    if (n >= 4) {
        TextureClassSpec d;
        d.kind = TextureClassSpec::Kind::Checker;
        d.name = "checker";
        d.tile = 8;
        specs.push_back(d);
    }
    return specs;
}

namespace detail {

inline uint64_t mix_seed(uint64_t seed, uint64_t cls, uint64_t idx) {
    uint64_t h = seed;
    h ^= (cls + 0x9e3779b97f4a7c15ULL) + (h << 6) + (h >> 2);
    h ^= (idx + 0x9e3779b97f4a7c15ULL) + (h << 6) + (h >> 2);
    return h;
}

inline GrayImage synth_image(const TextureClassSpec& s, int size, uint64_t seed) {
    Rng rng(seed);
    GrayImage img(size, size, 0.0);
    switch (s.kind) {
        case TextureClassSpec::Kind::Sinusoid: {
            double theta = s.orientation_deg * 3.14159265358979323846 / 180.0;
            double cx = std::cos(theta), sx = std::sin(theta);
            double phase = rng.uniform_real(0.0, 6.283185307179586);
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c)
                    img.at(r, c) = 127.5 +
                                   s.amplitude * std::sin(6.283185307179586 * s.frequency *
                                                              (c * cx + r * sx) +
                                                          phase) +
                                   s.noise * rng.normal();
            break;
        }
        case TextureClassSpec::Kind::SmoothNoise: {
            std::vector<double> field(img.pixel_count());
            for (double& v : field) v = rng.normal();
            // separable box blur, horizontal then vertical
            int radius = std::max(s.corr_length, 1);
            std::vector<double> tmp(field.size());
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    double acc = 0.0;
                    int cnt = 0;
                    for (int k = -radius; k <= radius; ++k) {
                        int cc = c + k;
                        if (cc < 0 || cc >= size) continue;
                        acc += field[static_cast<size_t>(r) * size + cc];
                        ++cnt;
                    }
                    tmp[static_cast<size_t>(r) * size + c] = acc / cnt;
                }
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    double acc = 0.0;
                    int cnt = 0;
                    for (int k = -radius; k <= radius; ++k) {
                        int rr = r + k;
                        if (rr < 0 || rr >= size) continue;
                        acc += tmp[static_cast<size_t>(rr) * size + c];
                        ++cnt;
                    }
                    field[static_cast<size_t>(r) * size + c] = acc / cnt;
                }
            double mean = 0.0, var = 0.0;
            for (double v : field) mean += v;
            mean /= field.size();
            for (double v : field) var += (v - mean) * (v - mean);
            var /= field.size();
            double scale = s.contrast / std::sqrt(std::max(var, 1e-12));
            for (size_t i = 0; i < field.size(); ++i) img.data[i] = 127.5 + scale * (field[i] - mean);
            break;
        }
        case TextureClassSpec::Kind::Checker: {
            int tile = std::max(s.tile, 2);
            int off_r = static_cast<int>(rng.uniform_index(tile));
            int off_c = static_cast<int>(rng.uniform_index(tile));
            int tiles = size / tile + 2;
            std::vector<double> jitter(static_cast<size_t>(tiles) * tiles);
            for (double& j : jitter) j = rng.uniform_real(-s.tile_jitter, s.tile_jitter);
            for (int r = 0; r < size; ++r)
                for (int c = 0; c < size; ++c) {
                    int tr = (r + off_r) / tile;
                    int tc = (c + off_c) / tile;
                    double base = (tr + tc) % 2 == 0 ? 127.5 + 50.0 : 127.5 - 50.0;
                    img.at(r, c) = base + jitter[static_cast<size_t>(tr) * tiles + tc] +
                                   5.0 * rng.normal();
                }
            break;
        }
        case TextureClassSpec::Kind::Constant:
            for (double& v : img.data) v = s.value;
            break;
    }
    for (double& v : img.data) v = std::min(std::max(v, 0.0), 255.0);
    return img;
}

}  // namespace detail

// Writes per_class PGM images per class spec into out_dir and returns the
// matching manifest. Fully deterministic under a fixed seed.
inline Manifest generate_synthetic_textures(std::span<const TextureClassSpec> specs,
                                            int per_class, int size, uint64_t seed,
                                            const std::string& out_dir) {
    if (specs.size() < 2) throw InvalidArgument("need at least 2 texture class specs");
    if (per_class < 1 || size < 3) throw InvalidArgument("bad synthetic texture shape");
    std::filesystem::create_directories(out_dir);
    Manifest m;
    for (size_t cls = 0; cls < specs.size(); ++cls) {
        for (int i = 0; i < per_class; ++i) {
            GrayImage img =
                detail::synth_image(specs[cls], size, detail::mix_seed(seed, cls, i));
            std::ostringstream name;
            name << specs[cls].name << "_" << i << ".pgm";
            std::string path = (std::filesystem::path(out_dir) / name.str()).string();
            save_pgm(img, path);
            m.entries.push_back({path, specs[cls].name, ""});
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Report printing
// ---------------------------------------------------------------------------

inline void print_report_human(std::ostream& os, const AggregateReport& agg) {
    os << "runs: " << agg.runs.size() << "\n";
    for (size_t i = 0; i < agg.runs.size(); ++i) {
        const RunReport& r = agg.runs[i];
        os << "  run " << i << ": accuracy " << r.eval.accuracy;
        if (r.eval.verification)
            os << " (threshold " << r.eval.threshold << ", EER " << r.eval.eer << ")";
        else
            os << " (C=" << r.chosen_c << ", cv " << r.cv_accuracy << ")";
        os << "\n";
    }
    os << "mean accuracy: " << agg.mean_accuracy << " +/- " << agg.std_accuracy << "\n";
}

inline void print_report_kv(std::ostream& os, const AggregateReport& agg) {
    os << "runs=" << agg.runs.size() << "\n";
    for (size_t i = 0; i < agg.runs.size(); ++i) {
        os << "run" << i << "_accuracy=" << agg.runs[i].eval.accuracy << "\n";
        if (agg.runs[i].eval.verification)
            os << "run" << i << "_eer=" << agg.runs[i].eval.eer << "\n";
        else
            os << "run" << i << "_c=" << agg.runs[i].chosen_c << "\n";
    }
    os << "mean_accuracy=" << agg.mean_accuracy << "\n";
    os << "std_accuracy=" << agg.std_accuracy << "\n";
}

}  // namespace lhs
