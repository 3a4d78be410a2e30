// lhs: command-line front end for the local higher-order statistics pipeline.
//
// Subcommands: synth, train-gmm, encode, train-svm, train-metric, classify,
// verify, bench. Results go to stdout (human-readable plus key=value lines),
// progress and timing to stderr. Exit code 0 on success.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lhs/lhs.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> parse_grid_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw lhs::InvalidArgument("empty C grid: " + csv);
    return out;
}

// --crop L,T,R,B and --resize WxH assemble the preprocessing chain.
lhs::Preprocess parse_preprocess(const std::string& crop_str, const std::string& resize_str) {
    lhs::Preprocess pre;
    if (!crop_str.empty()) {
        std::stringstream ss(crop_str);
        std::string item;
        std::vector<int> v;
        while (std::getline(ss, item, ',')) v.push_back(std::stoi(item));
        if (v.size() != 4)
            throw lhs::InvalidArgument("--crop wants LEFT,TOP,RIGHT,BOTTOM, got: " + crop_str);
        pre.has_crop = true;
        pre.crop_left = v[0];
        pre.crop_top = v[1];
        pre.crop_right = v[2];
        pre.crop_bottom = v[3];
    }
    if (!resize_str.empty()) {
        auto x = resize_str.find('x');
        if (x == std::string::npos)
            throw lhs::InvalidArgument("--resize wants WIDTHxHEIGHT, got: " + resize_str);
        pre.has_resize = true;
        pre.resize_width = std::stoi(resize_str.substr(0, x));
        pre.resize_height = std::stoi(resize_str.substr(x + 1));
    }
    return pre;
}

// Descriptor file for an encoded image: <dir>/<stem>.lhsd (.flip.lhsd for the
// horizontally flipped variant).
std::string descriptor_path(const std::string& dir, const std::string& image_path, bool flip) {
    fs::path p(image_path);
    std::string stem = p.stem().string();
    return (fs::path(dir) / (stem + (flip ? ".flip.lhsd" : ".lhsd"))).string();
}

// Resolves a path from a pairs file to a descriptor file.
std::string resolve_descriptor(const std::string& dir, const std::string& path, bool flip) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".lhsd" && !flip) return path;
    return descriptor_path(dir, path, flip);
}

std::vector<lhs::GrayImage> load_images_of(const lhs::Manifest& m, const lhs::Preprocess& pre) {
    std::vector<lhs::GrayImage> imgs(m.entries.size());
    lhs::parallel_for(m.entries.size(),
                      [&](size_t i) { imgs[i] = pre.apply(lhs::load_image(m.entries[i].path)); });
    return imgs;
}

lhs::Manifest manifest_from_args(const std::string& manifest_path,
                                 const std::vector<std::string>& images) {
    if (!manifest_path.empty() && !images.empty())
        throw lhs::InvalidArgument("give either --manifest or image paths, not both");
    if (!manifest_path.empty()) return lhs::load_manifest(manifest_path);
    if (images.empty()) throw lhs::InvalidArgument("no input images (use --manifest or list files)");
    lhs::Manifest m;
    for (const std::string& p : images) m.entries.push_back({p, "unlabeled", ""});
    return m;
}

struct PairData {
    lhs::Matrix descriptors;            // one row per unique path
    lhs::Matrix flipped;                // parallel rows; empty when flips unused
    std::vector<lhs::IndexPair> pairs;  // indices into the rows
    std::vector<int> labels;            // per pair
};

PairData load_pair_descriptors(const std::vector<lhs::PairEntry>& entries,
                               const std::string& desc_dir, bool flips) {
    PairData d;
    std::map<std::string, int> index;
    std::vector<std::string> order;
    for (const lhs::PairEntry& e : entries) {
        for (const std::string& p : {e.path_a, e.path_b}) {
            if (index.emplace(p, static_cast<int>(order.size())).second) order.push_back(p);
        }
    }
    std::vector<lhs::Descriptor> descs(order.size());
    std::vector<lhs::Descriptor> fdescs(flips ? order.size() : 0);
    lhs::parallel_for(order.size(), [&](size_t i) {
        descs[i] = lhs::load_descriptor(resolve_descriptor(desc_dir, order[i], false));
        if (flips) fdescs[i] = lhs::load_descriptor(resolve_descriptor(desc_dir, order[i], true));
    });
    int dim = descs.empty() ? 0 : descs[0].dim();
    for (const lhs::Descriptor& x : descs)
        if (x.dim() != dim) throw lhs::InvalidArgument("descriptor dimensions disagree");
    d.descriptors = lhs::Matrix(static_cast<int>(order.size()), dim);
    for (size_t i = 0; i < order.size(); ++i)
        std::copy(descs[i].values.begin(), descs[i].values.end(),
                  d.descriptors.row(static_cast<int>(i)));
    if (flips) {
        d.flipped = lhs::Matrix(static_cast<int>(order.size()), dim);
        for (size_t i = 0; i < order.size(); ++i) {
            if (fdescs[i].dim() != dim)
                throw lhs::InvalidArgument("flipped descriptor dimensions disagree");
            std::copy(fdescs[i].values.begin(), fdescs[i].values.end(),
                      d.flipped.row(static_cast<int>(i)));
        }
    }
    for (const lhs::PairEntry& e : entries) {
        d.pairs.push_back({index[e.path_a], index[e.path_b], e.label});
        d.labels.push_back(e.label);
    }
    return d;
}

// Descriptor matrix for the entries of a manifest, loaded from a descriptor
// directory populated by `encode`.
std::pair<lhs::Matrix, std::vector<std::string>> load_manifest_descriptors(
    const lhs::Manifest& m, const std::string& desc_dir) {
    std::vector<lhs::Descriptor> descs(m.entries.size());
    lhs::parallel_for(m.entries.size(), [&](size_t i) {
        descs[i] = lhs::load_descriptor(descriptor_path(desc_dir, m.entries[i].path, false));
    });
    int dim = descs.empty() ? 0 : descs[0].dim();
    lhs::Matrix x(static_cast<int>(descs.size()), dim);
    std::vector<std::string> y(descs.size());
    for (size_t i = 0; i < descs.size(); ++i) {
        if (descs[i].dim() != dim) throw lhs::InvalidArgument("descriptor dimensions disagree");
        std::copy(descs[i].values.begin(), descs[i].values.end(), x.row(static_cast<int>(i)));
        y[i] = m.entries[i].label;
    }
    return {std::move(x), std::move(y)};
}

// Unsupervised pair score: mean of l2 distances between corresponding grid
// cells (the whole descriptor when there is no grid).
double unsupervised_score(const lhs::Descriptor& a, const lhs::Descriptor& b) {
    if (a.dim() != b.dim()) throw lhs::InvalidArgument("descriptor dimensions disagree");
    int cells = a.grid.cells();
    int cell_dim = a.dim() / cells;
    double total = 0.0;
    for (int c = 0; c < cells; ++c) {
        double ss = 0.0;
        for (int i = 0; i < cell_dim; ++i) {
            double d = a.values[c * cell_dim + i] - b.values[c * cell_dim + i];
            ss += d * d;
        }
        total += std::sqrt(ss);
    }
    return total / cells;
}

int cmd_synth(const std::string& out_dir, int classes, int count, int size, uint64_t seed,
              std::string manifest_out) {
    auto specs = lhs::default_texture_classes(classes);
    lhs::Manifest m = lhs::generate_synthetic_textures(specs, count, size, seed, out_dir);
    if (manifest_out.empty()) manifest_out = (fs::path(out_dir) / "manifest.tsv").string();
    lhs::save_manifest(m, manifest_out);
    std::cout << "images=" << m.entries.size() << "\n";
    std::cout << "manifest=" << manifest_out << "\n";
    return 0;
}

int cmd_train_gmm(const std::string& manifest_path, const std::vector<std::string>& images,
                  lhs::TrainConfig cfg, const std::string& sampling, const lhs::Preprocess& pre,
                  const std::string& out, std::string stats_out) {
    auto t0 = Clock::now();
    lhs::Manifest m = manifest_from_args(manifest_path, images);
    std::vector<lhs::GrayImage> imgs = load_images_of(m, pre);
    lhs::SamplingMode mode = lhs::sampling_mode_from_string(sampling);
    std::cerr << "[train-gmm] " << imgs.size() << " images loaded in " << seconds_since(t0)
              << "s\n";

    auto t1 = Clock::now();
    lhs::GmmTrainResult r = lhs::train_gmm(imgs, mode, cfg);
    std::cerr << "[train-gmm] " << r.samples.size() << " features, " << r.trace.iterations
              << " EM iterations in " << seconds_since(t1) << "s\n";

    lhs::WhiteningStats stats = lhs::compute_whitening(r.model, r.samples);
    lhs::save_gmm(r.model, out);
    if (stats_out.empty()) stats_out = out + ".stats";
    lhs::save_whitening(stats, stats_out);

    std::cout << "components=" << r.model.components() << "\n";
    std::cout << "features=" << r.samples.size() << "\n";
    std::cout << "em_iterations=" << r.trace.iterations << "\n";
    std::cout << "converged=" << (r.trace.converged ? 1 : 0) << "\n";
    std::cout << "final_avg_log_likelihood="
              << (r.trace.avg_log_likelihood.empty() ? 0.0 : r.trace.avg_log_likelihood.back())
              << "\n";
    std::cout << "model=" << out << "\n";
    std::cout << "stats=" << stats_out << "\n";
    return 0;
}

int cmd_encode(const std::string& manifest_path, const std::vector<std::string>& images,
               const std::string& model_path, const std::string& stats_path,
               const std::string& kind_name, double ltp_t, const std::string& grid_str,
               const std::string& sampling, const lhs::Preprocess& pre, bool flips,
               const std::string& out_dir) {
    lhs::Manifest m = manifest_from_args(manifest_path, images);
    lhs::GridSpec grid = lhs::grid_from_string(grid_str);
    lhs::DescriptorKind kind = lhs::descriptor_kind_from_string(kind_name);

    lhs::GmmModel model;
    lhs::WhiteningStats stats;
    lhs::SamplingMode mode;
    if (kind == lhs::DescriptorKind::Lhs) {
        if (model_path.empty() || stats_path.empty())
            throw lhs::InvalidArgument("encode --kind lhs needs --model and --stats");
        model = lhs::load_gmm(model_path);
        stats = lhs::load_whitening(stats_path);
        mode = sampling.empty() ? model.mode : lhs::sampling_mode_from_string(sampling);
        if (mode != model.mode)
            throw lhs::InvalidArgument(std::string("model was trained with ") +
                                       lhs::to_string(model.mode) + " sampling, got " +
                                       lhs::to_string(mode));
    } else {
        mode = lhs::sampling_mode_from_string(sampling.empty() ? "circular" : sampling);
    }
    fs::create_directories(out_dir);

    auto t0 = Clock::now();
    std::vector<lhs::GrayImage> imgs = load_images_of(m, pre);
    lhs::PatternVariant variant =
        kind == lhs::DescriptorKind::Ltp ? lhs::PatternVariant::ltp(ltp_t) : lhs::PatternVariant::lbp();
    lhs::parallel_for(m.entries.size(), [&](size_t i) {
        lhs::Descriptor d = kind == lhs::DescriptorKind::Lhs
                                ? lhs::encode_image(model, stats, imgs[i], mode, grid)
                                : lhs::pattern_descriptor(imgs[i], mode, variant, grid);
        lhs::save_descriptor(d, descriptor_path(out_dir, m.entries[i].path, false));
        if (flips) {
            lhs::GrayImage f = lhs::hflip(imgs[i]);
            lhs::Descriptor df = kind == lhs::DescriptorKind::Lhs
                                     ? lhs::encode_image(model, stats, f, mode, grid)
                                     : lhs::pattern_descriptor(f, mode, variant, grid);
            lhs::save_descriptor(df, descriptor_path(out_dir, m.entries[i].path, true));
        }
    });
    std::cerr << "[encode] " << m.entries.size() << " images in " << seconds_since(t0) << "s\n";
    std::cout << "encoded=" << m.entries.size() << "\n";
    std::cout << "out=" << out_dir << "\n";
    return 0;
}

int cmd_train_svm(const std::string& train_manifest, const std::string& desc_dir, double c_fixed,
                  const std::string& c_grid_csv, int folds, uint64_t seed,
                  const std::string& out) {
    lhs::Manifest m = lhs::load_manifest(train_manifest);
    auto [x, y] = load_manifest_descriptors(m, desc_dir);
    double c = c_fixed;
    if (c <= 0.0) {
        lhs::CvResult cv = lhs::svm_cv_select_c(x, y, parse_grid_list(c_grid_csv), folds, seed);
        c = cv.c;
        std::cout << "cv_accuracy=" << cv.accuracy << "\n";
    }
    lhs::LinearSvmModel svm = lhs::svm_train(x, y, c, seed);
    lhs::save_svm(svm, out);
    std::cout << "c=" << c << "\n";
    std::cout << "classes=" << svm.labels.size() << "\n";
    std::cout << "model=" << out << "\n";
    return 0;
}

// With --desc, descriptors come from files; otherwise the full pipeline (GMM
// and whitening from the training manifest only) runs in memory.
int cmd_classify(const std::string& train_manifest, const std::string& test_manifest,
                 const std::string& desc_dir, const lhs::PipelineConfig& cfg,
                 const std::string& c_grid_csv, int folds, uint64_t seed) {
    lhs::Manifest train = lhs::load_manifest(train_manifest);
    lhs::Manifest test = lhs::load_manifest(test_manifest);
    lhs::Matrix xt, xe;
    std::vector<std::string> yt, ye;
    if (!desc_dir.empty()) {
        std::tie(xt, yt) = load_manifest_descriptors(train, desc_dir);
        std::tie(xe, ye) = load_manifest_descriptors(test, desc_dir);
    } else {
        auto t0 = Clock::now();
        std::vector<lhs::GrayImage> train_imgs = load_images_of(train, cfg.preprocess);
        std::vector<lhs::GrayImage> test_imgs = load_images_of(test, cfg.preprocess);
        lhs::GmmModel model;
        lhs::WhiteningStats stats;
        if (cfg.kind == lhs::DescriptorKind::Lhs) {
            lhs::GmmTrainResult r = lhs::train_gmm(train_imgs, cfg.mode, cfg.gmm);
            model = std::move(r.model);
            stats = lhs::compute_whitening(model, r.samples);
            std::cerr << "[classify] pipeline trained on " << r.samples.size() << " features in "
                      << seconds_since(t0) << "s\n";
        }
        lhs::PatternVariant variant = cfg.kind == lhs::DescriptorKind::Ltp
                                          ? lhs::PatternVariant::ltp(cfg.ltp_tolerance)
                                          : lhs::PatternVariant::lbp();
        auto encode_all = [&](const std::vector<lhs::GrayImage>& imgs, lhs::Matrix& x) {
            std::vector<lhs::Descriptor> descs(imgs.size());
            lhs::parallel_for(imgs.size(), [&](size_t i) {
                descs[i] = cfg.kind == lhs::DescriptorKind::Lhs
                               ? lhs::encode_image(model, stats, imgs[i], cfg.mode, cfg.grid)
                               : lhs::pattern_descriptor(imgs[i], cfg.mode, variant, cfg.grid);
            });
            x = lhs::Matrix(static_cast<int>(descs.size()), descs.empty() ? 0 : descs[0].dim());
            for (size_t i = 0; i < descs.size(); ++i)
                std::copy(descs[i].values.begin(), descs[i].values.end(),
                          x.row(static_cast<int>(i)));
        };
        encode_all(train_imgs, xt);
        encode_all(test_imgs, xe);
        for (const auto& e : train.entries) yt.push_back(e.label);
        for (const auto& e : test.entries) ye.push_back(e.label);
    }

    lhs::CvResult cv = lhs::svm_cv_select_c(xt, yt, parse_grid_list(c_grid_csv), folds, seed);
    lhs::LinearSvmModel svm = lhs::svm_train(xt, yt, cv.c, seed);
    std::vector<std::string> pred = lhs::svm_predict_batch(svm, xe);
    lhs::EvalReport r = lhs::eval_classification(pred, ye);

    std::cout << "classes:";
    for (const std::string& l : r.labels) std::cout << " " << l;
    std::cout << "\nconfusion (rows = truth):\n";
    for (size_t i = 0; i < r.confusion.size(); ++i) {
        std::cout << "  " << r.labels[i] << ":";
        for (int v : r.confusion[i]) std::cout << " " << v;
        std::cout << "\n";
    }
    std::cout << "c=" << cv.c << "\n";
    std::cout << "cv_accuracy=" << cv.accuracy << "\n";
    std::cout << "accuracy=" << r.accuracy << "\n";
    for (const auto& [label, acc] : r.per_class_accuracy)
        std::cout << "class_accuracy_" << label << "=" << acc << "\n";
    return 0;
}

int cmd_train_metric(const std::string& pairs_path, const std::string& desc_dir, int dim,
                     lhs::SgdConfig cfg, bool flips, const std::string& out) {
    auto entries = lhs::load_pairs(pairs_path);
    PairData d = load_pair_descriptors(entries, desc_dir, flips);
    auto t0 = Clock::now();
    lhs::Matrix proj = lhs::wpca_init(d.descriptors, dim, cfg.seed);
    std::cerr << "[train-metric] WPCA init in " << seconds_since(t0) << "s\n";

    std::vector<double> loss_log;
    auto t1 = Clock::now();
    lhs::MetricModel model =
        lhs::sgd_train(lhs::make_metric_model(std::move(proj), cfg.bias, cfg.margin),
                       d.descriptors, d.pairs, cfg, flips ? &d.flipped : nullptr, &loss_log);
    std::cerr << "[train-metric] " << cfg.iters << " SGD iterations in " << seconds_since(t1)
              << "s\n";
    lhs::save_metric(model, out);

    std::cout << "pairs=" << d.pairs.size() << "\n";
    std::cout << "dim=" << dim << "\n";
    std::cout << "initial_loss=" << (loss_log.empty() ? 0.0 : loss_log.front()) << "\n";
    std::cout << "final_loss=" << (loss_log.empty() ? 0.0 : loss_log.back()) << "\n";
    std::cout << "model=" << out << "\n";
    return 0;
}

int cmd_verify(const std::string& train_pairs_path, const std::string& test_pairs_path,
               const std::string& desc_dir, const std::string& metric_path, bool unsupervised,
               const lhs::PipelineConfig& cfg) {
    if (unsupervised == !metric_path.empty())
        throw lhs::InvalidArgument("choose exactly one of --metric or --unsupervised");
    auto train_entries = lhs::load_pairs(train_pairs_path);
    auto test_entries = lhs::load_pairs(test_pairs_path);

    std::optional<lhs::MetricModel> metric;
    bool flips = false;
    if (!metric_path.empty()) {
        if (desc_dir.empty())
            throw lhs::InvalidArgument("verify --metric needs --desc (run `lhs encode` first)");
        metric = lhs::load_metric(metric_path);
        // use flip-averaged scoring when flipped descriptors were encoded
        flips = fs::exists(resolve_descriptor(desc_dir, train_entries.front().path_a, true));
    }

    std::vector<double> train_scores, test_scores;
    std::vector<int> train_labels, test_labels;
    if (!desc_dir.empty()) {
        auto score_all = [&](const std::vector<lhs::PairEntry>& entries, std::vector<double>& s,
                             std::vector<int>& l) {
            PairData d = load_pair_descriptors(entries, desc_dir, flips);
            for (size_t i = 0; i < d.pairs.size(); ++i) {
                const lhs::IndexPair& p = d.pairs[i];
                if (metric && flips)
                    s.push_back(lhs::score_pair_flipped(
                        *metric, d.descriptors.row_span(p.a), d.flipped.row_span(p.a),
                        d.descriptors.row_span(p.b), d.flipped.row_span(p.b)));
                else if (metric)
                    s.push_back(lhs::joint_distance(*metric, d.descriptors.row_span(p.a),
                                                    d.descriptors.row_span(p.b)));
                else {
                    lhs::Descriptor a = lhs::load_descriptor(
                        resolve_descriptor(desc_dir, entries[i].path_a, false));
                    lhs::Descriptor b = lhs::load_descriptor(
                        resolve_descriptor(desc_dir, entries[i].path_b, false));
                    s.push_back(unsupervised_score(a, b));
                }
            }
            l = d.labels;
        };
        score_all(train_entries, train_scores, train_labels);
        score_all(test_entries, test_scores, test_labels);
    } else {
        // no descriptor directory: run the unsupervised pipeline in memory,
        // training the GMM and whitening stats on the training pairs' images
        std::map<std::string, int> index;
        std::vector<std::string> order;
        bool in_train = true;
        auto collect = [&](const std::vector<lhs::PairEntry>& entries,
                           std::vector<int>* train_rows) {
            for (const auto& e : entries)
                for (const std::string& p : {e.path_a, e.path_b})
                    if (index.emplace(p, static_cast<int>(order.size())).second) {
                        order.push_back(p);
                        if (in_train && train_rows) train_rows->push_back(index[p]);
                    }
        };
        std::vector<int> train_rows;
        collect(train_entries, &train_rows);
        in_train = false;
        collect(test_entries, nullptr);

        std::vector<lhs::GrayImage> imgs(order.size());
        lhs::parallel_for(order.size(), [&](size_t i) {
            imgs[i] = cfg.preprocess.apply(lhs::load_image(order[i]));
        });
        std::vector<lhs::GrayImage> train_imgs;
        for (int i : train_rows) train_imgs.push_back(imgs[i]);
        auto t0 = Clock::now();
        lhs::GmmTrainResult r = lhs::train_gmm(train_imgs, cfg.mode, cfg.gmm);
        lhs::WhiteningStats stats = lhs::compute_whitening(r.model, r.samples);
        std::cerr << "[verify] pipeline trained on " << r.samples.size() << " features in "
                  << seconds_since(t0) << "s\n";
        std::vector<lhs::Descriptor> descs(order.size());
        lhs::parallel_for(order.size(), [&](size_t i) {
            descs[i] = lhs::encode_image(r.model, stats, imgs[i], cfg.mode, cfg.grid);
        });
        auto score_all = [&](const std::vector<lhs::PairEntry>& entries, std::vector<double>& s,
                             std::vector<int>& l) {
            for (const auto& e : entries) {
                s.push_back(unsupervised_score(descs[index[e.path_a]], descs[index[e.path_b]]));
                l.push_back(e.label);
            }
        };
        score_all(train_entries, train_scores, train_labels);
        score_all(test_entries, test_scores, test_labels);
    }

    double threshold = lhs::verify_threshold(train_scores, train_labels);
    lhs::EvalReport r = lhs::eval_verification(test_scores, test_labels, threshold);

    std::cout << "mode=" << (metric ? (flips ? "metric+flips" : "metric") : "unsupervised") << "\n";
    std::cout << "train_pairs=" << train_scores.size() << "\n";
    std::cout << "test_pairs=" << test_scores.size() << "\n";
    std::cout << "threshold=" << threshold << "\n";
    std::cout << "accuracy=" << r.accuracy << "\n";
    std::cout << "eer=" << r.eer << "\n";
    return 0;
}

int cmd_bench(const std::string& manifest_path, const std::string& protocol_str,
              lhs::PipelineConfig cfg) {
    lhs::Manifest m = lhs::load_manifest(manifest_path);

    lhs::Protocol protocol;
    protocol.seed = cfg.seed;
    std::stringstream ss(protocol_str);
    std::string head;
    std::getline(ss, head, ':');
    if (head == "random-split" || head == "pairs") {
        protocol.kind = head == "pairs" ? lhs::Protocol::Kind::PairVerification
                                        : lhs::Protocol::Kind::RandomSplit;
        std::string frac, runs;
        if (std::getline(ss, frac, ':')) protocol.fraction = std::stod(frac);
        if (std::getline(ss, runs, ':')) protocol.runs = std::stoi(runs);
    } else if (head == "logo" || head == "leave-one-group-out") {
        protocol.kind = lhs::Protocol::Kind::LeaveOneGroupOut;
    } else {
        throw lhs::InvalidArgument("unknown protocol: " + protocol_str +
                                   " (use random-split:FRACTION:RUNS, pairs:FRACTION:RUNS or logo)");
    }

    auto t0 = Clock::now();
    lhs::AggregateReport agg = lhs::run_protocol(m, protocol, cfg);
    std::cerr << "[bench] protocol finished in " << seconds_since(t0) << "s\n";
    lhs::print_report_human(std::cout, agg);
    lhs::print_report_kv(std::cout, agg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"local higher-order statistics image description pipeline"};
    app.require_subcommand(1);
    // key=value config file with one [section] per subcommand; explicit
    // command-line flags win over the file
    app.set_config("--config", "", "read options from a key=value config file");
    uint64_t default_seed = lhs::env_seed(0);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic texture dataset");
    std::string synth_out, synth_manifest;
    int synth_classes = 4, synth_count = 64, synth_size = 64;
    uint64_t synth_seed = default_seed;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--classes", synth_classes, "number of texture classes (2-4)");
    synth->add_option("--count", synth_count, "images per class");
    synth->add_option("--size", synth_size, "image side length in pixels");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--manifest", synth_manifest, "manifest output path");

    // train-gmm
    auto* tg = app.add_subcommand("train-gmm", "fit the differential-vector GMM and whitening stats");
    std::string tg_manifest, tg_out, tg_stats_out, tg_sampling = "circular";
    std::vector<std::string> tg_images;
    lhs::TrainConfig tg_cfg;
    tg_cfg.seed = default_seed;
    tg->add_option("--manifest", tg_manifest, "image manifest");
    tg->add_option("images", tg_images, "image files");
    tg->add_option("-K,--components", tg_cfg.components, "mixture components");
    tg->add_option("--sampling", tg_sampling, "rectangular or circular");
    tg->add_option("--seed", tg_cfg.seed, "RNG seed");
    tg->add_option("--max-samples", tg_cfg.max_samples, "feature subsample cap");
    tg->add_option("--kmeans-iters", tg_cfg.kmeans_iters, "Lloyd iterations");
    tg->add_option("--em-iters", tg_cfg.em_max_iters, "EM iteration cap");
    tg->add_option("--tol", tg_cfg.em_rel_tol, "EM relative log-likelihood tolerance");
    tg->add_option("--out", tg_out, "model output path")->required();
    tg->add_option("--stats-out", tg_stats_out, "whitening stats output path");

    // encode
    auto* en = app.add_subcommand("encode", "encode images into descriptor files");
    std::string en_manifest, en_model, en_stats, en_kind = "lhs", en_grid, en_sampling, en_out;
    std::vector<std::string> en_images;
    double en_ltp_t = 5.0;
    bool en_flips = false;
    en->add_option("--manifest", en_manifest, "image manifest");
    en->add_option("images", en_images, "image files");
    en->add_option("--model", en_model, "GMM model file");
    en->add_option("--stats", en_stats, "whitening stats file");
    en->add_option("--kind", en_kind, "lhs, lbp or ltp");
    en->add_option("--t", en_ltp_t, "LTP tolerance");
    en->add_option("--grid", en_grid, "spatial grid ROWSxCOLS (default none)");
    en->add_option("--sampling", en_sampling, "rectangular or circular");
    en->add_flag("--flips", en_flips, "also encode horizontally flipped images");
    en->add_option("--out", en_out, "descriptor output directory")->required();

    // train-svm
    auto* ts = app.add_subcommand("train-svm", "train a one-vs-rest linear SVM on descriptors");
    std::string ts_train, ts_desc, ts_out, ts_c_grid = "0.01,0.1,1,10,100";
    double ts_c = 0.0;
    int ts_folds = 5;
    uint64_t ts_seed = default_seed;
    ts->add_option("--train", ts_train, "training manifest")->required();
    ts->add_option("--desc", ts_desc, "descriptor directory")->required();
    ts->add_option("--c", ts_c, "fixed cost (skips cross-validation)");
    ts->add_option("--c-grid", ts_c_grid, "comma-separated C grid for 5-fold CV");
    ts->add_option("--folds", ts_folds, "cross-validation folds");
    ts->add_option("--seed", ts_seed, "RNG seed");
    ts->add_option("--out", ts_out, "model output path")->required();

    // classify
    auto* cl = app.add_subcommand("classify", "train with CV on --train, report accuracy on --test");
    std::string cl_train, cl_test, cl_desc, cl_c_grid = "0.01,0.1,1,10,100";
    int cl_folds = 5;
    uint64_t cl_seed = default_seed;
    cl->add_option("--train", cl_train, "training manifest")->required();
    cl->add_option("--test", cl_test, "test manifest")->required();
    cl->add_option("--desc", cl_desc, "descriptor directory")->required();
    cl->add_option("--c-grid", cl_c_grid, "comma-separated C grid");
    cl->add_option("--folds", cl_folds, "cross-validation folds");
    cl->add_option("--seed", cl_seed, "RNG seed");

    // train-metric
    auto* tm = app.add_subcommand("train-metric", "learn the joint metric with SGD");
    std::string tm_pairs, tm_desc, tm_out;
    int tm_dim = 128;
    bool tm_flips = false, tm_symmetric = false;
    lhs::SgdConfig tm_cfg;
    tm_cfg.seed = default_seed;
    tm->add_option("--pairs", tm_pairs, "training pairs file: pathA pathB {1|-1}")->required();
    tm->add_option("--desc", tm_desc, "descriptor directory")->required();
    tm->add_option("--dim", tm_dim, "projection dimension");
    tm->add_option("--iters", tm_cfg.iters, "SGD iterations");
    tm->add_option("--rate", tm_cfg.rate, "learning rate");
    tm->add_option("--bias", tm_cfg.bias, "bias b");
    tm->add_option("--margin", tm_cfg.margin, "margin m");
    tm->add_option("--seed", tm_cfg.seed, "RNG seed");
    tm->add_option("--log-every", tm_cfg.log_every, "loss logging interval");
    tm->add_flag("--flips", tm_flips, "sample flipped variants during SGD");
    tm->add_flag("--symmetric-v", tm_symmetric, "use the symmetric-gradient V update");
    tm->add_option("--out", tm_out, "model output path")->required();

    // verify
    auto* vf = app.add_subcommand("verify", "threshold pair scores; report accuracy and EER");
    std::string vf_pairs, vf_test_pairs, vf_desc, vf_metric;
    bool vf_unsup = false;
    vf->add_option("--pairs", vf_pairs, "training pairs file")->required();
    vf->add_option("--test-pairs", vf_test_pairs, "test pairs file")->required();
    vf->add_option("--desc", vf_desc, "descriptor directory")->required();
    vf->add_option("--metric", vf_metric, "metric model file");
    vf->add_flag("--unsupervised", vf_unsup, "mean per-cell l2 distance, no metric");

    // bench
    auto* bn = app.add_subcommand("bench", "run a full train/encode/classify protocol");
    std::string bn_manifest, bn_protocol = "random-split:0.5:10", bn_kind = "lhs";
    std::string bn_sampling = "circular", bn_grid, bn_c_grid = "0.01,0.1,1,10,100";
    lhs::PipelineConfig bn_cfg;
    bn_cfg.seed = default_seed;
    bn_cfg.gmm.seed = default_seed;
    double bn_ltp_t = 5.0;
    bn->add_option("--manifest", bn_manifest, "dataset manifest")->required();
    bn->add_option("--protocol", bn_protocol, "random-split:FRACTION:RUNS or logo");
    bn->add_option("--kind", bn_kind, "lhs, lbp or ltp");
    bn->add_option("-K,--components", bn_cfg.gmm.components, "mixture components");
    bn->add_option("--sampling", bn_sampling, "rectangular or circular");
    bn->add_option("--grid", bn_grid, "spatial grid ROWSxCOLS");
    bn->add_option("--seed", bn_cfg.seed, "RNG seed");
    bn->add_option("--max-samples", bn_cfg.gmm.max_samples, "feature subsample cap");
    bn->add_option("--em-iters", bn_cfg.gmm.em_max_iters, "EM iteration cap");
    bn->add_option("--kmeans-iters", bn_cfg.gmm.kmeans_iters, "Lloyd iterations");
    bn->add_option("--t", bn_ltp_t, "LTP tolerance");
    bn->add_option("--c-grid", bn_c_grid, "comma-separated C grid");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(synth_out, synth_classes, synth_count, synth_size, synth_seed,
                             synth_manifest);
        if (tg->parsed())
            return cmd_train_gmm(tg_manifest, tg_images, tg_cfg, tg_sampling, tg_out, tg_stats_out);
        if (en->parsed())
            return cmd_encode(en_manifest, en_images, en_model, en_stats, en_kind, en_ltp_t,
                              en_grid, en_sampling, en_flips, en_out);
        if (ts->parsed())
            return cmd_train_svm(ts_train, ts_desc, ts_c, ts_c_grid, ts_folds, ts_seed, ts_out);
        if (cl->parsed())
            return cmd_classify(cl_train, cl_test, cl_desc, cl_c_grid, cl_folds, cl_seed);
        if (tm->parsed()) {
            tm_cfg.symmetric_v_update = tm_symmetric;
            return cmd_train_metric(tm_pairs, tm_desc, tm_dim, tm_cfg, tm_flips, tm_out);
        }
        if (vf->parsed()) return cmd_verify(vf_pairs, vf_test_pairs, vf_desc, vf_metric, vf_unsup);
        if (bn->parsed()) {
            bn_cfg.kind = lhs::descriptor_kind_from_string(bn_kind);
            bn_cfg.mode = lhs::sampling_mode_from_string(bn_sampling);
            bn_cfg.grid = lhs::grid_from_string(bn_grid);
            bn_cfg.ltp_tolerance = bn_ltp_t;
            bn_cfg.c_grid = parse_grid_list(bn_c_grid);
            bn_cfg.gmm.seed = bn_cfg.seed;
            return cmd_bench(bn_manifest, bn_protocol, bn_cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
