// Copyright 2026 The segpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "segpipe/config.hpp"
#include "segpipe/dataset.hpp"
#include "segpipe/errors.hpp"
#include "segpipe/kmeans.hpp"
#include "segpipe/metrics.hpp"
#include "segpipe/network.hpp"
#include "segpipe/palette.hpp"
#include "segpipe/report.hpp"
#include "segpipe/simd/kernels.hpp"
#include "segpipe/train.hpp"

#ifndef SEGPIPE_VERSION
#define SEGPIPE_VERSION "0.0.0"
#endif

namespace segpipe::cli {

namespace fs = std::filesystem;

namespace {

// Flags that mirror PipelineConfig fields. Only flags present on the command
// line override the config file.
class Binder {
public:
    template <typename T>
    CLI::Option* bind(CLI::App* app, const std::string& name, T PipelineConfig::*field, const std::string& help) {
        CLI::Option* opt = app->add_option(name, scratch_.*field, help)->capture_default_str();
        copies_.push_back({opt, [this, field](PipelineConfig& c) { c.*field = scratch_.*field; }});
        return opt;
    }

    CLI::Option* bind_lr(CLI::App* app) {
        CLI::Option* opt =
            app->add_option("--lr", lr_, "learning rate (default 1e-3 for adam, 1e-2 for sgd)");
        copies_.push_back({opt, [this](PipelineConfig& c) { c.learning_rate = lr_; }});
        return opt;
    }

    void apply(PipelineConfig& config) const {
        for (const auto& [opt, copy] : copies_) {
            if (opt->count() > 0) copy(config);
        }
    }

private:
    PipelineConfig scratch_;
    double lr_ = 0.0;
    std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> copies_;
};

struct Io {
    std::ostream& out;
    std::ostream& err;
};

Palette resolve_palette(const PipelineConfig& c) { return c.palette.empty() ? Palette::street12() : load_palette(c.palette); }

fs::path or_default(const std::string& flag, const fs::path& fallback) { return flag.empty() ? fallback : fs::path(flag); }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<std::string> class_names_for(const Palette& palette, std::size_t classes) {
    std::vector<std::string> names;
    if (palette.size() != classes) return names;
    for (const auto& e : palette.entries()) names.push_back(e.name);
    return names;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// gen ------------------------------------------------------------------------

struct GenOpts {
    std::size_t count = 8;
    std::size_t width = 32;
    std::size_t height = 32;
};

int run_gen(const PipelineConfig& c, const GenOpts& o, Io io) {
    const Palette palette = resolve_palette(c);
    const fs::path root = c.data_dir;
    ensure_dir(root / "images");
    ensure_dir(root / "truth");
    for (std::size_t i = 0; i < o.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "scene_%03zu", i);
        auto [image, labels] = generate_synthetic_scene(o.width, o.height, c.seed + i, palette);
        save_image(image, root / "images" / (std::string(id) + ".ppm"));
        save_labels(labels, root / "truth" / (std::string(id) + ".pgm"));
    }
    save_palette(palette, root / "palette.csv");
    io.out << "gen: " << o.count << " scenes " << o.width << "x" << o.height << " -> " << root.string()
           << " (seed " << c.seed << ")\n";
    return kOk;
}

// cluster --------------------------------------------------------------------

struct ClusterOpts {
    std::vector<std::string> inputs;
    std::size_t max_iters = 100;
    double tol = 0.5;
    std::string out;
    std::string labels_out;
    std::string recolor_out;
};

int run_cluster(const PipelineConfig& c, const ClusterOpts& o, Io io) {
    std::vector<Image> images;
    std::vector<std::uint8_t> pixels;
    for (const auto& path : o.inputs) {
        images.push_back(load_image(path));
        pixels.insert(pixels.end(), images.back().pixels.begin(), images.back().pixels.end());
    }
    KMeansOptions km;
    km.k = c.k;
    km.seed = c.seed;
    km.max_iters = o.max_iters;
    km.tol = o.tol;
    const ClusterModel model = kmeans_fit(pixels, km);
    if (model.reduced()) {
        io.err << "note: k reduced from " << model.requested_k << " to " << model.k << " (distinct colors)\n";
    }
    save_model(model, o.out);
    if (!o.labels_out.empty() || !o.recolor_out.empty()) {
        if (images.size() != 1) throw ConfigError("--labels-out and --recolor-out need exactly one --input");
        const LabelMap labels = kmeans_assign(images[0], model);
        if (!o.labels_out.empty()) save_labels(labels, o.labels_out);
        if (!o.recolor_out.empty()) save_image(recolor(labels, centroid_colors(model)), o.recolor_out);
    }
    io.out << "cluster: k=" << model.k << " iterations=" << model.iterations_run
           << " inertia=" << fmt("%.6f", model.inertia) << " seed=" << model.seed << " -> " << o.out << "\n";
    return kOk;
}

// labelgen -------------------------------------------------------------------

struct LabelgenOpts {
    std::string images;
    std::string out;
    std::size_t max_iters = 100;
    double tol = 0.5;
    bool raw = false;
    std::string model_out;
};

int run_labelgen(const PipelineConfig& c, const LabelgenOpts& o, Io io) {
    const fs::path image_dir = or_default(o.images, fs::path(c.data_dir) / "images");
    const fs::path out_dir = or_default(o.out, fs::path(c.data_dir) / "labels");
    const auto ids = list_ids(image_dir, ".ppm");
    if (ids.empty()) throw DataError("no .ppm images in " + image_dir.string());

    std::vector<Image> images;
    std::vector<std::uint8_t> pixels;
    for (const auto& id : ids) {
        images.push_back(load_image(image_dir / (id + ".ppm")));
        pixels.insert(pixels.end(), images.back().pixels.begin(), images.back().pixels.end());
    }
    KMeansOptions km;
    km.k = c.k;
    km.seed = c.seed;
    km.max_iters = o.max_iters;
    km.tol = o.tol;
    const ClusterModel model = kmeans_fit(pixels, km);
    if (model.reduced()) {
        io.err << "note: k reduced from " << model.requested_k << " to " << model.k << " (distinct colors)\n";
    }
    if (!o.model_out.empty()) save_model(model, o.model_out);

    // Cluster j becomes the palette class whose color is nearest to its
    // rounded centroid, unless raw cluster indices were requested.
    std::vector<std::uint8_t> class_of(model.k);
    const auto colors = centroid_colors(model);
    const Palette palette = resolve_palette(c);
    for (std::size_t j = 0; j < model.k; ++j) {
        class_of[j] = o.raw ? static_cast<std::uint8_t>(j) : palette.nearest(colors[j]);
    }

    ensure_dir(out_dir);
    std::vector<bool> used(256, false);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        LabelMap labels = kmeans_assign(images[i], model);
        for (auto& l : labels.labels) {
            l = class_of[l];
            used[l] = true;
        }
        save_labels(labels, out_dir / (ids[i] + ".pgm"));
    }
    io.out << "labelgen: " << ids.size() << " images, k=" << model.k << ", inertia=" << fmt("%.6f", model.inertia)
           << ", " << std::count(used.begin(), used.end(), true) << " labels used -> " << out_dir.string()
           << " (seed " << c.seed << ")\n";
    return kOk;
}

// recolor --------------------------------------------------------------------

struct RecolorOpts {
    std::string labels;
    std::string out;
    std::string source = "palette";
    std::string model;
};

int run_recolor(const PipelineConfig& c, const RecolorOpts& o, Io io) {
    const LabelMap labels = load_labels(o.labels);
    std::vector<Rgb> colors;
    if (o.source == "centroids") {
        if (o.model.empty()) throw ConfigError("--source centroids needs --model");
        colors = centroid_colors(load_model(o.model));
    } else if (o.source == "palette") {
        colors = palette_colors(resolve_palette(c));
    } else {
        throw ConfigError("--source must be palette or centroids");
    }
    save_image(recolor(labels, colors), o.out);
    io.out << "recolor: " << labels.width << "x" << labels.height << " from " << o.source << " -> " << o.out << "\n";
    return kOk;
}

// augment --------------------------------------------------------------------

struct AugmentOpts {
    std::string images;
    std::string labels;
    std::string out;
    std::vector<std::string> ops{"hflip", "vflip", "rot90", "rot180", "rot270"};
};

int run_augment(const PipelineConfig& c, const AugmentOpts& o, Io io) {
    const fs::path image_dir = or_default(o.images, fs::path(c.data_dir) / "images");
    const fs::path label_dir = or_default(o.labels, fs::path(c.data_dir) / "labels");
    const fs::path out_root = or_default(o.out, fs::path(c.data_dir));
    std::vector<Augmentation> ops;
    for (const auto& name : o.ops) ops.push_back(parse_augmentation(name));

    const auto ids = list_ids(image_dir, ".ppm");
    const auto samples = load_samples(image_dir, label_dir, ids);
    ensure_dir(out_root / "images");
    ensure_dir(out_root / "labels");
    std::size_t written = 0;
    for (const auto& s : samples) {
        for (auto op : ops) {
            auto [img, lbl] = augment(s.image, s.labels, op);
            const std::string id = s.id + "_" + std::string(augmentation_name(op));
            save_image(img, out_root / "images" / (id + ".ppm"));
            save_labels(lbl, out_root / "labels" / (id + ".pgm"));
            ++written;
        }
    }
    io.out << "augment: " << samples.size() << " samples x " << ops.size() << " ops = " << written << " new samples -> "
           << out_root.string() << "\n";
    return kOk;
}

// split ----------------------------------------------------------------------

struct SplitOpts {
    std::string images;
    std::string out;
};

int run_split(const PipelineConfig& c, const SplitOpts& o, Io io) {
    const fs::path image_dir = or_default(o.images, fs::path(c.data_dir) / "images");
    const fs::path out = or_default(o.out, fs::path(c.data_dir) / "split.txt");
    const DatasetSplit split = split_dataset(list_ids(image_dir, ".ppm"), c.split_ratio, c.seed);
    write_text(out, format_split(split));
    io.out << "split: " << split.train.size() << " train, " << split.val.size() << " val -> " << out.string()
           << " (seed " << c.seed << ")\n";
    return kOk;
}

struct SampleSource {
    std::string images;
    std::string labels;
    std::string split;
    std::string subset = "all";
};

// Loads train and val samples. Without a split file every sample trains.
std::pair<std::vector<Sample>, std::vector<Sample>> load_split_samples(const PipelineConfig& c, const SampleSource& s) {
    const fs::path image_dir = or_default(s.images, fs::path(c.data_dir) / "images");
    const fs::path label_dir = or_default(s.labels, fs::path(c.data_dir) / "labels");
    fs::path split_path = s.split;
    if (split_path.empty() && fs::exists(fs::path(c.data_dir) / "split.txt")) split_path = fs::path(c.data_dir) / "split.txt";

    std::vector<std::string> train_ids, val_ids;
    if (split_path.empty()) {
        train_ids = list_ids(image_dir, ".ppm");
    } else {
        const auto bytes = read_file(split_path);
        DatasetSplit split = parse_split(std::string(bytes.begin(), bytes.end()));
        train_ids = std::move(split.train);
        val_ids = std::move(split.val);
    }
    if (train_ids.empty() && val_ids.empty()) throw DataError("no samples found in " + image_dir.string());
    return {load_samples(image_dir, label_dir, train_ids), load_samples(image_dir, label_dir, val_ids)};
}

std::vector<Sample> select_subset(std::pair<std::vector<Sample>, std::vector<Sample>> sets, const std::string& subset) {
    if (subset == "train") return std::move(sets.first);
    if (subset == "val") return std::move(sets.second);
    if (subset != "all") throw ConfigError("--subset must be all, train or val");
    auto all = std::move(sets.first);
    for (auto& s : sets.second) all.push_back(std::move(s));
    return all;
}

// train ----------------------------------------------------------------------

struct TrainOpts {
    SampleSource source;
    std::vector<std::size_t> widths{16, 32, 64};
    std::string head_init = "he";
    double momentum = 0.0;
    double clip_norm = 0.0;
    std::string report;
    std::size_t log_every = 10;
};

int run_train(const PipelineConfig& c, const TrainOpts& o, Io io) {
    auto [train_set, val_set] = load_split_samples(c, o.source);
    if (train_set.empty()) throw DataError("the split has no training samples");

    NetworkConfig nc;
    nc.num_classes = c.num_classes;
    nc.stage_widths = o.widths;
    if (o.head_init == "zero") {
        nc.head_init = HeadInit::zero;
    } else if (o.head_init != "he") {
        throw ConfigError("--head-init must be he or zero");
    }
    try {
        nc.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    Network net = build_network(nc, c.seed);

    TrainOptions t;
    t.epochs = c.epochs;
    t.batch_size = c.batch_size;
    t.seed = c.seed;
    t.optimizer.kind = optim::parse_kind(c.optimizer);
    t.optimizer.learning_rate = static_cast<float>(c.effective_learning_rate());
    t.optimizer.momentum = static_cast<float>(o.momentum);
    if (o.clip_norm > 0.0) t.clip_norm = o.clip_norm;
    t.on_epoch = [&](const EpochRecord& r) {
        if (o.log_every > 0 && (r.epoch % o.log_every == 0 || r.epoch == 1 || r.epoch == c.epochs)) {
            io.err << "epoch " << r.epoch << "/" << c.epochs << " loss " << fmt("%.6f", r.train_loss);
            if (r.val_miou) io.err << " val_miou " << fmt("%.4f", *r.val_miou);
            io.err << " (" << fmt("%.2f", r.seconds) << " s)\n";
        }
        return true;
    };
    const TrainReport report = train(net, train_set, val_set, t);
    save_checkpoint(net, c.checkpoint);

    fs::path report_path = o.report;
    if (report_path.empty() && !c.report_dir.empty()) report_path = fs::path(c.report_dir) / "train.csv";
    if (!report_path.empty()) {
        std::string text = "# seed " + std::to_string(c.seed) + " optimizer " + c.optimizer + " learning_rate " +
                           fmt("%g", c.effective_learning_rate()) + " batch_size " + std::to_string(c.batch_size) +
                           "\n" + format_train_report(report);
        write_text(report_path, text);
    }

    io.out << "train: " << report.epochs.size() << " epochs on " << train_set.size() << " samples";
    if (!report.epochs.empty()) {
        io.out << ", final loss " << fmt("%.6f", report.epochs.back().train_loss);
        if (report.epochs.back().val_miou) io.out << ", val_miou " << fmt("%.4f", *report.epochs.back().val_miou);
    }
    io.out << " -> " << c.checkpoint << " (seed " << c.seed << ")\n";
    return kOk;
}

// eval -----------------------------------------------------------------------

struct EvalOpts {
    SampleSource source;
    std::string pred;
    std::string truth;
    std::string counts;
    std::string audit;
    double audit_tolerance = 0.05;
    std::string report;
    std::string format;
    bool use_checkpoint = false;
};

// CSV rows `class,tp,fp,fn[,printed_iou]` with a header line.
ConfusionCounts read_counts_csv(const fs::path& path, std::vector<double>& printed) {
    const auto bytes = read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    std::getline(in, line);
    std::vector<std::array<std::uint64_t, 3>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string f;
        std::vector<std::string> parts;
        while (std::getline(fields, f, ',')) parts.push_back(f);
        if (parts.size() != 4 && parts.size() != 5) {
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": expected class,tp,fp,fn[,printed_iou]");
        }
        try {
            rows.push_back({std::stoull(parts[1]), std::stoull(parts[2]), std::stoull(parts[3])});
            if (parts.size() == 5) printed.push_back(std::stod(parts[4]));
        } catch (const std::exception&) {
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": bad number");
        }
    }
    if (!printed.empty() && printed.size() != rows.size()) {
        throw DataError(path.string() + ": printed_iou must be given on every row or none");
    }
    ConfusionCounts counts(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        counts.tp[i] = rows[i][0];
        counts.fp[i] = rows[i][1];
        counts.fn[i] = rows[i][2];
        counts.total_pixels += rows[i][0] + rows[i][2];
    }
    return counts;
}

int run_eval(const PipelineConfig& c, const EvalOpts& o, Io io) {
    const Palette palette = resolve_palette(c);
    ConfusionCounts counts;
    std::optional<std::size_t> params;
    std::vector<double> printed;
    std::size_t images = 0;

    if (!o.counts.empty()) {
        counts = read_counts_csv(o.counts, printed);
    } else if (!o.pred.empty()) {
        const fs::path truth_dir = or_default(o.truth, fs::path(c.data_dir) / "labels");
        counts = ConfusionCounts(c.num_classes);
        for (const auto& id : list_ids(truth_dir, ".pgm")) {
            const fs::path pred_path = fs::path(o.pred) / (id + ".pgm");
            if (!fs::exists(pred_path)) throw DataError("missing prediction " + pred_path.string());
            counts.add(load_labels(pred_path), load_labels(truth_dir / (id + ".pgm")));
            ++images;
        }
    } else {
        const Network net = load_checkpoint(c.checkpoint);
        SampleSource src = o.source;
        if (!o.truth.empty()) src.labels = o.truth;
        const auto samples = select_subset(load_split_samples(c, src), src.subset);
        counts = evaluate(net, samples);
        params = param_count(net);
        images = samples.size();
    }
    if (counts.num_classes == 0) throw DataError("nothing to evaluate");

    const IouReport iou = mean_iou(counts);
    const auto names = class_names_for(palette, counts.num_classes);
    const Report report = make_report(iou, counts, std::nullopt, params, names);

    fs::path report_path = o.report;
    if (report_path.empty() && !c.report_dir.empty()) report_path = fs::path(c.report_dir) / "eval.csv";
    if (!report_path.empty()) {
        if (report_path.has_parent_path()) ensure_dir(report_path.parent_path());
        const ReportFormat format = o.format.empty() ? report_format_for(report_path) : parse_report_format(o.format);
        write_report(report, report_path, format);
    }

    std::size_t flagged = 0;
    if (!printed.empty()) {
        const auto checks = audit_printed_iou(counts, printed, o.audit_tolerance);
        for (const auto& ch : checks) {
            if (!ch.consistent) {
                ++flagged;
                io.err << "flag: " << display_class_name(ch.class_index) << " printed " << fmt("%.4f", ch.printed)
                       << " but counts give " << (ch.computed ? fmt("%.4f", *ch.computed) : std::string("absent"))
                       << "\n";
            }
        }
        if (!o.audit.empty()) write_text(o.audit, format_audit_csv(checks));
    }

    io.out << format_report_table(report);
    io.out << "eval: mean_iou " << fmt("%.4f", iou.mean_iou) << " over " << iou.classes_counted << " classes";
    if (counts.total_pixels > 0 && o.counts.empty()) io.out << ", pixel_accuracy " << fmt("%.4f", pixel_accuracy(counts));
    if (images > 0) io.out << ", " << images << " images";
    if (!printed.empty()) io.out << ", " << flagged << " printed values inconsistent";
    io.out << "\n";
    return kOk;
}

// bench ----------------------------------------------------------------------

struct BenchOpts {
    std::string images;
    bool untrained = false;
    std::size_t synthetic = 0;
    std::size_t width = 64;
    std::size_t height = 64;
    std::size_t limit = 0;
    std::size_t warmup = kDefaultWarmup;
    std::size_t repeats = kDefaultRepeats;
    std::string report;
};

std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

int run_bench(const PipelineConfig& c, const BenchOpts& o, Io io) {
    Network net;
    if (o.untrained) {
        NetworkConfig nc;
        nc.num_classes = c.num_classes;
        net = build_network(nc, c.seed);
    } else {
        net = load_checkpoint(c.checkpoint);
    }

    std::vector<Image> images;
    if (o.synthetic > 0) {
        const Palette palette = Palette::street12();
        for (std::size_t i = 0; i < o.synthetic; ++i) {
            images.push_back(generate_synthetic_scene(o.width, o.height, c.seed + i, palette).first);
        }
    } else {
        const fs::path image_dir = or_default(o.images, fs::path(c.data_dir) / "images");
        for (const auto& id : list_ids(image_dir, ".ppm")) {
            if (o.limit > 0 && images.size() >= o.limit) break;
            images.push_back(load_image(image_dir / (id + ".ppm")));
        }
    }
    if (o.repeats < 1) throw ConfigError("--repeats must be at least 1");
    const FpsResult r = fps_benchmark(net, images, o.warmup, o.repeats);

    nlohmann::ordered_json j;
    j["fps"] = r.fps;
    j["images_processed"] = r.images_processed;
    j["wall_seconds"] = r.wall_seconds;
    j["warmup_iters"] = r.warmup_iters;
    j["repeats"] = r.repeats;
    j["batch_size"] = 1;
    j["image_width"] = images.front().width;
    j["image_height"] = images.front().height;
    j["param_count"] = param_count(net);
    j["param_millions"] = std::round(param_count(net) / 1e4) / 100.0;
    j["checkpoint"] = o.untrained ? std::string() : c.checkpoint;
    j["seed"] = c.seed;
    j["machine"] = {{"isa", std::string(simd::isa_name(simd::active().isa))},
                    {"hardware_concurrency", std::thread::hardware_concurrency()},
                    {"threads_used", 1},
                    {"compiler", compiler_id()}};

    fs::path report_path = o.report;
    if (report_path.empty() && !c.report_dir.empty()) report_path = fs::path(c.report_dir) / "bench.json";
    if (!report_path.empty()) write_text(report_path, j.dump(2) + "\n");

    io.out << "bench: fps " << fmt("%.2f", r.fps) << ", " << r.images_processed << " images in "
           << fmt("%.4f", r.wall_seconds) << " s, " << images.front().width << "x" << images.front().height
           << ", isa " << simd::isa_name(simd::active().isa) << "\n";
    return kOk;
}

// infer ----------------------------------------------------------------------

struct InferOpts {
    std::string input;
    std::string out;
    std::string color;
};

int run_infer(const PipelineConfig& c, const InferOpts& o, Io io) {
    const Network net = load_checkpoint(c.checkpoint);
    const Image image = load_image(o.input);
    const LabelMap labels = predict(net, image);
    save_labels(labels, o.out);
    if (!o.color.empty()) {
        const Palette palette = resolve_palette(c);
        if (palette.size() < net.config().num_classes) throw DataError("palette has fewer colors than the network has classes");
        save_image(decode_labels(labels, palette), o.color);
    }
    io.out << "infer: " << image.width << "x" << image.height << " -> " << o.out << "\n";
    return kOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DivergedError*>(&e)) return kDiverged;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e)) return kUsage;
    return kData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pixel-level street scene segmentation pipeline", args.empty() ? "segpipe" : args[0]};
    app.set_version_flag("--version", std::string("segpipe ") + SEGPIPE_VERSION);
    app.require_subcommand(0, 1);

    std::string config_path;
    bool print_config = false;
    std::string simd_name;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
    app.add_option("--simd", simd_name, "kernel variant: scalar, avx2, neon or auto");

    Binder binder;
    auto common = [&](CLI::App* sub) {
        binder.bind(sub, "--data-dir", &PipelineConfig::data_dir, "dataset root");
        binder.bind(sub, "--seed", &PipelineConfig::seed, "random seed");
        binder.bind(sub, "--palette", &PipelineConfig::palette, "palette CSV (default: built-in street palette)");
    };

    GenOpts gen;
    auto* gen_cmd = app.add_subcommand("gen", "write synthetic street scenes with exact labels");
    common(gen_cmd);
    gen_cmd->add_option("--count", gen.count, "number of scenes")->capture_default_str();
    gen_cmd->add_option("--width", gen.width, "scene width")->capture_default_str();
    gen_cmd->add_option("--height", gen.height, "scene height")->capture_default_str();

    ClusterOpts cl;
    auto* cl_cmd = app.add_subcommand("cluster", "fit k-means to the colors of one or more images");
    common(cl_cmd);
    cl_cmd->add_option("--input", cl.inputs, "input PPM image(s)")->required();
    binder.bind(cl_cmd, "--k", &PipelineConfig::k, "number of clusters")->required();
    cl_cmd->add_option("--max-iters", cl.max_iters, "Lloyd iteration cap")->capture_default_str();
    cl_cmd->add_option("--tol", cl.tol, "stop when no centroid moves this far")->capture_default_str();
    cl_cmd->add_option("--out", cl.out, "cluster model output file")->required();
    cl_cmd->add_option("--labels-out", cl.labels_out, "also write the cluster label map (PGM)");
    cl_cmd->add_option("--recolor-out", cl.recolor_out, "also write the image recolored by centroids (PPM)");

    LabelgenOpts lg;
    auto* lg_cmd = app.add_subcommand("labelgen", "generate training labels by k-means color clustering");
    common(lg_cmd);
    binder.bind(lg_cmd, "--k", &PipelineConfig::k, "number of clusters");
    lg_cmd->add_option("--images", lg.images, "image directory (default <data-dir>/images)");
    lg_cmd->add_option("--out", lg.out, "label directory (default <data-dir>/labels)");
    lg_cmd->add_option("--max-iters", lg.max_iters, "Lloyd iteration cap")->capture_default_str();
    lg_cmd->add_option("--tol", lg.tol, "stop when no centroid moves this far")->capture_default_str();
    lg_cmd->add_flag("--raw", lg.raw, "write cluster indices instead of nearest palette classes");
    lg_cmd->add_option("--model-out", lg.model_out, "also save the fitted cluster model");

    RecolorOpts rc;
    auto* rc_cmd = app.add_subcommand("recolor", "paint a label map with palette or centroid colors");
    common(rc_cmd);
    rc_cmd->add_option("--labels", rc.labels, "label map (PGM)")->required();
    rc_cmd->add_option("--out", rc.out, "output image (PPM)")->required();
    rc_cmd->add_option("--source", rc.source, "palette or centroids")->capture_default_str();
    rc_cmd->add_option("--model", rc.model, "cluster model for --source centroids");

    AugmentOpts ag;
    auto* ag_cmd = app.add_subcommand("augment", "add flipped and rotated copies of every sample");
    common(ag_cmd);
    ag_cmd->add_option("--images", ag.images, "image directory (default <data-dir>/images)");
    ag_cmd->add_option("--labels", ag.labels, "label directory (default <data-dir>/labels)");
    ag_cmd->add_option("--out", ag.out, "output root with images/ and labels/ (default <data-dir>)");
    ag_cmd->add_option("--ops", ag.ops, "comma-separated: hflip,vflip,rot90,rot180,rot270")
        ->delimiter(',')
        ->capture_default_str();

    SplitOpts sp;
    auto* sp_cmd = app.add_subcommand("split", "seeded train/validation split");
    common(sp_cmd);
    binder.bind(sp_cmd, "--ratio", &PipelineConfig::split_ratio, "fraction of samples for training");
    sp_cmd->add_option("--images", sp.images, "image directory (default <data-dir>/images)");
    sp_cmd->add_option("--out", sp.out, "split file (default <data-dir>/split.txt)");

    auto add_source = [](CLI::App* sub, SampleSource& s) {
        sub->add_option("--images", s.images, "image directory (default <data-dir>/images)");
        sub->add_option("--labels", s.labels, "label directory (default <data-dir>/labels)");
        sub->add_option("--split", s.split, "split file (default <data-dir>/split.txt when present)");
    };

    TrainOpts tr;
    auto* tr_cmd = app.add_subcommand("train", "train the segmentation network");
    common(tr_cmd);
    add_source(tr_cmd, tr.source);
    binder.bind(tr_cmd, "--epochs", &PipelineConfig::epochs, "training epochs");
    binder.bind(tr_cmd, "--batch-size", &PipelineConfig::batch_size, "images per batch");
    binder.bind_lr(tr_cmd);
    binder.bind(tr_cmd, "--optimizer", &PipelineConfig::optimizer, "adam or sgd");
    binder.bind(tr_cmd, "--classes", &PipelineConfig::num_classes, "number of classes");
    binder.bind(tr_cmd, "--checkpoint", &PipelineConfig::checkpoint, "checkpoint output");
    binder.bind(tr_cmd, "--report-dir", &PipelineConfig::report_dir, "default directory for reports");
    tr_cmd->add_option("--widths", tr.widths, "encoder stage widths")->delimiter(',')->capture_default_str();
    tr_cmd->add_option("--head-init", tr.head_init, "classifier init: he or zero")->capture_default_str();
    tr_cmd->add_option("--momentum", tr.momentum, "SGD momentum")->capture_default_str();
    tr_cmd->add_option("--clip-norm", tr.clip_norm, "clip the global gradient norm (0 = off)")->capture_default_str();
    tr_cmd->add_option("--report", tr.report, "per-epoch CSV log");
    tr_cmd->add_option("--log-every", tr.log_every, "progress line every N epochs (0 = quiet)")->capture_default_str();

    EvalOpts ev;
    auto* ev_cmd = app.add_subcommand("eval", "per-class IOU and mean IOU");
    common(ev_cmd);
    add_source(ev_cmd, ev.source);
    ev_cmd->add_option("--subset", ev.source.subset, "with a checkpoint: all, train or val")->capture_default_str();
    ev_cmd->add_option("--pred", ev.pred, "directory of predicted label maps (PGM)");
    ev_cmd->add_option("--truth", ev.truth, "directory of ground-truth label maps (default <data-dir>/labels)");
    ev_cmd->add_option("--counts", ev.counts, "CSV of class,tp,fp,fn[,printed_iou] instead of label maps");
    ev_cmd->add_option("--audit", ev.audit, "CSV comparing printed IOUs with the counts");
    ev_cmd->add_option("--audit-tolerance", ev.audit_tolerance, "allowed |computed - printed|")->capture_default_str();
    binder.bind(ev_cmd, "--classes", &PipelineConfig::num_classes, "number of classes for --pred");
    binder.bind(ev_cmd, "--checkpoint", &PipelineConfig::checkpoint, "network to evaluate when --pred is not given");
    binder.bind(ev_cmd, "--report-dir", &PipelineConfig::report_dir, "default directory for reports");
    ev_cmd->add_option("--report", ev.report, "report file (.csv or .json)");
    ev_cmd->add_option("--format", ev.format, "csv or json (default from --report extension)");

    BenchOpts bn;
    auto* bn_cmd = app.add_subcommand("bench", "inference throughput at batch size 1");
    common(bn_cmd);
    binder.bind(bn_cmd, "--checkpoint", &PipelineConfig::checkpoint, "network to time");
    binder.bind(bn_cmd, "--classes", &PipelineConfig::num_classes, "classes for --untrained");
    binder.bind(bn_cmd, "--report-dir", &PipelineConfig::report_dir, "default directory for reports");
    bn_cmd->add_flag("--untrained", bn.untrained, "time a freshly initialized default network");
    bn_cmd->add_option("--images", bn.images, "image directory (default <data-dir>/images)");
    bn_cmd->add_option("--synthetic", bn.synthetic, "time N generated scenes instead of files")->capture_default_str();
    bn_cmd->add_option("--width", bn.width, "synthetic scene width")->capture_default_str();
    bn_cmd->add_option("--height", bn.height, "synthetic scene height")->capture_default_str();
    bn_cmd->add_option("--limit", bn.limit, "use at most N images (0 = all)")->capture_default_str();
    bn_cmd->add_option("--warmup", bn.warmup, "untimed predictions first")->capture_default_str();
    bn_cmd->add_option("--repeats", bn.repeats, "timed passes over the images")->capture_default_str();
    bn_cmd->add_option("--report", bn.report, "JSON report file");

    InferOpts inf;
    auto* inf_cmd = app.add_subcommand("infer", "predict the label map of one image");
    common(inf_cmd);
    binder.bind(inf_cmd, "--checkpoint", &PipelineConfig::checkpoint, "trained network");
    inf_cmd->add_option("--input", inf.input, "input image (PPM)")->required();
    inf_cmd->add_option("--out", inf.out, "predicted labels (PGM)")->required();
    inf_cmd->add_option("--color", inf.color, "also write the palette-colored prediction (PPM)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return kOk;
        }
        app.exit(e, out, err);
        return kUsage;
    }

    Io io{out, err};
    try {
        if (!simd_name.empty()) simd::set_active(simd::parse_isa(simd_name));
        PipelineConfig config;
        if (!config_path.empty()) config = load_config(config_path, config);
        binder.apply(config);
        config.validate();
        if (print_config) {
            out << config_to_json(config);
            return kOk;
        }
        if (app.get_subcommands().empty()) {
            err << app.help();
            return kUsage;
        }

        const CLI::App* sub = app.get_subcommands().front();
        if (sub == gen_cmd) return run_gen(config, gen, io);
        if (sub == cl_cmd) return run_cluster(config, cl, io);
        if (sub == lg_cmd) return run_labelgen(config, lg, io);
        if (sub == rc_cmd) return run_recolor(config, rc, io);
        if (sub == ag_cmd) return run_augment(config, ag, io);
        if (sub == sp_cmd) return run_split(config, sp, io);
        if (sub == tr_cmd) return run_train(config, tr, io);
        if (sub == ev_cmd) return run_eval(config, ev, io);
        if (sub == bn_cmd) return run_bench(config, bn, io);
        if (sub == inf_cmd) return run_infer(config, inf, io);
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace segpipe::cli
