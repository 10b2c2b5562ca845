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

// Acceptance runner. Each criterion prints one PASS/FAIL line followed by
// indented detail lines. `--criterion N` runs one; no argument runs all.
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../../tools/cli.hpp"
#include "gradcheck.hpp"
#include "oracles/oracles.hpp"
#include "reference_counts.hpp"
#include "segpipe/dataset.hpp"
#include "segpipe/errors.hpp"
#include "segpipe/kmeans.hpp"
#include "segpipe/metrics.hpp"
#include "segpipe/network.hpp"
#include "segpipe/palette.hpp"
#include "segpipe/report.hpp"
#include "segpipe/train.hpp"
#include "testutil.hpp"

using namespace segpipe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { notes.push_back("     " + what); }
};

std::string f(const char* format, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Image random_image(std::size_t w, std::size_t h, Rng& rng) {
    Image img(w, h);
    for (auto& v : img.pixels) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

std::vector<Sample> scenes(std::size_t n, std::size_t size) {
    std::vector<Sample> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto [img, labels] = generate_synthetic_scene(size, size, i, Palette::street12());
        out.push_back({"scene_" + std::to_string(i), std::move(img), std::move(labels)});
    }
    return out;
}

// 1. Gradient suite ---------------------------------------------------------

Outcome criterion_1() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    constexpr std::uint64_t kSeeds = 20;
    std::map<std::string, double> worst;
    std::size_t op_failures = 0;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        std::vector<gradcheck::Result> rs = gradcheck::conv(seed);
        rs.push_back(gradcheck::leaky(seed));
        rs.push_back(gradcheck::upsample(seed));
        rs.push_back(gradcheck::softmax_ce(seed));
        for (const auto& r : rs) {
            worst[r.name] = std::max(worst[r.name], r.max_rel);
            if (!(r.max_rel < 1e-3)) ++op_failures;
        }
    }
    for (const auto& [name, v] : worst) o.info(name + ": worst per-entry rel err " + f("%.3g", v));
    o.check(op_failures == 0, "per-op rel err < 1e-3 on every entry, seeds 1.." + std::to_string(kSeeds));

    double net_worst = 0, net_entry_worst = 0, floor = 0;
    std::size_t min_checked = SIZE_MAX, skipped = 0;
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const auto r = gradcheck::network(seed);
        net_worst = std::max(net_worst, r.normwise);
        net_entry_worst = std::max(net_entry_worst, r.max_rel);
        floor = std::max(floor, r.noise_floor);
        min_checked = std::min(min_checked, r.checked);
        skipped += r.skipped;
    }
    o.check(min_checked >= 50, "end-to-end: >= 50 parameters checked per seed (min " + std::to_string(min_checked) +
                                   ", " + std::to_string(skipped) + " kink-crossing draws redrawn)");
    o.check(net_worst < 5e-3, "end-to-end 2-stage net, 1x3x16x16: normwise rel err " + f("%.3g", net_worst) +
                                  " < 5e-3 over seeds 1.." + std::to_string(kSeeds));
    o.info("end-to-end worst single entry " + f("%.3g", net_entry_worst) + " (f32 loss rounding floor ~" +
           f("%.3g", floor) + ")");
    const double secs = seconds_since(t0);
    o.check(secs < 60.0, "runtime " + f("%.2f", secs) + " s < 60 s");
    return o;
}

// 2. IOU oracle -------------------------------------------------------------

Outcome criterion_2() {
    Outcome o;
    Rng rng(2024);
    std::size_t mismatches = 0;
    for (int pair = 0; pair < 200; ++pair) {
        const std::size_t w = 1 + rng.below(32), h = 1 + rng.below(32);
        LabelMap p(w, h), t(w, h);
        // Mix uniform labels with mostly-correct predictions so both regimes occur.
        const bool noisy = pair % 2 == 0;
        for (std::size_t i = 0; i < w * h; ++i) {
            t.labels[i] = static_cast<std::uint8_t>(rng.below(12));
            p.labels[i] = noisy || rng.below(5) == 0 ? static_cast<std::uint8_t>(rng.below(12)) : t.labels[i];
        }
        const auto c = confusion_counts(p, t, 12);
        const auto ref = oracle::confusion(p, t, 12);
        bool same = c.tp == ref.tp && c.fp == ref.fp && c.fn == ref.fn;
        for (std::size_t k = 0; k < 12; ++k) same = same && iou(c.tp[k], c.fp[k], c.fn[k]) == oracle::iou(ref.tp[k], ref.fp[k], ref.fn[k]);
        mismatches += !same;
    }
    o.check(mismatches == 0, "200 random pairs up to 32x32, 12 classes: counts and IOU exactly equal to brute force (" +
                                 std::to_string(mismatches) + " mismatches)");
    return o;
}

// 3. Published per-class table replay ----------------------------------------

Outcome criterion_3() {
    Outcome o;
    ConfusionCounts counts(12);
    std::vector<double> printed;
    for (std::size_t i = 0; i < 12; ++i) {
        counts.tp[i] = reference::kRows[i].tp;
        counts.fp[i] = reference::kRows[i].fp;
        counts.fn[i] = reference::kRows[i].fn;
        printed.push_back(reference::kRows[i].printed_iou);
    }
    const auto rows = audit_printed_iou(counts, printed, 0.05);
    std::size_t within = 0, exact = 0, consistent = 0;
    std::string off;
    for (const auto& r : rows) {
        const double formula = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp + r.fn);
        const double diff = std::abs(*r.computed - r.printed);
        if (diff <= 0.05) {
            ++within;
        } else {
            off += " " + display_class_name(r.class_index) + "(" + std::to_string(r.tp) + "," + std::to_string(r.fp) +
                   "," + std::to_string(r.fn) + ")=" + f("%.4f", *r.computed) + " vs " + f("%.1f", r.printed) + ";";
        }
        if (r.consistent) {
            ++consistent;
            exact += std::abs(*r.computed - formula) <= 1e-9;
        }
    }
    o.check(within == 12, "IOU within +-0.05 of the printed column for " + std::to_string(within) + "/12 rows (need 12/12)");
    if (!off.empty()) o.info("outside tolerance:" + off);
    o.check(exact == consistent, "consistent rows exact (+-1e-9) against TP/(TP+FP+FN): " + std::to_string(exact) + "/" +
                                     std::to_string(consistent));
    const std::string audit = format_audit_csv(rows);
    std::size_t flagged_lines = 0;
    for (std::size_t pos = 0; (pos = audit.find(",no\n", pos)) != std::string::npos; ++pos) ++flagged_lines;
    o.check(flagged_lines == 12 - consistent,
            "inconsistent rows flagged in the audit report: " + std::to_string(flagged_lines) + " flagged");
    o.info("the printed column disagrees with its own counts on " + std::to_string(12 - consistent) +
           " rows, so the 12/12 tolerance cannot be met by any correct IOU");
    return o;
}

// 4. K-means invariants -----------------------------------------------------

Outcome criterion_4() {
    Outcome o;
    testutil::TempDir dir("accept4");
    Rng rng(4);
    std::size_t monotone = 0, mean_ok = 0, identical = 0;
    double worst_mean = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t w = 8 + rng.below(25), h = 8 + rng.below(25);
        Image img = random_image(w, h, rng);
        // Half the images are quantized so clusters are well separated.
        if (i % 2) {
            for (auto& v : img.pixels) v = static_cast<std::uint8_t>(v & 0xC0);
        }
        KMeansOptions opt;
        opt.k = 2 + rng.below(11);
        opt.seed = rng.next_u64();
        bool mono = true;
        ClusterModel m;
        try {
            m = kmeans_fit(img.pixels, opt);
        } catch (const NumericError&) {
            mono = false;
        }
        for (std::size_t j = 1; mono && j < m.inertia_history.size(); ++j) {
            mono = m.inertia_history[j] <= m.inertia_history[j - 1];
        }
        monotone += mono;

        KMeansOptions one = opt;
        one.k = 1;
        const auto m1 = kmeans_fit(img.pixels, one);
        double d = 0;
        for (int ch = 0; ch < 3; ++ch) {
            double mean = 0;
            for (std::size_t p = 0; p < img.pixel_count(); ++p) mean += img.pixels[3 * p + ch];
            mean /= static_cast<double>(img.pixel_count());
            d = std::max(d, std::abs(mean - m1.centroids[0][ch]));
        }
        worst_mean = std::max(worst_mean, d);
        mean_ok += d <= 1e-4;

        save_model(kmeans_fit(img.pixels, opt), dir / "a.km");
        save_model(kmeans_fit(img.pixels, opt), dir / "b.km");
        identical += read_file(dir / "a.km") == read_file(dir / "b.km");
    }
    o.check(monotone == 50, "inertia non-increasing every iteration on " + std::to_string(monotone) + "/50 images");
    o.check(mean_ok == 50, "K=1 centroid equals pixel mean within 1e-4 on " + std::to_string(mean_ok) +
                               "/50 (worst " + f("%.2g", worst_mean) + ")");
    o.check(identical == 50, "same seed gives bit-identical model files on " + std::to_string(identical) + "/50");
    return o;
}

// 5. Overfit run ------------------------------------------------------------

Outcome criterion_5() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = scenes(4, 32);
    Network net = build_network({}, 42);
    TrainOptions opt;
    opt.epochs = 300;
    opt.optimizer.kind = optim::Kind::adam;
    opt.optimizer.learning_rate = 1e-3f;
    const auto report = train(net, data, {}, opt);
    const auto counts = evaluate(net, data);
    const double acc = pixel_accuracy(counts), miou = mean_iou(counts).mean_iou;
    const double secs = seconds_since(t0);
    o.info("4 synthetic 32x32 scenes, default network, Adam lr 1e-3, " + std::to_string(report.epochs.size()) +
           " epochs, final loss " + f("%.4f", report.epochs.back().train_loss));
    o.check(acc >= 0.95, "training pixel accuracy " + f("%.4f", acc) + " >= 0.95");
    o.check(miou >= 0.9, "training MIoU " + f("%.4f", miou) + " >= 0.9");
    o.check(secs < 300.0, "runtime " + f("%.1f", secs) + " s < 300 s");
    return o;
}

// 6. End-to-end CLI pipeline --------------------------------------------------

Outcome criterion_6() {
    Outcome o;
    testutil::TempDir dir("accept6");
    const std::string d = dir.path().string();
    auto step = [&](const std::string& name, std::vector<std::string> args) {
        args.insert(args.begin(), "segpipe");
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        o.check(code == 0, name + " exit " + std::to_string(code));
        if (code != 0) o.info(err.str());
        return out.str();
    };
    const std::string ck = (dir.path() / "model.segm").string();
    step("gen 8 scenes", {"gen", "--data-dir", d, "--count", "8"});
    step("labelgen K=12", {"labelgen", "--data-dir", d, "--k", "12"});
    step("split 0.8", {"split", "--data-dir", d, "--ratio", "0.8"});
    step("train 100 epochs", {"train", "--data-dir", d, "--epochs", "100", "--checkpoint", ck});
    step("eval", {"eval", "--data-dir", d, "--checkpoint", ck, "--report", (dir.path() / "eval.csv").string()});
    const std::string train_eval = step("eval train portion", {"eval", "--data-dir", d, "--checkpoint", ck, "--subset",
                                                              "train", "--report", (dir.path() / "train.csv").string()});
    step("bench", {"bench", "--data-dir", d, "--checkpoint", ck, "--report", (dir.path() / "bench.json").string()});
    if (!o.pass) return o;

    const auto bytes = read_file(dir.path() / "eval.csv");
    const Report rep = parse_report_csv(std::string(bytes.begin(), bytes.end()));
    o.check(rep.rows.size() == 12, "eval report has " + std::to_string(rep.rows.size()) + " class rows");
    o.check(rep.summary_value("mean_iou").has_value(), "eval report has a mean_iou row");

    const auto tb = read_file(dir.path() / "train.csv");
    const auto train_miou = parse_report_csv(std::string(tb.begin(), tb.end())).summary_value("mean_iou");
    if (train_miou) o.info("MIoU on the training portion " + f("%.4f", *train_miou));

    std::ifstream in(dir.path() / "bench.json");
    const auto j = nlohmann::json::parse(in);
    const double fps = j["fps"].get<double>();
    o.check(std::isfinite(fps) && fps > 0, "bench fps " + f("%.1f", fps) + " finite and positive");
    return o;
}

// 7. Loss sanity ------------------------------------------------------------

Outcome criterion_7() {
    Outcome o;
    NetworkConfig c;
    c.head_init = HeadInit::zero;
    Network net = build_network(c, 42);
    TrainOptions opt;
    opt.epochs = 1;
    const auto report = train(net, scenes(4, 32), {}, opt);
    const double loss = *report.first_batch_loss, ln12 = std::log(12.0);
    o.check(std::abs(loss - ln12) <= 0.2, "zero-head initial loss " + f("%.6f", loss) + " within 0.2 of ln 12 = " +
                                              f("%.6f", ln12));
    return o;
}

// 8. Round trips ------------------------------------------------------------

Outcome criterion_8() {
    Outcome o;
    testutil::TempDir dir("accept8");
    Rng rng(8);
    const Palette palette = Palette::street12();
    std::size_t ppm = 0, pgm = 0, flips = 0, rots = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t w = 1 + rng.below(40), h = 1 + rng.below(40);
        const Image img = random_image(w, h, rng);
        LabelMap labels(w, h);
        for (auto& v : labels.labels) v = static_cast<std::uint8_t>(rng.below(12));
        save_image(img, dir / "i.ppm");
        save_labels(labels, dir / "l.pgm");
        ppm += load_image(dir / "i.ppm") == img && read_file(dir / "i.ppm") == encode_ppm(img);
        pgm += load_labels(dir / "l.pgm") == labels && read_file(dir / "l.pgm") == encode_pgm(labels);

        auto a = augment(img, labels, Augmentation::hflip);
        a = augment(a.first, a.second, Augmentation::hflip);
        flips += a.first == img && a.second == labels;
        std::pair<Image, LabelMap> r{img, labels};
        for (int k = 0; k < 4; ++k) r = augment(r.first, r.second, Augmentation::rot90);
        rots += r.first == img && r.second == labels;
    }
    o.check(ppm == 50, "PPM save/load byte-exact on " + std::to_string(ppm) + "/50");
    o.check(pgm == 50, "PGM save/load byte-exact on " + std::to_string(pgm) + "/50");
    o.check(flips == 50, "hflip twice is the identity on " + std::to_string(flips) + "/50");
    o.check(rots == 50, "rot90 four times is the identity on " + std::to_string(rots) + "/50");

    const Network net = build_network({}, 8);
    save_checkpoint(net, dir / "a.segm");
    const Network back = load_checkpoint(dir / "a.segm");
    save_checkpoint(back, dir / "b.segm");
    bool same = back.config() == net.config();
    for (std::size_t i = 0; same && i < net.params().size(); ++i) same = back.params()[i] == net.params()[i];
    o.check(same && read_file(dir / "a.segm") == read_file(dir / "b.segm"),
            "checkpoint save/load/save bit-exact parameters and identical bytes");

    const auto data = scenes(3, 32);
    auto counts = evaluate(net, data);
    std::vector<std::string> names;
    for (const auto& e : palette.entries()) names.push_back(e.name);
    const Report rep =
        make_report(mean_iou(counts), counts, make_fps_result(30, 0.37, 10, 3), param_count(net), names);
    const std::string csv = format_report_csv(rep);
    const Report parsed = parse_report_csv(csv);
    bool values = parsed.rows.size() == rep.rows.size() && format_report_csv(parsed) == csv;
    for (std::size_t i = 0; values && i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i];
        const auto& b = parsed.rows[i];
        values = a.tp == b.tp && a.fp == b.fp && a.fn == b.fn && a.name == b.name && a.iou.has_value() == b.iou.has_value() &&
                 (!a.iou || std::abs(*a.iou - *b.iou) <= 5e-5);
    }
    for (const auto& [key, v] : rep.summary) values = values && v && std::abs(*parsed.summary_value(key) - *v) <= 5e-5;
    o.check(values, "report CSV parse-back reproduces every value to 4 decimals");
    return o;
}

// 9. FPS protocol -----------------------------------------------------------

Outcome criterion_9() {
    Outcome o;
    const Network net = build_network({}, 9);
    std::vector<Image> images;
    for (const auto& s : scenes(8, 64)) images.push_back(s.image);
    const auto a = fps_benchmark(net, images, kDefaultWarmup, kDefaultRepeats);
    const auto b = fps_benchmark(net, images, kDefaultWarmup, kDefaultRepeats);
    o.info("run 1: " + f("%.1f", a.fps) + " fps, run 2: " + f("%.1f", b.fps) + " fps");
    o.check(a.images_processed == b.images_processed && a.images_processed == images.size() * kDefaultRepeats,
            "images_processed identical (" + std::to_string(a.images_processed) + ")");
    const double ratio = std::max(a.fps, b.fps) / std::min(a.fps, b.fps);
    o.check(ratio < 10.0, "fps within one order of magnitude (ratio " + f("%.3f", ratio) + ")");
    o.check(a.fps == static_cast<double>(a.images_processed) / a.wall_seconds &&
                b.fps == static_cast<double>(b.images_processed) / b.wall_seconds,
            "fps == images / seconds exactly for both runs");
    return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
        {"gradient suite", criterion_1},       {"IOU oracle", criterion_2},
        {"per-class table replay", criterion_3}, {"k-means invariants", criterion_4},
        {"overfit run", criterion_5},          {"end-to-end pipeline", criterion_6},
        {"loss sanity", criterion_7},          {"round trips", criterion_8},
        {"FPS harness protocol", criterion_9},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            selected.push_back(std::stoul(argv[++i]));
        } else {
            std::cerr << "usage: " << argv[0] << " [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty()) {
        for (std::size_t n = 1; n <= criteria().size(); ++n) selected.push_back(n);
    }
    bool all_pass = true;
    for (std::size_t n : selected) {
        if (n < 1 || n > criteria().size()) {
            std::cerr << "no criterion " << n << "\n";
            return 2;
        }
        const auto& [name, fn] = criteria()[n - 1];
        Outcome out;
        try {
            out = fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.notes.push_back(std::string("FAIL exception: ") + e.what());
        }
        std::cout << "criterion " << n << " (" << name << "): " << (out.pass ? "PASS" : "FAIL") << "\n";
        for (const auto& note : out.notes) std::cout << "    " << note << "\n";
        all_pass = all_pass && out.pass;
    }
    return all_pass ? 0 : 1;
}
