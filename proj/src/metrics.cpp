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

#include "segpipe/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "segpipe/errors.hpp"
#include "segpipe/network.hpp"

namespace segpipe {

void ConfusionCounts::add(const LabelMap& pred, const LabelMap& truth) {
    if (pred.width != truth.width || pred.height != truth.height) {
        throw DataError("confusion counts: prediction is " + std::to_string(pred.width) + "x" +
                        std::to_string(pred.height) + " but truth is " + std::to_string(truth.width) + "x" +
                        std::to_string(truth.height));
    }
    pred.check_range(num_classes);
    truth.check_range(num_classes);
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const std::size_t p = pred.labels[i];
        const std::size_t t = truth.labels[i];
        if (p == t) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    total_pixels += pred.labels.size();
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
    if (other.num_classes != num_classes) throw DataError("cannot merge confusion counts with different class counts");
    for (std::size_t c = 0; c < num_classes; ++c) {
        tp[c] += other.tp[c];
        fp[c] += other.fp[c];
        fn[c] += other.fn[c];
    }
    total_pixels += other.total_pixels;
    return *this;
}

ConfusionCounts confusion_counts(const LabelMap& pred, const LabelMap& truth, std::size_t num_classes) {
    ConfusionCounts c(num_classes);
    c.add(pred, truth);
    return c;
}

std::optional<double> iou(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) noexcept {
    const std::uint64_t denom = tp + fp + fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(denom);
}

IouReport mean_iou(std::span<const std::optional<double>> per_class) {
    IouReport r;
    r.per_class.assign(per_class.begin(), per_class.end());
    double sum = 0.0;
    for (const auto& v : per_class) {
        if (!v) continue;
        sum += *v;
        ++r.classes_counted;
    }
    if (r.classes_counted == 0) throw DataError("mean IOU undefined: every class is absent");
    r.mean_iou = sum / static_cast<double>(r.classes_counted);
    return r;
}

IouReport mean_iou(const ConfusionCounts& counts) {
    std::vector<std::optional<double>> per_class;
    for (std::size_t c = 0; c < counts.num_classes; ++c) per_class.push_back(iou(counts.tp[c], counts.fp[c], counts.fn[c]));
    return mean_iou(per_class);
}

double pixel_accuracy(const ConfusionCounts& counts) {
    if (counts.total_pixels == 0) throw DataError("pixel accuracy undefined for zero pixels");
    std::uint64_t correct = 0;
    for (auto v : counts.tp) correct += v;
    return static_cast<double>(correct) / static_cast<double>(counts.total_pixels);
}

FpsResult make_fps_result(std::uint64_t images, double seconds, std::size_t warmup, std::size_t repeats) {
    if (!(seconds > 0.0) || !std::isfinite(seconds)) throw DataError("benchmark wall time must be positive");
    FpsResult r;
    r.images_processed = images;
    r.wall_seconds = seconds;
    r.fps = static_cast<double>(images) / seconds;
    r.warmup_iters = warmup;
    r.repeats = repeats;
    return r;
}

FpsResult fps_benchmark(const Network& net, std::span<const Image> images, std::size_t warmup, std::size_t repeats) {
    if (images.empty()) throw DataError("fps benchmark needs at least one image");
    if (repeats < 1) throw ParameterError("fps benchmark needs repeats >= 1");
    for (const auto& img : images) {
        if (img.width != images[0].width || img.height != images[0].height) {
            throw DataError("fps benchmark images must share one size");
        }
    }

    std::size_t sink = 0;
    for (std::size_t i = 0; i < warmup; ++i) sink += predict(net, images[i % images.size()]).labels[0];

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    for (std::size_t r = 0; r < repeats; ++r) {
        for (const auto& img : images) sink += predict(net, img).labels[0];
    }
    const auto stop = clock::now();
    double seconds = std::chrono::duration<double>(stop - start).count();
    // Keeps the predictions observable so they cannot be optimized away.
    if (sink == static_cast<std::size_t>(-1)) seconds += 1.0;
    seconds = std::max(seconds, 1e-9);
    return make_fps_result(static_cast<std::uint64_t>(images.size() * repeats), seconds, warmup, repeats);
}

std::vector<PrintedIouCheck> audit_printed_iou(const ConfusionCounts& counts, std::span<const double> printed,
                                               double tolerance) {
    if (printed.size() != counts.num_classes) {
        throw DataError("audit: " + std::to_string(printed.size()) + " printed values for " +
                        std::to_string(counts.num_classes) + " classes");
    }
    std::vector<PrintedIouCheck> rows;
    for (std::size_t c = 0; c < counts.num_classes; ++c) {
        PrintedIouCheck row;
        row.class_index = c;
        row.tp = counts.tp[c];
        row.fp = counts.fp[c];
        row.fn = counts.fn[c];
        row.computed = iou(row.tp, row.fp, row.fn);
        row.printed = printed[c];
        row.consistent = row.computed && std::abs(*row.computed - row.printed) <= tolerance;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace segpipe
