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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segpipe/image.hpp"

namespace segpipe {

class Network;

/// Per-class pixel tallies between a prediction and the ground truth.
struct ConfusionCounts {
    std::size_t num_classes = 0;
    std::vector<std::uint64_t> tp;
    std::vector<std::uint64_t> fp;
    std::vector<std::uint64_t> fn;
    std::uint64_t total_pixels = 0;

    ConfusionCounts() = default;
    explicit ConfusionCounts(std::size_t classes)
        : num_classes(classes), tp(classes, 0), fp(classes, 0), fn(classes, 0) {}

    /// Adds one prediction/truth pair. DataError on size mismatch, LabelError
    /// on labels >= num_classes.
    void add(const LabelMap& pred, const LabelMap& truth);

    ConfusionCounts& operator+=(const ConfusionCounts& other);
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion_counts(const LabelMap& pred, const LabelMap& truth, std::size_t num_classes);

/// TP / (TP + FP + FN); nullopt when all three are zero.
std::optional<double> iou(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) noexcept;

struct IouReport {
    std::vector<std::optional<double>> per_class;
    double mean_iou = 0.0;
    std::size_t classes_counted = 0;
};

/// Mean over classes that are present. DataError if none are.
IouReport mean_iou(std::span<const std::optional<double>> per_class);
IouReport mean_iou(const ConfusionCounts& counts);

/// Sum of TP over all pixels.
double pixel_accuracy(const ConfusionCounts& counts);

struct FpsResult {
    std::uint64_t images_processed = 0;
    double wall_seconds = 0.0;
    double fps = 0.0;
    std::size_t warmup_iters = 0;
    std::size_t repeats = 0;
};

FpsResult make_fps_result(std::uint64_t images, double seconds, std::size_t warmup, std::size_t repeats);

inline constexpr std::size_t kDefaultWarmup = 10;
inline constexpr std::size_t kDefaultRepeats = 3;

/// Runs `warmup` untimed single-image predictions, then times `repeats`
/// passes over all images at batch size 1 with a steady clock. Runs on the
/// calling thread.
FpsResult fps_benchmark(const Network& net, std::span<const Image> images, std::size_t warmup = kDefaultWarmup,
                        std::size_t repeats = kDefaultRepeats);

/// One row of a printed IOU table checked against the IOU recomputed from
/// its own TP/FP/FN.
struct PrintedIouCheck {
    std::size_t class_index = 0;
    std::uint64_t tp = 0, fp = 0, fn = 0;
    std::optional<double> computed;
    double printed = 0.0;
    bool consistent = false;  // |computed - printed| <= tolerance
};

std::vector<PrintedIouCheck> audit_printed_iou(const ConfusionCounts& counts, std::span<const double> printed,
                                               double tolerance);

}  // namespace segpipe
