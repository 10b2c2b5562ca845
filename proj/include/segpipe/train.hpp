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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segpipe/dataset.hpp"
#include "segpipe/metrics.hpp"
#include "segpipe/network.hpp"
#include "segpipe/optim.hpp"

namespace segpipe {

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;  // mean over batches, each batch averaged per pixel
    std::optional<double> val_miou;  // unset when there is no validation data
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    // Loss of the very first batch, measured before any parameter update.
    std::optional<double> first_batch_loss;
};

struct TrainOptions {
    std::size_t epochs = 100;
    std::size_t batch_size = 2;
    optim::OptimizerOptions optimizer;
    std::uint64_t seed = 42;
    std::optional<double> clip_norm;
    // Called after every epoch; returning false stops training early.
    std::function<bool(const EpochRecord&)> on_epoch;
};

/// Mean cross-entropy of one batch and its parameter gradients.
struct BatchResult {
    double loss = 0.0;
    std::vector<Tensor> grads;
};

BatchResult batch_loss_and_grads(const Network& net, std::span<const Sample* const> batch);

/// Mini-batch training. The sample order is reshuffled each epoch from
/// Rng(seed + epoch); the last partial batch is kept. Every step is
/// deterministic for a fixed seed. A non-finite loss raises DivergedError.
TrainReport train(Network& net, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainOptions& options);

/// Per-class counts of predict() against the stored labels.
ConfusionCounts evaluate(const Network& net, std::span<const Sample> samples);

/// CSV with header epoch,train_loss,val_miou. Timings are left out so equal
/// runs give equal files.
std::string format_train_report(const TrainReport& report);

}  // namespace segpipe
