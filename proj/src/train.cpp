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

#include "segpipe/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "segpipe/errors.hpp"
#include "segpipe/random.hpp"

namespace segpipe {

namespace {

std::vector<std::uint8_t> stack_targets(std::span<const Sample* const> batch) {
    std::vector<std::uint8_t> targets;
    for (const Sample* s : batch) targets.insert(targets.end(), s->labels.labels.begin(), s->labels.labels.end());
    return targets;
}

void check_samples(std::span<const Sample> samples, std::size_t num_classes) {
    for (const auto& s : samples) {
        if (s.image.width != s.labels.width || s.image.height != s.labels.height) {
            throw DataError("sample '" + s.id + "': image and labels differ in size");
        }
        if (s.image.width != samples[0].image.width || s.image.height != samples[0].image.height) {
            throw DataError("sample '" + s.id + "': all samples must share one image size");
        }
        s.labels.check_range(num_classes);
    }
}

}  // namespace

BatchResult batch_loss_and_grads(const Network& net, std::span<const Sample* const> batch) {
    std::vector<const Image*> images;
    for (const Sample* s : batch) images.push_back(&s->image);
    const Tensor input = images_to_tensor(images, net.config().normalization);
    const std::vector<std::uint8_t> targets = stack_targets(batch);

    Network::Trace trace;
    const Tensor logits = net.forward(input, &trace);
    const Tensor probs = softmax(logits, 1);
    BatchResult r;
    r.loss = cross_entropy(probs, targets);
    r.grads = net.backward(trace, softmax_cross_entropy_backward(probs, targets));
    return r;
}

TrainReport train(Network& net, std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const TrainOptions& options) {
    TrainReport report;
    if (options.epochs == 0) return report;
    if (train_set.empty()) throw DataError("training set is empty");
    if (options.batch_size < 1) throw ParameterError("batch size must be at least 1");
    check_samples(train_set, net.config().num_classes);
    if (!val_set.empty()) check_samples(val_set, net.config().num_classes);

    auto optimizer = optim::make_optimizer(options.optimizer, net.params());
    std::vector<std::size_t> order(train_set.size());

    for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(options.seed + epoch);
        rng.shuffle(std::span(order));

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
            const std::size_t end = std::min(order.size(), begin + options.batch_size);
            std::vector<const Sample*> batch;
            for (std::size_t i = begin; i < end; ++i) batch.push_back(&train_set[order[i]]);

            BatchResult step;
            try {
                step = batch_loss_and_grads(net, batch);
            } catch (const NumericError&) {
                throw DivergedError(epoch, batches + 1);
            }
            if (!std::isfinite(step.loss)) throw DivergedError(epoch, batches + 1);
            if (!report.first_batch_loss) report.first_batch_loss = step.loss;
            if (options.clip_norm) optim::clip_global_norm(step.grads, *options.clip_norm);
            optimizer->step(net.params(), step.grads);
            loss_sum += step.loss;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(batches);
        if (!val_set.empty()) {
            try {
                rec.val_miou = mean_iou(evaluate(net, val_set)).mean_iou;
            } catch (const NumericError&) {
                throw DivergedError(epoch, batches);
            }
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.epochs.push_back(rec);
        if (options.on_epoch && !options.on_epoch(rec)) break;
    }
    return report;
}

ConfusionCounts evaluate(const Network& net, std::span<const Sample> samples) {
    ConfusionCounts counts(net.config().num_classes);
    for (const auto& s : samples) counts.add(predict(net, s.image), s.labels);
    return counts;
}

std::string format_train_report(const TrainReport& report) {
    std::string out = "epoch,train_loss,val_miou\n";
    char line[128];
    for (const auto& r : report.epochs) {
        char miou[32] = "n/a";
        if (r.val_miou) std::snprintf(miou, sizeof miou, "%.4f", *r.val_miou);
        std::snprintf(line, sizeof line, "%zu,%.6f,%s\n", r.epoch, r.train_loss, miou);
        out += line;
    }
    return out;
}

}  // namespace segpipe
