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
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "segpipe/tensor.hpp"

namespace segpipe::optim {

struct SgdConfig {
    float learning_rate = 1e-2f;
    float momentum = 0.0f;
};

struct AdamConfig {
    float learning_rate = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

/// Moments and step counter for one parameter tensor.
struct AdamState {
    Tensor m;
    Tensor v;
    std::uint64_t t = 0;
    AdamConfig config;

    static AdamState for_params(const Tensor& params, AdamConfig config = {});
};

/// v <- momentum * v + g;  theta <- theta - lr * v
void sgd_step(Tensor& params, const Tensor& grads, Tensor& velocity, const SgdConfig& config);

/// Bias-corrected Adam update. Increments state.t by exactly one.
void adam_step(Tensor& params, const Tensor& grads, AdamState& state);

/// Scales every gradient so their joint L2 norm is at most max_norm.
/// Returns the norm before scaling.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

enum class Kind { sgd, adam };

Kind parse_kind(std::string_view name);
std::string_view kind_name(Kind kind);

/// Owns per-tensor optimizer state for a fixed list of parameter tensors.
class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(std::span<Tensor> params, std::span<const Tensor> grads) = 0;
};

struct OptimizerOptions {
    Kind kind = Kind::adam;
    // Unset means the per-kind default (1e-3 for Adam, 1e-2 for SGD).
    std::optional<float> learning_rate;
    float momentum = 0.0f;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerOptions& options, std::span<const Tensor> params);

}  // namespace segpipe::optim
