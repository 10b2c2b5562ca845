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

#include "segpipe/optim.hpp"

#include <cmath>
#include <string>

#include "segpipe/errors.hpp"

namespace segpipe::optim {

AdamState AdamState::for_params(const Tensor& params, AdamConfig config) {
    return AdamState{Tensor::zeros_like(params), Tensor::zeros_like(params), 0, config};
}

void sgd_step(Tensor& params, const Tensor& grads, Tensor& velocity, const SgdConfig& config) {
    require_same_shape(params, grads, "sgd_step grads");
    require_same_shape(params, velocity, "sgd_step velocity");
    if (!(config.learning_rate > 0.0f)) throw ParameterError("SGD learning rate must be positive");
    if (config.momentum < 0.0f || config.momentum >= 1.0f) throw ParameterError("SGD momentum must lie in [0, 1)");

    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] + grads[i];
        params[i] -= config.learning_rate * velocity[i];
    }
}

void adam_step(Tensor& params, const Tensor& grads, AdamState& state) {
    require_same_shape(params, grads, "adam_step grads");
    require_same_shape(params, state.m, "adam_step first moment");
    require_same_shape(params, state.v, "adam_step second moment");
    const AdamConfig& c = state.config;
    if (!(c.learning_rate > 0.0f)) throw ParameterError("Adam learning rate must be positive");

    state.t += 1;
    const double t = static_cast<double>(state.t);
    const float correct1 = static_cast<float>(1.0 - std::pow(static_cast<double>(c.beta1), t));
    const float correct2 = static_cast<float>(1.0 - std::pow(static_cast<double>(c.beta2), t));

    for (std::size_t i = 0; i < params.size(); ++i) {
        const float g = grads[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0f - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0f - c.beta2) * g * g;
        const float m_hat = state.m[i] / correct1;
        const float v_hat = state.v[i] / correct2;
        params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

double clip_global_norm(std::span<Tensor> grads, double max_norm) {
    if (!(max_norm > 0.0)) throw ParameterError("clip norm must be positive");
    double sq = 0.0;
    for (const auto& g : grads) {
        for (float v : g.data()) sq += static_cast<double>(v) * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const auto scale = static_cast<float>(max_norm / norm);
        for (auto& g : grads) {
            for (auto& v : g.data()) v *= scale;
        }
    }
    return norm;
}

Kind parse_kind(std::string_view name) {
    if (name == "sgd") return Kind::sgd;
    if (name == "adam") return Kind::adam;
    throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

std::string_view kind_name(Kind kind) { return kind == Kind::sgd ? "sgd" : "adam"; }

namespace {

class Sgd final : public Optimizer {
public:
    Sgd(SgdConfig config, std::span<const Tensor> params) : config_(config) {
        for (const auto& p : params) velocity_.push_back(Tensor::zeros_like(p));
    }

    void step(std::span<Tensor> params, std::span<const Tensor> grads) override {
        if (params.size() != velocity_.size() || grads.size() != params.size()) {
            throw DimensionError("optimizer: parameter list changed since construction");
        }
        for (std::size_t i = 0; i < params.size(); ++i) sgd_step(params[i], grads[i], velocity_[i], config_);
    }

private:
    SgdConfig config_;
    std::vector<Tensor> velocity_;
};

class Adam final : public Optimizer {
public:
    Adam(AdamConfig config, std::span<const Tensor> params) {
        for (const auto& p : params) state_.push_back(AdamState::for_params(p, config));
    }

    void step(std::span<Tensor> params, std::span<const Tensor> grads) override {
        if (params.size() != state_.size() || grads.size() != params.size()) {
            throw DimensionError("optimizer: parameter list changed since construction");
        }
        for (std::size_t i = 0; i < params.size(); ++i) adam_step(params[i], grads[i], state_[i]);
    }

private:
    std::vector<AdamState> state_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(const OptimizerOptions& options, std::span<const Tensor> params) {
    if (options.kind == Kind::sgd) {
        SgdConfig c;
        if (options.learning_rate) c.learning_rate = *options.learning_rate;
        c.momentum = options.momentum;
        return std::make_unique<Sgd>(c, params);
    }
    AdamConfig c;
    if (options.learning_rate) c.learning_rate = *options.learning_rate;
    return std::make_unique<Adam>(c, params);
}

}  // namespace segpipe::optim
