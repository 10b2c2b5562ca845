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

#include "segpipe/network.hpp"

#include <cmath>
#include <string>

#include "segpipe/errors.hpp"
#include "segpipe/random.hpp"

namespace segpipe {

void NetworkConfig::validate() const {
    if (in_channels < 1) throw ParameterError("network needs at least one input channel");
    if (num_classes < 2) throw ParameterError("network needs at least two classes");
    if (num_classes > 256) throw ParameterError("network supports at most 256 classes");
    if (stage_widths.empty()) throw ParameterError("network needs at least one stage");
    if (stage_widths.size() > 16) throw ParameterError("network supports at most 16 stages");
    for (auto w : stage_widths) {
        if (w < 1) throw ParameterError("stage widths must be positive");
    }
    if (kernel < 3 || kernel % 2 == 0) throw ParameterError("kernel size must be odd and at least 3");
    if (!(leaky_alpha > 0.0f && leaky_alpha < 1.0f)) throw ParameterError("leaky alpha must lie in (0, 1)");
    if (normalization != Normalization::unit_range) throw ParameterError("unknown input normalization");
}

namespace {

struct ConvSpec {
    std::size_t in, out, kernel;
    Conv2dGeometry geometry;
};

// Layer list and conv shapes for a config, in forward order.
void plan(const NetworkConfig& c, std::vector<Layer>& layers, std::vector<ConvSpec>& convs) {
    const std::size_t half = c.kernel / 2;
    auto add_conv = [&](std::size_t in, std::size_t out, std::size_t k, Conv2dGeometry g) {
        layers.push_back(Layer{LayerKind::conv, g, 2 * convs.size(), 1});
        convs.push_back(ConvSpec{in, out, k, g});
    };
    auto add_act = [&] { layers.push_back(Layer{LayerKind::leaky_relu, {}, 0, 1}); };

    std::size_t ch = c.in_channels;
    for (auto w : c.stage_widths) {
        add_conv(ch, w, c.kernel, Conv2dGeometry{2, half, half > 0 ? half - 1 : 0});
        add_act();
        ch = w;
    }
    for (std::size_t i = c.stage_widths.size(); i-- > 0;) {
        const std::size_t out = i > 0 ? c.stage_widths[i - 1] : c.stage_widths[0];
        layers.push_back(Layer{LayerKind::upsample, {}, 0, 2});
        add_conv(ch, out, c.kernel, Conv2dGeometry{1, half, std::nullopt});
        add_act();
        ch = out;
    }
    add_conv(ch, c.num_classes, 1, Conv2dGeometry{1, 0, std::nullopt});
}

}  // namespace

Network::Network(NetworkConfig config, std::vector<Layer> layers, std::vector<Tensor> params)
    : config_(std::move(config)), layers_(std::move(layers)), params_(std::move(params)) {}

Network Network::zeros(const NetworkConfig& config) {
    config.validate();
    std::vector<Layer> layers;
    std::vector<ConvSpec> convs;
    plan(config, layers, convs);
    std::vector<Tensor> params;
    for (const auto& c : convs) {
        params.emplace_back(Shape{c.out, c.in, c.kernel, c.kernel});
        params.emplace_back(Shape{c.out});
    }
    return Network(config, std::move(layers), std::move(params));
}

Network Network::build(const NetworkConfig& config, std::uint64_t seed) {
    Network net = zeros(config);
    Rng rng(seed);
    const std::size_t n_convs = net.params_.size() / 2;
    for (std::size_t i = 0; i < n_convs; ++i) {
        Tensor& w = net.params_[2 * i];
        const bool head = i + 1 == n_convs;
        if (head && config.head_init == HeadInit::zero) continue;
        const double fan_in = static_cast<double>(w.dim(1) * w.dim(2) * w.dim(3));
        const double stddev = std::sqrt(2.0 / fan_in);
        for (auto& v : w.data()) v = static_cast<float>(stddev * rng.normal());
    }
    return net;
}

Tensor Network::forward(const Tensor& batch, Trace* trace) const {
    require_rank(batch, 4, "network input");
    if (batch.dim(1) != config_.in_channels) {
        throw DimensionError("network expects " + std::to_string(config_.in_channels) + " input channels, got " +
                             std::to_string(batch.dim(1)));
    }
    const std::size_t m = config_.size_multiple();
    if (batch.dim(2) % m != 0 || batch.dim(3) % m != 0) {
        throw GeometryError("input size " + std::to_string(batch.dim(3)) + "x" + std::to_string(batch.dim(2)) +
                            " is not a multiple of " + std::to_string(m) + " (2^" +
                            std::to_string(config_.stage_widths.size()) + " for " +
                            std::to_string(config_.stage_widths.size()) + " stages)");
    }
    if (trace) trace->layer_inputs.clear();

    Tensor x = batch;
    for (const auto& layer : layers_) {
        Tensor y;
        switch (layer.kind) {
            case LayerKind::conv:
                y = conv2d_forward(x, params_[layer.param_index], params_[layer.param_index + 1], layer.geometry);
                break;
            case LayerKind::leaky_relu:
                y = leaky_relu(x, config_.leaky_alpha);
                break;
            case LayerKind::upsample:
                y = upsample_nearest(x, layer.factor);
                break;
        }
        if (trace) {
            trace->layer_inputs.push_back(std::move(x));
        }
        x = std::move(y);
    }
    return x;
}

std::vector<Tensor> Network::backward(const Trace& trace, const Tensor& grad_logits) const {
    if (trace.layer_inputs.size() != layers_.size()) throw DimensionError("backward: trace does not match network");
    std::vector<Tensor> grads;
    grads.reserve(params_.size());
    for (const auto& p : params_) grads.push_back(Tensor::zeros_like(p));

    Tensor g = grad_logits;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const Layer& layer = layers_[i];
        const Tensor& x = trace.layer_inputs[i];
        switch (layer.kind) {
            case LayerKind::conv: {
                Conv2dGrads cg = conv2d_backward(x, params_[layer.param_index], g, layer.geometry);
                grads[layer.param_index] = std::move(cg.weights);
                grads[layer.param_index + 1] = std::move(cg.bias);
                g = std::move(cg.input);
                break;
            }
            case LayerKind::leaky_relu:
                g = leaky_relu_backward(x, g, config_.leaky_alpha);
                break;
            case LayerKind::upsample:
                g = upsample_nearest_backward(g, layer.factor);
                break;
        }
    }
    return grads;
}

std::size_t param_count(std::span<const Tensor> params) noexcept {
    std::size_t n = 0;
    for (const auto& p : params) n += p.size();
    return n;
}

std::size_t expected_param_count(const NetworkConfig& config) noexcept {
    const std::size_t k2 = config.kernel * config.kernel;
    const auto& w = config.stage_widths;
    std::size_t n = 0;
    std::size_t ch = config.in_channels;
    for (auto out : w) {
        n += out * ch * k2 + out;
        ch = out;
    }
    for (std::size_t i = w.size(); i-- > 0;) {
        const std::size_t out = i > 0 ? w[i - 1] : w[0];
        n += out * ch * k2 + out;
        ch = out;
    }
    return n + config.num_classes * ch + config.num_classes;
}

Tensor images_to_tensor(std::span<const Image* const> images, Normalization normalization) {
    if (images.empty()) throw DataError("no images to stack");
    if (normalization != Normalization::unit_range) throw ParameterError("unknown input normalization");
    const std::size_t w = images[0]->width, h = images[0]->height;
    Tensor t({images.size(), 3, h, w});
    const std::size_t plane = w * h;
    for (std::size_t n = 0; n < images.size(); ++n) {
        const Image& img = *images[n];
        if (img.width != w || img.height != h) throw DataError("images in a batch must share one size");
        float* dst = t.raw() + n * 3 * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            for (std::size_t c = 0; c < 3; ++c) dst[c * plane + p] = static_cast<float>(img.pixels[3 * p + c]) / 255.0f;
        }
    }
    return t;
}

std::vector<LabelMap> argmax_labels(const Tensor& logits) {
    require_rank(logits, 4, "argmax_labels");
    const std::size_t n = logits.dim(0), classes = logits.dim(1), h = logits.dim(2), w = logits.dim(3);
    if (classes > 256) throw DimensionError("argmax_labels: more than 256 classes");
    const std::size_t plane = h * w;
    std::vector<LabelMap> out;
    for (std::size_t b = 0; b < n; ++b) {
        LabelMap m(w, h);
        const float* base = logits.raw() + b * classes * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            std::size_t best = 0;
            float best_v = base[p];
            for (std::size_t c = 1; c < classes; ++c) {
                const float v = base[c * plane + p];
                if (v > best_v) {
                    best_v = v;
                    best = c;
                }
            }
            m.labels[p] = static_cast<std::uint8_t>(best);
        }
        out.push_back(std::move(m));
    }
    return out;
}

LabelMap predict(const Network& net, const Image& image) {
    const Image* ptr = &image;
    const Tensor logits = net.forward(images_to_tensor(std::span(&ptr, 1), net.config().normalization));
    return std::move(argmax_labels(logits).front());
}

}  // namespace segpipe
