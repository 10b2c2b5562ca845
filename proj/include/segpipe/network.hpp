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
#include <span>
#include <vector>

#include "segpipe/image.hpp"
#include "segpipe/ops.hpp"
#include "segpipe/tensor.hpp"

namespace segpipe {

enum class HeadInit { he, zero };

// How 8-bit pixels become network inputs. Stored in checkpoints.
enum class Normalization : std::uint32_t { unit_range = 1 };  // pixel / 255

struct NetworkConfig {
    std::size_t in_channels = 3;
    std::size_t num_classes = 12;
    std::vector<std::size_t> stage_widths{16, 32, 64};
    std::size_t kernel = 3;
    float leaky_alpha = kDefaultLeakyAlpha;
    Normalization normalization = Normalization::unit_range;
    // Initialization of the final 1x1 classifier. Not stored in checkpoints.
    HeadInit head_init = HeadInit::he;

    void validate() const;

    /// Input height and width must be multiples of this (2^stages).
    std::size_t size_multiple() const noexcept { return std::size_t{1} << stage_widths.size(); }

    bool operator==(const NetworkConfig& o) const {
        return in_channels == o.in_channels && num_classes == o.num_classes && stage_widths == o.stage_widths &&
               kernel == o.kernel && leaky_alpha == o.leaky_alpha && normalization == o.normalization;
    }
};

enum class LayerKind { conv, leaky_relu, upsample };

struct Layer {
    LayerKind kind = LayerKind::conv;
    Conv2dGeometry geometry;     // conv only
    std::size_t param_index = 0;  // conv only: weights at param_index, bias at param_index + 1
    std::size_t factor = 1;       // upsample only
};

/// Encoder-decoder segmentation network.
///
///   encoder  for each stage width w:   conv kxk stride 2 -> w, leaky ReLU
///   decoder  for each stage, deepest first:
///                                      upsample x2, conv kxk stride 1 -> w', leaky ReLU
///            where w' is the next shallower width (the first width for the last block)
///   head     conv 1x1 -> num_classes
///
/// Output logits have the input's spatial size.
class Network {
public:
    Network() = default;

    /// He-normal (fan-in) weights from Rng(seed), zero biases.
    static Network build(const NetworkConfig& config, std::uint64_t seed);

    /// Same architecture, every parameter zero.
    static Network zeros(const NetworkConfig& config);

    const NetworkConfig& config() const noexcept { return config_; }
    std::span<const Layer> layers() const noexcept { return layers_; }
    std::span<Tensor> params() noexcept { return params_; }
    std::span<const Tensor> params() const noexcept { return params_; }

    /// Activations kept by forward() for backward().
    struct Trace {
        std::vector<Tensor> layer_inputs;
    };

    /// batch is N x in_channels x H x W; H and W must be multiples of
    /// config().size_multiple(), else GeometryError.
    Tensor forward(const Tensor& batch, Trace* trace = nullptr) const;

    /// Parameter gradients, in params() order, for the given logit gradient.
    std::vector<Tensor> backward(const Trace& trace, const Tensor& grad_logits) const;

private:
    Network(NetworkConfig config, std::vector<Layer> layers, std::vector<Tensor> params);

    NetworkConfig config_;
    std::vector<Layer> layers_;
    std::vector<Tensor> params_;
};

inline Network build_network(const NetworkConfig& config, std::uint64_t seed) { return Network::build(config, seed); }

std::size_t param_count(std::span<const Tensor> params) noexcept;
inline std::size_t param_count(const Network& net) noexcept { return param_count(net.params()); }

/// Closed form: sum over convs of out * in * k * k + out.
std::size_t expected_param_count(const NetworkConfig& config) noexcept;

/// Stacks images into an N x 3 x H x W tensor using the normalization.
Tensor images_to_tensor(std::span<const Image* const> images, Normalization normalization);

/// Per-pixel argmax over classes (axis 1) of NCHW logits; lowest index on ties.
std::vector<LabelMap> argmax_labels(const Tensor& logits);

/// Argmax of the logits, which equals the argmax of their softmax.
LabelMap predict(const Network& net, const Image& image);

// Little-endian binary checkpoint; layout in docs/checkpoint-format.md.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Network& net);
Network decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace segpipe
