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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "segpipe/tensor.hpp"

namespace segpipe {

inline constexpr float kDefaultLeakyAlpha = 0.01f;

struct Conv2dGeometry {
    std::size_t stride = 1;
    // Zero rows/columns added before the input on each spatial axis.
    std::size_t padding = 0;
    // Zero rows/columns added after the input; defaults to `padding`. A 3x3
    // stride-2 conv on an even size needs padding 1 with padding_end 0.
    std::optional<std::size_t> padding_end;

    std::size_t end_padding() const noexcept { return padding_end.value_or(padding); }
};

struct Conv2dGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

/// Cross-correlation (no kernel flip) of an NCHW input with OIHW weights.
///
/// out[n,o,y,x] = bias[o] + sum_{i,dy,dx} in[n,i,y*s-p+dy,x*s-p+dx] * w[o,i,dy,dx]
/// with zeros outside the input. Kernel sides must be odd and the output size
/// (H + p + p_end - kH) / s + 1 must be integral; otherwise GeometryError.
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Conv2dGeometry geom);

/// Exact gradients of conv2d_forward with respect to all three arguments.
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output,
                            Conv2dGeometry geom);

/// x for x >= 0, alpha * x otherwise. alpha must lie in (0, 1).
Tensor leaky_relu(const Tensor& input, float alpha = kDefaultLeakyAlpha);

/// Slope 1 at x == 0.
Tensor leaky_relu_backward(const Tensor& input, const Tensor& grad_output, float alpha = kDefaultLeakyAlpha);

/// Nearest-neighbour upsampling of an NCHW tensor by an integer factor.
Tensor upsample_nearest(const Tensor& input, std::size_t factor);

/// Sums each factor x factor block of grad_output back onto its source pixel.
Tensor upsample_nearest_backward(const Tensor& grad_output, std::size_t factor);

/// Probability vector over X classes. Entries in [0, 1], summing to 1.
struct ProbVector {
    std::vector<float> values;
};

/// One-hot target: a 1 at class_index and zeros elsewhere.
struct OneHotTarget {
    std::uint32_t class_index = 0;
    std::uint32_t num_classes = 0;

    /// Throws LabelError when class_index >= num_classes.
    std::vector<float> expand() const;
};

/// Max-shifted softmax of one logit vector. Needs at least two entries;
/// non-finite logits raise NumericError.
ProbVector softmax(std::span<const float> logits);

/// Softmax along `axis` of any tensor (axis 1 for NCHW class logits).
Tensor softmax(const Tensor& logits, std::size_t axis = 1);

/// Mean negative log-likelihood of the target class over every position.
///
/// probs is NCHW (classes on axis 1); targets has N*H*W entries ordered
/// n, y, x. P[target] is clamped at 1e-12 before the log. Accumulates in
/// double.
double cross_entropy(const Tensor& probs, std::span<const std::uint8_t> targets);

/// Gradient of cross_entropy(softmax(logits)) with respect to the logits:
/// (P - onehot) / M, where M = N*H*W is the number of averaged positions.
Tensor softmax_cross_entropy_backward(const Tensor& probs, std::span<const std::uint8_t> targets);

}  // namespace segpipe
