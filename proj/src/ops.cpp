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

#include "segpipe/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segpipe/errors.hpp"
#include "segpipe/simd/kernels.hpp"

namespace segpipe {

namespace {

struct ConvShape {
    std::size_t batch, in_ch, in_h, in_w;
    std::size_t out_ch, k_h, k_w;
    std::size_t out_h, out_w;
    std::size_t stride, pad, pad_end;

    std::size_t patch() const { return in_ch * k_h * k_w; }
    std::size_t out_plane() const { return out_h * out_w; }
    std::size_t in_plane() const { return in_h * in_w; }
    bool pointwise() const { return k_h == 1 && k_w == 1 && stride == 1 && pad == 0 && pad_end == 0; }
};

ConvShape conv_shape(const Tensor& input, const Tensor& weights, Conv2dGeometry geom) {
    require_rank(input, 4, "conv2d input");
    require_rank(weights, 4, "conv2d weights");
    if (geom.stride < 1) throw ParameterError("conv2d stride must be >= 1");

    ConvShape s{};
    s.batch = input.dim(0);
    s.in_ch = input.dim(1);
    s.in_h = input.dim(2);
    s.in_w = input.dim(3);
    s.out_ch = weights.dim(0);
    s.k_h = weights.dim(2);
    s.k_w = weights.dim(3);
    s.stride = geom.stride;
    s.pad = geom.padding;
    s.pad_end = geom.end_padding();

    if (weights.dim(1) != s.in_ch) {
        throw DimensionError("conv2d: weights expect " + std::to_string(weights.dim(1)) + " input channels, input has " +
                             std::to_string(s.in_ch));
    }
    if (s.k_h % 2 == 0 || s.k_w % 2 == 0) {
        throw GeometryError("conv2d: kernel sides must be odd, got " + shape_to_string(weights.shape()));
    }
    const std::size_t span_h = s.in_h + s.pad + s.pad_end;
    const std::size_t span_w = s.in_w + s.pad + s.pad_end;
    if (span_h < s.k_h || span_w < s.k_w || (span_h - s.k_h) % s.stride != 0 || (span_w - s.k_w) % s.stride != 0) {
        throw GeometryError("conv2d: output size (H + padding + padding_end - k) / stride + 1 is not integral for input " +
                            shape_to_string(input.shape()) + ", kernel " + std::to_string(s.k_h) + "x" +
                            std::to_string(s.k_w) + ", stride " + std::to_string(s.stride) + ", padding " +
                            std::to_string(s.pad) + "/" + std::to_string(s.pad_end));
    }
    s.out_h = (span_h - s.k_h) / s.stride + 1;
    s.out_w = (span_w - s.k_w) / s.stride + 1;
    return s;
}

// col[(c*kh + dy)*kw + dx][y*out_w + x] = in[c, y*s - p + dy, x*s - p + dx]
void im2col(const ConvShape& s, const float* in, float* col) {
    for (std::size_t c = 0; c < s.in_ch; ++c) {
        const float* plane = in + c * s.in_plane();
        for (std::size_t dy = 0; dy < s.k_h; ++dy) {
            for (std::size_t dx = 0; dx < s.k_w; ++dx) {
                float* row = col + ((c * s.k_h + dy) * s.k_w + dx) * s.out_plane();
                for (std::size_t y = 0; y < s.out_h; ++y) {
                    const auto iy = static_cast<std::ptrdiff_t>(y * s.stride + dy) - static_cast<std::ptrdiff_t>(s.pad);
                    float* dst = row + y * s.out_w;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.in_h)) {
                        std::fill(dst, dst + s.out_w, 0.0f);
                        continue;
                    }
                    const float* src = plane + static_cast<std::size_t>(iy) * s.in_w;
                    for (std::size_t x = 0; x < s.out_w; ++x) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(x * s.stride + dx) - static_cast<std::ptrdiff_t>(s.pad);
                        dst[x] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.in_w)) ? 0.0f
                                                                                     : src[static_cast<std::size_t>(ix)];
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add columns back onto the input planes.
void col2im(const ConvShape& s, const float* col, float* in) {
    for (std::size_t c = 0; c < s.in_ch; ++c) {
        float* plane = in + c * s.in_plane();
        for (std::size_t dy = 0; dy < s.k_h; ++dy) {
            for (std::size_t dx = 0; dx < s.k_w; ++dx) {
                const float* row = col + ((c * s.k_h + dy) * s.k_w + dx) * s.out_plane();
                for (std::size_t y = 0; y < s.out_h; ++y) {
                    const auto iy = static_cast<std::ptrdiff_t>(y * s.stride + dy) - static_cast<std::ptrdiff_t>(s.pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.in_h)) continue;
                    float* dst = plane + static_cast<std::size_t>(iy) * s.in_w;
                    const float* src = row + y * s.out_w;
                    for (std::size_t x = 0; x < s.out_w; ++x) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(x * s.stride + dx) - static_cast<std::ptrdiff_t>(s.pad);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(s.in_w)) dst[ix] += src[x];
                    }
                }
            }
        }
    }
}

void require_alpha(float alpha) {
    if (!(alpha > 0.0f && alpha < 1.0f)) {
        throw ParameterError("leaky_relu alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Conv2dGeometry geom) {
    const ConvShape s = conv_shape(input, weights, geom);
    require_rank(bias, 1, "conv2d bias");
    if (bias.dim(0) != s.out_ch) {
        throw DimensionError("conv2d: bias has " + std::to_string(bias.dim(0)) + " entries, expected " +
                             std::to_string(s.out_ch));
    }

    const auto& k = simd::active();
    const std::size_t patch = s.patch();
    const std::size_t plane = s.out_plane();
    Tensor out({s.batch, s.out_ch, s.out_h, s.out_w});
    std::vector<float> col(s.pointwise() ? 0 : patch * plane);

    for (std::size_t n = 0; n < s.batch; ++n) {
        const float* in_n = input.raw() + n * s.in_ch * s.in_plane();
        const float* cols = in_n;
        if (!s.pointwise()) {
            im2col(s, in_n, col.data());
            cols = col.data();
        }
        float* out_n = out.raw() + n * s.out_ch * plane;
        for (std::size_t o = 0; o < s.out_ch; ++o) {
            std::span<float> dst(out_n + o * plane, plane);
            std::fill(dst.begin(), dst.end(), bias[o]);
            const float* w = weights.raw() + o * patch;
            for (std::size_t r = 0; r < patch; ++r) {
                k.axpy(w[r], std::span<const float>(cols + r * plane, plane), dst);
            }
        }
    }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output,
                            Conv2dGeometry geom) {
    const ConvShape s = conv_shape(input, weights, geom);
    require_rank(grad_output, 4, "conv2d grad_output");
    const Shape expected{s.batch, s.out_ch, s.out_h, s.out_w};
    if (grad_output.shape() != expected) {
        throw DimensionError("conv2d_backward: grad_output shape " + shape_to_string(grad_output.shape()) +
                             " does not match forward output " + shape_to_string(expected));
    }

    const auto& k = simd::active();
    const std::size_t patch = s.patch();
    const std::size_t plane = s.out_plane();
    Conv2dGrads g{Tensor::zeros_like(input), Tensor::zeros_like(weights), Tensor({s.out_ch})};
    std::vector<float> col(s.pointwise() ? 0 : patch * plane);
    std::vector<float> grad_col(s.pointwise() ? 0 : patch * plane);
    std::vector<double> bias_acc(s.out_ch, 0.0);

    for (std::size_t n = 0; n < s.batch; ++n) {
        const float* in_n = input.raw() + n * s.in_ch * s.in_plane();
        const float* gout_n = grad_output.raw() + n * s.out_ch * plane;
        float* gin_n = g.input.raw() + n * s.in_ch * s.in_plane();

        const float* cols = in_n;
        float* gcols = gin_n;
        if (!s.pointwise()) {
            im2col(s, in_n, col.data());
            cols = col.data();
            std::fill(grad_col.begin(), grad_col.end(), 0.0f);
            gcols = grad_col.data();
        }

        for (std::size_t o = 0; o < s.out_ch; ++o) {
            std::span<const float> go(gout_n + o * plane, plane);
            double b = 0.0;
            for (float v : go) b += v;
            bias_acc[o] += b;

            float* gw = g.weights.raw() + o * patch;
            const float* w = weights.raw() + o * patch;
            for (std::size_t r = 0; r < patch; ++r) {
                std::span<const float> c(cols + r * plane, plane);
                gw[r] += k.dot(go, c);
                k.axpy(w[r], go, std::span<float>(gcols + r * plane, plane));
            }
        }
        if (!s.pointwise()) col2im(s, grad_col.data(), gin_n);
    }
    for (std::size_t o = 0; o < s.out_ch; ++o) g.bias[o] = static_cast<float>(bias_acc[o]);
    return g;
}

Tensor leaky_relu(const Tensor& input, float alpha) {
    require_alpha(alpha);
    Tensor out = Tensor::zeros_like(input);
    simd::active().leaky_relu(alpha, input.data(), out.data());
    return out;
}

Tensor leaky_relu_backward(const Tensor& input, const Tensor& grad_output, float alpha) {
    require_alpha(alpha);
    require_same_shape(input, grad_output, "leaky_relu_backward");
    Tensor out = Tensor::zeros_like(input);
    simd::active().leaky_relu_backward(alpha, input.data(), grad_output.data(), out.data());
    return out;
}

Tensor upsample_nearest(const Tensor& input, std::size_t factor) {
    if (factor < 1) throw ParameterError("upsample factor must be >= 1");
    require_rank(input, 4, "upsample input");
    const std::size_t nc = input.dim(0) * input.dim(1);
    const std::size_t h = input.dim(2), w = input.dim(3);
    const std::size_t oh = h * factor, ow = w * factor;
    Tensor out({input.dim(0), input.dim(1), oh, ow});
    for (std::size_t p = 0; p < nc; ++p) {
        const float* src = input.raw() + p * h * w;
        float* dst = out.raw() + p * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
            const float* srow = src + (y / factor) * w;
            float* drow = dst + y * ow;
            for (std::size_t x = 0; x < ow; ++x) drow[x] = srow[x / factor];
        }
    }
    return out;
}

Tensor upsample_nearest_backward(const Tensor& grad_output, std::size_t factor) {
    if (factor < 1) throw ParameterError("upsample factor must be >= 1");
    require_rank(grad_output, 4, "upsample grad_output");
    const std::size_t oh = grad_output.dim(2), ow = grad_output.dim(3);
    if (oh % factor != 0 || ow % factor != 0) {
        throw DimensionError("upsample_nearest_backward: gradient " + shape_to_string(grad_output.shape()) +
                             " is not a multiple of factor " + std::to_string(factor));
    }
    const std::size_t h = oh / factor, w = ow / factor;
    const std::size_t nc = grad_output.dim(0) * grad_output.dim(1);
    Tensor out({grad_output.dim(0), grad_output.dim(1), h, w});
    for (std::size_t p = 0; p < nc; ++p) {
        const float* src = grad_output.raw() + p * oh * ow;
        float* dst = out.raw() + p * h * w;
        for (std::size_t y = 0; y < oh; ++y) {
            const float* srow = src + y * ow;
            float* drow = dst + (y / factor) * w;
            for (std::size_t x = 0; x < ow; ++x) drow[x / factor] += srow[x];
        }
    }
    return out;
}

std::vector<float> OneHotTarget::expand() const {
    if (class_index >= num_classes) {
        throw LabelError("target class " + std::to_string(class_index) + " out of range for " +
                         std::to_string(num_classes) + " classes");
    }
    std::vector<float> v(num_classes, 0.0f);
    v[class_index] = 1.0f;
    return v;
}

namespace {

// Softmax of `count` logits spaced `stride` apart.
void softmax_strided(const float* in, float* out, std::size_t count, std::size_t stride) {
    float max_v = in[0];
    for (std::size_t i = 0; i < count; ++i) {
        const float v = in[i * stride];
        if (!std::isfinite(v)) throw NumericError("softmax: non-finite logit");
        max_v = std::max(max_v, v);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const float e = std::exp(in[i * stride] - max_v);
        out[i * stride] = e;
        sum += e;
    }
    const double inv = 1.0 / sum;
    for (std::size_t i = 0; i < count; ++i) out[i * stride] = static_cast<float>(out[i * stride] * inv);
}

std::size_t check_targets(const Tensor& probs, std::span<const std::uint8_t> targets, const char* what) {
    require_rank(probs, 4, what);
    const std::size_t positions = probs.dim(0) * probs.dim(2) * probs.dim(3);
    if (targets.size() != positions) {
        throw DimensionError(std::string(what) + ": " + std::to_string(targets.size()) + " targets for " +
                             std::to_string(positions) + " positions");
    }
    const std::size_t classes = probs.dim(1);
    for (auto t : targets) {
        if (t >= classes) {
            throw LabelError(std::string(what) + ": label " + std::to_string(t) + " out of range for " +
                             std::to_string(classes) + " classes");
        }
    }
    return positions;
}

}  // namespace

ProbVector softmax(std::span<const float> logits) {
    if (logits.size() < 2) throw DimensionError("softmax needs at least two classes");
    ProbVector p{std::vector<float>(logits.size())};
    softmax_strided(logits.data(), p.values.data(), logits.size(), 1);
    return p;
}

Tensor softmax(const Tensor& logits, std::size_t axis) {
    const std::size_t classes = logits.dim(axis);
    if (classes < 2) throw DimensionError("softmax needs at least two classes along axis " + std::to_string(axis));
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= logits.dim(i);
    for (std::size_t i = axis + 1; i < logits.rank(); ++i) inner *= logits.dim(i);

    Tensor out = Tensor::zeros_like(logits);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = o * classes * inner;
        for (std::size_t i = 0; i < inner; ++i) {
            softmax_strided(logits.raw() + base + i, out.raw() + base + i, classes, inner);
        }
    }
    return out;
}

double cross_entropy(const Tensor& probs, std::span<const std::uint8_t> targets) {
    const std::size_t positions = check_targets(probs, targets, "cross_entropy");
    const std::size_t classes = probs.dim(1);
    const std::size_t plane = probs.dim(2) * probs.dim(3);
    double total = 0.0;
    for (std::size_t n = 0; n < probs.dim(0); ++n) {
        for (std::size_t p = 0; p < plane; ++p) {
            const std::size_t t = targets[n * plane + p];
            const float prob = probs[(n * classes + t) * plane + p];
            total -= std::log(std::max(static_cast<double>(prob), 1e-12));
        }
    }
    return total / static_cast<double>(positions);
}

Tensor softmax_cross_entropy_backward(const Tensor& probs, std::span<const std::uint8_t> targets) {
    const std::size_t positions = check_targets(probs, targets, "softmax_cross_entropy_backward");
    const std::size_t classes = probs.dim(1);
    const std::size_t plane = probs.dim(2) * probs.dim(3);
    const float scale = 1.0f / static_cast<float>(positions);
    Tensor grad = probs;
    for (std::size_t n = 0; n < probs.dim(0); ++n) {
        for (std::size_t p = 0; p < plane; ++p) {
            grad[(n * classes + targets[n * plane + p]) * plane + p] -= 1.0f;
        }
    }
    for (auto& v : grad.data()) v *= scale;
    return grad;
}

}  // namespace segpipe
