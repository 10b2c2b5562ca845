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

// AArch64 only. Compiled with -ffp-contract=off like the AVX2 variant.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace segpipe::simd::neon {

void axpy(float a, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    const float* px = x.data();
    float* py = y.data();
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        vst1q_f32(py + i, vfmaq_f32(vld1q_f32(py + i), va, vld1q_f32(px + i)));
    }
    for (; i < n; ++i) py[i] += a * px[i];
}

float dot(std::span<const float> x, std::span<const float> y) {
    const std::size_t n = x.size();
    const float* px = x.data();
    const float* py = y.data();
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(px + i), vld1q_f32(py + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(px + i + 4), vld1q_f32(py + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(px + i), vld1q_f32(py + i));
    }
    float sum = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) sum += px[i] * py[i];
    return sum;
}

void leaky_relu(float alpha, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    const float* px = x.data();
    float* py = y.data();
    const float32x4_t va = vdupq_n_f32(alpha);
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t v = vld1q_f32(px + i);
        vst1q_f32(py + i, vbslq_f32(vcgeq_f32(v, zero), v, vmulq_f32(va, v)));
    }
    for (; i < n; ++i) py[i] = px[i] >= 0.0f ? px[i] : alpha * px[i];
}

void leaky_relu_backward(float alpha, std::span<const float> x, std::span<const float> grad, std::span<float> out) {
    const std::size_t n = x.size();
    const float32x4_t va = vdupq_n_f32(alpha);
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t g = vld1q_f32(grad.data() + i);
        const uint32x4_t keep = vcgeq_f32(vld1q_f32(x.data() + i), zero);
        vst1q_f32(out.data() + i, vbslq_f32(keep, g, vmulq_f32(va, g)));
    }
    for (; i < n; ++i) out[i] = x[i] >= 0.0f ? grad[i] : alpha * grad[i];
}

void nearest_centroid(std::span<const std::uint8_t> rgb, std::span<const float> centroids,
                      std::span<std::uint32_t> labels, std::span<float> dist2) {
    const std::size_t n = labels.size();
    const std::size_t k = centroids.size() / 3;
    float r[4], g[4], b[4];
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
        for (int j = 0; j < 4; ++j) {
            r[j] = rgb[3 * (p + j)];
            g[j] = rgb[3 * (p + j) + 1];
            b[j] = rgb[3 * (p + j) + 2];
        }
        const float32x4_t vr = vld1q_f32(r);
        const float32x4_t vg = vld1q_f32(g);
        const float32x4_t vb = vld1q_f32(b);
        float32x4_t best_d = vdupq_n_f32(0.0f);
        uint32x4_t best_i = vdupq_n_u32(0);
        for (std::size_t c = 0; c < k; ++c) {
            const float32x4_t dr = vsubq_f32(vr, vdupq_n_f32(centroids[3 * c]));
            const float32x4_t dg = vsubq_f32(vg, vdupq_n_f32(centroids[3 * c + 1]));
            const float32x4_t db = vsubq_f32(vb, vdupq_n_f32(centroids[3 * c + 2]));
            const float32x4_t d = vaddq_f32(vaddq_f32(vmulq_f32(dr, dr), vmulq_f32(dg, dg)), vmulq_f32(db, db));
            if (c == 0) {
                best_d = d;
                continue;
            }
            const uint32x4_t closer = vcltq_f32(d, best_d);
            best_d = vbslq_f32(closer, d, best_d);
            best_i = vbslq_u32(closer, vdupq_n_u32(static_cast<std::uint32_t>(c)), best_i);
        }
        vst1q_u32(labels.data() + p, best_i);
        vst1q_f32(dist2.data() + p, best_d);
    }
    if (p < n) {
        scalar::nearest_centroid(rgb.subspan(3 * p), centroids, labels.subspan(p), dist2.subspan(p));
    }
}

}  // namespace segpipe::simd::neon
