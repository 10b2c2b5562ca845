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

#include "kernels_impl.hpp"

namespace segpipe::simd::scalar {

void axpy(float a, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

float dot(std::span<const float> x, std::span<const float> y) {
    float acc = 0.0f;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void leaky_relu(float alpha, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0f ? x[i] : alpha * x[i];
}

void leaky_relu_backward(float alpha, std::span<const float> x, std::span<const float> grad, std::span<float> out) {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] >= 0.0f ? grad[i] : alpha * grad[i];
}

void nearest_centroid(std::span<const std::uint8_t> rgb, std::span<const float> centroids,
                      std::span<std::uint32_t> labels, std::span<float> dist2) {
    const std::size_t n = labels.size();
    const std::size_t k = centroids.size() / 3;
    for (std::size_t p = 0; p < n; ++p) {
        const float r = rgb[3 * p];
        const float g = rgb[3 * p + 1];
        const float b = rgb[3 * p + 2];
        std::uint32_t best = 0;
        float best_d = 0.0f;
        for (std::size_t c = 0; c < k; ++c) {
            const float dr = r - centroids[3 * c];
            const float dg = g - centroids[3 * c + 1];
            const float db = b - centroids[3 * c + 2];
            const float d = (dr * dr + dg * dg) + db * db;
            if (c == 0 || d < best_d) {
                best_d = d;
                best = static_cast<std::uint32_t>(c);
            }
        }
        labels[p] = best;
        dist2[p] = best_d;
    }
}

}  // namespace segpipe::simd::scalar
