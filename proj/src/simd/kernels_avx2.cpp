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

// Built with -mavx2 -mfma -ffp-contract=off. Only reached after the
// dispatcher has confirmed AVX2 and FMA at runtime.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace segpipe::simd::avx2 {

namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

}  // namespace

void axpy(float a, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    const float* px = x.data();
    float* py = y.data();
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        __m256 y0 = _mm256_fmadd_ps(va, _mm256_loadu_ps(px + i), _mm256_loadu_ps(py + i));
        __m256 y1 = _mm256_fmadd_ps(va, _mm256_loadu_ps(px + i + 8), _mm256_loadu_ps(py + i + 8));
        _mm256_storeu_ps(py + i, y0);
        _mm256_storeu_ps(py + i + 8, y1);
    }
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(py + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(px + i), _mm256_loadu_ps(py + i)));
    }
    for (; i < n; ++i) py[i] += a * px[i];
}

float dot(std::span<const float> x, std::span<const float> y) {
    const std::size_t n = x.size();
    const float* px = x.data();
    const float* py = y.data();
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(px + i), _mm256_loadu_ps(py + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(px + i + 8), _mm256_loadu_ps(py + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(px + i), _mm256_loadu_ps(py + i), acc0);
    }
    float sum = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) sum += px[i] * py[i];
    return sum;
}

void leaky_relu(float alpha, std::span<const float> x, std::span<float> y) {
    const std::size_t n = x.size();
    const float* px = x.data();
    float* py = y.data();
    const __m256 va = _mm256_set1_ps(alpha);
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(px + i);
        __m256 neg = _mm256_mul_ps(va, v);
        __m256 keep = _mm256_cmp_ps(v, zero, _CMP_GE_OQ);
        _mm256_storeu_ps(py + i, _mm256_blendv_ps(neg, v, keep));
    }
    for (; i < n; ++i) py[i] = px[i] >= 0.0f ? px[i] : alpha * px[i];
}

void leaky_relu_backward(float alpha, std::span<const float> x, std::span<const float> grad, std::span<float> out) {
    const std::size_t n = x.size();
    const float* px = x.data();
    const float* pg = grad.data();
    float* po = out.data();
    const __m256 va = _mm256_set1_ps(alpha);
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 g = _mm256_loadu_ps(pg + i);
        __m256 keep = _mm256_cmp_ps(_mm256_loadu_ps(px + i), zero, _CMP_GE_OQ);
        _mm256_storeu_ps(po + i, _mm256_blendv_ps(_mm256_mul_ps(va, g), g, keep));
    }
    for (; i < n; ++i) po[i] = px[i] >= 0.0f ? pg[i] : alpha * pg[i];
}

void nearest_centroid(std::span<const std::uint8_t> rgb, std::span<const float> centroids,
                      std::span<std::uint32_t> labels, std::span<float> dist2) {
    const std::size_t n = labels.size();
    const std::size_t k = centroids.size() / 3;
    const std::uint8_t* src = rgb.data();
    alignas(32) float r[8], g[8], b[8];
    std::size_t p = 0;
    for (; p + 8 <= n; p += 8) {
        for (int j = 0; j < 8; ++j) {
            r[j] = src[3 * (p + j)];
            g[j] = src[3 * (p + j) + 1];
            b[j] = src[3 * (p + j) + 2];
        }
        const __m256 vr = _mm256_load_ps(r);
        const __m256 vg = _mm256_load_ps(g);
        const __m256 vb = _mm256_load_ps(b);
        __m256 best_d = _mm256_setzero_ps();
        __m256i best_i = _mm256_setzero_si256();
        for (std::size_t c = 0; c < k; ++c) {
            const __m256 dr = _mm256_sub_ps(vr, _mm256_set1_ps(centroids[3 * c]));
            const __m256 dg = _mm256_sub_ps(vg, _mm256_set1_ps(centroids[3 * c + 1]));
            const __m256 db = _mm256_sub_ps(vb, _mm256_set1_ps(centroids[3 * c + 2]));
            const __m256 d = _mm256_add_ps(_mm256_add_ps(_mm256_mul_ps(dr, dr), _mm256_mul_ps(dg, dg)),
                                           _mm256_mul_ps(db, db));
            if (c == 0) {
                best_d = d;
                continue;
            }
            const __m256 closer = _mm256_cmp_ps(d, best_d, _CMP_LT_OQ);
            best_d = _mm256_blendv_ps(best_d, d, closer);
            best_i = _mm256_blendv_epi8(best_i, _mm256_set1_epi32(static_cast<int>(c)), _mm256_castps_si256(closer));
        }
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(labels.data() + p), best_i);
        _mm256_storeu_ps(dist2.data() + p, best_d);
    }
    if (p < n) {
        scalar::nearest_centroid(rgb.subspan(3 * p), centroids, labels.subspan(p), dist2.subspan(p));
    }
}

}  // namespace segpipe::simd::avx2
