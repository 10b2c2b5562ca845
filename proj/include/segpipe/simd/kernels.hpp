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
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops used by the convolution, activation and k-means
// code. Each instruction set provides one KernelTable; the scalar table is the
// reference every other table is tested against.
//
// Contracts shared by all tables:
//   axpy, dot            equal to the scalar result within float rounding
//                        (vector tables may reassociate and fuse)
//   leaky_relu*          bit-identical to scalar
//   nearest_centroid     bit-identical to scalar: distances use mul and add
//                        only, summed as (dr*dr + dg*dg) + db*db, and the
//                        lowest centroid index wins ties
namespace segpipe::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
    Isa isa;

    // y[i] += a * x[i]
    void (*axpy)(float a, std::span<const float> x, std::span<float> y);

    // sum_i x[i] * y[i]
    float (*dot)(std::span<const float> x, std::span<const float> y);

    // y[i] = x[i] >= 0 ? x[i] : alpha * x[i]
    void (*leaky_relu)(float alpha, std::span<const float> x, std::span<float> y);

    // out[i] = x[i] >= 0 ? grad[i] : alpha * grad[i]
    void (*leaky_relu_backward)(float alpha, std::span<const float> x, std::span<const float> grad,
                                std::span<float> out);

    // rgb holds interleaved 8-bit pixels, centroids holds k interleaved float
    // triples. Writes the nearest centroid index and its squared distance for
    // every pixel.
    void (*nearest_centroid)(std::span<const std::uint8_t> rgb, std::span<const float> centroids,
                             std::span<std::uint32_t> labels, std::span<float> dist2);
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the table was not compiled in or the CPU lacks the extension.
const KernelTable* kernels_for(Isa isa) noexcept;

std::vector<Isa> available_isas();

// Best table for this CPU. SEGPIPE_SIMD=scalar|avx2|neon|auto overrides the
// initial choice.
const KernelTable& active() noexcept;

// Throws ParameterError when the requested table is unavailable.
void set_active(Isa isa);

Isa parse_isa(std::string_view name);

}  // namespace segpipe::simd
