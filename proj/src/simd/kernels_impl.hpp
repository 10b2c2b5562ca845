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

// Per-ISA kernel entry points. Only dispatch.cpp should include this.

#include <cstdint>
#include <span>

namespace segpipe::simd {

#define SEGPIPE_DECLARE_KERNELS                                                                        \
    void axpy(float a, std::span<const float> x, std::span<float> y);                                  \
    float dot(std::span<const float> x, std::span<const float> y);                                     \
    void leaky_relu(float alpha, std::span<const float> x, std::span<float> y);                        \
    void leaky_relu_backward(float alpha, std::span<const float> x, std::span<const float> grad,       \
                             std::span<float> out);                                                    \
    void nearest_centroid(std::span<const std::uint8_t> rgb, std::span<const float> centroids,         \
                          std::span<std::uint32_t> labels, std::span<float> dist2);

namespace scalar {
SEGPIPE_DECLARE_KERNELS
}

#if defined(SEGPIPE_HAVE_AVX2)
namespace avx2 {
SEGPIPE_DECLARE_KERNELS
}
#endif

#if defined(SEGPIPE_HAVE_NEON)
namespace neon {
SEGPIPE_DECLARE_KERNELS
}
#endif

#undef SEGPIPE_DECLARE_KERNELS

}  // namespace segpipe::simd
