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

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "segpipe/errors.hpp"
#include "segpipe/simd/kernels.hpp"

namespace segpipe::simd {

namespace {

constexpr KernelTable kScalar{Isa::scalar,         scalar::axpy,
                              scalar::dot,         scalar::leaky_relu,
                              scalar::leaky_relu_backward, scalar::nearest_centroid};

#if defined(SEGPIPE_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2,         avx2::axpy,
                            avx2::dot,         avx2::leaky_relu,
                            avx2::leaky_relu_backward, avx2::nearest_centroid};

bool cpu_has_avx2() noexcept {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#if defined(SEGPIPE_HAVE_NEON)
constexpr KernelTable kNeon{Isa::neon,         neon::axpy,
                            neon::dot,         neon::leaky_relu,
                            neon::leaky_relu_backward, neon::nearest_centroid};
#endif

const KernelTable& best_available() noexcept {
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (const KernelTable* t = kernels_for(isa)) return *t;
    }
    return kScalar;
}

const KernelTable* initial_choice() noexcept {
    if (const char* env = std::getenv("SEGPIPE_SIMD")) {
        const std::string_view name(env);
        if (name == "scalar") return &kScalar;
        if (name == "avx2" || name == "neon") {
            if (const KernelTable* t = kernels_for(name == "avx2" ? Isa::avx2 : Isa::neon)) return t;
        }
    }
    return &best_available();
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial_choice()};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "unknown";
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    if (name == "neon") return Isa::neon;
    if (name == "auto") return best_available().isa;
    throw ParameterError("unknown SIMD variant '" + std::string(name) + "' (expected scalar, avx2, neon or auto)");
}

const KernelTable& scalar_kernels() noexcept { return kScalar; }

const KernelTable* kernels_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return &kScalar;
        case Isa::avx2:
#if defined(SEGPIPE_HAVE_AVX2)
            if (cpu_has_avx2()) return &kAvx2;
#endif
            return nullptr;
        case Isa::neon:
#if defined(SEGPIPE_HAVE_NEON)
            return &kNeon;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (kernels_for(isa)) out.push_back(isa);
    }
    return out;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void set_active(Isa isa) {
    const KernelTable* t = kernels_for(isa);
    if (!t) throw ParameterError("SIMD variant '" + std::string(isa_name(isa)) + "' is not available on this CPU");
    current().store(t, std::memory_order_release);
}

}  // namespace segpipe::simd
