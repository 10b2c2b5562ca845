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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segpipe/image.hpp"
#include "segpipe/palette.hpp"

namespace segpipe {

using Centroid = std::array<float, 3>;

struct ClusterModel {
    std::size_t k = 0;
    std::vector<Centroid> centroids;
    // Sum over pixels of the squared distance to the assigned centroid.
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    std::uint64_t seed = 0;

    // Not serialized. k as requested before clamping to the distinct color
    // count, and the inertia after every assignment step of the fit.
    std::size_t requested_k = 0;
    std::vector<double> inertia_history;

    bool reduced() const noexcept { return requested_k > k; }
};

struct KMeansOptions {
    std::size_t k = 12;
    std::uint64_t seed = 42;
    std::size_t max_iters = 100;
    // Stop once no centroid moves by this much (RGB units).
    double tol = 0.5;
    // Start Lloyd from these centroids instead of k-means++ seeding. k is
    // taken from their count.
    std::optional<std::vector<Centroid>> initial;
};

/// Lloyd's algorithm over RGB pixels (interleaved bytes).
///
/// Pixels are collapsed to distinct colors with multiplicities, so the cost
/// per iteration scales with the number of distinct colors. Seeding is
/// k-means++ from Rng(seed). An empty cluster takes over the point farthest
/// from its current centroid. If k exceeds the distinct color count it is
/// reduced to that count and requested_k records the original value.
ClusterModel kmeans_fit(std::span<const std::uint8_t> rgb_pixels, const KMeansOptions& options);

/// Nearest centroid per pixel; the lowest index wins ties.
LabelMap kmeans_assign(const Image& image, const ClusterModel& model);

/// Recomputes the inertia of `model` on the given pixels, in double.
double kmeans_inertia(std::span<const std::uint8_t> rgb_pixels, const ClusterModel& model);

/// Color of the pixel farthest from its nearest centroid (first such pixel).
Centroid farthest_pixel(std::span<const std::uint8_t> rgb_pixels, const ClusterModel& model);

/// Centroids rounded half-up to 8 bits.
std::vector<Rgb> centroid_colors(const ClusterModel& model);
std::vector<Rgb> palette_colors(const Palette& palette);

/// pixel(y, x) = colors[labels(y, x)]. DataError on labels >= colors.size().
Image recolor(const LabelMap& labels, std::span<const Rgb> colors);

// Text form: `k seed iterations inertia` then k lines of `r g b`, all floats
// with six decimals.
std::string format_model(const ClusterModel& model);
ClusterModel parse_model(const std::string& text);
void save_model(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel load_model(const std::filesystem::path& path);

}  // namespace segpipe
