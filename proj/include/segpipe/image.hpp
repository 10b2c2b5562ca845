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
#include <filesystem>
#include <span>
#include <vector>

namespace segpipe {

/// 8-bit RGB raster, row-major, three bytes per pixel.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(std::size_t w, std::size_t h) : width(w), height(h), pixels(3 * w * h, 0) {}
    Image(std::size_t w, std::size_t h, std::vector<std::uint8_t> data);

    std::size_t pixel_count() const noexcept { return width * height; }
    std::uint8_t* at(std::size_t y, std::size_t x) noexcept { return &pixels[3 * (y * width + x)]; }
    const std::uint8_t* at(std::size_t y, std::size_t x) const noexcept { return &pixels[3 * (y * width + x)]; }

    bool operator==(const Image&) const = default;
};

/// Per-pixel class indices, row-major.
struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> labels;

    LabelMap() = default;
    LabelMap(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), labels(w * h, fill) {}
    LabelMap(std::size_t w, std::size_t h, std::vector<std::uint8_t> data);

    std::size_t pixel_count() const noexcept { return width * height; }
    std::uint8_t& at(std::size_t y, std::size_t x) noexcept { return labels[y * width + x]; }
    std::uint8_t at(std::size_t y, std::size_t x) const noexcept { return labels[y * width + x]; }

    /// Throws LabelError naming the first offending pixel if any label >= num_classes.
    void check_range(std::size_t num_classes) const;

    bool operator==(const LabelMap&) const = default;
};

// Binary PPM (P6) and PGM (P5), maxval 255. Header comments are accepted on
// read; writers emit "P6\n<w> <h>\n255\n" followed by the raw bytes.
Image decode_ppm(std::span<const std::uint8_t> bytes);
LabelMap decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Image& image);
std::vector<std::uint8_t> encode_pgm(const LabelMap& labels);

Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);
LabelMap load_labels(const std::filesystem::path& path);
void save_labels(const LabelMap& labels, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace segpipe
