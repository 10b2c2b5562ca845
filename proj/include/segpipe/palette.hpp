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
#include <string>
#include <vector>

namespace segpipe {

using Rgb = std::array<std::uint8_t, 3>;

struct PaletteEntry {
    std::uint8_t class_index = 0;
    std::string name;
    Rgb rgb{};

    bool operator==(const PaletteEntry&) const = default;
};

/// Class index <-> name <-> color table.
///
/// Entries are ordered by class index, indices are exactly 0..C-1 and colors
/// are pairwise distinct. The constructor enforces both.
class Palette {
public:
    explicit Palette(std::vector<PaletteEntry> entries);

    /// The twelve-class street-scene palette:
    ///
    ///   0 sky        (128,128,128)    6 sign        (192,128,128)
    ///   1 building   (128,  0,  0)    7 fence       ( 64, 64,128)
    ///   2 pole       (192,192,128)    8 car         ( 64,  0,128)
    ///   3 road       (128, 64,128)    9 pedestrian  ( 64, 64,  0)
    ///   4 sidewalk   ( 60, 40,222)   10 bicyclist   (  0,128,192)
    ///   5 tree       (128,128,  0)   11 void        (  0,  0,  0)
    static Palette street12();

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }
    const PaletteEntry& operator[](std::size_t i) const noexcept { return entries_[i]; }
    const Rgb& color(std::size_t class_index) const noexcept { return entries_[class_index].rgb; }

    /// Exact match first, then nearest by squared RGB distance, lowest index on ties.
    std::uint8_t nearest(const Rgb& rgb) const noexcept;

    bool operator==(const Palette&) const = default;

private:
    std::vector<PaletteEntry> entries_;
};

/// "Class_01" for index 0, matching the 1-based names used in reports.
std::string display_class_name(std::size_t class_index);

// CSV with header `class_index,name,r,g,b`; rows may appear in any order.
Palette parse_palette_csv(const std::string& text);
std::string format_palette_csv(const Palette& palette);
Palette load_palette(const std::filesystem::path& path);
void save_palette(const Palette& palette, const std::filesystem::path& path);

}  // namespace segpipe
