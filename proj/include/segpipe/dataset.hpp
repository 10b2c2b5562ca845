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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "segpipe/image.hpp"
#include "segpipe/palette.hpp"

namespace segpipe {

struct Sample {
    std::string id;
    Image image;
    LabelMap labels;
};

/// Exact palette colors map to their class; anything else goes to the
/// nearest palette color.
LabelMap encode_labels(const Image& color_image, const Palette& palette);

/// Palette lookup per pixel. Throws LabelError on labels >= palette.size().
Image decode_labels(const LabelMap& labels, const Palette& palette);

enum class Augmentation { hflip, vflip, rot90, rot180, rot270 };

Augmentation parse_augmentation(std::string_view name);
std::string_view augmentation_name(Augmentation op);

/// Applies the same geometric transform to an image and its labels.
/// rot90 turns the raster 90 degrees clockwise; rot90 and rot270 swap
/// width and height. Throws DataError when the rasters differ in size.
std::pair<Image, LabelMap> augment(const Image& image, const LabelMap& labels, Augmentation op);

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    double ratio = 0.8;
    std::uint64_t seed = 42;
};

inline constexpr double kDefaultSplitRatio = 0.8;
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Seeded Fisher-Yates shuffle, then the first ceil(ratio * n) ids go to train.
DatasetSplit split_dataset(const std::vector<std::string>& ids, double ratio, std::uint64_t seed);

// Text file with one `train <id>` or `val <id>` line per sample, after a
// `# ratio R seed S` comment. Lines starting with '#' are ignored on read.
std::string format_split(const DatasetSplit& split);
DatasetSplit parse_split(const std::string& text);

/// Street-like scene drawn in palette colors: sky and ground bands, a
/// horizon of buildings and trees, then poles, signs, fences, cars,
/// pedestrians and cyclists. Returns the image and its exact label map.
/// Deterministic per seed. Both sides must be at least 16. The palette must
/// have the twelve street classes in the order of Palette::street12().
std::pair<Image, LabelMap> generate_synthetic_scene(std::size_t width, std::size_t height, std::uint64_t seed,
                                                    const Palette& palette);

/// Sorted stems of files with the given extension (".ppm" or ".pgm").
std::vector<std::string> list_ids(const std::filesystem::path& dir, std::string_view extension);

/// Loads <images>/<id>.ppm with <labels>/<id>.pgm for each id. Throws
/// DataError when a pair is missing or the sizes disagree.
std::vector<Sample> load_samples(const std::filesystem::path& image_dir, const std::filesystem::path& label_dir,
                                 const std::vector<std::string>& ids);

}  // namespace segpipe
