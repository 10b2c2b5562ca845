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

#include "segpipe/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <optional>
#include <sstream>

#include "segpipe/errors.hpp"
#include "segpipe/random.hpp"

namespace segpipe {

LabelMap encode_labels(const Image& color_image, const Palette& palette) {
    LabelMap out(color_image.width, color_image.height);
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        const std::uint8_t* p = &color_image.pixels[3 * i];
        out.labels[i] = palette.nearest({p[0], p[1], p[2]});
    }
    return out;
}

Image decode_labels(const LabelMap& labels, const Palette& palette) {
    labels.check_range(palette.size());
    Image out(labels.width, labels.height);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const Rgb& c = palette.color(labels.labels[i]);
        std::copy(c.begin(), c.end(), out.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i));
    }
    return out;
}

Augmentation parse_augmentation(std::string_view name) {
    if (name == "hflip") return Augmentation::hflip;
    if (name == "vflip") return Augmentation::vflip;
    if (name == "rot90") return Augmentation::rot90;
    if (name == "rot180") return Augmentation::rot180;
    if (name == "rot270") return Augmentation::rot270;
    throw ParameterError("unknown augmentation '" + std::string(name) +
                         "' (expected hflip, vflip, rot90, rot180 or rot270)");
}

std::string_view augmentation_name(Augmentation op) {
    switch (op) {
        case Augmentation::hflip:
            return "hflip";
        case Augmentation::vflip:
            return "vflip";
        case Augmentation::rot90:
            return "rot90";
        case Augmentation::rot180:
            return "rot180";
        case Augmentation::rot270:
            return "rot270";
    }
    return "unknown";
}

std::pair<Image, LabelMap> augment(const Image& image, const LabelMap& labels, Augmentation op) {
    if (image.width != labels.width || image.height != labels.height) {
        throw DataError("augment: image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                        " but labels are " + std::to_string(labels.width) + "x" + std::to_string(labels.height));
    }
    const std::size_t w = image.width, h = image.height;
    const bool swaps = op == Augmentation::rot90 || op == Augmentation::rot270;
    const std::size_t ow = swaps ? h : w, oh = swaps ? w : h;

    // Source pixel for each destination pixel.
    auto source = [&](std::size_t y, std::size_t x) -> std::pair<std::size_t, std::size_t> {
        switch (op) {
            case Augmentation::hflip:
                return {y, w - 1 - x};
            case Augmentation::vflip:
                return {h - 1 - y, x};
            case Augmentation::rot90:
                return {h - 1 - x, y};
            case Augmentation::rot180:
                return {h - 1 - y, w - 1 - x};
            case Augmentation::rot270:
                return {x, w - 1 - y};
        }
        return {y, x};
    };

    Image out_img(ow, oh);
    LabelMap out_lbl(ow, oh);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            const auto [sy, sx] = source(y, x);
            std::copy_n(image.at(sy, sx), 3, out_img.at(y, x));
            out_lbl.at(y, x) = labels.at(sy, sx);
        }
    }
    return {std::move(out_img), std::move(out_lbl)};
}

DatasetSplit split_dataset(const std::vector<std::string>& ids, double ratio, std::uint64_t seed) {
    if (ids.empty()) throw DataError("cannot split an empty sample list");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("split ratio must lie in (0, 1)");

    std::vector<std::string> order = ids;
    Rng rng(seed);
    rng.shuffle(std::span(order));

    const double n = static_cast<double>(order.size());
    // Guard against products like 0.7 * 10 = 7.000000000000001.
    auto n_train = static_cast<std::size_t>(std::ceil(ratio * n - 1e-9));
    n_train = std::min(n_train, order.size());

    DatasetSplit split;
    split.ratio = ratio;
    split.seed = seed;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return split;
}

std::string format_split(const DatasetSplit& split) {
    char ratio[32];
    *std::to_chars(ratio, ratio + sizeof ratio - 1, split.ratio).ptr = '\0';
    std::string out = std::string("# ratio ") + ratio + " seed " + std::to_string(split.seed) + "\n";
    for (const auto& id : split.train) out += "train " + id + "\n";
    for (const auto& id : split.val) out += "val " + id + "\n";
    return out;
}

DatasetSplit parse_split(const std::string& text) {
    DatasetSplit split;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::optional<double> header_ratio;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream header(line.substr(1));
            std::string k1, k2, ratio;
            std::uint64_t seed = 0;
            if (header >> k1 >> ratio >> k2 >> seed && k1 == "ratio" && k2 == "seed") {
                double r = 0.0;
                if (std::from_chars(ratio.data(), ratio.data() + ratio.size(), r).ec == std::errc()) header_ratio = r;
                split.seed = seed;
            }
            continue;
        }
        const auto space = line.find(' ');
        if (space == std::string::npos || space + 1 >= line.size()) {
            throw DataError("split line " + std::to_string(line_no) + ": expected '<train|val> <id>'");
        }
        const std::string kind = line.substr(0, space);
        std::string id = line.substr(space + 1);
        if (kind == "train") {
            split.train.push_back(std::move(id));
        } else if (kind == "val") {
            split.val.push_back(std::move(id));
        } else {
            throw DataError("split line " + std::to_string(line_no) + ": unknown set '" + kind + "'");
        }
    }
    const std::size_t total = split.train.size() + split.val.size();
    if (total == 0) throw DataError("split file lists no samples");
    split.ratio = header_ratio.value_or(static_cast<double>(split.train.size()) / static_cast<double>(total));
    return split;
}

namespace {

enum Street : std::uint8_t {
    kSky = 0,
    kBuilding = 1,
    kPole = 2,
    kRoad = 3,
    kSidewalk = 4,
    kTree = 5,
    kSign = 6,
    kFence = 7,
    kCar = 8,
    kPedestrian = 9,
    kBicyclist = 10,
    kVoid = 11,
};

class Canvas {
public:
    Canvas(std::size_t w, std::size_t h) : labels_(w, h) {}

    // Half-open rectangle, clipped to the raster.
    void rect(long x0, long y0, long x1, long y1, std::uint8_t cls) {
        x0 = std::max(x0, 0L);
        y0 = std::max(y0, 0L);
        x1 = std::min(x1, static_cast<long>(labels_.width));
        y1 = std::min(y1, static_cast<long>(labels_.height));
        for (long y = y0; y < y1; ++y) {
            for (long x = x0; x < x1; ++x) labels_.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = cls;
        }
    }

    void ellipse(double cx, double cy, double rx, double ry, std::uint8_t cls) {
        for (std::size_t y = 0; y < labels_.height; ++y) {
            for (std::size_t x = 0; x < labels_.width; ++x) {
                const double dx = (static_cast<double>(x) + 0.5 - cx) / rx;
                const double dy = (static_cast<double>(y) + 0.5 - cy) / ry;
                if (dx * dx + dy * dy <= 1.0) labels_.at(y, x) = cls;
            }
        }
    }

    LabelMap take() { return std::move(labels_); }

private:
    LabelMap labels_;
};

}  // namespace

std::pair<Image, LabelMap> generate_synthetic_scene(std::size_t width, std::size_t height, std::uint64_t seed,
                                                    const Palette& palette) {
    if (width < 16 || height < 16) throw ParameterError("synthetic scenes need width and height >= 16");
    if (palette.size() != 12) throw DataError("synthetic scenes need the 12-class street palette");

    Rng rng(seed);
    const double W = static_cast<double>(width), H = static_cast<double>(height);
    auto px = [](double v) { return static_cast<long>(std::lround(v)); };
    auto size_at_least = [](double v, double lo) { return std::max(v, lo); };

    Canvas c(width, height);
    const double horizon = H * rng.uniform(0.35, 0.5);
    const double curb = horizon + H * rng.uniform(0.1, 0.18);

    c.rect(0, 0, px(W), px(horizon), kSky);
    c.rect(0, px(horizon), px(W), px(curb), kSidewalk);
    c.rect(0, px(curb), px(W), px(H), kRoad);

    const int buildings = static_cast<int>(rng.range(1, 3));
    for (int i = 0; i < buildings; ++i) {
        if (rng.uniform() > 0.9) continue;
        const double bw = W * rng.uniform(0.2, 0.4);
        const double x0 = rng.uniform(-0.1 * W, W - 0.5 * bw);
        const double top = horizon - H * rng.uniform(0.12, 0.3);
        c.rect(px(x0), px(top), px(x0 + bw), px(horizon), kBuilding);
    }
    if (rng.uniform() < 0.8) {
        const double rx = size_at_least(W * rng.uniform(0.08, 0.14), 3.0);
        const double ry = size_at_least(H * rng.uniform(0.1, 0.16), 3.0);
        c.ellipse(rng.uniform(rx, W - rx), horizon - 0.7 * ry, rx, ry, kTree);
    }
    if (rng.uniform() < 0.7) {
        const double fx = rng.uniform(0.0, 0.5 * W);
        const double fh = size_at_least(H * 0.07, 2.0);
        c.rect(px(fx), px(horizon - fh), px(fx + W * rng.uniform(0.3, 0.5)), px(horizon), kFence);
    }
    if (rng.uniform() < 0.8) {
        const double pw = size_at_least(W / 16.0, 2.0);
        const double x0 = rng.uniform(0.05 * W, 0.9 * W);
        const double top = horizon - H * rng.uniform(0.2, 0.3);
        const double base = horizon + 0.5 * (curb - horizon);
        c.rect(px(x0), px(top), px(x0 + pw), px(base), kPole);
        if (rng.uniform() < 0.7) {
            const double s = size_at_least(W * 0.1, 3.0);
            c.rect(px(x0 + 0.5 * pw - 0.5 * s), px(top), px(x0 + 0.5 * pw + 0.5 * s), px(top + s), kSign);
        }
    }
    const int cars = rng.uniform() < 0.9 ? static_cast<int>(rng.range(1, 2)) : 0;
    for (int i = 0; i < cars; ++i) {
        const double cw = W * rng.uniform(0.2, 0.32);
        const double ch = size_at_least(H * rng.uniform(0.1, 0.16), 3.0);
        const double x0 = rng.uniform(0.0, W - cw);
        const double y0 = rng.uniform(curb, std::max(curb, H - ch));
        c.rect(px(x0), px(y0), px(x0 + cw), px(y0 + ch), kCar);
    }
    if (rng.uniform() < 0.7) {
        const double rx = size_at_least(W * 0.05, 2.0);
        const double ry = size_at_least(H * 0.11, 4.0);
        c.ellipse(rng.uniform(rx, W - rx), curb - 0.6 * ry, rx, ry, kPedestrian);
    }
    if (rng.uniform() < 0.6) {
        const double rx = size_at_least(W * 0.08, 3.0);
        const double ry = size_at_least(H * 0.06, 2.5);
        c.ellipse(rng.uniform(rx, W - rx), rng.uniform(curb + ry, std::max(curb + ry, H - ry)), rx, ry, kBicyclist);
    }
    if (rng.uniform() < 0.6) {
        const double vw = size_at_least(W * rng.uniform(0.1, 0.2), 3.0);
        const double vh = size_at_least(H * rng.uniform(0.06, 0.12), 2.0);
        const bool left = rng.uniform() < 0.5;
        const double x0 = left ? 0.0 : W - vw;
        c.rect(px(x0), px(H - vh), px(x0 + vw), px(H), kVoid);
    }

    LabelMap labels = c.take();
    Image image = decode_labels(labels, palette);
    return {std::move(image), std::move(labels)};
}

std::vector<std::string> list_ids(const std::filesystem::path& dir, std::string_view extension) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == extension) {
            ids.push_back(entry.path().stem().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<Sample> load_samples(const std::filesystem::path& image_dir, const std::filesystem::path& label_dir,
                                 const std::vector<std::string>& ids) {
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto img_path = image_dir / (id + ".ppm");
        const auto lbl_path = label_dir / (id + ".pgm");
        if (!std::filesystem::exists(img_path)) throw DataError("missing image " + img_path.string());
        if (!std::filesystem::exists(lbl_path)) throw DataError("missing labels " + lbl_path.string());
        Sample s{id, load_image(img_path), load_labels(lbl_path)};
        if (s.image.width != s.labels.width || s.image.height != s.labels.height) {
            throw DataError("sample '" + id + "': image and label sizes differ");
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace segpipe
