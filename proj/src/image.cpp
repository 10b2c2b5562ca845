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

#include "segpipe/image.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include "segpipe/errors.hpp"

namespace segpipe {

Image::Image(std::size_t w, std::size_t h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
    if (pixels.size() != 3 * w * h) {
        throw DataError("image buffer holds " + std::to_string(pixels.size()) + " bytes, expected " +
                        std::to_string(3 * w * h));
    }
}

LabelMap::LabelMap(std::size_t w, std::size_t h, std::vector<std::uint8_t> data)
    : width(w), height(h), labels(std::move(data)) {
    if (labels.size() != w * h) {
        throw DataError("label buffer holds " + std::to_string(labels.size()) + " bytes, expected " +
                        std::to_string(w * h));
    }
}

void LabelMap::check_range(std::size_t num_classes) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw LabelError("label " + std::to_string(labels[i]) + " at (" + std::to_string(i / width) + ", " +
                             std::to_string(i % width) + ") out of range for " + std::to_string(num_classes) +
                             " classes");
        }
    }
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void expect_magic(const char* magic) {
        if (bytes_.size() < 2 || bytes_[0] != magic[0] || bytes_[1] != magic[1]) {
            throw FormatError(std::string("bad magic: expected \"") + magic + "\"", 0);
        }
        pos_ = 2;
    }

    std::size_t read_uint(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > (1u << 24)) throw FormatError(std::string(field) + " is too large", start);
            ++pos_;
        }
        if (pos_ == start) {
            if (pos_ >= bytes_.size()) throw FormatError(std::string("truncated header while reading ") + field, pos_);
            throw FormatError(std::string("expected ") + field, pos_);
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size()) throw FormatError("truncated header before raster", pos_);
        if (!is_space(bytes_[pos_])) throw FormatError("expected whitespace after maxval", pos_);
        return pos_ + 1;
    }

private:
    static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

struct Header {
    std::size_t width, height, offset;
};

Header parse_header(std::span<const std::uint8_t> bytes, const char* magic, std::size_t channels) {
    HeaderReader r(bytes);
    r.expect_magic(magic);
    Header h{};
    h.width = r.read_uint("width");
    h.height = r.read_uint("height");
    const std::size_t maxval = r.read_uint("maxval");
    h.offset = r.raster_start();
    if (h.width == 0 || h.height == 0) throw FormatError("image dimensions must be positive", 2);
    if (maxval != 255) throw FormatError("maxval must be 255, got " + std::to_string(maxval), h.offset - 1);
    const std::size_t need = h.width * h.height * channels;
    if (bytes.size() - h.offset < need) {
        throw FormatError("truncated raster: expected " + std::to_string(need) + " bytes, found " +
                              std::to_string(bytes.size() - h.offset),
                          bytes.size());
    }
    return h;
}

std::vector<std::uint8_t> encode(const char* magic, std::size_t w, std::size_t h, std::span<const std::uint8_t> raster) {
    const std::string header = std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), raster.begin(), raster.end());
    return out;
}

}  // namespace

Image decode_ppm(std::span<const std::uint8_t> bytes) {
    const Header h = parse_header(bytes, "P6", 3);
    auto first = bytes.begin() + static_cast<std::ptrdiff_t>(h.offset);
    return Image(h.width, h.height, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(3 * h.width * h.height)));
}

LabelMap decode_pgm(std::span<const std::uint8_t> bytes) {
    const Header h = parse_header(bytes, "P5", 1);
    auto first = bytes.begin() + static_cast<std::ptrdiff_t>(h.offset);
    return LabelMap(h.width, h.height, std::vector<std::uint8_t>(first, first + static_cast<std::ptrdiff_t>(h.width * h.height)));
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
    return encode("P6", image.width, image.height, image.pixels);
}

std::vector<std::uint8_t> encode_pgm(const LabelMap& labels) {
    return encode("P5", labels.width, labels.height, labels.labels);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Image load_image(const std::filesystem::path& path) {
    try {
        return decode_ppm(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.detail(), e.offset());
    }
}

void save_image(const Image& image, const std::filesystem::path& path) { write_file(path, encode_ppm(image)); }

LabelMap load_labels(const std::filesystem::path& path) {
    try {
        return decode_pgm(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.detail(), e.offset());
    }
}

void save_labels(const LabelMap& labels, const std::filesystem::path& path) { write_file(path, encode_pgm(labels)); }

}  // namespace segpipe
