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

#include "segpipe/palette.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

#include "segpipe/errors.hpp"
#include "segpipe/image.hpp"

namespace segpipe {

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw DataError("palette must have at least one entry");
    if (entries_.size() > 256) throw DataError("palette has more than 256 entries");
    std::sort(entries_.begin(), entries_.end(),
              [](const PaletteEntry& a, const PaletteEntry& b) { return a.class_index < b.class_index; });
    std::set<Rgb> colors;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].class_index != i) {
            throw DataError("palette class indices must be 0.." + std::to_string(entries_.size() - 1) +
                            " exactly once");
        }
        if (entries_[i].name.empty() || entries_[i].name.find_first_of(",\r\n") != std::string::npos) {
            throw DataError("palette name for class " + std::to_string(i) + " must be non-empty without commas");
        }
        if (!colors.insert(entries_[i].rgb).second) {
            throw DataError("palette color for class " + std::to_string(i) + " duplicates another class");
        }
    }
}

Palette Palette::street12() {
    return Palette({
        {0, "sky", {128, 128, 128}},
        {1, "building", {128, 0, 0}},
        {2, "pole", {192, 192, 128}},
        {3, "road", {128, 64, 128}},
        {4, "sidewalk", {60, 40, 222}},
        {5, "tree", {128, 128, 0}},
        {6, "sign", {192, 128, 128}},
        {7, "fence", {64, 64, 128}},
        {8, "car", {64, 0, 128}},
        {9, "pedestrian", {64, 64, 0}},
        {10, "bicyclist", {0, 128, 192}},
        {11, "void", {0, 0, 0}},
    });
}

std::uint8_t Palette::nearest(const Rgb& rgb) const noexcept {
    std::uint8_t best = 0;
    int best_d = -1;
    for (const auto& e : entries_) {
        const int dr = int(rgb[0]) - e.rgb[0];
        const int dg = int(rgb[1]) - e.rgb[1];
        const int db = int(rgb[2]) - e.rgb[2];
        const int d = dr * dr + dg * dg + db * db;
        if (best_d < 0 || d < best_d) {
            best_d = d;
            best = e.class_index;
            if (d == 0) break;
        }
    }
    return best;
}

std::string display_class_name(std::size_t class_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "Class_%02zu", class_index + 1);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

int parse_int(const std::string& s, int lo, int hi, std::size_t line_no) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < lo || v > hi) {
        throw DataError("palette line " + std::to_string(line_no) + ": invalid integer '" + s + "'");
    }
    return v;
}

}  // namespace

Palette parse_palette_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<PaletteEntry> entries;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "class_index,name,r,g,b") {
                throw DataError("palette header must be 'class_index,name,r,g,b', got '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 5) throw DataError("palette line " + std::to_string(line_no) + ": expected 5 fields");
        PaletteEntry e;
        e.class_index = static_cast<std::uint8_t>(parse_int(f[0], 0, 255, line_no));
        e.name = f[1];
        for (int c = 0; c < 3; ++c) e.rgb[c] = static_cast<std::uint8_t>(parse_int(f[2 + c], 0, 255, line_no));
        entries.push_back(std::move(e));
    }
    if (!saw_header) throw DataError("palette file is empty");
    return Palette(std::move(entries));
}

std::string format_palette_csv(const Palette& palette) {
    std::string out = "class_index,name,r,g,b\n";
    for (const auto& e : palette.entries()) {
        out += std::to_string(e.class_index) + "," + e.name + "," + std::to_string(e.rgb[0]) + "," +
               std::to_string(e.rgb[1]) + "," + std::to_string(e.rgb[2]) + "\n";
    }
    return out;
}

Palette load_palette(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_palette_csv(std::string(bytes.begin(), bytes.end()));
}

void save_palette(const Palette& palette, const std::filesystem::path& path) {
    const std::string text = format_palette_csv(palette);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace segpipe
