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

#include "segpipe/kmeans.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "segpipe/errors.hpp"
#include "segpipe/random.hpp"
#include "segpipe/simd/kernels.hpp"

namespace segpipe {

namespace {

struct ColorSet {
    std::vector<std::uint8_t> rgb;  // interleaved distinct colors, sorted
    std::vector<double> weight;     // multiplicity of each color

    std::size_t size() const { return weight.size(); }
};

ColorSet distinct_colors(std::span<const std::uint8_t> pixels) {
    std::vector<std::uint32_t> keys(pixels.size() / 3);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        keys[i] = (std::uint32_t(pixels[3 * i]) << 16) | (std::uint32_t(pixels[3 * i + 1]) << 8) | pixels[3 * i + 2];
    }
    std::sort(keys.begin(), keys.end());
    ColorSet set;
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        set.rgb.push_back(static_cast<std::uint8_t>(keys[i] >> 16));
        set.rgb.push_back(static_cast<std::uint8_t>(keys[i] >> 8));
        set.rgb.push_back(static_cast<std::uint8_t>(keys[i]));
        set.weight.push_back(static_cast<double>(j - i));
        i = j;
    }
    return set;
}

std::vector<float> flatten(const std::vector<Centroid>& centroids) {
    std::vector<float> flat;
    flat.reserve(3 * centroids.size());
    for (const auto& c : centroids) flat.insert(flat.end(), c.begin(), c.end());
    return flat;
}

Centroid color_of(const ColorSet& s, std::size_t i) {
    return {float(s.rgb[3 * i]), float(s.rgb[3 * i + 1]), float(s.rgb[3 * i + 2])};
}

double sq_dist(const Centroid& a, const Centroid& b) {
    double d = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double t = double(a[c]) - double(b[c]);
        d += t * t;
    }
    return d;
}

// k-means++: first center drawn by multiplicity, the rest proportional to
// multiplicity times squared distance to the nearest chosen center.
std::vector<Centroid> seed_plus_plus(const ColorSet& s, std::size_t k, Rng& rng) {
    const std::size_t n = s.size();
    double total_w = 0.0;
    for (double w : s.weight) total_w += w;

    auto draw = [&](const std::vector<double>& mass, double total) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mass[i] <= 0.0) continue;
            acc += mass[i];
            last_positive = i;
            if (target < acc) return i;
        }
        return last_positive;
    };

    std::vector<Centroid> centers;
    centers.push_back(color_of(s, draw(s.weight, total_w)));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(color_of(s, i), centers[0]);

    std::vector<double> mass(n);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass[i] = s.weight[i] * d2[i];
            total += mass[i];
        }
        const Centroid next = color_of(s, draw(mass, total));
        centers.push_back(next);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(color_of(s, i), next));
    }
    return centers;
}

struct Assignment {
    std::vector<std::uint32_t> label;
    std::vector<float> dist2;
    double inertia = 0.0;
};

void assign(const ColorSet& s, const std::vector<Centroid>& centroids, Assignment& a) {
    a.label.resize(s.size());
    a.dist2.resize(s.size());
    const auto flat = flatten(centroids);
    simd::active().nearest_centroid(s.rgb, flat, a.label, a.dist2);
    a.inertia = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        a.inertia += s.weight[i] * sq_dist(color_of(s, i), centroids[a.label[i]]);
    }
}

}  // namespace

ClusterModel kmeans_fit(std::span<const std::uint8_t> rgb_pixels, const KMeansOptions& options) {
    if (rgb_pixels.empty()) throw DataError("k-means: no pixels to fit");
    if (rgb_pixels.size() % 3 != 0) throw DataError("k-means: pixel buffer is not a multiple of 3 bytes");
    const std::size_t requested = options.initial ? options.initial->size() : options.k;
    if (requested < 1) throw ParameterError("k-means: k must be >= 1");
    if (requested > 256) throw ParameterError("k-means: k must be <= 256 so labels fit in 8 bits");
    if (!(options.tol >= 0.0)) throw ParameterError("k-means: tol must be >= 0");

    const ColorSet colors = distinct_colors(rgb_pixels);
    const std::size_t k = std::min(requested, colors.size());

    ClusterModel model;
    model.requested_k = requested;
    model.k = k;
    model.seed = options.seed;

    Rng rng(options.seed);
    std::vector<Centroid> centroids;
    if (options.initial) {
        centroids.assign(options.initial->begin(), options.initial->begin() + static_cast<std::ptrdiff_t>(k));
    } else {
        centroids = seed_plus_plus(colors, k, rng);
    }

    Assignment a;
    std::vector<std::array<double, 3>> sums(k);
    std::vector<double> counts(k);
    for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
        assign(colors, centroids, a);
        if (!model.inertia_history.empty() && a.inertia > model.inertia_history.back() * (1.0 + 1e-9)) {
            throw NumericError("k-means: inertia increased between iterations");
        }
        model.inertia_history.push_back(a.inertia);

        std::fill(sums.begin(), sums.end(), std::array<double, 3>{0.0, 0.0, 0.0});
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i = 0; i < colors.size(); ++i) {
            const std::size_t c = a.label[i];
            for (int ch = 0; ch < 3; ++ch) sums[c][ch] += colors.weight[i] * colors.rgb[3 * i + ch];
            counts[c] += colors.weight[i];
        }

        std::vector<Centroid> next(k);
        std::vector<bool> taken(colors.size(), false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0.0) {
                for (int ch = 0; ch < 3; ++ch) next[c][ch] = static_cast<float>(sums[c][ch] / counts[c]);
                continue;
            }
            // Empty cluster: move it onto the farthest point not yet claimed.
            std::size_t far = 0;
            float far_d = -1.0f;
            for (std::size_t i = 0; i < colors.size(); ++i) {
                if (!taken[i] && a.dist2[i] > far_d) {
                    far_d = a.dist2[i];
                    far = i;
                }
            }
            taken[far] = true;
            next[c] = color_of(colors, far);
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(sq_dist(next[c], centroids[c])));
        centroids = std::move(next);
        model.iterations_run = iter + 1;
        if (shift < options.tol) break;
    }

    assign(colors, centroids, a);
    if (!model.inertia_history.empty() && a.inertia > model.inertia_history.back() * (1.0 + 1e-9)) {
        throw NumericError("k-means: inertia increased between iterations");
    }
    model.inertia_history.push_back(a.inertia);
    model.inertia = a.inertia;
    model.centroids = std::move(centroids);
    return model;
}

LabelMap kmeans_assign(const Image& image, const ClusterModel& model) {
    if (model.centroids.empty() || model.centroids.size() > 256) throw DataError("k-means model has no usable centroids");
    const auto flat = flatten(model.centroids);
    std::vector<std::uint32_t> labels(image.pixel_count());
    std::vector<float> dist2(image.pixel_count());
    simd::active().nearest_centroid(image.pixels, flat, labels, dist2);
    LabelMap out(image.width, image.height);
    std::transform(labels.begin(), labels.end(), out.labels.begin(), [](std::uint32_t v) { return std::uint8_t(v); });
    return out;
}

double kmeans_inertia(std::span<const std::uint8_t> rgb_pixels, const ClusterModel& model) {
    const std::size_t n = rgb_pixels.size() / 3;
    const auto flat = flatten(model.centroids);
    std::vector<std::uint32_t> labels(n);
    std::vector<float> dist2(n);
    simd::scalar_kernels().nearest_centroid(rgb_pixels, flat, labels, dist2);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Centroid p{float(rgb_pixels[3 * i]), float(rgb_pixels[3 * i + 1]), float(rgb_pixels[3 * i + 2])};
        total += sq_dist(p, model.centroids[labels[i]]);
    }
    return total;
}

Centroid farthest_pixel(std::span<const std::uint8_t> rgb_pixels, const ClusterModel& model) {
    const std::size_t n = rgb_pixels.size() / 3;
    if (n == 0) throw DataError("farthest_pixel: no pixels");
    const auto flat = flatten(model.centroids);
    std::vector<std::uint32_t> labels(n);
    std::vector<float> dist2(n);
    simd::active().nearest_centroid(rgb_pixels, flat, labels, dist2);
    const auto it = std::max_element(dist2.begin(), dist2.end());
    const std::size_t i = static_cast<std::size_t>(it - dist2.begin());
    return {float(rgb_pixels[3 * i]), float(rgb_pixels[3 * i + 1]), float(rgb_pixels[3 * i + 2])};
}

std::vector<Rgb> centroid_colors(const ClusterModel& model) {
    std::vector<Rgb> out;
    for (const auto& c : model.centroids) {
        Rgb rgb{};
        for (int ch = 0; ch < 3; ++ch) {
            const double v = std::floor(static_cast<double>(c[ch]) + 0.5);
            rgb[ch] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
        out.push_back(rgb);
    }
    return out;
}

std::vector<Rgb> palette_colors(const Palette& palette) {
    std::vector<Rgb> out;
    for (const auto& e : palette.entries()) out.push_back(e.rgb);
    return out;
}

Image recolor(const LabelMap& labels, std::span<const Rgb> colors) {
    Image out(labels.width, labels.height);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const std::size_t l = labels.labels[i];
        if (l >= colors.size()) {
            throw DataError("recolor: label " + std::to_string(l) + " has no color (only " +
                            std::to_string(colors.size()) + " given)");
        }
        std::copy(colors[l].begin(), colors[l].end(), out.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i));
    }
    return out;
}

std::string format_model(const ClusterModel& model) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu %" PRIu64 " %zu %.6f\n", model.k, model.seed, model.iterations_run,
                  model.inertia);
    out += buf;
    for (const auto& c : model.centroids) {
        std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", double(c[0]), double(c[1]), double(c[2]));
        out += buf;
    }
    return out;
}

ClusterModel parse_model(const std::string& text) {
    std::istringstream in(text);
    ClusterModel m;
    if (!(in >> m.k >> m.seed >> m.iterations_run >> m.inertia)) {
        throw DataError("cluster model: header must be 'k seed iterations inertia'");
    }
    if (m.k < 1 || m.k > 256) throw DataError("cluster model: k out of range");
    for (std::size_t i = 0; i < m.k; ++i) {
        double r, g, b;
        if (!(in >> r >> g >> b)) throw DataError("cluster model: expected " + std::to_string(m.k) + " centroid lines");
        m.centroids.push_back({float(r), float(g), float(b)});
    }
    m.requested_k = m.k;
    return m;
}

void save_model(const ClusterModel& model, const std::filesystem::path& path) {
    const std::string text = format_model(model);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ClusterModel load_model(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_model(std::string(bytes.begin(), bytes.end()));
}

}  // namespace segpipe
