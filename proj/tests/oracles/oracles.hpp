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

// Reference implementations used as test oracles. They are written directly
// from the definitions, with no code shared with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "segpipe/image.hpp"
#include "segpipe/random.hpp"
#include "segpipe/tensor.hpp"

namespace oracle {

using segpipe::Tensor;

// Six nested loops over (n, co, y, x, ci, ky, kx) with explicit bounds
// checks for zero padding.
inline Tensor conv2d(const Tensor& in, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad_begin,
                     std::size_t pad_end) {
    const std::size_t n = in.dim(0), cin = in.dim(1), h = in.dim(2), wd = in.dim(3);
    const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    const std::size_t oh = (h + pad_begin + pad_end - kh) / stride + 1;
    const std::size_t ow = (wd + pad_begin + pad_end - kw) / stride + 1;
    Tensor out({n, cout, oh, ow});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t co = 0; co < cout; ++co)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x) {
                    double acc = b[co];
                    for (std::size_t ci = 0; ci < cin; ++ci)
                        for (std::size_t dy = 0; dy < kh; ++dy)
                            for (std::size_t dx = 0; dx < kw; ++dx) {
                                const long sy = static_cast<long>(y * stride + dy) - static_cast<long>(pad_begin);
                                const long sx = static_cast<long>(x * stride + dx) - static_cast<long>(pad_begin);
                                if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(wd)) continue;
                                acc += static_cast<double>(in.at(i, ci, sy, sx)) * w.at(co, ci, dy, dx);
                            }
                    out.at(i, co, y, x) = static_cast<float>(acc);
                }
    return out;
}

inline Tensor random_tensor(segpipe::Shape shape, segpipe::Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

// Central difference of f with respect to every entry of x (or the listed
// entries), perturbing by +-eps in place and restoring afterwards.
inline std::vector<double> numeric_gradient(const std::function<double()>& f, Tensor& x, float eps,
                                            const std::vector<std::size_t>& entries) {
    std::vector<double> g;
    g.reserve(entries.size());
    for (std::size_t i : entries) {
        const float saved = x[i];
        x[i] = saved + eps;
        const double up = f();
        x[i] = saved - eps;
        const double down = f();
        x[i] = saved;
        g.push_back((up - down) / (2.0 * static_cast<double>(eps)));
    }
    return g;
}

inline std::vector<std::size_t> all_entries(const Tensor& x) {
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

// |a - n| / max(|a|, |n|, 1), the per-entry measure used by Caffe's
// gradient checker. Objectives in the tests are scaled so gradients are O(1).
inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1.0});
}

// ||a - n|| / max(||a||, ||n||) over a whole gradient sample.
inline double normwise_error(const std::vector<double>& a, const std::vector<double>& n) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - n[i]) * (a[i] - n[i]);
        na += a[i] * a[i];
        nn += n[i] * n[i];
    }
    const double denom = std::max(std::sqrt(na), std::sqrt(nn));
    return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

// Sum over entries of r[i] * y[i] in double; gradient w.r.t. y is r.
inline double weighted_sum(const Tensor& y, const Tensor& r) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(y[i]) * r[i];
    return s;
}

struct Counts {
    std::vector<std::uint64_t> tp, fp, fn;
};

// Per-class tallies, one class at a time, scanning every pixel.
inline Counts confusion(const segpipe::LabelMap& pred, const segpipe::LabelMap& truth, std::size_t classes) {
    Counts c{std::vector<std::uint64_t>(classes), std::vector<std::uint64_t>(classes), std::vector<std::uint64_t>(classes)};
    for (std::size_t k = 0; k < classes; ++k) {
        for (std::size_t y = 0; y < truth.height; ++y) {
            for (std::size_t x = 0; x < truth.width; ++x) {
                const bool p = pred.at(y, x) == k;
                const bool t = truth.at(y, x) == k;
                if (p && t) ++c.tp[k];
                if (p && !t) ++c.fp[k];
                if (!p && t) ++c.fn[k];
            }
        }
    }
    return c;
}

inline std::optional<double> iou(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    if (tp + fp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
}

// Index of the nearest centroid by exhaustive search, squared distance in
// double, first index wins ties.
inline std::size_t nearest_centroid(const std::uint8_t* rgb, const std::vector<std::array<float, 3>>& centroids) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double diff = static_cast<double>(rgb[c]) - centroids[j][c];
            d += diff * diff;
        }
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

}  // namespace oracle
