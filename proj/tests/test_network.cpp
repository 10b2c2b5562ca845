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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "segpipe/errors.hpp"
#include "segpipe/network.hpp"
#include "segpipe/ops.hpp"
#include "segpipe/random.hpp"
#include "testutil.hpp"

using namespace segpipe;

namespace {

Image random_image(std::size_t w, std::size_t h, Rng& rng) {
    Image img(w, h);
    for (auto& v : img.pixels) v = static_cast<std::uint8_t>(rng.below(256));
    return img;
}

Tensor oracle_leaky(Tensor t, float alpha) {
    for (auto& v : t.data()) v = v >= 0 ? v : alpha * v;
    return t;
}

Tensor oracle_upsample2(const Tensor& t) {
    Tensor out({t.dim(0), t.dim(1), 2 * t.dim(2), 2 * t.dim(3)});
    for (std::size_t n = 0; n < t.dim(0); ++n)
        for (std::size_t c = 0; c < t.dim(1); ++c)
            for (std::size_t y = 0; y < out.dim(2); ++y)
                for (std::size_t x = 0; x < out.dim(3); ++x) out.at(n, c, y, x) = t.at(n, c, y / 2, x / 2);
    return out;
}

}  // namespace

TEST(Build, DefaultParamCountHandSummed) {
    // encoder 3->16->32->64 (stride 2), decoder 64->32->16->16, head 16->12
    const std::size_t expect = (16 * 3 * 9 + 16) + (32 * 16 * 9 + 32) + (64 * 32 * 9 + 64) +
                               (32 * 64 * 9 + 32) + (16 * 32 * 9 + 16) + (16 * 16 * 9 + 16) + (12 * 16 + 12);
    const Network net = build_network({}, 42);
    EXPECT_EQ(param_count(net), expect);
    EXPECT_EQ(expected_param_count({}), expect);
}

TEST(Build, ParamCountSmallCases) {
    const std::vector<Tensor> one_conv{Tensor({8, 3, 3, 3}), Tensor({8})};
    EXPECT_EQ(param_count(one_conv), 224u);
    EXPECT_EQ(param_count(std::span<const Tensor>{}), 0u);
    NetworkConfig c;
    c.stage_widths = {4, 8};
    EXPECT_EQ(param_count(build_network(c, 1)), expected_param_count(c));
}

TEST(Build, DeterministicPerSeed) {
    const Network a = build_network({}, 7), b = build_network({}, 7), c = build_network({}, 8);
    ASSERT_EQ(a.params().size(), b.params().size());
    for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i], b.params()[i]);
    EXPECT_NE(a.params()[0], c.params()[0]);
}

TEST(Build, HeInitStatistics) {
    const Network net = build_network({}, 3);
    // Third encoder conv: fan-in 32 * 9.
    const Tensor& w = net.params()[4];
    double s2 = 0;
    for (float v : w.data()) s2 += double(v) * v;
    EXPECT_NEAR(s2 / w.size(), 2.0 / (32 * 9), 0.1 * 2.0 / (32 * 9));
    for (std::size_t i = 1; i < net.params().size(); i += 2) {
        for (float v : net.params()[i].data()) EXPECT_EQ(v, 0.0f);
    }
}

TEST(Build, ZeroHeadOption) {
    NetworkConfig c;
    c.head_init = HeadInit::zero;
    const Network net = build_network(c, 3);
    const Tensor& head = net.params()[net.params().size() - 2];
    for (float v : head.data()) EXPECT_EQ(v, 0.0f);
    EXPECT_NE(net.params()[0], Tensor::zeros_like(net.params()[0]));
}

TEST(Build, InvalidConfig) {
    NetworkConfig c;
    c.num_classes = 1;
    EXPECT_THROW(build_network(c, 1), ParameterError);
    c = {};
    c.stage_widths.clear();
    EXPECT_THROW(build_network(c, 1), ParameterError);
    c = {};
    c.kernel = 4;
    EXPECT_THROW(build_network(c, 1), ParameterError);
}

TEST(Forward, ShapeContract) {
    const Network net = build_network({}, 1);
    EXPECT_EQ(net.forward(Tensor({1, 3, 32, 32})).shape(), (Shape{1, 12, 32, 32}));
    EXPECT_EQ(net.forward(Tensor({2, 3, 16, 40})).shape(), (Shape{2, 12, 16, 40}));
}

TEST(Forward, GeometryErrorNamesMultiple) {
    const Network net = build_network({}, 1);
    try {
        net.forward(Tensor({1, 3, 30, 32}));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_NE(std::string(e.what()).find("multiple of 8"), std::string::npos) << e.what();
    }
    EXPECT_THROW(net.forward(Tensor({1, 4, 32, 32})), DimensionError);
}

TEST(Forward, ZeroNetworkIsUniform) {
    const Network net = Network::zeros({});
    const Tensor logits = net.forward(Tensor({1, 3, 16, 16}, 0.7f));
    for (float v : logits.data()) EXPECT_EQ(v, 0.0f);
    const Tensor p = softmax(logits, 1);
    for (float v : p.data()) EXPECT_NEAR(v, 1.0f / 12, 1e-7);
    Rng rng(1);
    EXPECT_EQ(predict(net, random_image(16, 16, rng)), LabelMap(16, 16, 0));
}

TEST(Forward, FirstLayerLinearity) {
    const Network net = build_network({}, 5);
    Rng rng(2);
    Tensor x = oracle::random_tensor({1, 3, 16, 16}, rng, 0, 1);
    Tensor x2 = x;
    for (auto& v : x2.data()) v *= 2;
    Network::Trace a, b;
    net.forward(x, &a);
    net.forward(x2, &b);
    // layer_inputs[1] is the first conv's output (input of the first leaky ReLU).
    const Tensor& ya = a.layer_inputs[1];
    const Tensor& yb = b.layer_inputs[1];
    for (std::size_t i = 0; i < ya.size(); ++i) EXPECT_NEAR(yb[i], 2 * ya[i], 1e-5f * (1 + std::abs(ya[i])));
}

// Composition of oracle ops following the documented layer list.
TEST(Forward, MatchesOracleComposition) {
    NetworkConfig c;
    c.stage_widths = {4, 6};
    Network net = build_network(c, 9);
    Rng rng(3);
    for (std::size_t i = 1; i < net.params().size(); i += 2) {
        for (auto& v : net.params()[i].data()) v = static_cast<float>(rng.uniform(-0.2, 0.2));
    }
    const Tensor x = oracle::random_tensor({2, 3, 8, 12}, rng, 0, 1);
    auto p = [&](std::size_t i) -> const Tensor& { return net.params()[i]; };
    const float a = c.leaky_alpha;
    Tensor h = oracle_leaky(oracle::conv2d(x, p(0), p(1), 2, 1, 0), a);
    h = oracle_leaky(oracle::conv2d(h, p(2), p(3), 2, 1, 0), a);
    h = oracle_leaky(oracle::conv2d(oracle_upsample2(h), p(4), p(5), 1, 1, 1), a);
    h = oracle_leaky(oracle::conv2d(oracle_upsample2(h), p(6), p(7), 1, 1, 1), a);
    const Tensor expect = oracle::conv2d(h, p(8), p(9), 1, 0, 0);
    const Tensor got = net.forward(x);
    ASSERT_EQ(got.shape(), expect.shape());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expect[i], 1e-4f * (1 + std::abs(expect[i])));
}

TEST(Predict, EqualsArgmaxOfLogits) {
    Rng rng(4);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Network net = build_network({}, seed);
        const Image img = random_image(16, 16, rng);
        const Image* ptr = &img;
        const Tensor logits = net.forward(images_to_tensor(std::span(&ptr, 1), Normalization::unit_range));
        const LabelMap got = predict(net, img);
        for (std::size_t y = 0; y < 16; ++y) {
            for (std::size_t x = 0; x < 16; ++x) {
                std::size_t best = 0;
                for (std::size_t k = 1; k < 12; ++k) {
                    if (logits.at(0, k, y, x) > logits.at(0, best, y, x)) best = k;
                }
                EXPECT_EQ(got.at(y, x), best);
            }
        }
    }
}

TEST(Predict, PerPixelShiftInvariance) {
    Rng rng(5);
    Tensor logits = oracle::random_tensor({1, 12, 4, 4}, rng, -3, 3);
    Tensor shifted = logits;
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
            const float s = static_cast<float>(rng.uniform(-5, 5));
            for (std::size_t k = 0; k < 12; ++k) shifted.at(0, k, y, x) += s;
        }
    EXPECT_EQ(argmax_labels(logits), argmax_labels(shifted));
}

TEST(Predict, TieGoesToLowestClass) {
    Tensor logits({1, 3, 1, 2});
    logits.at(0, 1, 0, 0) = 2;
    logits.at(0, 2, 0, 0) = 2;
    EXPECT_EQ(argmax_labels(logits)[0].labels, (std::vector<std::uint8_t>{1, 0}));
}

TEST(Normalization, UnitRange) {
    Image img(1, 1, {0, 255, 51});
    const Image* p = &img;
    const Tensor t = images_to_tensor(std::span(&p, 1), Normalization::unit_range);
    EXPECT_EQ(t.shape(), (Shape{1, 3, 1, 1}));
    EXPECT_EQ(t[0], 0.0f);
    EXPECT_EQ(t[1], 1.0f);
    EXPECT_FLOAT_EQ(t[2], 0.2f);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
    testutil::TempDir dir("ckpt");
    NetworkConfig c;
    c.stage_widths = {8, 16};
    c.num_classes = 5;
    c.leaky_alpha = 0.05f;
    const Network net = build_network(c, 11);
    save_checkpoint(net, dir / "a.segm");
    const Network back = load_checkpoint(dir / "a.segm");
    EXPECT_EQ(back.config(), net.config());
    for (std::size_t i = 0; i < net.params().size(); ++i) EXPECT_EQ(back.params()[i], net.params()[i]);
    save_checkpoint(back, dir / "b.segm");
    EXPECT_EQ(read_file(dir / "a.segm"), read_file(dir / "b.segm"));
}

TEST(Checkpoint, HeaderLayout) {
    const auto bytes = encode_checkpoint(build_network({}, 1));
    ASSERT_GE(bytes.size(), 8u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SEGM");
    EXPECT_EQ(bytes[4], kCheckpointVersion);
    EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
}

TEST(Checkpoint, LoadedPredictionsEqual) {
    const Network net = build_network({}, 12);
    const Network back = decode_checkpoint(encode_checkpoint(net));
    Rng rng(6);
    for (int i = 0; i < 5; ++i) {
        const Image img = random_image(32, 24, rng);
        EXPECT_EQ(predict(back, img), predict(net, img));
    }
}

TEST(Checkpoint, Corruption) {
    auto bytes = encode_checkpoint(build_network({}, 1));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
    bad = bytes;
    bad[4] = 99;
    EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
    bad = bytes;
    bad.resize(bytes.size() - 3);
    EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
    bad = bytes;
    bad.push_back(0);
    EXPECT_THROW(decode_checkpoint(bad), CheckpointError);
    EXPECT_THROW(decode_checkpoint({}), CheckpointError);
}
