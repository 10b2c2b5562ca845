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

#include <bit>
#include <cstring>
#include <string>

#include "segpipe/errors.hpp"
#include "segpipe/network.hpp"

namespace segpipe {

namespace {

constexpr char kMagic[4] = {'S', 'E', 'G', 'M'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    void bytes(void* dst, std::size_t n, const char* what) {
        need(n, what);
        std::memcpy(dst, in_.data() + pos_, n);
        pos_ += n;
    }
    bool done() const { return pos_ == in_.size(); }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n, const char* what) {
        if (in_.size() - pos_ < n) {
            throw CheckpointError("checkpoint truncated while reading " + std::string(what) + " at byte " +
                                  std::to_string(pos_));
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
    const NetworkConfig& c = net.config();
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(c.in_channels));
    w.u32(static_cast<std::uint32_t>(c.num_classes));
    w.u32(static_cast<std::uint32_t>(c.kernel));
    w.u32(static_cast<std::uint32_t>(c.stage_widths.size()));
    for (auto width : c.stage_widths) w.u32(static_cast<std::uint32_t>(width));
    w.f32(c.leaky_alpha);
    w.u32(static_cast<std::uint32_t>(c.normalization));
    w.u32(static_cast<std::uint32_t>(net.params().size()));
    for (const auto& t : net.params()) {
        w.u32(static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
        for (float v : t.data()) w.f32(v);
    }
    return w.take();
}

Network decode_checkpoint(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    char magic[4];
    r.bytes(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError("not a checkpoint: bad magic (expected SEGM)");
    const std::uint32_t version = r.u32("version");
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                              std::to_string(kCheckpointVersion) + ")");
    }

    NetworkConfig c;
    c.in_channels = r.u32("in_channels");
    c.num_classes = r.u32("num_classes");
    c.kernel = r.u32("kernel");
    const std::uint32_t stages = r.u32("stage count");
    if (stages == 0 || stages > 16) throw CheckpointError("checkpoint stage count out of range");
    c.stage_widths.clear();
    for (std::uint32_t i = 0; i < stages; ++i) c.stage_widths.push_back(r.u32("stage width"));
    c.leaky_alpha = r.f32("leaky alpha");
    c.normalization = static_cast<Normalization>(r.u32("normalization"));
    try {
        c.validate();
    } catch (const ParameterError& e) {
        throw CheckpointError(std::string("checkpoint config invalid: ") + e.what());
    }

    Network net = Network::zeros(c);
    const std::uint32_t count = r.u32("tensor count");
    if (count != net.params().size()) {
        throw CheckpointError("checkpoint holds " + std::to_string(count) + " tensors, architecture needs " +
                              std::to_string(net.params().size()));
    }
    for (auto& t : net.params()) {
        const std::uint32_t rank = r.u32("tensor rank");
        if (rank != t.rank()) throw CheckpointError("checkpoint tensor rank mismatch");
        for (std::size_t d = 0; d < rank; ++d) {
            if (r.u32("tensor dim") != t.dim(d)) {
                throw CheckpointError("checkpoint tensor shape does not match architecture " + shape_to_string(t.shape()));
            }
        }
        for (auto& v : t.data()) v = r.f32("tensor payload");
    }
    if (!r.done()) throw CheckpointError("trailing bytes after checkpoint payload at byte " + std::to_string(r.pos()));
    return net;
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
    write_file(path, encode_checkpoint(net));
}

Network load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path));
}

}  // namespace segpipe
