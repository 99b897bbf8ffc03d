#include "wfiso/block_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "wfiso/errors.hpp"
#include "wfiso/parallel_for.hpp"

namespace wfiso {

namespace {

void check_qbits(int qbits) {
    if (qbits < kMinQBits || qbits > kMaxQBits) {
        throw UsageError("qbits must be in [" + std::to_string(kMinQBits) + ", " + std::to_string(kMaxQBits) +
                         "], got " + std::to_string(qbits));
    }
}

class BitWriter {
public:
    explicit BitWriter(std::span<uint8_t> out) : out_(out) { std::fill(out_.begin(), out_.end(), 0); }

    void put(uint32_t value, int bits) {
        for (int b = 0; b < bits; ++b, ++pos_) {
            if ((value >> b) & 1u) out_[pos_ >> 3] |= uint8_t(1u << (pos_ & 7));
        }
    }

private:
    std::span<uint8_t> out_;
    size_t pos_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> in) : in_(in) {}

    uint32_t get(int bits) {
        uint32_t value = 0;
        for (int b = 0; b < bits; ++b, ++pos_) value |= uint32_t((in_[pos_ >> 3] >> (pos_ & 7)) & 1u) << b;
        return value;
    }

private:
    std::span<const uint8_t> in_;
    size_t pos_ = 0;
};

int32_t sign_extend(uint32_t v, int bits) {
    const uint32_t sign = 1u << (bits - 1);
    return int32_t((v ^ sign) - sign);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(uint8_t(v >> (8 * b)));
}

uint32_t get_u32(std::span<const uint8_t> in, size_t offset) {
    return uint32_t(in[offset]) | (uint32_t(in[offset + 1]) << 8) | (uint32_t(in[offset + 2]) << 16) |
           (uint32_t(in[offset + 3]) << 24);
}

}  // namespace

CompressedVolume::CompressedVolume(Int3 dims, int qbits, std::vector<ValueRange> raw_block_ranges,
                                   std::vector<uint8_t> payload)
    : dims_(dims),
      block_dims_{ceil_div(dims.x, kBlockEdge), ceil_div(dims.y, kBlockEdge), ceil_div(dims.z, kBlockEdge)},
      qbits_(qbits),
      stride_(block_stride_for(qbits)),
      raw_ranges_(std::move(raw_block_ranges)),
      payload_(std::move(payload)) {
    check_qbits(qbits);
    if (raw_ranges_.size() != block_count()) throw InputError("block range count does not match dims");
    if (payload_.size() != size_t(block_count()) * stride_) throw InputError("payload size does not match dims");
}

uint32_t CompressedVolume::block_id(int bx, int by, int bz) const {
    if (bx < 0 || by < 0 || bz < 0 || bx >= block_dims_.x || by >= block_dims_.y || bz >= block_dims_.z) {
        throw PipelineError("block coordinates out of range");
    }
    return uint32_t(bx + block_dims_.x * (by + block_dims_.y * bz));
}

Int3 CompressedVolume::block_coords(uint32_t id) const {
    if (id >= block_count()) throw PipelineError("block id out of range");
    const int32_t bx = int32_t(id % uint32_t(block_dims_.x));
    const uint32_t rest = id / uint32_t(block_dims_.x);
    return {bx, int32_t(rest % uint32_t(block_dims_.y)), int32_t(rest / uint32_t(block_dims_.y))};
}

std::span<const uint8_t> CompressedVolume::block_bytes(uint32_t id) const {
    if (id >= block_count()) throw PipelineError("block id out of range");
    return std::span<const uint8_t>(payload_).subspan(size_t(id) * stride_, stride_);
}

int16_t CompressedVolume::block_exponent(uint32_t id) const {
    const auto bytes = block_bytes(id);
    return std::bit_cast<int16_t>(uint16_t(bytes[0] | (bytes[1] << 8)));
}

double CompressedVolume::error_bound(uint32_t id) const {
    const int16_t e = block_exponent(id);
    if (uint16_t(e) == kZeroBlockExponent) return 0.0;
    return std::ldexp(0.5 / quant_scale(qbits_), e);
}

BlockData CompressedVolume::decompress_block(uint32_t id) const { return decode_block(block_bytes(id), qbits_); }

void encode_block(std::span<const float, kBlockVoxels> values, int qbits, std::span<uint8_t> out) {
    check_qbits(qbits);
    BitWriter writer(out);
    float m = 0.f;
    for (float v : values) m = std::max(m, std::fabs(v));
    if (m == 0.f) {
        writer.put(kZeroBlockExponent, 16);
        return;
    }
    int k = 0;
    const double f = std::frexp(double(m), &k);
    const int e = (f == 0.5) ? k - 1 : k;
    writer.put(uint16_t(int16_t(e)), 16);

    const double scale = std::ldexp(double(quant_scale(qbits)), -e);
    const uint32_t mask = (1u << qbits) - 1u;
    for (float v : values) {
        const int32_t q = int32_t(std::round(double(v) * scale));
        writer.put(uint32_t(q) & mask, qbits);
    }
}

BlockData decode_block(std::span<const uint8_t> bytes, int qbits) {
    BlockData out{};
    BitReader reader(bytes);
    const uint16_t raw_e = uint16_t(reader.get(16));
    if (raw_e == kZeroBlockExponent) return out;
    const int e = std::bit_cast<int16_t>(raw_e);
    const double inv_scale = 1.0 / quant_scale(qbits);
    for (auto& v : out) {
        const int32_t q = sign_extend(reader.get(qbits), qbits);
        v = float(std::ldexp(double(q) * inv_scale, e));
    }
    return out;
}

BlockData gather_block(const Volume& volume, Int3 block) {
    BlockData out{};
    const Int3 d = volume.dims();
    int i = 0;
    for (int k = 0; k < kBlockEdge; ++k) {
        const int z = std::min(block.z * kBlockEdge + k, d.z - 1);
        for (int j = 0; j < kBlockEdge; ++j) {
            const int y = std::min(block.y * kBlockEdge + j, d.y - 1);
            for (int l = 0; l < kBlockEdge; ++l, ++i) {
                const int x = std::min(block.x * kBlockEdge + l, d.x - 1);
                out[i] = volume.at(x, y, z);
            }
        }
    }
    return out;
}

CompressedVolume compress_volume(const Volume& volume, int qbits) {
    check_qbits(qbits);
    const Int3 d = volume.dims();
    const Int3 bd{ceil_div(d.x, kBlockEdge), ceil_div(d.y, kBlockEdge), ceil_div(d.z, kBlockEdge)};
    const size_t count = size_t(bd.product());
    const uint32_t stride = block_stride_for(qbits);
    std::vector<uint8_t> payload(count * stride);
    std::vector<ValueRange> ranges(count);

    parallel_for(count, [&](size_t id) {
        const Int3 b{int32_t(id % bd.x), int32_t((id / bd.x) % bd.y), int32_t(id / (size_t(bd.x) * bd.y))};
        const BlockData values = gather_block(volume, b);
        encode_block(values, qbits, std::span<uint8_t>(payload).subspan(id * stride, stride));

        ValueRange r{std::numeric_limits<float>::infinity(), -std::numeric_limits<float>::infinity()};
        for (int z = b.z * kBlockEdge; z < std::min(d.z, (b.z + 1) * kBlockEdge); ++z)
            for (int y = b.y * kBlockEdge; y < std::min(d.y, (b.y + 1) * kBlockEdge); ++y)
                for (int x = b.x * kBlockEdge; x < std::min(d.x, (b.x + 1) * kBlockEdge); ++x) {
                    const float v = volume.at(x, y, z);
                    r.min = std::min(r.min, v);
                    r.max = std::max(r.max, v);
                }
        ranges[id] = r;
    }, 256);
    return CompressedVolume(d, qbits, std::move(ranges), std::move(payload));
}

std::vector<uint8_t> serialize_wcz(const CompressedVolume& cv) {
    std::vector<uint8_t> out;
    out.reserve(kWczHeaderBytes + cv.block_count() * 8 + cv.payload().size());
    for (char c : {'W', 'C', 'Z', '1'}) out.push_back(uint8_t(c));
    put_u32(out, kWczVersion);
    put_u32(out, uint32_t(cv.dims().x));
    put_u32(out, uint32_t(cv.dims().y));
    put_u32(out, uint32_t(cv.dims().z));
    put_u32(out, uint32_t(cv.qbits()));
    put_u32(out, cv.block_stride_bytes());
    for (const auto& r : cv.raw_block_ranges()) {
        put_u32(out, std::bit_cast<uint32_t>(r.min));
        put_u32(out, std::bit_cast<uint32_t>(r.max));
    }
    out.insert(out.end(), cv.payload().begin(), cv.payload().end());
    return out;
}

CompressedVolume deserialize_wcz(std::span<const uint8_t> bytes) {
    if (bytes.size() < kWczHeaderBytes || std::memcmp(bytes.data(), "WCZ1", 4) != 0) {
        throw InputError("not a .wcz container (bad magic)");
    }
    const uint32_t version = get_u32(bytes, 4);
    if (version != kWczVersion) throw InputError("unsupported .wcz version " + std::to_string(version));
    const Int3 dims{int32_t(get_u32(bytes, 8)), int32_t(get_u32(bytes, 12)), int32_t(get_u32(bytes, 16))};
    const int qbits = int(get_u32(bytes, 20));
    const uint32_t stride = get_u32(bytes, 24);
    if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw InputError(".wcz has non-positive dims");
    if (qbits < kMinQBits || qbits > kMaxQBits) throw InputError(".wcz qbits out of range");
    if (stride != block_stride_for(qbits)) throw InputError(".wcz block stride inconsistent with qbits");

    const size_t count = size_t(ceil_div(dims.x, 4)) * size_t(ceil_div(dims.y, 4)) * size_t(ceil_div(dims.z, 4));
    const size_t expected = kWczHeaderBytes + count * 8 + count * stride;
    if (bytes.size() != expected) {
        throw InputError(".wcz size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                         std::to_string(bytes.size()));
    }
    std::vector<ValueRange> ranges(count);
    size_t off = kWczHeaderBytes;
    for (auto& r : ranges) {
        r.min = std::bit_cast<float>(get_u32(bytes, off));
        r.max = std::bit_cast<float>(get_u32(bytes, off + 4));
        off += 8;
    }
    std::vector<uint8_t> payload(bytes.begin() + std::ptrdiff_t(off), bytes.end());
    return CompressedVolume(dims, qbits, std::move(ranges), std::move(payload));
}

void save_wcz(const std::filesystem::path& path, const CompressedVolume& cv) {
    const auto bytes = serialize_wcz(cv);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw InputError("short write to " + path.string());
}

CompressedVolume load_wcz(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_wcz(bytes);
}

}  // namespace wfiso
