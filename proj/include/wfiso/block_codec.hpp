#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wfiso/vec3.hpp"
#include "wfiso/volume.hpp"

namespace wfiso {

inline constexpr int kBlockEdge = 4;
inline constexpr int kBlockVoxels = 64;
inline constexpr int kMinQBits = 4;
inline constexpr int kMaxQBits = 26;
inline constexpr uint16_t kZeroBlockExponent = 0x8000;

/// One decoded 4^3 block, x-fastest.
using BlockData = std::array<float, kBlockVoxels>;

/// Bytes per compressed block: a 16-bit exponent plus 64 qbits-wide integers,
/// rounded up to whole 32-bit words.
constexpr uint32_t block_stride_for(int qbits) {
    return uint32_t((16 + 64 * qbits + 31) / 32) * 4;
}

/// Largest quantized magnitude, 2^(qbits-1) - 1.
constexpr int32_t quant_scale(int qbits) { return (int32_t(1) << (qbits - 1)) - 1; }

/// Fixed-rate block-floating-point compressed volume.
///
/// Every 4^3 block shares one power-of-two exponent e (smallest e with
/// max|v| <= 2^e) and stores each value as a signed integer
/// q = round(v * 2^-e * S), S = 2^(qbits-1) - 1. Blocks are the same size, so
/// block b lives at byte offset b * block_stride_bytes().
class CompressedVolume {
public:
    CompressedVolume() = default;
    CompressedVolume(Int3 dims, int qbits, std::vector<ValueRange> raw_block_ranges,
                     std::vector<uint8_t> payload);

    Int3 dims() const { return dims_; }
    Int3 block_dims() const { return block_dims_; }
    int qbits() const { return qbits_; }
    uint32_t block_stride_bytes() const { return stride_; }
    uint32_t block_count() const { return uint32_t(block_dims_.product()); }
    const std::vector<uint8_t>& payload() const { return payload_; }
    const std::vector<ValueRange>& raw_block_ranges() const { return raw_ranges_; }

    uint32_t block_id(int bx, int by, int bz) const;
    Int3 block_coords(uint32_t id) const;

    std::span<const uint8_t> block_bytes(uint32_t id) const;
    /// Shared exponent of a block, or kZeroBlockExponent reinterpreted as int16.
    int16_t block_exponent(uint32_t id) const;
    /// Worst-case reconstruction error 2^e / (2S) of a block; 0 for zero blocks.
    double error_bound(uint32_t id) const;

    BlockData decompress_block(uint32_t id) const;

private:
    Int3 dims_{};
    Int3 block_dims_{};
    int qbits_ = 0;
    uint32_t stride_ = 0;
    std::vector<ValueRange> raw_ranges_;
    std::vector<uint8_t> payload_;
};

CompressedVolume compress_volume(const Volume& volume, int qbits);

/// Encodes one block of 64 values into `out` (block_stride_for(qbits) bytes).
void encode_block(std::span<const float, kBlockVoxels> values, int qbits, std::span<uint8_t> out);
BlockData decode_block(std::span<const uint8_t> bytes, int qbits);

/// Gathers the 4^3 voxels of block (bx,by,bz), replicating edge voxels where the
/// block extends past the volume.
BlockData gather_block(const Volume& volume, Int3 block);

// .wcz container: "WCZ1", u32 version, u32 dims[3], u32 qbits,
// u32 block_stride_bytes, f32 (min,max) per block, payload. Little-endian.
inline constexpr uint32_t kWczVersion = 1;
inline constexpr size_t kWczHeaderBytes = 4 + 4 + 12 + 4 + 4;

std::vector<uint8_t> serialize_wcz(const CompressedVolume& cv);
CompressedVolume deserialize_wcz(std::span<const uint8_t> bytes);
void save_wcz(const std::filesystem::path& path, const CompressedVolume& cv);
CompressedVolume load_wcz(const std::filesystem::path& path);

}  // namespace wfiso
