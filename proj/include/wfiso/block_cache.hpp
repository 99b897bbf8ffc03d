#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wfiso/block_codec.hpp"

namespace wfiso {

struct CacheUpdateStats {
    uint32_t new_decompressed = 0;
    uint32_t evicted = 0;
    uint32_t grown_to = 0;  // capacity in slots after the update
};

/// Initial slot count for a w x h render: max(1024, 2 * w*h/64).
uint32_t default_cache_capacity(int width, int height);

/// Slot-addressed LRU cache of decoded blocks. Recency is tracked per pass:
/// each ensure_resident call is one pass.
class BlockCache {
public:
    BlockCache(uint32_t block_count, uint32_t capacity_slots);

    /// Makes every block with active[b] != 0 resident. Uncached blocks take free
    /// slots first, then evict the inactive resident block with the oldest pass
    /// stamp (ties: smaller block ID). Grows to ceil(1.5 * needed) when the
    /// active set exceeds capacity. Never shrinks.
    CacheUpdateStats ensure_resident(std::span<const uint8_t> active, const CompressedVolume& cv);

    /// Slot holding the block, without touching recency.
    std::optional<uint32_t> lookup(uint32_t block_id) const;

    std::span<const float, kBlockVoxels> slot_values(uint32_t slot) const {
        return std::span<const float, kBlockVoxels>(values_.data() + size_t(slot) * kBlockVoxels, kBlockVoxels);
    }

    uint32_t capacity() const { return uint32_t(block_of_slot_.size()); }
    uint64_t current_pass() const { return current_pass_; }
    uint32_t block_of_slot(uint32_t slot) const { return block_of_slot_[slot]; }
    uint64_t last_used_pass(uint32_t slot) const { return last_used_[slot]; }
    uint32_t resident_count() const;

    /// Test hook: overwrites every resident slot with values far outside any
    /// data range, so renders from the cache disagree with the decoded volume.
    void corrupt_for_testing();

private:
    static constexpr uint32_t kFree = 0xFFFFFFFFu;

    void grow(uint32_t new_capacity);

    std::vector<float> values_;
    std::vector<uint32_t> slot_of_block_;
    std::vector<uint32_t> block_of_slot_;
    std::vector<uint64_t> last_used_;
    uint64_t current_pass_ = 0;
};

}  // namespace wfiso
