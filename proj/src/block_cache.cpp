#include "wfiso/block_cache.hpp"

#include <algorithm>

#include "wfiso/errors.hpp"
#include "wfiso/parallel_for.hpp"

namespace wfiso {

uint32_t default_cache_capacity(int width, int height) {
    const uint64_t expected_visible = uint64_t(width) * uint64_t(height) / 64;
    return uint32_t(std::max<uint64_t>(1024, 2 * expected_visible));
}

BlockCache::BlockCache(uint32_t block_count, uint32_t capacity_slots) : slot_of_block_(block_count, kFree) {
    grow(capacity_slots);
}

void BlockCache::grow(uint32_t new_capacity) {
    if (new_capacity <= capacity()) return;
    values_.resize(size_t(new_capacity) * kBlockVoxels, 0.f);
    block_of_slot_.resize(new_capacity, kFree);
    last_used_.resize(new_capacity, 0);
}

CacheUpdateStats BlockCache::ensure_resident(std::span<const uint8_t> active, const CompressedVolume& cv) {
    WFISO_ASSERT(active.size() == slot_of_block_.size(), "active mask must cover every block");
    ++current_pass_;

    std::vector<uint32_t> missing;
    uint32_t needed = 0;
    for (uint32_t b = 0; b < active.size(); ++b) {
        if (!active[b]) continue;
        ++needed;
        const uint32_t slot = slot_of_block_[b];
        if (slot == kFree) {
            missing.push_back(b);
        } else {
            last_used_[slot] = current_pass_;
        }
    }
    if (needed > capacity()) grow(uint32_t((3 * uint64_t(needed) + 1) / 2));

    CacheUpdateStats stats;
    if (!missing.empty()) {
        std::vector<uint32_t> free_slots, victims;
        for (uint32_t s = 0; s < capacity(); ++s) {
            if (block_of_slot_[s] == kFree) {
                free_slots.push_back(s);
            } else if (last_used_[s] < current_pass_) {
                victims.push_back(s);
            }
        }
        std::sort(victims.begin(), victims.end(), [&](uint32_t a, uint32_t b) {
            if (last_used_[a] != last_used_[b]) return last_used_[a] < last_used_[b];
            return block_of_slot_[a] < block_of_slot_[b];
        });

        std::vector<uint32_t> assigned(missing.size());
        size_t next_free = 0, next_victim = 0;
        for (size_t i = 0; i < missing.size(); ++i) {
            uint32_t slot;
            if (next_free < free_slots.size()) {
                slot = free_slots[next_free++];
            } else {
                WFISO_ASSERT(next_victim < victims.size(), "cache has no evictable slot");
                slot = victims[next_victim++];
                slot_of_block_[block_of_slot_[slot]] = kFree;
                ++stats.evicted;
            }
            block_of_slot_[slot] = missing[i];
            slot_of_block_[missing[i]] = slot;
            last_used_[slot] = current_pass_;
            assigned[i] = slot;
        }

        parallel_for(missing.size(), [&](size_t i) {
            const BlockData data = cv.decompress_block(missing[i]);
            std::copy(data.begin(), data.end(), values_.begin() + std::ptrdiff_t(size_t(assigned[i]) * kBlockVoxels));
        }, 64);
    }
    stats.new_decompressed = uint32_t(missing.size());
    stats.grown_to = capacity();
    return stats;
}

std::optional<uint32_t> BlockCache::lookup(uint32_t block_id) const {
    if (block_id >= slot_of_block_.size()) return std::nullopt;
    const uint32_t slot = slot_of_block_[block_id];
    if (slot == kFree) return std::nullopt;
    return slot;
}

uint32_t BlockCache::resident_count() const {
    return uint32_t(std::count_if(block_of_slot_.begin(), block_of_slot_.end(), [](uint32_t b) { return b != kFree; }));
}

void BlockCache::corrupt_for_testing() {
    for (uint32_t s = 0; s < capacity(); ++s) {
        if (block_of_slot_[s] == kFree) continue;
        for (int i = 0; i < kBlockVoxels; ++i) values_[size_t(s) * kBlockVoxels + i] = 1e30f;
    }
}

}  // namespace wfiso
