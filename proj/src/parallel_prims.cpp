#include "wfiso/parallel_prims.hpp"

#include <array>
#include <limits>

namespace wfiso {

namespace {

template <class T>
ScanResult scan_impl(std::span<const T> input) {
    ScanResult r;
    r.offsets.resize(input.size());
    uint64_t sum = 0;
    for (size_t i = 0; i < input.size(); ++i) {
        r.offsets[i] = uint32_t(sum);
        sum += input[i];
        if (sum > std::numeric_limits<uint32_t>::max()) throw PipelineError("exclusive_scan: 32-bit overflow");
    }
    r.total = uint32_t(sum);
    return r;
}

}  // namespace

ScanResult exclusive_scan(std::span<const uint32_t> input) { return scan_impl(input); }
ScanResult exclusive_scan(std::span<const uint8_t> mask) { return scan_impl(mask); }

SortedPairs sort_by_key(std::span<const uint32_t> keys, std::span<const uint32_t> values) {
    if (keys.size() != values.size()) throw PipelineError("sort_by_key: length mismatch");
    SortedPairs cur{{keys.begin(), keys.end()}, {values.begin(), values.end()}};
    SortedPairs next{std::vector<uint32_t>(keys.size()), std::vector<uint32_t>(keys.size())};

    uint32_t all_bits = 0;
    for (uint32_t k : keys) all_bits |= k;

    for (int shift = 0; shift < 32; shift += 8) {
        if ((all_bits >> shift) == 0) break;
        std::array<uint32_t, 257> count{};
        for (uint32_t k : cur.keys) ++count[((k >> shift) & 0xFF) + 1];
        for (int d = 0; d < 256; ++d) count[d + 1] += count[d];
        for (size_t i = 0; i < cur.keys.size(); ++i) {
            const uint32_t slot = count[(cur.keys[i] >> shift) & 0xFF]++;
            next.keys[slot] = cur.keys[i];
            next.values[slot] = cur.values[i];
        }
        std::swap(cur, next);
    }
    return cur;
}

}  // namespace wfiso
