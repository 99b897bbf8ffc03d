#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wfiso/errors.hpp"

namespace wfiso {

struct ScanResult {
    std::vector<uint32_t> offsets;
    uint32_t total = 0;
};

/// offsets[i] = sum of input[0..i). Throws PipelineError if the sum overflows 32 bits.
ScanResult exclusive_scan(std::span<const uint32_t> input);
ScanResult exclusive_scan(std::span<const uint8_t> mask);

/// Order-preserving stream compaction: values[i] for every mask[i] != 0.
template <class T>
std::vector<T> compact(std::span<const T> values, std::span<const uint8_t> mask) {
    if (values.size() != mask.size()) throw PipelineError("compact: length mismatch");
    std::vector<T> out;
    out.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        if (mask[i]) out.push_back(values[i]);
    }
    return out;
}

struct SortedPairs {
    std::vector<uint32_t> keys;
    std::vector<uint32_t> values;
};

/// Stable sort by key (LSD radix): equal keys keep their input order.
SortedPairs sort_by_key(std::span<const uint32_t> keys, std::span<const uint32_t> values);

}  // namespace wfiso
