#include "wfiso/macrocell_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wfiso/parallel_for.hpp"

namespace wfiso {

namespace {

float round_down(double v) {
    float f = float(v);
    if (double(f) > v) f = std::nextafter(f, -std::numeric_limits<float>::infinity());
    return f;
}

float round_up(double v) {
    float f = float(v);
    if (double(f) < v) f = std::nextafter(f, std::numeric_limits<float>::infinity());
    return f;
}

constexpr ValueRange kEmptyRange{std::numeric_limits<float>::infinity(), -std::numeric_limits<float>::infinity()};

void merge(ValueRange& acc, const ValueRange& r) {
    acc.min = std::min(acc.min, r.min);
    acc.max = std::max(acc.max, r.max);
}

/// Unions each cell with its up-to-7 existing positive-octant neighbors.
std::vector<ValueRange> expand_positive_octant(const std::vector<ValueRange>& raw, Int3 dims) {
    std::vector<ValueRange> out(raw.size());
    parallel_for(raw.size(), [&](size_t id) {
        const int x = int(id % dims.x), y = int((id / dims.x) % dims.y), z = int(id / (size_t(dims.x) * dims.y));
        ValueRange acc = kEmptyRange;
        for (int dz = 0; dz <= 1; ++dz)
            for (int dy = 0; dy <= 1; ++dy)
                for (int dx = 0; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy, nz = z + dz;
                    if (nx >= dims.x || ny >= dims.y || nz >= dims.z) continue;
                    merge(acc, raw[size_t(nx) + size_t(dims.x) * (size_t(ny) + size_t(dims.y) * nz)]);
                }
        out[id] = acc;
    });
    return out;
}

}  // namespace

std::vector<ValueRange> widened_block_ranges(const CompressedVolume& cv) {
    std::vector<ValueRange> out(cv.block_count());
    const auto& raw = cv.raw_block_ranges();
    for (uint32_t b = 0; b < cv.block_count(); ++b) {
        const int16_t e = cv.block_exponent(b);
        double eps = 0.0;
        if (uint16_t(e) != kZeroBlockExponent) {
            // quantization bound plus one float ulp at the block's scale for the decoder's final rounding
            eps = cv.error_bound(b) + std::ldexp(1.0, e - 24);
        }
        out[b] = {round_down(double(raw[b].min) - eps), round_up(double(raw[b].max) + eps)};
    }
    return out;
}

MacrocellGrids build_grids(const CompressedVolume& cv) {
    MacrocellGrids g;
    g.fine_dims = cv.block_dims();
    g.coarse_dims = {ceil_div(g.fine_dims.x, kCoarseBlocks), ceil_div(g.fine_dims.y, kCoarseBlocks),
                     ceil_div(g.fine_dims.z, kCoarseBlocks)};

    const auto widened = widened_block_ranges(cv);
    g.fine = expand_positive_octant(widened, g.fine_dims);

    std::vector<ValueRange> coarse_raw(size_t(g.coarse_dims.product()), kEmptyRange);
    for (uint32_t b = 0; b < cv.block_count(); ++b) {
        const Int3 c = cv.block_coords(b);
        merge(coarse_raw[g.coarse_id({c.x / kCoarseBlocks, c.y / kCoarseBlocks, c.z / kCoarseBlocks})], widened[b]);
    }
    g.coarse = expand_positive_octant(coarse_raw, g.coarse_dims);
    return g;
}

}  // namespace wfiso
