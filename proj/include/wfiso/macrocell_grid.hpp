#pragma once

#include <vector>

#include "wfiso/block_codec.hpp"
#include "wfiso/volume.hpp"

namespace wfiso {

inline constexpr int kCoarseBlocks = 4;  // fine cells per coarse cell edge (16^3 voxels)

/// Two-level value-range grids for empty-space skipping.
///
/// The fine grid has one cell per 4^3 block, the coarse grid one cell per 4^3
/// blocks. Each range is the union of the cell's own range with its existing
/// +x/+y/+z face, edge and corner neighbors, which covers every dual cell
/// whose lower corner lies in the cell.
struct MacrocellGrids {
    Int3 fine_dims{};
    Int3 coarse_dims{};
    std::vector<ValueRange> fine;
    std::vector<ValueRange> coarse;

    uint32_t fine_id(Int3 c) const { return uint32_t(c.x + fine_dims.x * (c.y + fine_dims.y * c.z)); }
    uint32_t coarse_id(Int3 c) const { return uint32_t(c.x + coarse_dims.x * (c.y + coarse_dims.y * c.z)); }
};

/// Source-data block ranges widened by the block's codec error bound, rounded
/// outward so that every decoded value of the block is bracketed.
std::vector<ValueRange> widened_block_ranges(const CompressedVolume& cv);

MacrocellGrids build_grids(const CompressedVolume& cv);

}  // namespace wfiso
