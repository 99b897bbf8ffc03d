#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wfiso/block_cache.hpp"
#include "wfiso/block_codec.hpp"
#include "wfiso/block_raytrace.hpp"
#include "wfiso/grid_traversal.hpp"
#include "wfiso/macrocell_grid.hpp"

namespace wfiso {

inline constexpr uint32_t kDefaultMaxSpec = 64;

struct Framebuffer {
    int width = 0, height = 0;
    std::vector<uint8_t> rgba;  // 4 bytes per pixel, row 0 at the top
    std::vector<float> depth;   // ray t of the hit, +inf for background
    double completeness = 0.0;  // fraction of terminated rays

    Framebuffer() = default;
    Framebuffer(int w, int h, std::array<uint8_t, 4> background);
    bool hit(size_t pixel) const { return depth[pixel] != kInf; }
};

struct PassStats {
    uint32_t pass_index = 0;
    uint32_t n_active_before = 0;
    uint32_t n_spec = 1;
    uint32_t visible_blocks = 0;
    uint32_t active_blocks = 0;
    uint32_t new_decompressed = 0;
    uint32_t cache_slots = 0;
    double utilization = 0.0;  // valid R_BID entries / (w*h)
    double completeness = 0.0;
    double duration = 0.0;  // seconds
};

/// N_Spec = min(max_spec, max(1, floor(w*h / n_act))).
uint32_t compute_n_spec(uint32_t n_act, int width, int height, uint32_t max_spec = kDefaultMaxSpec);

struct BlockMasks {
    std::vector<uint8_t> visible;  // M_BVis
    std::vector<uint8_t> active;   // M_BAct: visible blocks plus their +x/y/z neighbors
};

BlockMasks mark_blocks(std::span<const uint32_t> r_bid, Int3 block_dims);

/// Raytracing inputs for one pass, grouped by visible block.
struct RtInputs {
    std::vector<uint32_t> i_bvis;       // visible block IDs, ascending
    std::vector<uint32_t> block_index;  // exclusive scan of M_BVis (blockID -> compact index)
    std::vector<uint32_t> n_brays;      // ray-block entries per visible block
    std::vector<uint32_t> o_brays;      // exclusive scan of n_brays
    std::vector<uint32_t> i_ract;       // ray IDs sorted by block (stable)
    std::vector<uint32_t> o_spec;       // RGBZ slot per entry of i_ract
    std::vector<uint32_t> spec_index;   // exclusive scan of M_RAct, one per R_BID slot
    uint32_t valid_entries = 0;
};

RtInputs build_rt_inputs(std::span<const uint32_t> r_bid, std::span<const uint32_t> r_id,
                         std::span<const uint8_t> visible_mask);

struct CompositeStyle {
    std::array<uint8_t, 4> background{0, 0, 0, 255};
};

/// Picks each active ray's closest speculated hit, writes it and terminates the
/// ray. Exhausted rays without a hit become background. Returns rays terminated.
uint32_t composite(std::span<const RGBZ> rgbz, RaySoA& rays, uint32_t n_spec, std::span<const uint32_t> o_act,
                   std::span<const uint32_t> spec_index, Framebuffer& fb, const CompositeStyle& style = {});

struct RenderOptions {
    int width = 128;
    int height = 128;
    bool speculation = true;
    uint32_t max_spec = kDefaultMaxSpec;
    Vec3f base_color{0.85f, 0.85f, 0.85f};
    std::array<uint8_t, 4> background{0, 0, 0, 255};
    uint32_t initial_cache_slots = 0;  // 0 selects default_cache_capacity
    bool keep_snapshots = false;
    /// Called after every pass with a snapshot; returning false cancels the
    /// render at this pass boundary.
    std::function<bool(const Framebuffer&, const PassStats&)> on_pass;
    bool corrupt_cache_for_testing = false;
};

struct RenderResult {
    Framebuffer image;
    std::vector<PassStats> passes;
    std::vector<Framebuffer> snapshots;
    bool cancelled = false;
};

/// Progressive wavefront render: repeats traverse, mark, cache update, input
/// construction, block raytracing and compositing until every ray terminated.
RenderResult render(const CompressedVolume& cv, const MacrocellGrids& grids, const Camera& cam, float iso,
                    const RenderOptions& opts = {});

/// Float color in [0,1] to an 8-bit channel.
uint8_t to_u8(float c);

}  // namespace wfiso
