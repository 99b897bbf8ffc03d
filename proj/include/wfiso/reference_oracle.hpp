#pragma once

#include "wfiso/block_codec.hpp"
#include "wfiso/grid_traversal.hpp"
#include "wfiso/volume.hpp"
#include "wfiso/wavefront_engine.hpp"

namespace wfiso {

/// Decompresses every block into a dense volume of the original dims.
Volume decode_full(const CompressedVolume& cv);

struct ReferenceOptions {
    Vec3f base_color{0.85f, 0.85f, 0.85f};
    std::array<uint8_t, 4> background{0, 0, 0, 255};
};

/// Brute-force single-pass raycaster: walks every dual cell of the volume along
/// each pixel ray and keeps the first hit. No grids, cache or passes.
Framebuffer reference_render(const Volume& v, const Camera& cam, float iso, int width, int height,
                             const ReferenceOptions& opts = {});

struct ImageDiff {
    uint64_t hit_mask_mismatches = 0;
    double max_depth_delta = 0.0;  // over pixels hit in both images
    int max_rgb_delta = 0;
};

ImageDiff compare_images(const Framebuffer& a, const Framebuffer& b);

}  // namespace wfiso
