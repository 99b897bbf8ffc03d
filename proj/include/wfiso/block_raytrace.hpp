#pragma once

#include <array>
#include <optional>
#include <span>

#include "wfiso/block_cache.hpp"
#include "wfiso/block_codec.hpp"
#include "wfiso/grid_traversal.hpp"

namespace wfiso {

/// 5^3 vertices of one block's dual grid: the block's own 4^3 voxels plus the
/// first voxel plane of its +x/+y/+z face, edge and corner neighbors.
struct DualGrid {
    static constexpr int kEdge = 5;
    std::array<float, kEdge * kEdge * kEdge> values{};
    Int3 cells_per_axis{};  // clamp(dims - 1 - 4*B, 0, 4) per axis
    Int3 block_origin{};    // voxel coordinates of vertex (0,0,0)

    float at(int i, int j, int k) const { return values[size_t(i + kEdge * (j + kEdge * k))]; }
};

struct RGBZ {
    Vec3f rgb{};
    float z = kInf;  // ray t of the hit, +inf when empty
};

/// Builds the dual grid of a block from cache-resident data. Throws
/// PipelineError if the block or a needed neighbor is not resident.
DualGrid assemble_dual_grid(const BlockCache& cache, const CompressedVolume& cv, uint32_t block_id);

/// Cubic ray/trilinear-cell intersection. corners are x-fastest
/// (c000, c100, c010, c110, c001, ...), origin is the ray origin in the cell's
/// local frame (cell lower corner at 0). Splits [t0,t1] at the extrema of the
/// cubic, then refines the first sign-changing span with Illinois-style
/// repeated linear interpolation. Returns the smallest root.
std::optional<float> intersect_cell(std::span<const float, 8> corners, Vec3f origin, Vec3f dir, float t0,
                                    float t1, float iso);

/// Analytic gradient of the trilinear interpolant at local point p in [0,1]^3.
Vec3f trilinear_gradient(std::span<const float, 8> corners, Vec3f p);

/// Headlight Lambertian with a 0.2 ambient floor.
Vec3f shade(Vec3f grad, Vec3f ray_dir, Vec3f base_color);

/// Parametric overlap of a ray with dual cell [c, c+1]^3, clamped to the ray's
/// volume segment. Both renderers use this so their cell spans agree bit for bit.
Interval dual_cell_interval(const Ray& ray, Int3 cell);

/// Amanatides-Woo walk over unit dual cells of the region
/// [lo, lo + cells]. visit(cell, interval) returns true to stop.
template <class Visit>
void walk_dual_cells(const Ray& ray, Int3 lo, Int3 cells, Visit&& visit);

/// Tests one dual cell: in-cell min/max pruning, intersection and shading.
std::optional<RGBZ> hit_dual_cell(std::span<const float, 8> corners, Int3 cell, const Ray& ray,
                                  const Interval& span, float iso, Vec3f base_color);

struct BlockRays {
    std::span<const uint32_t> ray_ids;     // pixel index per ray-block entry
    std::span<const uint32_t> spec_slots;  // RGBZ slot per ray-block entry
};

/// Intersects each assigned ray with the block's dual grid and writes the first
/// hit to rgbz[spec_slot]. Misses leave the slot untouched.
void raytrace_block(const DualGrid& dg, const RaySoA& rays, BlockRays entries, float iso, Vec3f base_color,
                    std::span<RGBZ> rgbz);

// ---------------------------------------------------------------------------

template <class Visit>
void walk_dual_cells(const Ray& ray, Int3 lo, Int3 cells, Visit&& visit) {
    if (cells.x <= 0 || cells.y <= 0 || cells.z <= 0) return;
    const Box box{{float(lo.x), float(lo.y), float(lo.z)},
                  {float(lo.x + cells.x), float(lo.y + cells.y), float(lo.z + cells.z)}};
    Interval seg = intersect_box(ray.origin, ray.dir, box);
    seg.t0 = std::max(seg.t0, ray.t_enter);
    seg.t1 = std::min(seg.t1, ray.t_exit);
    if (seg.empty()) return;

    const Vec3f p = ray.origin + ray.dir * (seg.t0 + kEntryEpsilon);
    Int3 cell;
    std::array<float, 3> t_max{}, t_delta{};
    std::array<int, 3> step{};
    for (int a = 0; a < 3; ++a) {
        cell[a] = std::clamp(int32_t(std::floor(p[a])), lo[a], lo[a] + cells[a] - 1);
        const float d = ray.dir[a];
        if (d > 0.f) {
            step[a] = 1;
            t_max[a] = (float(cell[a] + 1) - ray.origin[a]) / d;
            t_delta[a] = 1.f / d;
        } else if (d < 0.f) {
            step[a] = -1;
            t_max[a] = (float(cell[a]) - ray.origin[a]) / d;
            t_delta[a] = -1.f / d;
        } else {
            t_max[a] = kInf;
            t_delta[a] = kInf;
        }
    }
    for (;;) {
        const Interval span = dual_cell_interval(ray, cell);
        if (!span.empty() && visit(cell, span)) return;
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        if (t_max[axis] >= seg.t1 || step[axis] == 0) return;
        cell[axis] += step[axis];
        if (cell[axis] < lo[axis] || cell[axis] >= lo[axis] + cells[axis]) return;
        t_max[axis] += t_delta[axis];
    }
}

}  // namespace wfiso
