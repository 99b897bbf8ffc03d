#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "wfiso/macrocell_grid.hpp"
#include "wfiso/vec3.hpp"

namespace wfiso {

inline constexpr uint32_t kNoBlock = std::numeric_limits<uint32_t>::max();
inline constexpr uint32_t kCellDone = 0xFFFFFFFFu;
inline constexpr float kInf = std::numeric_limits<float>::infinity();

/// Offset (in cell sizes) past an entry point used to pick the starting cell.
inline constexpr float kEntryEpsilon = 1e-4f;

/// Pinhole camera. look_dir and up are unit vectors, fov_y in degrees.
struct Camera {
    Vec3f eye;
    Vec3f look_dir{0.f, 0.f, -1.f};
    Vec3f up{0.f, 1.f, 0.f};
    float fov_y = 45.f;

    /// Builds a camera from a look-at target; throws UsageError on a degenerate basis.
    static Camera look_at(Vec3f eye, Vec3f target, Vec3f up, float fov_y);
    void validate() const;
    /// Unit direction through the center of pixel (px, py); row 0 is the top.
    Vec3f pixel_dir(int px, int py, int width, int height) const;
};

struct Ray {
    Vec3f origin;
    Vec3f dir;
    float t_enter = 0.f;  // clamped to >= 0
    float t_exit = 0.f;
};

struct Box {
    Vec3f lo, hi;
};

/// Spatial domain of a volume, [0, dims-1]^3.
Box volume_bounds(Int3 dims);

struct Interval {
    float t0 = kInf, t1 = -kInf;
    bool empty() const { return !(t0 <= t1); }
};

/// Slab test; unclamped parametric overlap of the ray's line with the box.
Interval intersect_box(Vec3f origin, Vec3f dir, const Box& box);

/// Saved Amanatides-Woo iterator: current cell plus per-axis next-crossing t.
struct GridIterState {
    uint32_t cell = kCellDone;
    std::array<float, 3> t_max{kInf, kInf, kInf};

    bool done() const { return cell == kCellDone; }
};

struct GridGeometry {
    Int3 cells;
    float cell_size = 1.f;

    uint32_t id(Int3 c) const { return uint32_t(c.x + cells.x * (c.y + cells.y * c.z)); }
    Int3 coords(uint32_t id) const {
        return {int32_t(id % uint32_t(cells.x)), int32_t((id / uint32_t(cells.x)) % uint32_t(cells.y)),
                int32_t(id / (uint32_t(cells.x) * uint32_t(cells.y)))};
    }
    bool inside(Int3 c) const {
        return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < cells.x && c.y < cells.y && c.z < cells.z;
    }
};

GridGeometry fine_geometry(const MacrocellGrids& grids);
GridGeometry coarse_geometry(const MacrocellGrids& grids);

/// Iterator positioned in `cell` with crossing parameters for the given ray.
GridIterState dda_init_in_cell(const GridGeometry& geom, const Ray& ray, Int3 cell);
/// Iterator positioned in the (clamped) cell containing ray(t).
GridIterState dda_init_at(const GridGeometry& geom, const Ray& ray, float t);

/// Axis of the nearest crossing; ties go to the lowest axis index.
int dda_next_axis(const GridIterState& s);
/// One Amanatides-Woo step; the result is done() when it leaves the grid.
GridIterState dda_step(const GridIterState& s, const Ray& ray, const GridGeometry& geom);

enum RayFlag : uint8_t {
    kRayActive = 1,
    kRayExited = 2,  // iterator exhausted, no more candidate blocks
    kRayHit = 4,
};

/// Image-sized per-ray state plus the block-ID / ray-ID slot buffers.
struct RaySoA {
    int width = 0, height = 0;
    std::vector<Vec3f> origin, dir;
    std::vector<float> t_enter, t_exit;
    std::vector<uint8_t> flags;
    std::vector<GridIterState> coarse_iter, fine_iter;
    std::vector<uint32_t> r_bid, r_id;

    size_t size() const { return flags.size(); }
    Ray ray(size_t i) const { return {origin[i], dir[i], t_enter[i], t_exit[i]}; }
    bool active(size_t i) const { return flags[i] & kRayActive; }
    size_t count_active() const;
};

/// Generates one pinhole ray per pixel, clips it to the volume and places the
/// iterators at the entry point. Rays that miss the volume start terminated.
RaySoA init_rays(const Camera& cam, int width, int height, Int3 dims, const MacrocellGrids& grids);

struct TraversalResult {
    uint32_t emitted = 0;
    bool exhausted = false;
};

/// Resumes one ray's two-level traversal and writes up to out.size() block IDs
/// whose fine range contains iso. The iterators are left just past the last
/// emitted block.
TraversalResult traverse_ray(GridIterState& coarse, GridIterState& fine, const Ray& ray,
                             const MacrocellGrids& grids, float iso, std::span<uint32_t> out);

/// Runs traverse_ray for every active ray, writing its slots at
/// o_act[ray] * n_spec. Unfilled slots hold kNoBlock; exhausted rays get kRayExited.
void traverse_to_next_blocks(RaySoA& rays, const MacrocellGrids& grids, float iso, uint32_t n_spec,
                             std::span<const uint32_t> o_act);

}  // namespace wfiso
