#include "wfiso/grid_traversal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wfiso/errors.hpp"
#include "wfiso/parallel_for.hpp"

namespace wfiso {

Camera Camera::look_at(Vec3f eye, Vec3f target, Vec3f up, float fov_y) {
    const Vec3f forward = target - eye;
    if (length(forward) == 0.f) throw UsageError("camera eye and look-at target coincide");
    Camera cam{eye, normalize(forward), normalize(up), fov_y};
    cam.validate();
    return cam;
}

void Camera::validate() const {
    if (std::fabs(length(look_dir) - 1.f) > 1e-6f) throw UsageError("camera look direction must be unit length");
    if (length(up) == 0.f) throw UsageError("camera up vector is zero");
    if (length(cross(look_dir, normalize(up))) < 1e-6f) throw UsageError("camera up is parallel to look direction");
    if (!(fov_y > 0.f && fov_y < 180.f)) throw UsageError("camera fov must be in (0, 180) degrees");
}

Vec3f Camera::pixel_dir(int px, int py, int width, int height) const {
    const Vec3f right = normalize(cross(look_dir, up));
    const Vec3f true_up = cross(right, look_dir);
    const float tan_half = std::tan(fov_y * float(std::numbers::pi) / 360.f);
    const float aspect = float(width) / float(height);
    const float sx = ((float(px) + 0.5f) / float(width) * 2.f - 1.f) * tan_half * aspect;
    const float sy = (1.f - (float(py) + 0.5f) / float(height) * 2.f) * tan_half;
    return normalize(look_dir + right * sx + true_up * sy);
}

Box volume_bounds(Int3 dims) {
    return {{0.f, 0.f, 0.f}, {float(dims.x - 1), float(dims.y - 1), float(dims.z - 1)}};
}

Interval intersect_box(Vec3f origin, Vec3f dir, const Box& box) {
    Interval r{-kInf, kInf};
    for (int a = 0; a < 3; ++a) {
        if (dir[a] == 0.f) {
            if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return {};
            continue;
        }
        float ta = (box.lo[a] - origin[a]) / dir[a];
        float tb = (box.hi[a] - origin[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        r.t0 = std::max(r.t0, ta);
        r.t1 = std::min(r.t1, tb);
    }
    return r;
}

GridGeometry fine_geometry(const MacrocellGrids& grids) { return {grids.fine_dims, float(kBlockEdge)}; }
GridGeometry coarse_geometry(const MacrocellGrids& grids) {
    return {grids.coarse_dims, float(kBlockEdge * kCoarseBlocks)};
}

GridIterState dda_init_in_cell(const GridGeometry& geom, const Ray& ray, Int3 cell) {
    GridIterState s;
    s.cell = geom.id(cell);
    for (int a = 0; a < 3; ++a) {
        const float d = ray.dir[a];
        if (d > 0.f) {
            s.t_max[a] = (float(cell[a] + 1) * geom.cell_size - ray.origin[a]) / d;
        } else if (d < 0.f) {
            s.t_max[a] = (float(cell[a]) * geom.cell_size - ray.origin[a]) / d;
        } else {
            s.t_max[a] = kInf;
        }
    }
    return s;
}

GridIterState dda_init_at(const GridGeometry& geom, const Ray& ray, float t) {
    const Vec3f p = ray.origin + ray.dir * t;
    Int3 cell;
    for (int a = 0; a < 3; ++a) {
        cell[a] = std::clamp(int32_t(std::floor(p[a] / geom.cell_size)), 0, geom.cells[a] - 1);
    }
    return dda_init_in_cell(geom, ray, cell);
}

int dda_next_axis(const GridIterState& s) {
    int axis = 0;
    if (s.t_max[1] < s.t_max[axis]) axis = 1;
    if (s.t_max[2] < s.t_max[axis]) axis = 2;
    return axis;
}

GridIterState dda_step(const GridIterState& s, const Ray& ray, const GridGeometry& geom) {
    const int axis = dda_next_axis(s);
    Int3 c = geom.coords(s.cell);
    c[axis] += ray.dir[axis] > 0.f ? 1 : -1;
    GridIterState next = s;
    if (ray.dir[axis] == 0.f || !geom.inside(c)) {
        next.cell = kCellDone;
        return next;
    }
    next.cell = geom.id(c);
    next.t_max[axis] += geom.cell_size / std::fabs(ray.dir[axis]);
    return next;
}

size_t RaySoA::count_active() const {
    return size_t(std::count_if(flags.begin(), flags.end(), [](uint8_t f) { return f & kRayActive; }));
}

RaySoA init_rays(const Camera& cam, int width, int height, Int3 dims, const MacrocellGrids& grids) {
    if (width < 1 || height < 1) throw UsageError("image size must be at least 1x1");
    cam.validate();
    const size_t n = size_t(width) * size_t(height);
    RaySoA rays;
    rays.width = width;
    rays.height = height;
    rays.origin.assign(n, cam.eye);
    rays.dir.resize(n);
    rays.t_enter.assign(n, 0.f);
    rays.t_exit.assign(n, 0.f);
    rays.flags.assign(n, 0);
    rays.coarse_iter.assign(n, GridIterState{});
    rays.fine_iter.assign(n, GridIterState{});
    rays.r_bid.assign(n, kNoBlock);
    rays.r_id.assign(n, 0);

    const Box bounds = volume_bounds(dims);
    const GridGeometry coarse = coarse_geometry(grids);
    parallel_for(n, [&](size_t i) {
        const int px = int(i % size_t(width)), py = int(i / size_t(width));
        rays.dir[i] = cam.pixel_dir(px, py, width, height);
        const Interval hit = intersect_box(cam.eye, rays.dir[i], bounds);
        if (hit.empty() || hit.t1 < 0.f) return;
        rays.t_enter[i] = std::max(0.f, hit.t0);
        rays.t_exit[i] = hit.t1;
        rays.flags[i] = kRayActive;
        rays.coarse_iter[i] =
            dda_init_at(coarse, rays.ray(i), rays.t_enter[i] + kEntryEpsilon * coarse.cell_size);
    });
    return rays;
}

namespace {

struct SubGrid {
    Int3 lo, hi;  // inclusive fine-cell bounds of one coarse cell
    bool inside(Int3 c) const {
        return c.x >= lo.x && c.y >= lo.y && c.z >= lo.z && c.x <= hi.x && c.y <= hi.y && c.z <= hi.z;
    }
};

SubGrid fine_cells_of(Int3 coarse_cell, const GridGeometry& fine) {
    SubGrid g;
    for (int a = 0; a < 3; ++a) {
        g.lo[a] = coarse_cell[a] * kCoarseBlocks;
        g.hi[a] = std::min(g.lo[a] + kCoarseBlocks - 1, fine.cells[a] - 1);
    }
    return g;
}

/// Steps the coarse iterator, stopping at the end of the ray segment.
void advance_coarse(GridIterState& coarse, const Ray& ray, const GridGeometry& geom) {
    if (coarse.t_max[dda_next_axis(coarse)] >= ray.t_exit) {
        coarse.cell = kCellDone;
        return;
    }
    coarse = dda_step(coarse, ray, geom);
}

}  // namespace

TraversalResult traverse_ray(GridIterState& coarse, GridIterState& fine, const Ray& ray,
                             const MacrocellGrids& grids, float iso, std::span<uint32_t> out) {
    const GridGeometry cgeom = coarse_geometry(grids);
    const GridGeometry fgeom = fine_geometry(grids);
    TraversalResult result;

    while (result.emitted < out.size()) {
        if (coarse.done()) break;
        const Int3 ccell = cgeom.coords(coarse.cell);
        if (fine.done()) {
            if (!grids.coarse[coarse.cell].contains(iso)) {
                advance_coarse(coarse, ray, cgeom);
                continue;
            }
            // descend into the coarse cell's 4^3 fine cells at the ray's entry point
            const SubGrid sub = fine_cells_of(ccell, fgeom);
            const Vec3f lo = Vec3f{float(ccell.x), float(ccell.y), float(ccell.z)} * cgeom.cell_size;
            const Vec3f hi = lo + Vec3f{cgeom.cell_size, cgeom.cell_size, cgeom.cell_size};
            const float t_entry = std::max(ray.t_enter, intersect_box(ray.origin, ray.dir, {lo, hi}).t0);
            const Vec3f p = ray.origin + ray.dir * (t_entry + kEntryEpsilon * fgeom.cell_size);
            Int3 fcell;
            for (int a = 0; a < 3; ++a) {
                fcell[a] = std::clamp(int32_t(std::floor(p[a] / fgeom.cell_size)), sub.lo[a], sub.hi[a]);
            }
            fine = dda_init_in_cell(fgeom, ray, fcell);
        }

        if (grids.fine[fine.cell].contains(iso)) out[result.emitted++] = fine.cell;

        // step past the current fine cell; leaving the coarse cell resumes the coarse walk
        const int axis = dda_next_axis(fine);
        bool leave = fine.t_max[axis] >= ray.t_exit;
        if (!leave) {
            const GridIterState next = dda_step(fine, ray, fgeom);
            leave = next.done() || !fine_cells_of(ccell, fgeom).inside(fgeom.coords(next.cell));
            if (!leave) fine = next;
        }
        if (leave) {
            fine.cell = kCellDone;
            advance_coarse(coarse, ray, cgeom);
        }
    }
    result.exhausted = coarse.done();
    return result;
}

void traverse_to_next_blocks(RaySoA& rays, const MacrocellGrids& grids, float iso, uint32_t n_spec,
                             std::span<const uint32_t> o_act) {
    WFISO_ASSERT(n_spec >= 1, "n_spec must be positive");
    WFISO_ASSERT(o_act.size() == rays.size(), "O_Act must be image sized");
    parallel_for(rays.size(), [&](size_t i) {
        if (!rays.active(i)) return;
        const size_t o = size_t(o_act[i]) * n_spec;
        WFISO_ASSERT(o + n_spec <= rays.r_bid.size(), "speculation slots exceed the w*h budget");
        std::span<uint32_t> slots(rays.r_bid.data() + o, n_spec);
        std::fill(slots.begin(), slots.end(), kNoBlock);
        std::fill_n(rays.r_id.begin() + std::ptrdiff_t(o), n_spec, uint32_t(i));
        const TraversalResult r = traverse_ray(rays.coarse_iter[i], rays.fine_iter[i], rays.ray(i), grids, iso, slots);
        if (r.exhausted) rays.flags[i] |= kRayExited;
    }, 1024);
}

}  // namespace wfiso
