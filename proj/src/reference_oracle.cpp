#include "wfiso/reference_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "wfiso/block_raytrace.hpp"
#include "wfiso/errors.hpp"
#include "wfiso/parallel_for.hpp"

namespace wfiso {

Volume decode_full(const CompressedVolume& cv) {
    const Int3 d = cv.dims();
    std::vector<float> values(size_t(d.product()));
    parallel_for(cv.block_count(), [&](size_t id) {
        const Int3 b = cv.block_coords(uint32_t(id));
        const BlockData data = cv.decompress_block(uint32_t(id));
        for (int k = 0; k < kBlockEdge; ++k)
            for (int j = 0; j < kBlockEdge; ++j)
                for (int i = 0; i < kBlockEdge; ++i) {
                    const int x = b.x * kBlockEdge + i, y = b.y * kBlockEdge + j, z = b.z * kBlockEdge + k;
                    if (x >= d.x || y >= d.y || z >= d.z) continue;
                    values[size_t(x) + size_t(d.x) * (size_t(y) + size_t(d.y) * z)] =
                        data[size_t(i + kBlockEdge * (j + kBlockEdge * k))];
                }
    }, 256);
    return Volume(d, std::move(values));
}

Framebuffer reference_render(const Volume& v, const Camera& cam, float iso, int width, int height,
                             const ReferenceOptions& opts) {
    if (width < 1 || height < 1) throw UsageError("image size must be at least 1x1");
    cam.validate();
    Framebuffer fb(width, height, opts.background);
    const Int3 dims = v.dims();
    const Box bounds = volume_bounds(dims);
    const Int3 cells{dims.x - 1, dims.y - 1, dims.z - 1};

    parallel_for(size_t(width) * size_t(height), [&](size_t i) {
        const int px = int(i % size_t(width)), py = int(i / size_t(width));
        Ray ray{cam.eye, cam.pixel_dir(px, py, width, height), 0.f, 0.f};
        const Interval hit = intersect_box(ray.origin, ray.dir, bounds);
        if (hit.empty() || hit.t1 < 0.f) return;
        ray.t_enter = std::max(0.f, hit.t0);
        ray.t_exit = hit.t1;
        walk_dual_cells(ray, Int3{0, 0, 0}, cells, [&](Int3 c, const Interval& span) {
            const std::array<float, 8> corners{
                v.at(c.x, c.y, c.z),         v.at(c.x + 1, c.y, c.z),         v.at(c.x, c.y + 1, c.z),
                v.at(c.x + 1, c.y + 1, c.z), v.at(c.x, c.y, c.z + 1),         v.at(c.x + 1, c.y, c.z + 1),
                v.at(c.x, c.y + 1, c.z + 1), v.at(c.x + 1, c.y + 1, c.z + 1)};
            const auto h = hit_dual_cell(corners, c, ray, span, iso, opts.base_color);
            if (!h) return false;
            fb.rgba[4 * i + 0] = to_u8(h->rgb.x);
            fb.rgba[4 * i + 1] = to_u8(h->rgb.y);
            fb.rgba[4 * i + 2] = to_u8(h->rgb.z);
            fb.rgba[4 * i + 3] = 255;
            fb.depth[i] = h->z;
            return true;
        });
    }, 256);
    fb.completeness = 1.0;
    return fb;
}

ImageDiff compare_images(const Framebuffer& a, const Framebuffer& b) {
    if (a.width != b.width || a.height != b.height) throw UsageError("compare_images: image sizes differ");
    ImageDiff d;
    for (size_t i = 0; i < a.depth.size(); ++i) {
        const bool ha = a.hit(i), hb = b.hit(i);
        if (ha != hb) {
            ++d.hit_mask_mismatches;
        } else if (ha) {
            d.max_depth_delta = std::max(d.max_depth_delta, std::fabs(double(a.depth[i]) - double(b.depth[i])));
        }
        for (int c = 0; c < 3; ++c) {
            d.max_rgb_delta = std::max(d.max_rgb_delta, std::abs(int(a.rgba[4 * i + c]) - int(b.rgba[4 * i + c])));
        }
    }
    return d;
}

}  // namespace wfiso
