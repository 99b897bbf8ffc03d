#include "wfiso/wavefront_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "wfiso/errors.hpp"
#include "wfiso/parallel_for.hpp"
#include "wfiso/parallel_prims.hpp"

namespace wfiso {

Framebuffer::Framebuffer(int w, int h, std::array<uint8_t, 4> background)
    : width(w), height(h), rgba(size_t(w) * size_t(h) * 4), depth(size_t(w) * size_t(h), kInf) {
    for (size_t i = 0; i < depth.size(); ++i) std::copy(background.begin(), background.end(), rgba.begin() + 4 * i);
}

uint8_t to_u8(float c) { return uint8_t(std::lround(std::clamp(c, 0.f, 1.f) * 255.f)); }

uint32_t compute_n_spec(uint32_t n_act, int width, int height, uint32_t max_spec) {
    WFISO_ASSERT(n_act >= 1, "compute_n_spec needs at least one active ray");
    const uint64_t slots = uint64_t(width) * uint64_t(height);
    return uint32_t(std::min<uint64_t>(max_spec, std::max<uint64_t>(1, slots / n_act)));
}

BlockMasks mark_blocks(std::span<const uint32_t> r_bid, Int3 block_dims) {
    const size_t count = size_t(block_dims.product());
    BlockMasks m{std::vector<uint8_t>(count, 0), std::vector<uint8_t>(count, 0)};
    for (uint32_t b : r_bid) {
        if (b == kNoBlock) continue;
        WFISO_ASSERT(b < count, "R_BID holds an invalid block ID");
        m.visible[b] = 1;
        const int bx = int(b % uint32_t(block_dims.x));
        const int by = int((b / uint32_t(block_dims.x)) % uint32_t(block_dims.y));
        const int bz = int(b / (uint32_t(block_dims.x) * uint32_t(block_dims.y)));
        for (int n = 0; n < 8; ++n) {
            const int nx = bx + (n & 1), ny = by + ((n >> 1) & 1), nz = bz + ((n >> 2) & 1);
            if (nx >= block_dims.x || ny >= block_dims.y || nz >= block_dims.z) continue;
            m.active[size_t(nx) + size_t(block_dims.x) * (size_t(ny) + size_t(block_dims.y) * nz)] = 1;
        }
    }
    return m;
}

RtInputs build_rt_inputs(std::span<const uint32_t> r_bid, std::span<const uint32_t> r_id,
                         std::span<const uint8_t> visible_mask) {
    WFISO_ASSERT(r_bid.size() == r_id.size(), "R_BID and R_ID must have equal length");
    RtInputs in;
    const size_t block_count = visible_mask.size();

    std::vector<uint32_t> ids(block_count);
    std::iota(ids.begin(), ids.end(), 0u);
    in.i_bvis = compact<uint32_t>(ids, visible_mask);
    in.block_index = exclusive_scan(visible_mask).offsets;

    in.n_brays.assign(in.i_bvis.size(), 0);
    std::vector<uint8_t> ray_active(r_bid.size());
    for (size_t s = 0; s < r_bid.size(); ++s) {
        ray_active[s] = r_bid[s] != kNoBlock;
        if (ray_active[s]) ++in.n_brays[in.block_index[r_bid[s]]];
    }
    const ScanResult brays = exclusive_scan(std::span<const uint32_t>(in.n_brays));
    in.o_brays = brays.offsets;

    ScanResult spec = exclusive_scan(std::span<const uint8_t>(ray_active));
    in.spec_index = std::move(spec.offsets);
    in.valid_entries = spec.total;

    const auto keys = compact<uint32_t>(r_bid, ray_active);
    const auto rays = compact<uint32_t>(r_id, ray_active);
    const auto slots = compact<uint32_t>(in.spec_index, ray_active);
    WFISO_ASSERT(brays.total == keys.size(), "sum of N_BRays must equal the compacted entry count");

    std::vector<uint32_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0u);
    const SortedPairs sorted = sort_by_key(keys, order);
    in.i_ract.resize(keys.size());
    in.o_spec.resize(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
        in.i_ract[i] = rays[sorted.values[i]];
        in.o_spec[i] = slots[sorted.values[i]];
    }
    return in;
}

uint32_t composite(std::span<const RGBZ> rgbz, RaySoA& rays, uint32_t n_spec, std::span<const uint32_t> o_act,
                   std::span<const uint32_t> spec_index, Framebuffer& fb, const CompositeStyle& style) {
    uint32_t terminated = 0;
    for (size_t i = 0; i < rays.size(); ++i) {
        if (!rays.active(i)) continue;
        const size_t o = size_t(o_act[i]) * n_spec;
        const RGBZ* best = nullptr;
        for (size_t s = o; s < o + n_spec; ++s) {
            if (rays.r_bid[s] == kNoBlock) continue;
            const RGBZ& e = rgbz[spec_index[s]];
            if (e.z < (best ? best->z : kInf)) best = &e;
        }
        if (best) {
            fb.rgba[4 * i + 0] = to_u8(best->rgb.x);
            fb.rgba[4 * i + 1] = to_u8(best->rgb.y);
            fb.rgba[4 * i + 2] = to_u8(best->rgb.z);
            fb.rgba[4 * i + 3] = 255;
            fb.depth[i] = best->z;
            rays.flags[i] = (rays.flags[i] & ~kRayActive) | kRayHit;
            ++terminated;
        } else if (rays.flags[i] & kRayExited) {
            std::copy(style.background.begin(), style.background.end(), fb.rgba.begin() + std::ptrdiff_t(4 * i));
            fb.depth[i] = kInf;
            rays.flags[i] &= ~kRayActive;
            ++terminated;
        }
    }
    return terminated;
}

RenderResult render(const CompressedVolume& cv, const MacrocellGrids& grids, const Camera& cam, float iso,
                    const RenderOptions& opts) {
    using clock = std::chrono::steady_clock;
    RenderResult result;
    RaySoA rays = init_rays(cam, opts.width, opts.height, cv.dims(), grids);
    Framebuffer& fb = result.image;
    fb = Framebuffer(opts.width, opts.height, opts.background);
    const size_t n_pixels = rays.size();
    size_t n_terminated = n_pixels - rays.count_active();
    fb.completeness = double(n_terminated) / double(n_pixels);

    BlockCache cache(cv.block_count(), opts.initial_cache_slots ? opts.initial_cache_slots
                                                                : default_cache_capacity(opts.width, opts.height));
    const CompositeStyle style{opts.background};
    std::vector<uint8_t> active_mask(n_pixels);
    std::vector<RGBZ> rgbz;

    for (uint32_t pass = 0;; ++pass) {
        const auto start = clock::now();
        for (size_t i = 0; i < n_pixels; ++i) active_mask[i] = rays.active(i) ? 1 : 0;
        const ScanResult act = exclusive_scan(std::span<const uint8_t>(active_mask));
        const uint32_t n_act = act.total;
        if (n_act == 0) break;

        const uint32_t n_spec =
            opts.speculation ? compute_n_spec(n_act, opts.width, opts.height, opts.max_spec) : 1u;
        const size_t used = size_t(n_act) * n_spec;
        WFISO_ASSERT(used <= n_pixels, "speculation exceeds the w*h slot budget");

        traverse_to_next_blocks(rays, grids, iso, n_spec, act.offsets);
        const std::span<const uint32_t> r_bid(rays.r_bid.data(), used);
        const std::span<const uint32_t> r_id(rays.r_id.data(), used);

        const BlockMasks masks = mark_blocks(r_bid, cv.block_dims());
        const CacheUpdateStats cache_stats = cache.ensure_resident(masks.active, cv);
        if (opts.corrupt_cache_for_testing) cache.corrupt_for_testing();

        const RtInputs in = build_rt_inputs(r_bid, r_id, masks.visible);
        WFISO_ASSERT(in.valid_entries <= n_pixels, "valid R_BID entries exceed w*h");
        rgbz.assign(in.valid_entries, RGBZ{});

        parallel_for(in.i_bvis.size(), [&](size_t v) {
            const DualGrid dg = assemble_dual_grid(cache, cv, in.i_bvis[v]);
            const size_t off = in.o_brays[v], n = in.n_brays[v];
            raytrace_block(dg, rays,
                           {std::span<const uint32_t>(in.i_ract).subspan(off, n),
                            std::span<const uint32_t>(in.o_spec).subspan(off, n)},
                           iso, opts.base_color, rgbz);
        }, 16);

        n_terminated += composite(rgbz, rays, n_spec, act.offsets, in.spec_index, fb, style);
        fb.completeness = double(n_terminated) / double(n_pixels);

        PassStats st;
        st.pass_index = pass;
        st.n_active_before = n_act;
        st.n_spec = n_spec;
        st.visible_blocks = uint32_t(in.i_bvis.size());
        st.active_blocks = uint32_t(std::count(masks.active.begin(), masks.active.end(), uint8_t(1)));
        st.new_decompressed = cache_stats.new_decompressed;
        st.cache_slots = cache_stats.grown_to;
        st.utilization = double(in.valid_entries) / double(n_pixels);
        st.completeness = fb.completeness;
        st.duration = std::chrono::duration<double>(clock::now() - start).count();
        result.passes.push_back(st);

        if (opts.keep_snapshots) result.snapshots.push_back(fb);
        if (opts.on_pass && !opts.on_pass(fb, st)) {
            result.cancelled = true;
            break;
        }
    }
    return result;
}

}  // namespace wfiso
