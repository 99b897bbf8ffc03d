#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wfiso/block_codec.hpp"
#include "wfiso/errors.hpp"
#include "wfiso/grid_traversal.hpp"
#include "wfiso/macrocell_grid.hpp"
#include "wfiso/parallel_prims.hpp"

using namespace wfiso;

namespace {

Vec3f random_unit(std::mt19937_64& rng) {
    std::normal_distribution<float> n;
    for (;;) {
        Vec3f v{n(rng), n(rng), n(rng)};
        if (length(v) > 1e-3f) return normalize(v);
    }
}

std::vector<Int3> walk(const GridGeometry& g, const Ray& ray, Int3 start) {
    std::vector<Int3> cells;
    GridIterState s = dda_init_in_cell(g, ray, start);
    while (!s.done()) {
        cells.push_back(g.coords(s.cell));
        if (s.t_max[dda_next_axis(s)] >= ray.t_exit) break;
        s = dda_step(s, ray, g);
    }
    return cells;
}

// Volume of zeros with the given voxels set to 10.
CompressedVolume spikes(Int3 dims, std::vector<Int3> hot) {
    Volume base({dims.x, dims.y, dims.z}, std::vector<float>(size_t(dims.product()), 0.f));
    std::vector<float> v = base.values();
    for (Int3 h : hot) v[base.index(h.x, h.y, h.z)] = 10.f;
    return compress_volume(Volume(dims, v), 16);
}

RaySoA single_ray(Vec3f eye, Vec3f dir, Int3 dims, const MacrocellGrids& g) {
    const Camera cam = Camera::look_at(eye, eye + dir, std::fabs(dir.y) < 0.9f ? Vec3f{0, 1, 0} : Vec3f{1, 0, 0}, 30.f);
    return init_rays(cam, 1, 1, dims, g);
}

std::vector<uint32_t> all_candidates(RaySoA& rays, size_t i, const MacrocellGrids& g, float iso) {
    std::vector<uint32_t> out(4096, kNoBlock);
    const TraversalResult r = traverse_ray(rays.coarse_iter[i], rays.fine_iter[i], rays.ray(i), g, iso, out);
    out.resize(r.emitted);
    return out;
}

}  // namespace

TEST_CASE("axis ray visits the row of cells then finishes") {
    const GridGeometry g{{4, 4, 4}, 1.f};
    const Ray ray{{0.5f, 1.5f, 1.5f}, {1.f, 0.f, 0.f}, 0.f, 100.f};
    GridIterState s = dda_init_at(g, ray, 0.f);
    CHECK(g.coords(s.cell) == Int3{0, 1, 1});
    s = dda_step(s, ray, g);
    CHECK(g.coords(s.cell) == Int3{1, 1, 1});
    s = dda_step(s, ray, g);
    CHECK(g.coords(s.cell) == Int3{2, 1, 1});
    s = dda_step(s, ray, g);
    CHECK(g.coords(s.cell) == Int3{3, 1, 1});
    s = dda_step(s, ray, g);
    CHECK(s.done());
}

TEST_CASE("diagonal ray from a corner alternates x and y, x first on ties") {
    const GridGeometry g{{4, 4, 4}, 1.f};
    const Ray ray{{0.f, 0.f, 0.5f}, normalize(Vec3f{1.f, 1.f, 0.f}), 0.f, 100.f};
    GridIterState s = dda_init_in_cell(g, ray, {0, 0, 0});
    std::vector<Int3> seen{g.coords(s.cell)};
    while (true) {
        s = dda_step(s, ray, g);
        if (s.done()) break;
        seen.push_back(g.coords(s.cell));
    }
    const std::vector<Int3> expected{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 1, 0}, {2, 2, 0},
                                     {3, 2, 0}, {3, 3, 0}};
    CHECK(seen == expected);
}

TEST_CASE("random rays: DDA cells agree with a dense march") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    const GridGeometry g{{7, 5, 9}, 4.f};
    const Box box{{0, 0, 0}, {28, 20, 36}};
    for (int n = 0; n < 2000; ++n) {
        const Vec3f o{u(rng) * 28.f, u(rng) * 20.f, u(rng) * 36.f};
        const Vec3f d = random_unit(rng);
        const Interval seg = intersect_box(o, d, box);
        const Ray ray{o, d, 0.f, seg.t1};
        const auto dda = walk(g, ray, {int(o.x / 4), int(o.y / 4), int(o.z / 4)});
        const auto dense = oracle::dense_march_cells(o, d, 0.0, double(seg.t1) - 1e-4, 4.0, g.cells);

        // 6-connected path
        for (size_t i = 1; i < dda.size(); ++i) {
            const int step = std::abs(dda[i].x - dda[i - 1].x) + std::abs(dda[i].y - dda[i - 1].y) +
                             std::abs(dda[i].z - dda[i - 1].z);
            REQUIRE(step == 1);
        }
        // the march's cells appear in order; anything extra is a near-corner graze
        size_t j = 0;
        for (const Int3& c : dda) {
            if (j < dense.size() && dense[j] == c) {
                ++j;
                continue;
            }
            const std::array<double, 3> lo{4.0 * c.x, 4.0 * c.y, 4.0 * c.z};
            const std::array<double, 3> hi{lo[0] + 4, lo[1] + 4, lo[2] + 4};
            REQUIRE(oracle::overlap(o, d, 0.0, seg.t1, lo, hi) < 2.0 * 4.0 / 64.0);
        }
        REQUIRE(j == dense.size());
    }
}

TEST_CASE("camera on the +z axis: center ray enters at the near z face") {
    const Int3 dims{33, 33, 33};
    const CompressedVolume cv = compress_volume(synthesize(SynthKind::sphere, dims), 8);
    const MacrocellGrids g = build_grids(cv);
    const Camera cam = Camera::look_at({16.f, 16.f, 100.f}, {16.f, 16.f, 16.f}, {0, 1, 0}, 40.f);
    const RaySoA rays = init_rays(cam, 5, 5, dims, g);
    const size_t center = 2 * 5 + 2;
    CHECK(rays.dir[center] == Vec3f{0.f, 0.f, -1.f});
    CHECK(rays.t_enter[center] == doctest::Approx(100.0 - 32.0));
    CHECK(rays.t_exit[center] == doctest::Approx(100.0));
    CHECK(rays.active(center));
}

TEST_CASE("camera facing away leaves no active rays") {
    const Int3 dims{16, 16, 16};
    const CompressedVolume cv = compress_volume(synthesize(SynthKind::sphere, dims), 8);
    const MacrocellGrids g = build_grids(cv);
    const Camera cam = Camera::look_at({8.f, 8.f, 60.f}, {8.f, 8.f, 120.f}, {0, 1, 0}, 40.f);
    const RaySoA rays = init_rays(cam, 16, 16, dims, g);
    CHECK(rays.count_active() == 0);
}

TEST_CASE("random cameras: t_enter matches a brute-force entry search") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<float> u(-1.f, 1.f);
    const Int3 dims{24, 18, 30};
    const CompressedVolume cv = compress_volume(synthesize(SynthKind::sphere, dims), 8);
    const MacrocellGrids g = build_grids(cv);
    const Box box = volume_bounds(dims);
    auto inside = [&](Vec3f p) {
        return p.x >= box.lo.x && p.y >= box.lo.y && p.z >= box.lo.z && p.x <= box.hi.x && p.y <= box.hi.y &&
               p.z <= box.hi.z;
    };
    for (int n = 0; n < 10; ++n) {
        const Vec3f center{11.5f, 8.5f, 14.5f};
        const Vec3f eye = center + random_unit(rng) * (60.f + 20.f * u(rng));
        const Camera cam = Camera::look_at(eye, center + Vec3f{u(rng), u(rng), u(rng)} * 5.f, {0, 1, 0}, 50.f);
        const RaySoA rays = init_rays(cam, 16, 16, dims, g);
        for (size_t i = 0; i < rays.size(); ++i) {
            // 64 coarse samples over the far range, then bisection on the first inside sample
            const double far = 200.0;
            std::optional<double> first;
            double prev = 0.0;
            for (int k = 0; k <= 64 * 64; ++k) {
                const double t = far * k / (64.0 * 64.0);
                if (inside(rays.origin[i] + rays.dir[i] * float(t))) {
                    double lo = prev, hi = t;
                    for (int b = 0; b < 60; ++b) {
                        const double mid = 0.5 * (lo + hi);
                        (inside(rays.origin[i] + rays.dir[i] * float(mid)) ? hi : lo) = mid;
                    }
                    first = hi;
                    break;
                }
                prev = t;
            }
            if (!first) {
                // only a chord shorter than the sampling step can slip between samples
                if (rays.active(i)) CHECK(rays.t_exit[i] - rays.t_enter[i] < 2 * far / (64.0 * 64.0));
                continue;
            }
            if (!rays.active(i)) {
                // grazing rays the sampler caught but the slab test rejects must be tangential
                continue;
            }
            REQUIRE(std::fabs(double(rays.t_enter[i]) - *first) < 1e-3);
        }
    }
}

TEST_CASE("single candidate block is emitted once, then the ray exits") {
    const Int3 dims{8, 8, 8};
    const CompressedVolume cv = spikes(dims, {{1, 1, 1}});
    const MacrocellGrids g = build_grids(cv);
    RaySoA rays = single_ray({-5.f, 1.5f, 1.5f}, {1.f, 0.f, 0.f}, dims, g);
    REQUIRE(rays.active(0));
    REQUIRE(oracle::candidate_blocks(rays.ray(0), g, 5.f, 1e-3) == std::vector<uint32_t>{0});

    const std::vector<uint32_t> o_act{0};
    traverse_to_next_blocks(rays, g, 5.f, 1, o_act);
    CHECK(rays.r_bid[0] == 0u);
    CHECK(rays.r_id[0] == 0u);
    traverse_to_next_blocks(rays, g, 5.f, 1, o_act);
    CHECK(rays.r_bid[0] == kNoBlock);
    CHECK((rays.flags[0] & kRayExited) != 0);
}

TEST_CASE("iso outside the value range: every ray exits with empty slots") {
    const Int3 dims{24, 24, 24};
    const CompressedVolume cv = compress_volume(synthesize(SynthKind::sphere, dims), 12);
    const MacrocellGrids g = build_grids(cv);
    const Camera cam = Camera::look_at({11.5f, 11.5f, 80.f}, {11.5f, 11.5f, 11.5f}, {0, 1, 0}, 30.f);
    RaySoA rays = init_rays(cam, 12, 12, dims, g);
    std::vector<uint8_t> active(rays.size());
    for (size_t i = 0; i < rays.size(); ++i) active[i] = rays.active(i);
    const auto o_act = exclusive_scan(std::span<const uint8_t>(active));
    traverse_to_next_blocks(rays, g, 1000.f, 1, o_act.offsets);
    for (uint32_t b : rays.r_bid) CHECK(b == kNoBlock);
    for (size_t i = 0; i < rays.size(); ++i)
        if (active[i]) CHECK((rays.flags[i] & kRayExited) != 0);
}

TEST_CASE("three slots, two candidates: third slot stays empty") {
    const Int3 dims{8, 8, 8};
    const CompressedVolume cv = spikes(dims, {{5, 1, 1}});
    const MacrocellGrids g = build_grids(cv);
    RaySoA rays = single_ray({-5.f, 1.5f, 1.5f}, {1.f, 0.f, 0.f}, dims, g);
    const std::vector<uint32_t> o_act{0};
    rays.r_bid.assign(3, 0);
    rays.r_id.assign(3, 0);
    traverse_to_next_blocks(rays, g, 5.f, 3, o_act);
    CHECK(rays.r_bid == std::vector<uint32_t>{0, 1, kNoBlock});
    CHECK((rays.flags[0] & kRayExited) != 0);
}

TEST_CASE("traversal emits exactly the overlapped candidate cells in order") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<float> u(-1.f, 1.f);
    const Int3 dims{40, 33, 47};
    const CompressedVolume cv = compress_volume(synthesize(SynthKind::value_noise, dims, 5), 10);
    const MacrocellGrids g = build_grids(cv);
    const Vec3f center{19.5f, 16.f, 23.f};
    for (int n = 0; n < 12; ++n) {
        const Vec3f eye = center + random_unit(rng) * 90.f;
        const Camera cam = Camera::look_at(eye, center + Vec3f{u(rng), u(rng), u(rng)} * 8.f, {0, 1, 0}, 35.f);
        RaySoA rays = init_rays(cam, 20, 20, dims, g);
        const float iso = 0.3f + 0.4f * (u(rng) + 1.f) / 2.f;
        for (size_t i = 0; i < rays.size(); ++i) {
            if (!rays.active(i)) continue;
            const auto want = oracle::candidate_blocks(rays.ray(i), g, iso, 1e-2);
            const auto got = all_candidates(rays, i, g, iso);
            size_t j = 0;
            for (uint32_t b : got) {
                if (j < want.size() && want[j] == b) {
                    ++j;
                    continue;
                }
                // extra emissions may only be cells the ray barely touches
                const Int3 c = fine_geometry(g).coords(b);
                const std::array<double, 3> lo{4.0 * c.x, 4.0 * c.y, 4.0 * c.z};
                const std::array<double, 3> hi{lo[0] + 4, lo[1] + 4, lo[2] + 4};
                REQUIRE(oracle::overlap(rays.origin[i], rays.dir[i], rays.t_enter[i], rays.t_exit[i], lo, hi) <=
                        1e-2);
            }
            REQUIRE(j == want.size());
        }
    }
}

TEST_CASE("iterator state resumes exactly where it stopped") {
    std::mt19937_64 rng(37);
    const Int3 dims{32, 32, 32};
    const CompressedVolume cv = compress_volume(synthesize(SynthKind::value_noise, dims, 2), 12);
    const MacrocellGrids g = build_grids(cv);
    const Camera cam = Camera::look_at({-40.f, 50.f, 70.f}, {15.5f, 15.5f, 15.5f}, {0, 1, 0}, 40.f);
    RaySoA a = init_rays(cam, 24, 24, dims, g);
    RaySoA b = a;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a.active(i)) continue;
        const auto once = all_candidates(a, i, g, 0.5f);
        std::vector<uint32_t> chunks;
        for (;;) {
            std::vector<uint32_t> out(1 + rng() % 3, kNoBlock);
            const TraversalResult r = traverse_ray(b.coarse_iter[i], b.fine_iter[i], b.ray(i), g, 0.5f, out);
            chunks.insert(chunks.end(), out.begin(), out.begin() + r.emitted);
            if (r.exhausted) break;
        }
        REQUIRE(chunks == once);
    }
}
