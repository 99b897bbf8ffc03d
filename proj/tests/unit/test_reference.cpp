#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "wfiso/block_codec.hpp"
#include "wfiso/errors.hpp"
#include "wfiso/reference_oracle.hpp"

using namespace wfiso;

TEST_CASE("decode_full stays within the per-block bound") {
    const Volume v = synthesize(SynthKind::marschner_lobb, {21, 18, 25});
    const CompressedVolume cv = compress_volume(v, 10);
    const Volume d = decode_full(cv);
    REQUIRE(d.dims() == v.dims());
    for (int z = 0; z < 25; ++z)
        for (int y = 0; y < 18; ++y)
            for (int x = 0; x < 21; ++x) {
                const uint32_t b = cv.block_id(x / 4, y / 4, z / 4);
                const double bound = cv.error_bound(b) + std::ldexp(1.0, cv.block_exponent(b) - 24);
                REQUIRE(std::fabs(double(d.at(x, y, z)) - double(v.at(x, y, z))) <= bound);
            }
}

TEST_CASE("decode_full: zero volume and padded dims") {
    const Volume zero({5, 5, 5}, std::vector<float>(125, 0.f));
    const Volume d = decode_full(compress_volume(zero, 6));
    CHECK(d.dims() == Int3{5, 5, 5});
    for (float x : d.values()) CHECK(x == 0.f);
}

TEST_CASE("reference: iso outside range and constant volume give background") {
    const Camera cam = Camera::look_at({8.f, 8.f, 50.f}, {7.5f, 7.5f, 7.5f}, {0, 1, 0}, 40.f);
    const Volume s = synthesize(SynthKind::sphere, {16, 16, 16});
    const Framebuffer a = reference_render(s, cam, 1000.f, 20, 20);
    for (float z : a.depth) CHECK(z == kInf);
    const Volume c({16, 16, 16}, std::vector<float>(4096, 3.f));
    for (float iso : {2.f, 3.5f}) {
        const Framebuffer b = reference_render(c, cam, iso, 20, 20);
        for (float z : b.depth) CHECK(z == kInf);
    }
}

TEST_CASE("reference sphere depth along a voxel line matches the analytic sphere") {
    const Volume v = synthesize(SynthKind::sphere, {64, 64, 64});
    const CompressedVolume cv = compress_volume(v, 16);
    const Camera cam = Camera::look_at({31.f, 31.f, 200.f}, {31.f, 31.f, 0.f}, {0, 1, 0}, 10.f);
    const Framebuffer fb = reference_render(decode_full(cv), cam, 20.f, 1, 1);
    REQUIRE(fb.hit(0));
    double codec = 0;
    for (uint32_t b = 0; b < cv.block_count(); ++b) codec = std::max(codec, cv.error_bound(b));
    const double want = 200.0 - (31.5 + std::sqrt(400.0 - 0.5));
    CHECK(std::fabs(double(fb.depth[0]) - want) <= codec + 1e-3);
}

TEST_CASE("reference sphere depth over the image against ray-sphere intersection") {
    // away from voxel lines trilinear interpolation moves the surface by about h^2/(8r)
    const Volume v = synthesize(SynthKind::sphere, {48, 48, 48});
    const Camera cam = Camera::look_at({23.5f, 23.5f, 120.f}, {23.5f, 23.5f, 23.5f}, {0, 1, 0}, 25.f);
    const float r = 15.f;
    const Framebuffer fb = reference_render(v, cam, r, 32, 32);
    const double interp = 3.0 / (8.0 * r) + 1e-3;
    for (int py = 0; py < 32; ++py)
        for (int px = 0; px < 32; ++px) {
            const size_t i = size_t(py) * 32 + size_t(px);
            const auto t = oracle::ray_sphere(cam.eye, cam.pixel_dir(px, py, 32, 32), {23.5f, 23.5f, 23.5f}, r);
            if (!t) continue;
            if (!fb.hit(i)) {
                // only silhouette pixels may disagree
                const auto inner = oracle::ray_sphere(cam.eye, cam.pixel_dir(px, py, 32, 32), {23.5f, 23.5f, 23.5f}, r - 0.5);
                CHECK_FALSE(inner.has_value());
                continue;
            }
            const auto near_inner = oracle::ray_sphere(cam.eye, cam.pixel_dir(px, py, 32, 32), {23.5f, 23.5f, 23.5f}, 0.8 * r);
            if (near_inner) CHECK(std::fabs(double(fb.depth[i]) - *t) <= interp * 4);
        }
}

TEST_CASE("compare_images") {
    Framebuffer a(4, 3, {0, 0, 0, 255});
    a.depth[5] = 2.f;
    a.rgba[20] = 200;
    const Framebuffer b = a;
    ImageDiff d = compare_images(a, b);
    CHECK(d.hit_mask_mismatches == 0);
    CHECK(d.max_depth_delta == 0.0);
    CHECK(d.max_rgb_delta == 0);
    Framebuffer c = a;
    c.depth[7] = 1.f;
    d = compare_images(a, c);
    CHECK(d.hit_mask_mismatches == 1);
    CHECK_THROWS_AS(compare_images(a, Framebuffer(3, 4, {0, 0, 0, 255})), UsageError);
}
