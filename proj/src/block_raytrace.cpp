#include "wfiso/block_raytrace.hpp"

#include <algorithm>
#include <cmath>

#include "wfiso/errors.hpp"

namespace wfiso {

DualGrid assemble_dual_grid(const BlockCache& cache, const CompressedVolume& cv, uint32_t block_id) {
    DualGrid dg;
    const Int3 b = cv.block_coords(block_id);
    const Int3 dims = cv.dims();
    const Int3 bd = cv.block_dims();
    for (int a = 0; a < 3; ++a) {
        dg.block_origin[a] = b[a] * kBlockEdge;
        dg.cells_per_axis[a] = std::clamp(dims[a] - 1 - kBlockEdge * b[a], 0, kBlockEdge);
    }
    dg.values.fill(std::numeric_limits<float>::quiet_NaN());

    // local block, then the 7 positive-octant neighbors' 0-planes
    for (int n = 0; n < 8; ++n) {
        const Int3 off{n & 1, (n >> 1) & 1, (n >> 2) & 1};
        const Int3 nb{b.x + off.x, b.y + off.y, b.z + off.z};
        if (nb.x >= bd.x || nb.y >= bd.y || nb.z >= bd.z) continue;
        const uint32_t nid = cv.block_id(nb.x, nb.y, nb.z);
        const auto slot = cache.lookup(nid);
        if (!slot) throw PipelineError("dual grid assembly: block " + std::to_string(nid) + " is not resident");
        const auto src = cache.slot_values(*slot);
        const int ni = off.x ? 1 : kBlockEdge, nj = off.y ? 1 : kBlockEdge, nk = off.z ? 1 : kBlockEdge;
        for (int k = 0; k < nk; ++k)
            for (int j = 0; j < nj; ++j)
                for (int i = 0; i < ni; ++i) {
                    const int di = off.x * kBlockEdge + i, dj = off.y * kBlockEdge + j, dk = off.z * kBlockEdge + k;
                    dg.values[size_t(di + DualGrid::kEdge * (dj + DualGrid::kEdge * dk))] =
                        src[size_t(i + kBlockEdge * (j + kBlockEdge * k))];
                }
    }
    return dg;
}

namespace {

struct Cubic {
    double c[4]{};  // c[0] + c[1] s + c[2] s^2 + c[3] s^3
    double operator()(double s) const { return ((c[3] * s + c[2]) * s + c[1]) * s + c[0]; }
};

/// Real roots of a s^2 + b s + c strictly inside (lo, hi), ascending.
int quadratic_roots_in(double a, double b, double c, double lo, double hi, double out[2]) {
    int n = 0;
    const double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c)});
    if (scale == 0.0) return 0;
    if (std::fabs(a) <= 1e-12 * scale) {
        if (b != 0.0) out[n++] = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return 0;
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + std::copysign(sq, b));
        if (q != 0.0) {
            out[n++] = q / a;
            out[n++] = c / q;
        } else {
            out[n++] = 0.0;  // b == 0 and disc == 0 -> double root at 0
        }
    }
    int kept = 0;
    for (int i = 0; i < n; ++i)
        if (out[i] > lo && out[i] < hi) out[kept++] = out[i];
    if (kept == 2 && out[0] > out[1]) std::swap(out[0], out[1]);
    return kept;
}

/// Illinois-modified regula falsi on a bracketing span.
double refine_root(const Cubic& g, double a, double b, double ga, double gb) {
    constexpr int kMaxIterations = 64;
    const double tol = 1e-9 * std::max(b - a, 1e-30);
    int side = 0;
    for (int it = 0; it < kMaxIterations && b - a > tol; ++it) {
        double s = (ga - gb) != 0.0 ? a + (b - a) * ga / (ga - gb) : 0.5 * (a + b);
        if (!(s > a && s < b)) s = 0.5 * (a + b);  // bisection fallback
        const double gs = g(s);
        if (gs == 0.0) return s;
        if ((gs < 0.0) == (ga < 0.0)) {
            a = s;
            ga = gs;
            if (side == -1) gb *= 0.5;
            side = -1;
        } else {
            b = s;
            gb = gs;
            if (side == 1) ga *= 0.5;
            side = 1;
        }
    }
    return (ga - gb) != 0.0 ? std::clamp(a + (b - a) * ga / (ga - gb), a, b) : 0.5 * (a + b);
}

}  // namespace

std::optional<float> intersect_cell(std::span<const float, 8> corners, Vec3f origin, Vec3f dir, float t0,
                                    float t1, float iso) {
    if (!(t0 <= t1)) return std::nullopt;
    const double len = double(t1) - double(t0);
    double p0[3], d[3];
    for (int a = 0; a < 3; ++a) {
        d[a] = dir[a];
        p0[a] = double(origin[a]) + double(t0) * d[a];
    }
    // f(s) along the ray is the sum over corners of products of three linear weights
    Cubic g;
    for (int n = 0; n < 8; ++n) {
        double lin[3][2];
        for (int a = 0; a < 3; ++a) {
            const bool upper = (n >> a) & 1;
            lin[a][0] = upper ? p0[a] : 1.0 - p0[a];
            lin[a][1] = upper ? d[a] : -d[a];
        }
        const double c = corners[size_t(n)];
        const double (&x)[2] = lin[0], (&y)[2] = lin[1], (&z)[2] = lin[2];
        g.c[0] += c * x[0] * y[0] * z[0];
        g.c[1] += c * (x[1] * y[0] * z[0] + x[0] * y[1] * z[0] + x[0] * y[0] * z[1]);
        g.c[2] += c * (x[1] * y[1] * z[0] + x[1] * y[0] * z[1] + x[0] * y[1] * z[1]);
        g.c[3] += c * x[1] * y[1] * z[1];
    }
    g.c[0] -= iso;

    double splits[4];
    int n_splits = 0;
    splits[n_splits++] = 0.0;
    double extrema[2];
    const int n_ext = quadratic_roots_in(3.0 * g.c[3], 2.0 * g.c[2], g.c[1], 0.0, len, extrema);
    for (int i = 0; i < n_ext; ++i) splits[n_splits++] = extrema[i];
    splits[n_splits++] = len;

    double ga = g(splits[0]);
    for (int i = 0; i + 1 < n_splits; ++i) {
        const double a = splits[i], b = splits[i + 1];
        const double gb = g(b);
        if (ga == 0.0) return float(double(t0) + a);
        if ((ga < 0.0) != (gb < 0.0) || gb == 0.0) {
            const double s = gb == 0.0 ? b : refine_root(g, a, b, ga, gb);
            return std::clamp(float(double(t0) + s), t0, t1);
        }
        ga = gb;
    }
    return std::nullopt;
}

Vec3f trilinear_gradient(std::span<const float, 8> c, Vec3f p) {
    const float u = p.x, v = p.y, w = p.z;
    const float gx = (1 - v) * (1 - w) * (c[1] - c[0]) + v * (1 - w) * (c[3] - c[2]) + (1 - v) * w * (c[5] - c[4]) +
                     v * w * (c[7] - c[6]);
    const float gy = (1 - u) * (1 - w) * (c[2] - c[0]) + u * (1 - w) * (c[3] - c[1]) + (1 - u) * w * (c[6] - c[4]) +
                     u * w * (c[7] - c[5]);
    const float gz = (1 - u) * (1 - v) * (c[4] - c[0]) + u * (1 - v) * (c[5] - c[1]) + (1 - u) * v * (c[6] - c[2]) +
                     u * v * (c[7] - c[3]);
    return {gx, gy, gz};
}

Vec3f shade(Vec3f grad, Vec3f ray_dir, Vec3f base_color) {
    constexpr float kAmbient = 0.2f;
    if (length(grad) == 0.f) return base_color * kAmbient;
    const float lambert = std::fabs(dot(normalize(grad), -ray_dir));
    return base_color * std::max(kAmbient, lambert);
}

Interval dual_cell_interval(const Ray& ray, Int3 cell) {
    const Box box{{float(cell.x), float(cell.y), float(cell.z)},
                  {float(cell.x + 1), float(cell.y + 1), float(cell.z + 1)}};
    Interval r = intersect_box(ray.origin, ray.dir, box);
    r.t0 = std::max(r.t0, ray.t_enter);
    r.t1 = std::min(r.t1, ray.t_exit);
    return r;
}

std::optional<RGBZ> hit_dual_cell(std::span<const float, 8> corners, Int3 cell, const Ray& ray,
                                  const Interval& span, float iso, Vec3f base_color) {
    const auto [lo, hi] = std::minmax_element(corners.begin(), corners.end());
    if (!(*lo <= iso && iso <= *hi)) return std::nullopt;
    const Vec3f local = ray.origin - Vec3f{float(cell.x), float(cell.y), float(cell.z)};
    const auto t = intersect_cell(corners, local, ray.dir, span.t0, span.t1, iso);
    if (!t) return std::nullopt;
    Vec3f p = local + ray.dir * *t;
    p = {std::clamp(p.x, 0.f, 1.f), std::clamp(p.y, 0.f, 1.f), std::clamp(p.z, 0.f, 1.f)};
    return RGBZ{shade(trilinear_gradient(corners, p), ray.dir, base_color), *t};
}

void raytrace_block(const DualGrid& dg, const RaySoA& rays, BlockRays entries, float iso, Vec3f base_color,
                    std::span<RGBZ> rgbz) {
    WFISO_ASSERT(entries.ray_ids.size() == entries.spec_slots.size(), "ray and slot lists must align");
    for (size_t e = 0; e < entries.ray_ids.size(); ++e) {
        const Ray ray = rays.ray(entries.ray_ids[e]);
        const uint32_t slot = entries.spec_slots[e];
        WFISO_ASSERT(slot < rgbz.size(), "RGBZ slot out of range");
        walk_dual_cells(ray, dg.block_origin, dg.cells_per_axis, [&](Int3 cell, const Interval& span) {
            const int i = cell.x - dg.block_origin.x, j = cell.y - dg.block_origin.y, k = cell.z - dg.block_origin.z;
            const std::array<float, 8> corners{dg.at(i, j, k),         dg.at(i + 1, j, k),
                                               dg.at(i, j + 1, k),     dg.at(i + 1, j + 1, k),
                                               dg.at(i, j, k + 1),     dg.at(i + 1, j, k + 1),
                                               dg.at(i, j + 1, k + 1), dg.at(i + 1, j + 1, k + 1)};
            const auto hit = hit_dual_cell(corners, cell, ray, span, iso, base_color);
            if (!hit) return false;
            rgbz[slot] = *hit;
            return true;
        });
    }
}

}  // namespace wfiso
