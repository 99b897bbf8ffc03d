#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace wfiso {

struct Vec3f {
    float x = 0.f, y = 0.f, z = 0.f;

    constexpr float operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr float& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr Vec3f operator+(Vec3f a, Vec3f b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3f operator-(Vec3f a, Vec3f b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3f operator-(Vec3f a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3f operator*(Vec3f a, float s) { return {a.x * s, a.y * s, a.z * s}; }
constexpr Vec3f operator*(float s, Vec3f a) { return a * s; }
constexpr bool operator==(Vec3f a, Vec3f b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

constexpr float dot(Vec3f a, Vec3f b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3f cross(Vec3f a, Vec3f b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline float length(Vec3f a) { return std::sqrt(dot(a, a)); }
inline Vec3f normalize(Vec3f a) {
    const float len = length(a);
    return len > 0.f ? a * (1.f / len) : a;
}

/// Integer triple used for voxel, block and cell coordinates.
struct Int3 {
    int32_t x = 0, y = 0, z = 0;

    constexpr int32_t operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr int32_t& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr int64_t product() const { return int64_t(x) * y * z; }
};

constexpr bool operator==(Int3 a, Int3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
constexpr bool operator!=(Int3 a, Int3 b) { return !(a == b); }

constexpr int32_t ceil_div(int32_t a, int32_t b) { return (a + b - 1) / b; }

}  // namespace wfiso
