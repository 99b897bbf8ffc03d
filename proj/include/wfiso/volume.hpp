#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "wfiso/vec3.hpp"

namespace wfiso {

struct ValueRange {
    float min = 0.f;
    float max = 0.f;

    constexpr bool contains(float iso) const { return min <= iso && iso <= max; }
};

/// Dense single-precision scalar field, x-fastest then y then z.
///
/// Voxel samples sit at integer coordinates, so the spatial domain of a volume
/// with dims (X,Y,Z) is [0,X-1] x [0,Y-1] x [0,Z-1]. Immutable once built.
class Volume {
public:
    Volume() = default;
    Volume(Int3 dims, std::vector<float> values);

    Int3 dims() const { return dims_; }
    const std::vector<float>& values() const { return values_; }
    ValueRange value_range() const { return range_; }
    size_t voxel_count() const { return values_.size(); }

    size_t index(int x, int y, int z) const {
        return size_t(x) + size_t(dims_.x) * (size_t(y) + size_t(dims_.y) * size_t(z));
    }
    float at(int x, int y, int z) const { return values_[index(x, y, z)]; }

private:
    Int3 dims_{};
    std::vector<float> values_;
    ValueRange range_{};
};

enum class SampleType { u8, u16, f32 };

/// Parses "u8" / "u16" / "f32"; anything else is a UsageError.
SampleType parse_sample_type(std::string_view name);
size_t sample_size(SampleType type);

/// Loads a headerless little-endian raw sample stream. Integer samples are cast
/// to float without normalization.
Volume load_raw(const std::filesystem::path& path, Int3 dims, SampleType type);

/// Writes the volume's values as a raw little-endian f32 stream.
void save_raw_f32(const std::filesystem::path& path, const Volume& volume);

enum class SynthKind { sphere, marschner_lobb, value_noise };

SynthKind parse_synth_kind(std::string_view name);

/// Deterministic test volumes. All dims must be at least 8.
///   sphere:          Euclidean distance from the volume center, in voxels.
///   marschner_lobb:  the Marschner-Lobb test signal on [-1,1]^3.
///   value_noise:     four-octave lattice value noise in [0,1], keyed by seed.
Volume synthesize(SynthKind kind, Int3 dims, uint64_t seed = 0);

/// Closed-form Marschner-Lobb signal (alpha = 0.25, f_M = 6) at a point in [-1,1]^3.
double marschner_lobb(double x, double y, double z);

}  // namespace wfiso
