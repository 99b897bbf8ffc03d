#include "wfiso/volume.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wfiso/errors.hpp"

namespace wfiso {

Volume::Volume(Int3 dims, std::vector<float> values) : dims_(dims), values_(std::move(values)) {
    if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw UsageError("volume dims must be positive");
    if (int64_t(values_.size()) != dims.product()) {
        throw UsageError("volume value count does not match dims");
    }
    const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    range_ = {*lo, *hi};
}

SampleType parse_sample_type(std::string_view name) {
    if (name == "u8") return SampleType::u8;
    if (name == "u16") return SampleType::u16;
    if (name == "f32") return SampleType::f32;
    throw UsageError("unknown dtype '" + std::string(name) + "' (expected u8, u16 or f32)");
}

size_t sample_size(SampleType type) {
    switch (type) {
        case SampleType::u8: return 1;
        case SampleType::u16: return 2;
        case SampleType::f32: return 4;
    }
    return 0;
}

Volume load_raw(const std::filesystem::path& path, Int3 dims, SampleType type) {
    if (dims.x < 1 || dims.y < 1 || dims.z < 1) throw UsageError("dims must be positive");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const size_t count = size_t(dims.product());
    const size_t expected = count * sample_size(type);
    if (bytes.size() != expected) {
        std::ostringstream msg;
        msg << path.string() << ": expected " << expected << " bytes for dims " << dims.x << "x" << dims.y
            << "x" << dims.z << ", found " << bytes.size();
        throw InputError(msg.str());
    }

    std::vector<float> values(count);
    switch (type) {
        case SampleType::u8:
            for (size_t i = 0; i < count; ++i) values[i] = float(bytes[i]);
            break;
        case SampleType::u16:
            for (size_t i = 0; i < count; ++i) {
                values[i] = float(uint16_t(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
            }
            break;
        case SampleType::f32:
            for (size_t i = 0; i < count; ++i) {
                const uint32_t bits = uint32_t(bytes[4 * i]) | (uint32_t(bytes[4 * i + 1]) << 8) |
                                      (uint32_t(bytes[4 * i + 2]) << 16) | (uint32_t(bytes[4 * i + 3]) << 24);
                values[i] = std::bit_cast<float>(bits);
            }
            break;
    }
    return Volume(dims, std::move(values));
}

void save_raw_f32(const std::filesystem::path& path, const Volume& volume) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    std::vector<unsigned char> bytes(volume.voxel_count() * 4);
    for (size_t i = 0; i < volume.voxel_count(); ++i) {
        const uint32_t bits = std::bit_cast<uint32_t>(volume.values()[i]);
        for (int b = 0; b < 4; ++b) bytes[4 * i + b] = (bits >> (8 * b)) & 0xFF;
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw InputError("short write to " + path.string());
}

SynthKind parse_synth_kind(std::string_view name) {
    if (name == "sphere") return SynthKind::sphere;
    if (name == "marschner_lobb") return SynthKind::marschner_lobb;
    if (name == "value_noise") return SynthKind::value_noise;
    throw UsageError("unknown synthetic volume '" + std::string(name) + "'");
}

double marschner_lobb(double x, double y, double z) {
    constexpr double alpha = 0.25;
    constexpr double f_m = 6.0;
    constexpr double pi = std::numbers::pi;
    const double r = std::sqrt(x * x + y * y);
    const double rho_r = std::cos(2.0 * pi * f_m * std::cos(pi * r / 2.0));
    return (1.0 - std::sin(pi * z / 2.0) + alpha * (1.0 + rho_r)) / (2.0 * (1.0 + alpha));
}

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double lattice_value(uint64_t seed, int octave, int64_t ix, int64_t iy, int64_t iz) {
    uint64_t h = splitmix64(seed ^ (uint64_t(octave) * 0xD6E8FEB86659FD93ull));
    h = splitmix64(h ^ uint64_t(ix));
    h = splitmix64(h ^ uint64_t(iy));
    h = splitmix64(h ^ uint64_t(iz));
    return double(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise_at(uint64_t seed, double px, double py, double pz) {
    constexpr int octaves = 4;
    constexpr double base_period = 16.0;  // voxels per lattice cell at octave 0
    double sum = 0.0, norm = 0.0, amplitude = 1.0, frequency = 1.0 / base_period;
    for (int o = 0; o < octaves; ++o) {
        const double x = px * frequency, y = py * frequency, z = pz * frequency;
        const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
        const int64_t ix = int64_t(fx), iy = int64_t(fy), iz = int64_t(fz);
        const double u = fade(x - fx), v = fade(y - fy), w = fade(z - fz);
        double acc = 0.0;
        for (int c = 0; c < 8; ++c) {
            const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
            const double weight = (dx ? u : 1.0 - u) * (dy ? v : 1.0 - v) * (dz ? w : 1.0 - w);
            acc += weight * lattice_value(seed, o, ix + dx, iy + dy, iz + dz);
        }
        sum += amplitude * acc;
        norm += amplitude;
        amplitude *= 0.5;
        frequency *= 2.0;
    }
    return sum / norm;
}

}  // namespace

Volume synthesize(SynthKind kind, Int3 dims, uint64_t seed) {
    if (dims.x < 8 || dims.y < 8 || dims.z < 8) throw UsageError("synthetic volumes need dims >= 8 per axis");
    std::vector<float> values(size_t(dims.product()));
    const double cx = (dims.x - 1) / 2.0, cy = (dims.y - 1) / 2.0, cz = (dims.z - 1) / 2.0;
    size_t i = 0;
    for (int z = 0; z < dims.z; ++z) {
        for (int y = 0; y < dims.y; ++y) {
            for (int x = 0; x < dims.x; ++x, ++i) {
                double v = 0.0;
                switch (kind) {
                    case SynthKind::sphere: {
                        const double dx = x - cx, dy = y - cy, dz = z - cz;
                        v = std::sqrt(dx * dx + dy * dy + dz * dz);
                        break;
                    }
                    case SynthKind::marschner_lobb:
                        v = marschner_lobb(-1.0 + 2.0 * x / (dims.x - 1), -1.0 + 2.0 * y / (dims.y - 1),
                                           -1.0 + 2.0 * z / (dims.z - 1));
                        break;
                    case SynthKind::value_noise: v = value_noise_at(seed, x, y, z); break;
                }
                values[i] = float(v);
            }
        }
    }
    return Volume(dims, std::move(values));
}

}  // namespace wfiso
