#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "wfiso/errors.hpp"
#include "wfiso/volume.hpp"

using namespace wfiso;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name) : path(fs::temp_directory_path() / ("wfiso_test_" + name)) {}
    TempFile(const std::string& name, const std::vector<uint8_t>& bytes) : TempFile(name) {
        std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
    TempFile(const TempFile&) = delete;
    ~TempFile() {
        std::error_code ec;
        fs::remove(path, ec);
    }
    operator const fs::path&() const { return path; }
};

TempFile temp_file(const std::string& name, const std::vector<uint8_t>& bytes) {
    return TempFile(name, bytes);
}

}  // namespace

TEST_CASE("load_raw casts u8 samples without normalization") {
    const auto p = temp_file("u8.raw", {0, 1, 2, 3, 4, 5, 6, 7});
    const Volume v = load_raw(p, {2, 2, 2}, SampleType::u8);
    for (int i = 0; i < 8; ++i) CHECK(v.values()[size_t(i)] == float(i));
    CHECK(v.value_range().min == 0.f);
    CHECK(v.value_range().max == 7.f);
}

TEST_CASE("load_raw of zero u16 bytes") {
    const auto p = temp_file("u16.raw", std::vector<uint8_t>(16, 0));
    const Volume v = load_raw(p, {2, 2, 2}, SampleType::u16);
    for (float x : v.values()) CHECK(x == 0.f);
    CHECK(v.value_range().min == 0.f);
    CHECK(v.value_range().max == 0.f);
}

TEST_CASE("f32 round trip through save_raw_f32") {
    std::vector<float> vals(3 * 4 * 5);
    for (size_t i = 0; i < vals.size(); ++i) vals[i] = std::sin(float(i)) * 100.f - float(i);
    const Volume v({3, 4, 5}, vals);
    const TempFile p("f32.raw");
    save_raw_f32(p, v);
    const Volume back = load_raw(p, {3, 4, 5}, SampleType::f32);
    CHECK(back.values() == vals);
}

TEST_CASE("load_raw size mismatch names both byte counts") {
    const auto p = temp_file("short.raw", std::vector<uint8_t>(7, 0));
    try {
        load_raw(p, {2, 2, 2}, SampleType::u8);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('8') != std::string::npos);
        CHECK(msg.find('7') != std::string::npos);
    }
}

TEST_CASE("unknown dtype is a usage error") {
    CHECK_THROWS_AS(parse_sample_type("f64"), UsageError);
    CHECK(parse_sample_type("u16") == SampleType::u16);
}

TEST_CASE("synthetic sphere is the distance from the volume center") {
    const Volume v = synthesize(SynthKind::sphere, {64, 64, 64});
    CHECK(v.at(31, 31, 31) == doctest::Approx(std::sqrt(3.0) * 0.5).epsilon(1e-6));
    CHECK(v.at(0, 0, 0) == doctest::Approx(std::sqrt(3.0) * 31.5).epsilon(1e-6));
    CHECK(v.at(0, 0, 0) == doctest::Approx(54.56).epsilon(1e-3));
}

TEST_CASE("value noise is deterministic per seed") {
    const Volume a = synthesize(SynthKind::value_noise, {16, 16, 16}, 7);
    const Volume b = synthesize(SynthKind::value_noise, {16, 16, 16}, 7);
    const Volume c = synthesize(SynthKind::value_noise, {16, 16, 16}, 8);
    CHECK(std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(float)) == 0);
    CHECK(a.values() != c.values());
    CHECK(a.value_range().min >= 0.f);
    CHECK(a.value_range().max <= 1.f);
}

TEST_CASE("marschner_lobb center sample matches the closed form") {
    const Volume v = synthesize(SynthKind::marschner_lobb, {41, 41, 41});
    // independent evaluation at (0,0,0): rho_r(0) = cos(2 pi f_M cos(0)) = cos(12 pi) = 1
    const double alpha = 0.25;
    const double expected = ((1.0 - std::sin(M_PI * 0.0 / 2.0)) + alpha * (1.0 + 1.0)) / (2.0 * (1.0 + alpha));
    CHECK(v.at(20, 20, 20) == doctest::Approx(expected).epsilon(1e-6));
    // and a non-trivial sample
    const double x = -1.0 + 2.0 * 7 / 40, y = -1.0 + 2.0 * 30 / 40, z = -1.0 + 2.0 * 12 / 40;
    const double r = std::sqrt(x * x + y * y);
    const double rho = std::cos(2.0 * M_PI * 6.0 * std::cos(M_PI * r / 2.0));
    const double ml = ((1.0 - std::sin(M_PI * z / 2.0)) + alpha * (1.0 + rho)) / (2.0 * (1.0 + alpha));
    CHECK(v.at(7, 30, 12) == doctest::Approx(ml).epsilon(1e-5));
}

TEST_CASE("synthesize rejects dims below 8") {
    CHECK_THROWS_AS(synthesize(SynthKind::sphere, {7, 8, 8}), UsageError);
    CHECK_THROWS_AS(parse_synth_kind("torus"), UsageError);
}
