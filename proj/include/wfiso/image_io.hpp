#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wfiso/wavefront_engine.hpp"

namespace wfiso {

/// Binary PPM (P6): "P6\n<w> <h>\n255\n" followed by RGB triples, top row first.
std::vector<uint8_t> encode_ppm(const Framebuffer& fb);
void write_ppm(const std::filesystem::path& path, const Framebuffer& fb);
/// RGB bytes of a P6 file written by write_ppm.
std::vector<uint8_t> read_ppm_rgb(const std::filesystem::path& path, int& width, int& height);

void write_file(const std::filesystem::path& path, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> read_file(const std::filesystem::path& path);

}  // namespace wfiso
