#include "wfiso/image_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "wfiso/errors.hpp"

namespace wfiso {

std::vector<uint8_t> encode_ppm(const Framebuffer& fb) {
    const std::string header = "P6\n" + std::to_string(fb.width) + " " + std::to_string(fb.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + size_t(fb.width) * fb.height * 3);
    for (size_t i = 0; i < fb.depth.size(); ++i) {
        out.insert(out.end(), fb.rgba.begin() + std::ptrdiff_t(4 * i), fb.rgba.begin() + std::ptrdiff_t(4 * i + 3));
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw InputError("short write to " + path.string());
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_ppm(const std::filesystem::path& path, const Framebuffer& fb) { write_file(path, encode_ppm(fb)); }

std::vector<uint8_t> read_ppm_rgb(const std::filesystem::path& path, int& width, int& height) {
    const auto bytes = read_file(path);
    std::istringstream head(std::string(bytes.begin(), bytes.begin() + std::ptrdiff_t(std::min<size_t>(bytes.size(), 64))));
    std::string magic;
    int maxval = 0;
    head >> magic >> width >> height >> maxval;
    if (magic != "P6" || maxval != 255 || width < 1 || height < 1) throw InputError(path.string() + ": not a P6 PPM");
    const size_t header = size_t(head.tellg()) + 1;
    const size_t expected = size_t(width) * size_t(height) * 3;
    if (bytes.size() != header + expected) throw InputError(path.string() + ": truncated PPM");
    return {bytes.begin() + std::ptrdiff_t(header), bytes.end()};
}

}  // namespace wfiso
