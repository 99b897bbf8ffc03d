#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wfiso/bench.hpp"
#include "wfiso/block_codec.hpp"
#include "wfiso/errors.hpp"
#include "wfiso/image_io.hpp"
#include "wfiso/macrocell_grid.hpp"
#include "wfiso/reference_oracle.hpp"
#include "wfiso/volume.hpp"
#include "wfiso/wavefront_engine.hpp"

#ifdef WFISO_HAVE_SERVICE
#include "wfiso/service/server.hpp"
#endif

namespace fs = std::filesystem;
using namespace wfiso;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
    return parts;
}

Int3 parse_dims(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw UsageError("--dims expects X,Y,Z");
    Int3 d;
    for (int i = 0; i < 3; ++i) {
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(parts[i], &used);
        } catch (const std::exception&) {
            throw UsageError("--dims: '" + parts[i] + "' is not an integer");
        }
        if (used != parts[i].size() || v < 1) throw UsageError("--dims: '" + parts[i] + "' is not a positive integer");
        d[i] = v;
    }
    return d;
}

Vec3f parse_vec(const std::string& s, const char* flag) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw UsageError(std::string(flag) + " expects x,y,z");
    Vec3f v;
    for (int i = 0; i < 3; ++i) {
        size_t used = 0;
        try {
            v[i] = std::stof(parts[i], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != parts[i].size() || !std::isfinite(v[i])) {
            throw UsageError(std::string(flag) + ": '" + parts[i] + "' is not a finite number");
        }
    }
    return v;
}

bool parse_on_off(const std::string& s) {
    if (s == "on") return true;
    if (s == "off") return false;
    throw UsageError("--speculation expects on or off, got '" + s + "'");
}

Vec3f volume_center(Int3 d) { return {(d.x - 1) / 2.f, (d.y - 1) / 2.f, (d.z - 1) / 2.f}; }

struct ViewArgs {
    std::string volume;
    float iso = 0.f;
    std::string eye, look_at, up = "0,1,0";
    float fov = 45.f;
    int width = 512, height = 512;
    std::string speculation = "on";
    uint32_t max_spec = kDefaultMaxSpec;

    Camera camera(Int3 dims) const {
        const Vec3f center = volume_center(dims);
        const Vec3f target = look_at.empty() ? center : parse_vec(look_at, "--look-at");
        const Vec3f from = eye.empty()
                               ? center + Vec3f{0.f, 0.f, 1.8f * float(std::max({dims.x, dims.y, dims.z}))}
                               : parse_vec(eye, "--eye");
        if (!(fov > 0.f && fov < 180.f)) throw UsageError("--fov must be in (0, 180)");
        return Camera::look_at(from, target, parse_vec(up, "--up"), fov);
    }
    void check_iso() const {
        if (!std::isfinite(iso)) throw UsageError("--iso must be finite");
    }
    void check_size() const {
        if (width < 1 || height < 1) throw UsageError("--width and --height must be positive");
    }
};

void add_view_options(CLI::App* cmd, ViewArgs& a, bool with_camera) {
    cmd->add_option("--volume", a.volume, "compressed volume (.wcz)")->required();
    cmd->add_option("--iso", a.iso, "isovalue")->required();
    cmd->add_option("--width", a.width, "image width")->capture_default_str();
    cmd->add_option("--height", a.height, "image height")->capture_default_str();
    if (with_camera) {
        cmd->add_option("--eye", a.eye, "camera position x,y,z (default: in front of the volume)");
        cmd->add_option("--look-at", a.look_at, "target x,y,z (default: volume center)");
        cmd->add_option("--up", a.up, "up vector x,y,z")->capture_default_str();
        cmd->add_option("--fov", a.fov, "vertical field of view in degrees")->capture_default_str();
    }
    cmd->add_option("--speculation", a.speculation, "on|off")->capture_default_str();
    cmd->add_option("--max-spec", a.max_spec, "speculation clamp")->capture_default_str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw InputError("write failed: " + path.string());
}

int cmd_compress(const std::string& input, const std::string& synth, const std::string& dims, const std::string& dtype,
                 int qbits, uint64_t seed, const std::string& output) {
    if (qbits < kMinQBits || qbits > kMaxQBits) {
        throw UsageError("--qbits must be in [" + std::to_string(kMinQBits) + ", " + std::to_string(kMaxQBits) + "]");
    }
    if (input.empty() == synth.empty()) throw UsageError("give exactly one of --input or --synth");
    const Int3 d = parse_dims(dims);
    const Volume v = synth.empty() ? load_raw(input, d, parse_sample_type(dtype))
                                   : synthesize(parse_synth_kind(synth), d, seed);
    const CompressedVolume cv = compress_volume(v, qbits);
    save_wcz(output, cv);
    std::cout << "wrote " << output << ": " << cv.block_count() << " blocks, " << cv.block_stride_bytes()
              << " bytes/block, " << serialize_wcz(cv).size() << " bytes\n";
    return kOk;
}

int cmd_render(const ViewArgs& a, const std::string& out, const std::string& passes_dir, const std::string& stats) {
    a.check_iso();
    a.check_size();
    const CompressedVolume cv = load_wcz(a.volume);
    const Camera cam = a.camera(cv.dims());
    RenderOptions opts;
    opts.width = a.width;
    opts.height = a.height;
    opts.speculation = parse_on_off(a.speculation);
    opts.max_spec = a.max_spec;
    opts.keep_snapshots = !passes_dir.empty();
    const RenderResult r = render(cv, build_grids(cv), cam, a.iso, opts);

    write_ppm(out, r.image);
    if (!passes_dir.empty()) {
        fs::create_directories(passes_dir);
        for (size_t p = 0; p < r.snapshots.size(); ++p) {
            char name[32];
            std::snprintf(name, sizeof name, "pass_%03zu.ppm", p);
            write_ppm(fs::path(passes_dir) / name, r.snapshots[p]);
        }
    }
    if (!stats.empty()) write_text(stats, to_json(r.passes).dump(2) + "\n");
    std::cout << "passes " << r.passes.size() << ", completeness " << r.image.completeness << "\n";
    return kOk;
}

int cmd_bench(const std::string& volume, BenchConfig cfg, const std::string& speculation,
              std::optional<float> iso_min, std::optional<float> iso_max, const std::string& report) {
    cfg.speculation = parse_on_off(speculation);
    if (cfg.width < 1 || cfg.height < 1) throw UsageError("--width and --height must be positive");
    if (iso_min.has_value() != iso_max.has_value()) throw UsageError("give both --iso-min and --iso-max");
    if (iso_min) {
        if (!(*iso_min <= *iso_max)) throw UsageError("--iso-min must not exceed --iso-max");
        cfg.iso_range = ValueRange{*iso_min, *iso_max};
    }
    const CompressedVolume cv = load_wcz(volume);
    const nlohmann::json rep = run_bench(cv, cfg);
    const std::string text = rep.dump(2) + "\n";
    if (report.empty()) {
        std::cout << text;
    } else {
        write_text(report, text);
        const auto& s = rep.at("summary");
        std::cout << "renders " << s.at("renders") << ", median passes " << s.at("median_passes")
                  << ", avg visible fraction " << s.at("avg_visible_block_fraction") << "\n";
    }
    return kOk;
}

int cmd_oracle_check(const ViewArgs& a, bool corrupt, int max_report) {
    a.check_iso();
    a.check_size();
    const CompressedVolume cv = load_wcz(a.volume);
    const Camera cam = a.camera(cv.dims());
    RenderOptions opts;
    opts.width = a.width;
    opts.height = a.height;
    opts.speculation = parse_on_off(a.speculation);
    opts.max_spec = a.max_spec;
    opts.corrupt_cache_for_testing = corrupt;
    const Framebuffer wave = render(cv, build_grids(cv), cam, a.iso, opts).image;
    const Framebuffer ref = reference_render(decode_full(cv), cam, a.iso, a.width, a.height);
    const ImageDiff diff = compare_images(wave, ref);

    nlohmann::json rep{{"hit_mask_mismatches", diff.hit_mask_mismatches},
                       {"max_depth_delta", diff.max_depth_delta},
                       {"max_rgb_delta", diff.max_rgb_delta}};
    std::cout << rep.dump() << "\n";
    if (diff.hit_mask_mismatches == 0) return kOk;

    int shown = 0;
    for (size_t i = 0; i < wave.depth.size() && shown < max_report; ++i) {
        if (wave.hit(i) == ref.hit(i)) continue;
        std::cerr << "pixel (" << i % size_t(a.width) << ", " << i / size_t(a.width) << "): wavefront "
                  << (wave.hit(i) ? "hit z=" + std::to_string(wave.depth[i]) : std::string("miss")) << ", reference "
                  << (ref.hit(i) ? "hit z=" + std::to_string(ref.depth[i]) : std::string("miss")) << "\n";
        ++shown;
    }
    return kCheckFailed;
}

int cmd_serve(const std::string& volume, const std::string& address, uint16_t port) {
#ifdef WFISO_HAVE_SERVICE
    auto lv = service::LoadedVolume::from(load_wcz(volume));
    service::Server server(lv, address, port);
    std::cout << "listening on ws://" << address << ":" << server.port() << std::endl;
    server.run();
    return kOk;
#else
    (void)volume;
    (void)address;
    (void)port;
    throw UsageError("this build has no render service");
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Progressive wavefront isosurface raycaster over block-compressed volumes", "wfiso"};
    app.require_subcommand(1);
    int exit_code = kOk;

    auto* compress = app.add_subcommand("compress", "compress a raw or synthetic volume to .wcz");
    std::string c_input, c_synth, c_dims, c_dtype = "f32", c_output;
    int c_qbits = 16;
    uint64_t c_seed = 0;
    compress->add_option("--input", c_input, "raw little-endian sample file");
    compress->add_option("--synth", c_synth, "synthetic volume: sphere | marschner_lobb | value_noise");
    compress->add_option("--dims", c_dims, "X,Y,Z")->required();
    compress->add_option("--dtype", c_dtype, "u8 | u16 | f32")->capture_default_str();
    compress->add_option("--qbits", c_qbits, "bits per quantized sample")->capture_default_str();
    compress->add_option("--seed", c_seed, "seed for --synth value_noise")->capture_default_str();
    compress->add_option("--output", c_output, "output .wcz")->required();

    auto* render_cmd = app.add_subcommand("render", "render one view progressively");
    ViewArgs r_args;
    std::string r_out, r_passes, r_stats;
    add_view_options(render_cmd, r_args, true);
    render_cmd->add_option("--out", r_out, "final image (PPM)")->required();
    render_cmd->add_option("--passes-dir", r_passes, "directory for per-pass snapshots");
    render_cmd->add_option("--stats", r_stats, "per-pass statistics JSON");

    auto* bench = app.add_subcommand("bench", "benchmark over random isovalues and a camera orbit");
    BenchConfig b_cfg;
    std::string b_volume, b_spec = "on", b_report;
    std::optional<float> b_iso_min, b_iso_max;
    bench->add_option("--volume", b_volume, "compressed volume (.wcz)")->required();
    bench->add_option("--isovalues", b_cfg.n_isovalues, "number of isovalues")->capture_default_str();
    bench->add_option("--orbit-steps", b_cfg.orbit_steps, "cameras on the orbit")->capture_default_str();
    bench->add_option("--seed", b_cfg.seed, "isovalue seed")->capture_default_str();
    bench->add_option("--width", b_cfg.width, "image width")->capture_default_str();
    bench->add_option("--height", b_cfg.height, "image height")->capture_default_str();
    bench->add_option("--speculation", b_spec, "on|off")->capture_default_str();
    bench->add_option("--max-spec", b_cfg.max_spec, "speculation clamp")->capture_default_str();
    bench->add_option("--iso-min", b_iso_min, "lower end of the isovalue range");
    bench->add_option("--iso-max", b_iso_max, "upper end of the isovalue range");
    bench->add_flag("--timing", b_cfg.include_timing, "add wall-clock totals to the report");
    bench->add_option("--report", b_report, "report JSON (default: stdout)");

    auto* oracle = app.add_subcommand("oracle-check", "compare against the brute-force reference renderer");
    ViewArgs o_args;
    bool o_corrupt = false;
    int o_max_report = 20;
    add_view_options(oracle, o_args, true);
    oracle->add_flag("--corrupt-cache", o_corrupt, "overwrite cached blocks (negative control)")->group("");
    oracle->add_option("--max-report", o_max_report, "mismatching pixels to list")->capture_default_str();

    auto* serve = app.add_subcommand("serve", "stream progressive frames over WebSocket");
    std::string s_volume, s_address = "127.0.0.1";
    uint16_t s_port = 8765;
    serve->add_option("--volume", s_volume, "compressed volume (.wcz)")->required();
    serve->add_option("--address", s_address, "bind address")->capture_default_str();
    serve->add_option("--port", s_port, "TCP port (0 = ephemeral)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*compress) exit_code = cmd_compress(c_input, c_synth, c_dims, c_dtype, c_qbits, c_seed, c_output);
        if (*render_cmd) exit_code = cmd_render(r_args, r_out, r_passes, r_stats);
        if (*bench) exit_code = cmd_bench(b_volume, b_cfg, b_spec, b_iso_min, b_iso_max, b_report);
        if (*oracle) exit_code = cmd_oracle_check(o_args, o_corrupt, o_max_report);
        if (*serve) exit_code = cmd_serve(s_volume, s_address, s_port);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::system_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return exit_code;
}
