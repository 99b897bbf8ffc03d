#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "wfiso/block_codec.hpp"
#include "wfiso/errors.hpp"
#include "wfiso/macrocell_grid.hpp"
#include "wfiso/reference_oracle.hpp"
#include "wfiso/volume.hpp"
#include "wfiso/wavefront_engine.hpp"

namespace py = pybind11;
using namespace wfiso;

namespace {

using Triple = std::array<float, 3>;

Vec3f vec(const Triple& t) { return {t[0], t[1], t[2]}; }
Triple triple(Vec3f v) { return {v.x, v.y, v.z}; }
Int3 int3(const std::array<int, 3>& d) { return {d[0], d[1], d[2]}; }
std::array<int, 3> dims_tuple(Int3 d) { return {d.x, d.y, d.z}; }

// numpy arrays are indexed [z, y, x] so the x axis is contiguous
py::array_t<float> volume_array(const Volume& v) {
    const Int3 d = v.dims();
    py::array_t<float> out({size_t(d.z), size_t(d.y), size_t(d.x)});
    std::memcpy(out.mutable_data(), v.values().data(), v.values().size() * sizeof(float));
    return out;
}

Volume volume_from_array(py::array_t<float, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 3) throw UsageError("volume array must be 3-D, indexed [z, y, x]");
    const Int3 d{int(a.shape(2)), int(a.shape(1)), int(a.shape(0))};
    return Volume(d, std::vector<float>(a.data(), a.data() + a.size()));
}

py::dict pass_dict(const PassStats& s) {
    py::dict d;
    d["pass_index"] = s.pass_index;
    d["n_active_before"] = s.n_active_before;
    d["n_spec"] = s.n_spec;
    d["visible_blocks"] = s.visible_blocks;
    d["active_blocks"] = s.active_blocks;
    d["new_decompressed"] = s.new_decompressed;
    d["cache_slots"] = s.cache_slots;
    d["utilization"] = s.utilization;
    d["completeness"] = s.completeness;
    d["duration"] = s.duration;
    return d;
}

py::dict image_dict(const Framebuffer& fb) {
    py::array_t<uint8_t> rgba({size_t(fb.height), size_t(fb.width), size_t(4)});
    std::memcpy(rgba.mutable_data(), fb.rgba.data(), fb.rgba.size());
    py::array_t<float> depth({size_t(fb.height), size_t(fb.width)});
    std::memcpy(depth.mutable_data(), fb.depth.data(), fb.depth.size() * sizeof(float));
    py::dict d;
    d["rgba"] = rgba;
    d["depth"] = depth;
    d["completeness"] = fb.completeness;
    return d;
}

Framebuffer framebuffer_from(const py::dict& d) {
    auto rgba = py::array_t<uint8_t, py::array::c_style | py::array::forcecast>::ensure(d["rgba"]);
    auto depth = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(d["depth"]);
    if (!rgba || !depth || rgba.ndim() != 3 || depth.ndim() != 2) throw UsageError("expected an image dict from render");
    Framebuffer fb;
    fb.height = int(depth.shape(0));
    fb.width = int(depth.shape(1));
    if (rgba.shape(0) != depth.shape(0) || rgba.shape(1) != depth.shape(1) || rgba.shape(2) != 4) {
        throw UsageError("rgba and depth shapes disagree");
    }
    fb.rgba.assign(rgba.data(), rgba.data() + rgba.size());
    fb.depth.assign(depth.data(), depth.data() + depth.size());
    return fb;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Progressive wavefront isosurface raycasting over block-compressed volumes";

    py::register_exception<InputError>(m, "InputError", PyExc_IOError);
    py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

    py::class_<Volume>(m, "Volume")
        .def_property_readonly("dims", [](const Volume& v) { return dims_tuple(v.dims()); })
        .def_property_readonly("value_range", [](const Volume& v) { return std::pair(v.value_range().min, v.value_range().max); })
        .def("to_numpy", &volume_array)
        .def_static("from_numpy", &volume_from_array, py::arg("values"));

    py::class_<CompressedVolume>(m, "CompressedVolume")
        .def_property_readonly("dims", [](const CompressedVolume& cv) { return dims_tuple(cv.dims()); })
        .def_property_readonly("block_dims", [](const CompressedVolume& cv) { return dims_tuple(cv.block_dims()); })
        .def_property_readonly("qbits", &CompressedVolume::qbits)
        .def_property_readonly("block_count", &CompressedVolume::block_count)
        .def_property_readonly("block_stride_bytes", &CompressedVolume::block_stride_bytes)
        .def("error_bound", &CompressedVolume::error_bound, py::arg("block_id"))
        .def("decompress_block", [](const CompressedVolume& cv, uint32_t id) {
            const BlockData b = cv.decompress_block(id);
            py::array_t<float> out({size_t(4), size_t(4), size_t(4)});
            std::memcpy(out.mutable_data(), b.data(), sizeof(float) * b.size());
            return out;
        }, py::arg("block_id"))
        .def("to_bytes", [](const CompressedVolume& cv) {
            const auto bytes = serialize_wcz(cv);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        })
        .def_static("from_bytes", [](py::bytes b) {
            const std::string s = b;
            return deserialize_wcz(std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
        });

    py::class_<MacrocellGrids>(m, "Grids")
        .def_property_readonly("fine_dims", [](const MacrocellGrids& g) { return dims_tuple(g.fine_dims); })
        .def_property_readonly("coarse_dims", [](const MacrocellGrids& g) { return dims_tuple(g.coarse_dims); })
        .def("fine_range", [](const MacrocellGrids& g, uint32_t id) { return std::pair(g.fine.at(id).min, g.fine.at(id).max); })
        .def("coarse_range", [](const MacrocellGrids& g, uint32_t id) { return std::pair(g.coarse.at(id).min, g.coarse.at(id).max); });

    py::class_<Camera>(m, "Camera")
        .def(py::init([](Triple eye, Triple look_at, Triple up, float fov_y) {
                 return Camera::look_at(vec(eye), vec(look_at), vec(up), fov_y);
             }),
             py::arg("eye"), py::arg("look_at"), py::arg("up") = Triple{0.f, 1.f, 0.f}, py::arg("fov_y") = 45.f)
        .def_property_readonly("eye", [](const Camera& c) { return triple(c.eye); })
        .def_property_readonly("look_dir", [](const Camera& c) { return triple(c.look_dir); })
        .def_property_readonly("fov_y", [](const Camera& c) { return c.fov_y; });

    m.def("synthesize", [](const std::string& kind, std::array<int, 3> dims, uint64_t seed) {
        return synthesize(parse_synth_kind(kind), int3(dims), seed);
    }, py::arg("kind"), py::arg("dims"), py::arg("seed") = 0);
    m.def("load_raw", [](const std::string& path, std::array<int, 3> dims, const std::string& dtype) {
        return load_raw(path, int3(dims), parse_sample_type(dtype));
    }, py::arg("path"), py::arg("dims"), py::arg("dtype") = "f32");
    m.def("compress", &compress_volume, py::arg("volume"), py::arg("qbits") = 16);
    m.def("save_wcz", [](const std::string& path, const CompressedVolume& cv) { save_wcz(path, cv); },
          py::arg("path"), py::arg("volume"));
    m.def("load_wcz", [](const std::string& path) { return load_wcz(path); }, py::arg("path"));
    m.def("build_grids", &build_grids, py::arg("volume"));
    m.def("decode_full", &decode_full, py::arg("volume"));

    m.def("render", [](const CompressedVolume& cv, const Camera& cam, float iso, int width, int height,
                       bool speculation, uint32_t max_spec, bool keep_snapshots,
                       std::optional<MacrocellGrids> grids) {
        RenderOptions opts;
        opts.width = width;
        opts.height = height;
        opts.speculation = speculation;
        opts.max_spec = max_spec;
        opts.keep_snapshots = keep_snapshots;
        RenderResult r;
        {
            py::gil_scoped_release release;
            r = render(cv, grids ? *grids : build_grids(cv), cam, iso, opts);
        }
        py::dict out = image_dict(r.image);
        py::list passes;
        for (const auto& p : r.passes) passes.append(pass_dict(p));
        out["passes"] = passes;
        py::list snaps;
        for (const auto& s : r.snapshots) snaps.append(image_dict(s));
        out["snapshots"] = snaps;
        return out;
    }, py::arg("volume"), py::arg("camera"), py::arg("iso"), py::arg("width") = 128, py::arg("height") = 128,
       py::arg("speculation") = true, py::arg("max_spec") = kDefaultMaxSpec, py::arg("keep_snapshots") = false,
       py::arg("grids") = py::none());

    m.def("reference_render", [](const Volume& v, const Camera& cam, float iso, int width, int height) {
        Framebuffer fb;
        {
            py::gil_scoped_release release;
            fb = reference_render(v, cam, iso, width, height);
        }
        return image_dict(fb);
    }, py::arg("volume"), py::arg("camera"), py::arg("iso"), py::arg("width") = 128, py::arg("height") = 128);

    m.def("compare_images", [](const py::dict& a, const py::dict& b) {
        const ImageDiff d = compare_images(framebuffer_from(a), framebuffer_from(b));
        py::dict out;
        out["hit_mask_mismatches"] = d.hit_mask_mismatches;
        out["max_depth_delta"] = d.max_depth_delta;
        out["max_rgb_delta"] = d.max_rgb_delta;
        return out;
    }, py::arg("a"), py::arg("b"));
}
