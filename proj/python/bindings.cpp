#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstring>
#include <optional>
#include <string>

#include "epr/config.hpp"
#include "epr/epr.hpp"
#include "epr/imageops.hpp"
#include "epr/metrics.hpp"
#include "epr/parallel.hpp"

namespace py = pybind11;
using namespace epr;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RunConfig make_config(const std::string& text, const std::optional<std::string>& method,
                      const std::optional<std::uint64_t>& seed) {
    RunConfig cfg = parse_config(text);
    if (method) {
        if (*method != "plane" && *method != "gaze" && *method != "mesh") {
            throw std::invalid_argument("method must be plane, gaze or mesh");
        }
        cfg.proxy.method = *method;
    }
    if (seed) cfg.seed = *seed;
    return cfg;
}

Image to_image(const U8Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw std::invalid_argument("expected an (H, W, 3) uint8 array");
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.rgb.data(), a.data(), img.rgb.size());
    return img;
}

U8Array from_image(const Image& img) {
    U8Array a({img.height, img.width, 3});
    std::memcpy(a.mutable_data(), img.rgb.data(), img.rgb.size());
    return a;
}

py::array_t<bool> from_mask(const Mask& m) {
    py::array_t<bool> a({m.height, m.width});
    bool* out = a.mutable_data();
    for (std::size_t i = 0; i < m.bits.size(); ++i) out[i] = m.bits[i] != 0;
    return a;
}

U8Array from_status(const EprFrame& f) {
    U8Array a({f.height(), f.width()});
    std::uint8_t* out = a.mutable_data();
    for (std::size_t i = 0; i < f.status.size(); ++i) out[i] = static_cast<std::uint8_t>(f.status[i]);
    return a;
}

Eye eye_or_dominant(const std::optional<std::string>& name, const EyeRig& rig) {
    if (!name) return rig.dominant;
    if (*name == "left") return Eye::left;
    if (*name == "right") return Eye::right;
    throw std::invalid_argument("eye must be left or right");
}

CvdDeficiency cvd_of(const std::string& name) {
    if (name == "protanopia") return CvdDeficiency::protanopia;
    if (name == "deuteranopia") return CvdDeficiency::deuteranopia;
    throw std::invalid_argument("deficiency must be protanopia or deuteranopia");
}

SweepParam sweep_param_of(const std::string& name) {
    for (SweepParam p : {SweepParam::plane_depth, SweepParam::mesh_depth_error, SweepParam::mesh_density})
        if (name == to_string(p)) return p;
    throw std::invalid_argument("param must be plane_depth, mesh_depth_error or mesh_density");
}

py::dict stats_dict(const MisalignmentStats& s) {
    py::dict d;
    d["valid_count"] = s.valid_count;
    d["median_m"] = s.median_m;
    d["p95_m"] = s.p95_m;
    d["max_m"] = s.max_m;
    d["median_px"] = s.median_px;
    return d;
}

py::dict render(const std::string& config, const std::optional<std::string>& method,
                const std::optional<std::uint64_t>& seed, bool ground_truth) {
    const RunConfig cfg = make_config(config, method, seed);
    py::dict out;
    {
        py::gil_scoped_release release;
        const EyeRig rig = build_rig(cfg.rig);
        const Scene scene = build_board_scene(cfg.board);
        const ProxyGeometry proxy = proxy_from_config(cfg, scene, rig);
        const Image world = raycast_render(scene, rig.world_camera).image;
        const EprFrame left = epr_render(rig.left_eye, rig.world_camera, world, proxy, rig);
        const EprFrame right = epr_render(rig.right_eye, rig.world_camera, world, proxy, rig);
        std::optional<Image> gt_left, gt_right;
        if (ground_truth) {
            gt_left = raycast_render(scene, rig.left_eye).image;
            gt_right = raycast_render(scene, rig.right_eye).image;
        }
        py::gil_scoped_acquire acquire;
        out["world"] = from_image(world);
        out["left"] = from_image(left.image);
        out["right"] = from_image(right.image);
        out["left_status"] = from_status(left);
        out["right_status"] = from_status(right);
        if (ground_truth) {
            out["left_truth"] = from_image(*gt_left);
            out["right_truth"] = from_image(*gt_right);
        }
    }
    return out;
}

py::dict misalignment(const std::string& config, const std::optional<std::string>& method,
                      const std::optional<std::uint64_t>& seed, const std::optional<std::string>& eye) {
    const RunConfig cfg = make_config(config, method, seed);
    const EyeRig rig = build_rig(cfg.rig);
    const Eye e = eye_or_dominant(eye, rig);
    MisalignmentMap map;
    {
        py::gil_scoped_release release;
        const Scene scene = build_board_scene(cfg.board);
        map = misalignment_map(scene, rig, proxy_from_config(cfg, scene, rig), e);
    }
    py::array_t<double> disp({map.height, map.width});
    double* out = disp.mutable_data();
    for (std::size_t i = 0; i < map.samples.size(); ++i)
        out[i] = map.samples[i].valid ? map.samples[i].surface_displacement_m : std::nan("");
    py::dict d = stats_dict(summarize(map));
    d["displacement_m"] = disp;
    return d;
}

py::list sweep(const std::string& config, const std::string& param, const std::vector<double>& values,
               const std::optional<std::string>& method, const std::optional<std::uint64_t>& seed,
               const std::optional<std::string>& eye) {
    const RunConfig cfg = make_config(config, method, seed);
    const EyeRig rig = build_rig(cfg.rig);
    SweepSettings s;
    s.method = cfg.proxy.method;
    s.param = sweep_param_of(param);
    s.values = values;
    s.eye = eye_or_dominant(eye, rig);
    s.mesh_density = cfg.proxy.mesh_density;
    s.mesh_depth_error_m = cfg.proxy.mesh_depth_error_m;
    s.seed = cfg.seed;
    std::vector<SweepRow> rows;
    {
        py::gil_scoped_release release;
        rows = depth_sweep(build_board_scene(cfg.board), rig, s);
    }
    py::list out;
    for (const auto& r : rows) {
        py::dict d = stats_dict(r.stats);
        d["method"] = r.method;
        d["param"] = r.param_name;
        d["value"] = r.param_value;
        out.append(d);
    }
    return out;
}

py::dict select_task(const std::string& config, const std::optional<std::string>& method,
                const std::optional<std::uint64_t>& seed, const std::optional<int>& trials,
                const std::optional<double>& sigma) {
    RunConfig cfg = make_config(config, method, seed);
    if (trials) cfg.task.trials = *trials;
    if (sigma) cfg.task.touch_noise_m = *sigma;
    SelectionResult r;
    {
        py::gil_scoped_release release;
        r = selection_from_config(cfg);
    }
    py::list correct;
    for (const auto& t : r.trials) correct.append(t.correct);
    py::dict d;
    d["accuracy"] = r.accuracy;
    d["correct"] = correct;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Eye-perspective rendering simulator";

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::object err = py::handle(config_error.ptr())(std::string(e.code()) + ": " + e.what());
            err.attr("code") = e.code();
            err.attr("line") = e.line();
            PyErr_SetObject(config_error.ptr(), err.ptr());
        }
    });

    m.def("set_thread_count", &set_thread_count, py::arg("count"), "Worker threads; 0 uses all cores.");
    m.def(
        "resolve_config", [](const std::string& text) { return format_config(parse_config(text)); },
        py::arg("text") = "", "Canonical text of the fully resolved config.");
    m.def("render", &render, py::arg("config") = "", py::arg("method") = py::none(), py::arg("seed") = py::none(),
          py::arg("ground_truth") = false,
          "EPR frames for both eyes as (H, W, 3) uint8 arrays plus per-pixel status codes.");
    m.def("misalignment", &misalignment, py::arg("config") = "", py::arg("method") = py::none(),
          py::arg("seed") = py::none(), py::arg("eye") = py::none(),
          "Per-pixel surface displacement in meters (NaN where invalid) and its summary statistics.");
    m.def("sweep", &sweep, py::arg("config") = "", py::arg("param") = "plane_depth",
          py::arg("values") = parse_range("0.55:1.15:0.05"), py::arg("method") = py::none(),
          py::arg("seed") = py::none(), py::arg("eye") = py::none(), "Misalignment statistics per parameter value.");
    m.def("select", &select_task, py::arg("config") = "", py::arg("method") = py::none(), py::arg("seed") = py::none(),
          py::arg("trials") = py::none(), py::arg("sigma") = py::none(), "Simulated square-selection task.");

    m.def(
        "canny",
        [](const U8Array& img, double sigma, double low, double high) {
            return from_mask(canny(to_image(img), {sigma, low, high}));
        },
        py::arg("image"), py::arg("sigma") = CannyParams{}.sigma, py::arg("low") = CannyParams{}.low,
        py::arg("high") = CannyParams{}.high);
    m.def(
        "hue_segment",
        [](const U8Array& img, double h0, double h1, double min_sat, double min_val) {
            return from_mask(hue_segment(to_image(img), h0, h1, min_sat, min_val));
        },
        py::arg("image"), py::arg("hue_min"), py::arg("hue_max"), py::arg("min_sat") = OpConfig{}.min_sat,
        py::arg("min_val") = OpConfig{}.min_val);
    m.def(
        "simulate_cvd",
        [](const U8Array& img, const std::string& d) { return from_image(simulate_cvd(to_image(img), cvd_of(d))); },
        py::arg("image"), py::arg("deficiency") = "protanopia");
    m.def(
        "daltonize",
        [](const U8Array& img, const std::string& d, double strength) {
            return from_image(daltonize(to_image(img), cvd_of(d), strength));
        },
        py::arg("image"), py::arg("deficiency") = "protanopia", py::arg("strength") = 1.0);
}
