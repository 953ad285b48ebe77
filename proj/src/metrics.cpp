#include "epr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "epr/imageops.hpp"
#include "epr/parallel.hpp"

namespace epr {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

MisalignmentSample measure_pixel(double u, double v, const PinholeCamera& eye, const PinholeCamera& world_cam,
                                 const ProxyGeometry& proxy, const Scene& scene, const EyeRig& rig,
                                 double occlusion_eps) {
    MisalignmentSample s;
    s.u = u;
    s.v = v;
    const ReprojectionTrace tr = reproject_point(u, v, eye, world_cam, proxy, scene, rig);
    if (!tr.proxy_point || !tr.camera_scene_hit || !tr.eye_scene_hit) return s;
    const auto px = project(world_cam, *tr.proxy_point);
    if (!px || px->u > world_cam.width() - 1 || px->v > world_cam.height() - 1) return s;
    const Vec3 c = world_cam.position();
    const double dist = distance(c, *tr.proxy_point);
    if (proxy_blocks(proxy, Ray(c, *tr.proxy_point - c), dist, occlusion_eps, rig)) return s;

    const Vec3 shown = tr.camera_scene_hit->point;
    const Vec3 real = tr.eye_scene_hit->point;
    s.surface_displacement_m = distance(shown, real);
    const auto ps = eye.project_unclipped(shown);
    const auto pr = eye.project_unclipped(real);
    if (!ps || !pr) return s;
    s.image_error_px = std::hypot(ps->u - pr->u, ps->v - pr->v);
    const Vec3 a = normalize(shown - eye.position());
    const Vec3 b = normalize(real - eye.position());
    // atan2 form stays accurate for tiny angles
    s.angular_error_rad = std::atan2(norm(cross(a, b)), dot(a, b));
    s.valid = true;
    return s;
}

MisalignmentMap misalignment_map(const Scene& scene, const EyeRig& rig, const ProxyGeometry& proxy, Eye which) {
    const PinholeCamera& eye = rig.eye(which);
    MisalignmentMap map{eye.width(), eye.height(), {}};
    map.samples.resize(static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height));
    parallel_for(static_cast<std::size_t>(map.height), [&](std::size_t row) {
        for (int x = 0; x < map.width; ++x) {
            map.samples[row * static_cast<std::size_t>(map.width) + static_cast<std::size_t>(x)] =
                measure_pixel(x, static_cast<double>(row), eye, rig.world_camera, proxy, scene, rig);
        }
    });
    return map;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

MisalignmentStats summarize(const MisalignmentMap& map) {
    std::vector<double> disp;
    std::vector<double> px;
    for (const auto& s : map.samples) {
        if (!s.valid) continue;
        disp.push_back(s.surface_displacement_m);
        px.push_back(s.image_error_px);
    }
    MisalignmentStats st;
    st.valid_count = disp.size();
    st.median_m = percentile(disp, 0.5);
    st.p95_m = percentile(disp, 0.95);
    st.max_m = disp.empty() ? kNaN : *std::max_element(disp.begin(), disp.end());
    st.median_px = percentile(px, 0.5);
    return st;
}

const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::plane_depth: return "plane_depth";
        case SweepParam::mesh_depth_error: return "mesh_depth_error";
        case SweepParam::mesh_density: return "mesh_density";
    }
    return "?";
}

std::vector<SweepRow> depth_sweep(const Scene& scene, const EyeRig& rig, const SweepSettings& settings) {
    if (settings.values.empty()) throw std::invalid_argument("depth_sweep: empty parameter range");
    const bool plane_like = settings.method == "plane" || settings.method == "gaze";
    if (plane_like != (settings.param == SweepParam::plane_depth) ||
        (!plane_like && settings.method != "mesh")) {
        throw std::invalid_argument(std::string("depth_sweep: parameter ") + to_string(settings.param) +
                                    " does not apply to method " + settings.method);
    }
    std::vector<SweepRow> rows;
    for (double value : settings.values) {
        ProxyGeometry proxy;
        switch (settings.param) {
            case SweepParam::plane_depth:
                if (!(value > 0.0)) throw std::invalid_argument("depth_sweep: plane depth must be positive");
                proxy = settings.method == "plane" ? ProxyGeometry{FixedPlaneProxy{value}}
                                                   : ProxyGeometry{GazePlaneProxy{value}};
                break;
            case SweepParam::mesh_depth_error:
                proxy = make_mesh_proxy(scene, settings.mesh_density, value, settings.seed);
                break;
            case SweepParam::mesh_density:
                proxy = make_mesh_proxy(scene, value, settings.mesh_depth_error_m, settings.seed);
                break;
        }
        rows.push_back({settings.method, to_string(settings.param), value,
                        summarize(misalignment_map(scene, rig, proxy, settings.eye))});
    }
    return rows;
}

std::vector<double> parse_range(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("range: cannot parse '" + item + "' in '" + text + "'");
        }
    }
    if (parts.size() != 3) throw std::invalid_argument("range must look like start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (!(step > 0.0) || !(stop >= start)) throw std::invalid_argument("range: need step > 0 and stop >= start");
    std::vector<double> values;
    for (long k = 0;; ++k) {
        const double v = start + static_cast<double>(k) * step;
        if (v > stop + 1e-12) break;
        values.push_back(v);
        if (values.size() > 1000000) throw std::invalid_argument("range: too many values");
    }
    return values;
}

// ---------------------------------------------------------------------------
// Selection task

namespace {

const SceneObject& board_object(const Scene& scene, int id) {
    const SceneObject* obj = scene.find(id);
    if (!obj || !std::holds_alternative<Checkerboard>(obj->material)) {
        throw std::invalid_argument("simulate_selection: scene has no checkerboard with id " + std::to_string(id));
    }
    return *obj;
}

Image mask_to_image(const Mask& m) {
    Image img(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) img.set(x, y, {255, 255, 255});
    return img;
}

}  // namespace

SelectionResult simulate_selection(const Scene& scene, const EyeRig& rig, const ProxyForTarget& proxy_for,
                                   const SelectionSettings& settings) {
    if (settings.trials < 1) throw std::invalid_argument("simulate_selection: trials must be >= 1");
    if (!(settings.touch_noise_sigma_m >= 0.0)) throw std::invalid_argument("simulate_selection: sigma must be >= 0");
    const SceneObject& board = board_object(scene, settings.board_id);
    const auto& cb = std::get<Checkerboard>(board.material);
    const Plane board_plane(cb.origin, cb.normal());
    const PinholeCamera& eye = rig.dominant_eye();

    SelectionResult result;
    result.trials.resize(static_cast<std::size_t>(settings.trials));
    for (int i = 0; i < settings.trials; ++i) {
        Rng rng(settings.seed, static_cast<std::uint64_t>(i));
        SelectionTrial& trial = result.trials[static_cast<std::size_t>(i)];
        trial.index = i;
        trial.seed = settings.seed;
        trial.touch_noise_sigma_m = settings.touch_noise_sigma_m;
        trial.target.col = static_cast<int>(rng.below(static_cast<std::uint64_t>(cb.cols)));
        trial.target.row = static_cast<int>(rng.below(static_cast<std::uint64_t>(cb.rows)));
        const double noise_u = rng.normal() * settings.touch_noise_sigma_m;
        const double noise_v = rng.normal() * settings.touch_noise_sigma_m;

        const auto highlight =
            highlight_square(rig.world_camera, board, trial.target.col, trial.target.row, settings.outline_px);
        if (highlight.off_frame) continue;

        const ProxyGeometry proxy = proxy_for(cb.square_center(trial.target.col, trial.target.row));
        const EprFrame frame = epr_render(eye, rig.world_camera, mask_to_image(highlight.mask), proxy, rig);
        double su = 0.0, sv = 0.0;
        std::size_t n = 0;
        for (int y = 0; y < frame.height(); ++y) {
            for (int x = 0; x < frame.width(); ++x) {
                if (frame.at(x, y) == PixelStatus::valid && frame.image.at(x, y).r >= 128) {
                    su += x;
                    sv += y;
                    ++n;
                }
            }
        }
        if (n == 0) continue;
        const auto touch = ray_plane_intersect(unproject(eye, su / n, sv / n), board_plane);
        if (!touch) continue;
        const Vec3 p = touch->point + cb.axis_u * noise_u + cb.axis_v * noise_v;
        trial.selected = square_index(cb, p);
        trial.correct = trial.selected && *trial.selected == trial.target;
    }
    const auto hits = std::count_if(result.trials.begin(), result.trials.end(), [](const auto& t) { return t.correct; });
    result.accuracy = static_cast<double>(hits) / static_cast<double>(settings.trials);
    return result;
}

SelectionResult simulate_selection(const Scene& scene, const EyeRig& rig, const ProxyGeometry& proxy,
                                   const SelectionSettings& settings) {
    return simulate_selection(scene, rig, [&](const Vec3&) { return proxy; }, settings);
}

GazePlaneProxy settled_gaze_proxy(const Scene& scene, const EyeRig& rig, const Vec3& target,
                                  const GazeFilterConfig& config) {
    const PinholeCamera& eye = rig.dominant_eye();
    GazeState state(config, eye.forward());
    const Ray gaze(eye.position(), target - eye.position());
    for (int k = 0; k < config.n_stab; ++k) state.ingest(gaze, scene.bvh(), k / config.sample_rate_hz);
    if (!state.has_depth()) throw std::invalid_argument("settled_gaze_proxy: gaze ray misses the scene");
    return state.snapshot();
}

// ---------------------------------------------------------------------------
// Gaze timeline

GazeStepScene build_gaze_step_scene(const BoardSpec& board, const EyeRig& rig, double near_depth_m) {
    if (!(near_depth_m > 0.0 && near_depth_m < board.distance_m)) {
        throw std::invalid_argument("build_gaze_step_scene: near depth must lie between the rig and the board");
    }
    SceneObject board_obj = make_board_object(board, kBoardObjectId);
    const Vec3 far = std::get<Checkerboard>(board_obj.material).center();
    // 0.15 m toward the user's left of the eye axis, 8 cm wide
    const Vec3 eye = rig.dominant_eye().position();
    const Vec3 near{eye.x + 0.15, eye.y, eye.z + near_depth_m};
    SceneObject quad = make_fronto_quad(near, 0.08, 0.08, {200, 40, 40}, kNearQuadObjectId);
    std::vector<SceneObject> objects;
    objects.push_back(std::move(board_obj));
    objects.push_back(std::move(quad));
    return {Scene(std::move(objects)), far, near};
}

std::vector<TimelineRow> gaze_timeline(const Scene& scene, const EyeRig& rig, const std::vector<GazeEvent>& script,
                                       const TimelineSettings& settings) {
    if (script.empty()) throw std::invalid_argument("gaze_timeline: empty script");
    for (std::size_t i = 1; i < script.size(); ++i) {
        if (!(script[i].time_s > script[i - 1].time_s)) throw std::invalid_argument("gaze_timeline: times must increase");
    }
    if (!(settings.t_end >= settings.t_start)) throw std::invalid_argument("gaze_timeline: t_end before t_start");
    const double dt = 1.0 / settings.filter.sample_rate_hz;
    const PinholeCamera& eye = rig.dominant_eye();
    GazeState state(settings.filter, eye.forward());

    std::vector<TimelineRow> rows;
    const auto k0 = static_cast<long>(std::ceil(settings.t_start / dt - 1e-9));
    const auto k1 = static_cast<long>(std::floor(settings.t_end / dt + 1e-9));
    for (long k = k0; k <= k1; ++k) {
        const double t = static_cast<double>(k) * dt;
        std::size_t active = 0;
        for (std::size_t i = 0; i < script.size(); ++i)
            if (script[i].time_s < t) active = i;
        const Vec3 target = script[active].target;
        state.ingest(Ray(eye.position(), target - eye.position()), scene.bvh(), t);

        TimelineRow row;
        row.t = t;
        row.proxy_depth_m = state.has_depth() ? state.current_depth() : kNaN;
        row.gaze_displacement_m = kNaN;
        const auto gaze_px = eye.project_unclipped(target);
        if (state.has_depth() && gaze_px) {
            const auto s = measure_pixel(gaze_px->u, gaze_px->v, eye, rig.world_camera, state.snapshot(), scene, rig);
            if (s.valid) row.gaze_displacement_m = s.surface_displacement_m;
        }
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    char buf[64];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&](const auto& c) {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, std::string>) {
                        out += c;
                    } else if constexpr (std::is_same_v<T, long long>) {
                        out += std::to_string(c);
                    } else if (std::isnan(c)) {
                        out += "nan";
                    } else {
                        std::snprintf(buf, sizeof buf, "%.6g", c);
                        out += buf;
                    }
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const CsvTable& table, const std::string& path) { write_file(path, format_csv(table)); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

CsvTable misalignment_table(const MisalignmentMap& map, const std::string& method, Eye eye) {
    CsvTable t{{"method", "eye", "pixel_u", "pixel_v", "valid", "displacement_mm", "image_err_px", "angular_err_arcmin"},
               {}};
    t.rows.reserve(map.samples.size());
    constexpr double kArcminPerRad = 60.0 * 180.0 / 3.14159265358979323846;
    for (const auto& s : map.samples) {
        t.rows.push_back({method, std::string(to_string(eye)), static_cast<long long>(s.u), static_cast<long long>(s.v),
                          static_cast<long long>(s.valid ? 1 : 0), s.valid ? s.surface_displacement_m * 1e3 : kNaN,
                          s.valid ? s.image_error_px : kNaN, s.valid ? s.angular_error_rad * kArcminPerRad : kNaN});
    }
    return t;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
    CsvTable t{{"method", "param_name", "param_value", "median_mm", "p95_mm", "median_px"}, {}};
    for (const auto& r : rows) {
        t.rows.push_back({r.method, r.param_name, r.param_value, r.stats.median_m * 1e3, r.stats.p95_m * 1e3,
                          r.stats.median_px});
    }
    return t;
}

CsvTable selection_table(const SelectionResult& result) {
    CsvTable t{{"trial", "target_col", "target_row", "sel_col", "sel_row", "correct"}, {}};
    for (const auto& tr : result.trials) {
        const CsvCell sc = tr.selected ? CsvCell{static_cast<long long>(tr.selected->col)} : CsvCell{std::string()};
        const CsvCell sr = tr.selected ? CsvCell{static_cast<long long>(tr.selected->row)} : CsvCell{std::string()};
        t.rows.push_back({static_cast<long long>(tr.index), static_cast<long long>(tr.target.col),
                          static_cast<long long>(tr.target.row), sc, sr, static_cast<long long>(tr.correct ? 1 : 0)});
    }
    return t;
}

CsvTable timeline_table(const std::vector<TimelineRow>& rows) {
    CsvTable t{{"t_s", "proxy_depth_m", "gaze_displacement_mm"}, {}};
    for (const auto& r : rows) t.rows.push_back({r.t, r.proxy_depth_m, r.gaze_displacement_m * 1e3});
    return t;
}

}  // namespace epr
