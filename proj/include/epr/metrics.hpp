#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epr/camera.hpp"
#include "epr/epr.hpp"
#include "epr/proxy.hpp"
#include "epr/scene.hpp"

namespace epr {

struct MisalignmentSample {
    double u{0.0}, v{0.0};
    double surface_displacement_m{0.0};  // |camera_scene_hit - eye_scene_hit|
    double image_error_px{0.0};          // same two points, projected into the eye
    double angular_error_rad{0.0};       // same two points, seen from the eye center
    bool valid{false};
};

/// Builds a sample from one trace. `valid` requires every ray to land and the
/// proxy point to be observed by the world camera (the same gate epr_render uses).
MisalignmentSample measure_pixel(double u, double v, const PinholeCamera& eye, const PinholeCamera& world_cam,
                                 const ProxyGeometry& proxy, const Scene& scene, const EyeRig& rig,
                                 double occlusion_eps = 1e-6);

struct MisalignmentMap {
    int width{0};
    int height{0};
    std::vector<MisalignmentSample> samples;  // row-major
};

MisalignmentMap misalignment_map(const Scene& scene, const EyeRig& rig, const ProxyGeometry& proxy, Eye eye);

struct MisalignmentStats {
    std::size_t valid_count{0};
    double median_m{0.0};
    double p95_m{0.0};
    double max_m{0.0};
    double median_px{0.0};
};

/// Percentile with linear interpolation between order statistics (q in [0, 1]).
double percentile(std::vector<double> values, double q);

/// Statistics over valid samples; NaN fields when there are none.
MisalignmentStats summarize(const MisalignmentMap& map);

enum class SweepParam { plane_depth, mesh_depth_error, mesh_density };

const char* to_string(SweepParam p);

struct SweepSettings {
    std::string method{"plane"};  // plane | gaze | mesh
    SweepParam param{SweepParam::plane_depth};
    std::vector<double> values;
    Eye eye{Eye::right};
    double mesh_density{2500.0};
    double mesh_depth_error_m{0.0};
    std::uint64_t seed{0};
};

struct SweepRow {
    std::string method;
    std::string param_name;
    double param_value{0.0};
    MisalignmentStats stats;
};

/// One misalignment map per parameter value. Throws std::invalid_argument on an
/// empty range or a parameter that does not apply to the method.
std::vector<SweepRow> depth_sweep(const Scene& scene, const EyeRig& rig, const SweepSettings& settings);

/// "start:stop:step", stop-inclusive within 1e-12. Throws std::invalid_argument.
std::vector<double> parse_range(const std::string& text);

struct SelectionTrial {
    int index{0};
    SquareIndex target;
    std::optional<SquareIndex> selected;
    bool correct{false};
    double touch_noise_sigma_m{0.0};
    std::uint64_t seed{0};
};

struct SelectionSettings {
    int trials{25};
    double touch_noise_sigma_m{0.002};
    std::uint64_t seed{0};
    int outline_px{2};
    int board_id{kBoardObjectId};
};

struct SelectionResult {
    std::vector<SelectionTrial> trials;
    double accuracy{0.0};
};

/// Proxy used for a given target; lets gaze-driven proxies follow the user's fixation.
using ProxyForTarget = std::function<ProxyGeometry(const Vec3& target_point)>;

/// Square-selection task: highlight a random cell in the world camera, carry the
/// outline to the dominant eye through the proxy, touch the real board along
/// the eye ray through the outline centroid, add in-plane Gaussian touch noise.
/// Trial i draws from stream (seed, i), so results do not depend on evaluation order.
SelectionResult simulate_selection(const Scene& scene, const EyeRig& rig, const ProxyForTarget& proxy_for,
                                   const SelectionSettings& settings);
SelectionResult simulate_selection(const Scene& scene, const EyeRig& rig, const ProxyGeometry& proxy,
                                   const SelectionSettings& settings);

/// Gaze plane after `config.n_stab` fixations on `target`, i.e. a settled filter.
GazePlaneProxy settled_gaze_proxy(const Scene& scene, const EyeRig& rig, const Vec3& target,
                                  const GazeFilterConfig& config = {});

struct GazeEvent {
    double time_s{0.0};
    Vec3 target;
};

/// Board plus a small flat quad nearer to the rig, off to the side of the board
/// center so that neither target hides the other from the dominant eye.
struct GazeStepScene {
    Scene scene;
    Vec3 far_target;   // board center
    Vec3 near_target;  // quad center, `near_depth_m` in front of the dominant eye
};

inline constexpr int kNearQuadObjectId = 2;

/// Throws std::invalid_argument unless 0 < near_depth_m < the board distance.
GazeStepScene build_gaze_step_scene(const BoardSpec& board, const EyeRig& rig, double near_depth_m);

struct TimelineSettings {
    double t_start{-1.0};
    double t_end{2.0};
    GazeFilterConfig filter{};
};

struct TimelineRow {
    double t{0.0};
    double proxy_depth_m{0.0};
    double gaze_displacement_m{0.0};  // NaN when the gaze pixel is not measurable
};

/// Drives the gaze filter once per tracker frame at t = k / sample_rate. A
/// sample at time t sees the target of the last event with time < t, i.e. the
/// gaze over the frame interval ending at t. Throws std::invalid_argument for an
/// empty or non-monotone script.
std::vector<TimelineRow> gaze_timeline(const Scene& scene, const EyeRig& rig, const std::vector<GazeEvent>& script,
                                       const TimelineSettings& settings);

// --- CSV ---------------------------------------------------------------------

using CsvCell = std::variant<std::string, long long, double>;

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<CsvCell>> rows;
};

/// Comma separated, '\n' line endings, reals as %.6g ("nan" for NaN).
std::string format_csv(const CsvTable& table);
void write_csv(const CsvTable& table, const std::string& path);
/// Splits a file written by format_csv back into header + string cells.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

CsvTable misalignment_table(const MisalignmentMap& map, const std::string& method, Eye eye);
CsvTable sweep_table(const std::vector<SweepRow>& rows);
CsvTable selection_table(const SelectionResult& result);
CsvTable timeline_table(const std::vector<TimelineRow>& rows);

}  // namespace epr
