#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "epr/camera.hpp"
#include "epr/proxy.hpp"
#include "epr/scene.hpp"

namespace epr {

struct ProxyConfig {
    std::string method{"plane"};  // plane | gaze | mesh
    /// Scene depth plus the 20 cm calibration offset of the PLANE condition.
    double plane_depth_m{0.95};
    double mesh_density{2500.0};
    double mesh_depth_error_m{0.0};
    int gaze_n_stab{40};
    double gaze_rate_hz{30.0};
};

struct TaskConfig {
    int trials{25};
    double touch_noise_m{0.002};
    int outline_px{2};
};

struct OpConfig {
    double canny_sigma{1.4};
    double canny_low{40.0};
    double canny_high{100.0};
    double hue_min_deg{350.0};
    double hue_max_deg{10.0};
    double min_sat{0.3};
    double min_val{0.2};
    std::string cvd{"protanopia"};  // protanopia | deuteranopia
    double dalton_strength{1.0};
    int outline_px{1};
};

struct OutputConfig {
    std::string prefix{"epr"};
    int ground_truth{0};
};

struct RunConfig {
    RigConfig rig{};
    BoardSpec board{};
    ProxyConfig proxy{};
    TaskConfig task{};
    OpConfig op{};
    OutputConfig output{};
    std::uint64_t seed{0};
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { parse, range, unknown_key };

    ConfigError(Kind kind, int line, const std::string& message);

    Kind kind() const { return kind_; }
    int line() const { return line_; }
    /// "E_PARSE", "E_RANGE" or "E_UNKNOWN_KEY".
    const char* code() const;

private:
    Kind kind_;
    int line_;
};

/// Sectioned key = value grammar:
///
///     # comment
///     seed = 7
///     [rig]
///     ipd_m = 0.063
///     camera_offset_m = [0.016, 0.05, 0.0]
///     dominant_eye = "right"
///
/// Values are numbers, double-quoted strings or bracketed numeric triples.
/// Keys before the first section belong to the top level. Unspecified keys keep
/// their defaults. Throws ConfigError.
RunConfig parse_config(const std::string& text);

/// Canonical text form; parse_config(format_config(c)) reproduces c exactly.
std::string format_config(const RunConfig& config);

GazeFilterConfig gaze_filter(const RunConfig& config);

/// Proxy named by config.proxy.method; the gaze proxy is settled on the board center.
ProxyGeometry proxy_from_config(const RunConfig& config, const Scene& scene, const EyeRig& rig);

struct SelectionResult;

/// Selection task on the configured board; the gaze proxy re-settles on each target.
SelectionResult selection_from_config(const RunConfig& config);

}  // namespace epr
