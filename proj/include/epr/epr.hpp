#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "epr/camera.hpp"
#include "epr/proxy.hpp"
#include "epr/scene.hpp"

namespace epr {

enum class PixelStatus : std::uint8_t {
    valid = 0,
    no_proxy_hit,
    outside_camera_fov,
    occluded_from_camera,
};

const char* to_string(PixelStatus s);

/// Eye-view reconstruction of the world-camera image.
struct EprFrame {
    Image image;
    std::vector<PixelStatus> status;

    int width() const { return image.width; }
    int height() const { return image.height; }
    PixelStatus at(int x, int y) const {
        return status[static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width) + static_cast<std::size_t>(x)];
    }
    std::size_t valid_count() const;

    /// Grayscale validity map: valid 255, no proxy hit 0, outside camera FOV 64, occluded 128.
    std::vector<std::uint8_t> status_gray() const;
};

inline constexpr Rgb8 kInvalidColor{255, 0, 255};

struct EprOptions {
    /// Slack for the camera-visibility test, meters.
    double occlusion_eps{1e-6};
    Rgb8 invalid_color{kInvalidColor};
};

/// Bilinear blend of the four neighbors, each channel rounded half up.
/// Throws std::out_of_range unless 0 <= u <= width-1 and 0 <= v <= height-1.
Rgb8 sample_bilinear(const Image& img, double u, double v);

/// Re-renders `world_image` from `eye` through the proxy surface.
///
/// Per eye pixel: eye ray -> proxy point P; P -> world-camera pixel; P must be
/// the first proxy surface seen from the camera; the color is the bilinear
/// sample there. Pixels failing a step carry that step's status and `invalid_color`.
/// Throws std::invalid_argument if world_image does not match world_cam's size.
EprFrame epr_render(const PinholeCamera& eye, const PinholeCamera& world_cam, const Image& world_image,
                    const ProxyGeometry& proxy, const EyeRig& rig, const EprOptions& options = {});

/// Full geometric trace behind one EPR pixel.
struct ReprojectionTrace {
    Ray eye_ray;
    std::optional<Vec3> proxy_point;
    std::optional<PixelCoord> camera_pixel;   // projection of proxy_point, unclipped
    std::optional<Hit> camera_scene_hit;      // what the display shows at this pixel
    std::optional<Hit> eye_scene_hit;         // what the eye really sees through it
};

ReprojectionTrace reproject_point(double u, double v, const PinholeCamera& eye, const PinholeCamera& world_cam,
                                  const ProxyGeometry& proxy, const Scene& scene, const EyeRig& rig);

}  // namespace epr
