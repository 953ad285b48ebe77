#pragma once

#include <optional>

#include "epr/geom.hpp"

namespace epr {

struct PixelCoord {
    double u{0.0};
    double v{0.0};
};

struct Intrinsics {
    int width{640};
    int height{480};
    double fx{500.0};
    double fy{500.0};
    double cx{320.0};
    double cy{240.0};

    /// Throws std::invalid_argument when any constraint is violated.
    void validate() const;
};

/// Pinhole camera. Camera frame: +x right (image u), +y down (image v), +z forward.
/// Pixel (i, j) samples the ray through (u, v) = (i, j).
class PinholeCamera {
public:
    PinholeCamera() = default;
    PinholeCamera(const Intrinsics& intrinsics, const RigidTransform& camera_to_world);

    const Intrinsics& intrinsics() const { return intrinsics_; }
    const RigidTransform& pose() const { return pose_; }
    int width() const { return intrinsics_.width; }
    int height() const { return intrinsics_.height; }

    Vec3 position() const { return pose_.translation(); }
    Vec3 forward() const { return pose_.rotation().column(2); }

    Vec3 to_camera(const Vec3& world) const { return world_to_camera_.apply(world); }

    /// Pinhole projection without the image-bounds check; nothing if z <= 1e-9.
    std::optional<PixelCoord> project_unclipped(const Vec3& world) const;

private:
    Intrinsics intrinsics_{};
    RigidTransform pose_{};
    RigidTransform world_to_camera_{};
};

/// Pixel of `point`, or nothing when it is behind the camera or outside [0,w) x [0,h).
std::optional<PixelCoord> project(const PinholeCamera& cam, const Vec3& point);

/// World-space ray from the camera center through (u, v).
Ray unproject(const PinholeCamera& cam, double u, double v);

/// Depth of `point` along the camera's forward axis.
inline double camera_depth(const PinholeCamera& cam, const Vec3& point) {
    return dot(point - cam.position(), cam.forward());
}

enum class Eye { left, right };

const char* to_string(Eye eye);

/// Rotation taking the camera frame (x right, y down, z forward) to the rig
/// frame (x toward the user's left, y up, z forward).
Mat3 rig_looking_forward();

struct RigConfig {
    double ipd_m{0.063};
    /// World camera position relative to the dominant eye, rig frame.
    Vec3 camera_offset_m{0.016, 0.05, 0.0};
    Eye dominant{Eye::right};
    Intrinsics eye_intrinsics{};
    Intrinsics camera_intrinsics{};
    /// Optional world-camera orientation override (rig frame).
    std::optional<Mat3> camera_rotation{};
};

/// Left/right eyes plus the world-facing camera.
///
/// Rig frame: origin midway between the eyes, +z forward, +y up, +x toward
/// the user's left, so the left eye sits at +ipd/2 and the right eye at -ipd/2.
struct EyeRig {
    PinholeCamera left_eye;
    PinholeCamera right_eye;
    PinholeCamera world_camera;
    double ipd{0.0};
    Vec3 camera_offset;
    Eye dominant{Eye::right};

    const PinholeCamera& eye(Eye e) const { return e == Eye::left ? left_eye : right_eye; }
    const PinholeCamera& dominant_eye() const { return eye(dominant); }
};

/// Throws std::invalid_argument for non-positive ipd or invalid intrinsics.
EyeRig build_rig(const RigConfig& config);

}  // namespace epr
