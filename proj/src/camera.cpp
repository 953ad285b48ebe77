#include "epr/camera.hpp"

#include <string>

namespace epr {

void Intrinsics::validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("Intrinsics: width and height must be >= 1");
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("Intrinsics: focal lengths must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
        throw std::invalid_argument("Intrinsics: principal point outside the image");
    }
}

PinholeCamera::PinholeCamera(const Intrinsics& intrinsics, const RigidTransform& camera_to_world)
    : intrinsics_(intrinsics), pose_(camera_to_world), world_to_camera_(camera_to_world.inverse()) {
    intrinsics_.validate();
}

std::optional<PixelCoord> PinholeCamera::project_unclipped(const Vec3& world) const {
    const Vec3 p = to_camera(world);
    if (!(p.z > 1e-9)) return std::nullopt;
    return PixelCoord{intrinsics_.fx * p.x / p.z + intrinsics_.cx, intrinsics_.fy * p.y / p.z + intrinsics_.cy};
}

std::optional<PixelCoord> project(const PinholeCamera& cam, const Vec3& point) {
    auto px = cam.project_unclipped(point);
    if (!px) return std::nullopt;
    if (px->u < 0.0 || px->u >= cam.width() || px->v < 0.0 || px->v >= cam.height()) return std::nullopt;
    return px;
}

Ray unproject(const PinholeCamera& cam, double u, double v) {
    const auto& k = cam.intrinsics();
    const Vec3 dir_cam{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
    return Ray(cam.position(), cam.pose().apply_direction(dir_cam));
}

const char* to_string(Eye eye) { return eye == Eye::left ? "left" : "right"; }

Mat3 rig_looking_forward() { return Mat3::diagonal(-1.0, -1.0, 1.0); }

EyeRig build_rig(const RigConfig& config) {
    if (!(config.ipd_m > 0.0) || !std::isfinite(config.ipd_m)) {
        throw std::invalid_argument("build_rig: ipd must be positive");
    }
    if (!is_finite(config.camera_offset_m)) throw std::invalid_argument("build_rig: non-finite camera offset");
    config.eye_intrinsics.validate();
    config.camera_intrinsics.validate();

    const Mat3 facing = rig_looking_forward();
    const Vec3 left_pos{config.ipd_m / 2.0, 0.0, 0.0};
    const Vec3 right_pos{-config.ipd_m / 2.0, 0.0, 0.0};
    const Vec3 dominant_pos = config.dominant == Eye::left ? left_pos : right_pos;

    EyeRig rig;
    rig.left_eye = PinholeCamera(config.eye_intrinsics, RigidTransform(facing, left_pos));
    rig.right_eye = PinholeCamera(config.eye_intrinsics, RigidTransform(facing, right_pos));
    rig.world_camera = PinholeCamera(config.camera_intrinsics,
                                     RigidTransform(config.camera_rotation.value_or(facing),
                                                    dominant_pos + config.camera_offset_m));
    rig.ipd = config.ipd_m;
    rig.camera_offset = config.camera_offset_m;
    rig.dominant = config.dominant;
    return rig;
}

}  // namespace epr
