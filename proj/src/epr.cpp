#include "epr/epr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epr/parallel.hpp"

namespace epr {

const char* to_string(PixelStatus s) {
    switch (s) {
        case PixelStatus::valid: return "valid";
        case PixelStatus::no_proxy_hit: return "no_proxy_hit";
        case PixelStatus::outside_camera_fov: return "outside_camera_fov";
        case PixelStatus::occluded_from_camera: return "occluded_from_camera";
    }
    return "?";
}

std::size_t EprFrame::valid_count() const {
    return static_cast<std::size_t>(std::count(status.begin(), status.end(), PixelStatus::valid));
}

std::vector<std::uint8_t> EprFrame::status_gray() const {
    std::vector<std::uint8_t> out(status.size());
    for (std::size_t i = 0; i < status.size(); ++i) {
        switch (status[i]) {
            case PixelStatus::valid: out[i] = 255; break;
            case PixelStatus::no_proxy_hit: out[i] = 0; break;
            case PixelStatus::outside_camera_fov: out[i] = 64; break;
            case PixelStatus::occluded_from_camera: out[i] = 128; break;
        }
    }
    return out;
}

Rgb8 sample_bilinear(const Image& img, double u, double v) {
    if (!(u >= 0.0 && u <= img.width - 1) || !(v >= 0.0 && v <= img.height - 1)) {
        throw std::out_of_range("sample_bilinear: coordinate outside the image");
    }
    const int x0 = static_cast<int>(std::floor(u));
    const int y0 = static_cast<int>(std::floor(v));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fu = u - x0;
    const double fv = v - y0;
    const double w00 = (1.0 - fu) * (1.0 - fv);
    const double w10 = fu * (1.0 - fv);
    const double w01 = (1.0 - fu) * fv;
    const double w11 = fu * fv;
    const Rgb8 c00 = img.at(x0, y0), c10 = img.at(x1, y0), c01 = img.at(x0, y1), c11 = img.at(x1, y1);
    auto blend = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        const double x = w00 * a + w10 * b + w01 * c + w11 * d;
        return static_cast<std::uint8_t>(std::clamp(std::floor(x + 0.5), 0.0, 255.0));
    };
    return {blend(c00.r, c10.r, c01.r, c11.r), blend(c00.g, c10.g, c01.g, c11.g), blend(c00.b, c10.b, c01.b, c11.b)};
}

EprFrame epr_render(const PinholeCamera& eye, const PinholeCamera& world_cam, const Image& world_image,
                    const ProxyGeometry& proxy, const EyeRig& rig, const EprOptions& options) {
    if (world_image.width != world_cam.width() || world_image.height != world_cam.height()) {
        throw std::invalid_argument("epr_render: world image size does not match the world camera");
    }
    const int w = eye.width();
    const int h = eye.height();
    EprFrame frame{Image(w, h), std::vector<PixelStatus>(static_cast<std::size_t>(w) * static_cast<std::size_t>(h))};
    const Vec3 cam_center = world_cam.position();
    const double max_u = world_cam.width() - 1;
    const double max_v = world_cam.height() - 1;

    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            PixelStatus& status = frame.status[row * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
            const auto hit = intersect_proxy(proxy, unproject(eye, x, y), rig);
            if (!hit) {
                status = PixelStatus::no_proxy_hit;
                frame.image.set(x, y, options.invalid_color);
                continue;
            }
            const auto px = project(world_cam, hit->point);
            // bilinear needs both neighbors, so the last half pixel counts as outside
            if (!px || px->u > max_u || px->v > max_v) {
                status = PixelStatus::outside_camera_fov;
                frame.image.set(x, y, options.invalid_color);
                continue;
            }
            const double dist = distance(cam_center, hit->point);
            if (proxy_blocks(proxy, Ray(cam_center, hit->point - cam_center), dist, options.occlusion_eps, rig)) {
                status = PixelStatus::occluded_from_camera;
                frame.image.set(x, y, options.invalid_color);
                continue;
            }
            status = PixelStatus::valid;
            frame.image.set(x, y, sample_bilinear(world_image, px->u, px->v));
        }
    });
    return frame;
}

ReprojectionTrace reproject_point(double u, double v, const PinholeCamera& eye, const PinholeCamera& world_cam,
                                  const ProxyGeometry& proxy, const Scene& scene, const EyeRig& rig) {
    ReprojectionTrace trace;
    trace.eye_ray = unproject(eye, u, v);
    trace.eye_scene_hit = scene.intersect(trace.eye_ray);
    const auto hit = intersect_proxy(proxy, trace.eye_ray, rig);
    if (!hit) return trace;
    trace.proxy_point = hit->point;
    trace.camera_pixel = world_cam.project_unclipped(hit->point);
    const Vec3 c = world_cam.position();
    if (distance(c, hit->point) > 0.0) trace.camera_scene_hit = scene.intersect(Ray(c, hit->point - c));
    return trace;
}

}  // namespace epr
