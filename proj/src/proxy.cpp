#include "epr/proxy.hpp"

#include <numeric>

namespace epr {

SceneMeshProxy::SceneMeshProxy(TriangleMesh mesh, double depth_perturbation_m)
    : bvh_(std::make_shared<const MeshBvh>(std::make_shared<const TriangleMesh>(std::move(mesh)))),
      depth_perturbation_m_(depth_perturbation_m) {
    if (!std::isfinite(depth_perturbation_m)) throw std::invalid_argument("SceneMeshProxy: non-finite perturbation");
}

const char* proxy_method_name(const ProxyGeometry& proxy) {
    switch (proxy.index()) {
        case 0: return "plane";
        case 1: return "gaze";
        default: return "mesh";
    }
}

Plane proxy_plane(const EyeRig& rig, double depth_m) {
    const PinholeCamera& eye = rig.dominant_eye();
    return Plane(eye.position() + eye.forward() * depth_m, eye.forward());
}

std::optional<Hit> intersect_proxy(const ProxyGeometry& proxy, const Ray& ray, const EyeRig& rig) {
    return std::visit(
        [&](const auto& p) -> std::optional<Hit> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SceneMeshProxy>) {
                return p.bvh().intersect(ray);
            } else {
                return ray_plane_intersect(ray, proxy_plane(rig, p.depth_m));
            }
        },
        proxy);
}

bool proxy_blocks(const ProxyGeometry& proxy, const Ray& ray, double t_max, double eps, const EyeRig&) {
    if (const auto* mesh = std::get_if<SceneMeshProxy>(&proxy)) return mesh->bvh().occluded(ray, t_max - eps);
    // a single plane cannot occlude a point lying on itself
    return false;
}

// ---------------------------------------------------------------------------

GazeState::GazeState(GazeFilterConfig config, const Vec3& depth_axis)
    : config_(config), depth_axis_(normalize(depth_axis)) {
    if (config_.n_stab < 1) throw std::invalid_argument("GazeState: n_stab must be >= 1");
    if (!(config_.sample_rate_hz > 0.0)) throw std::invalid_argument("GazeState: sample rate must be positive");
}

double GazeState::current_depth() const {
    if (buffer_.empty()) throw std::logic_error("GazeState: no gaze sample ingested yet");
    return std::accumulate(buffer_.begin(), buffer_.end(), 0.0) / static_cast<double>(buffer_.size());
}

void GazeState::push_depth(double depth_m, double t) {
    if (t < last_update_time_) throw std::invalid_argument("GazeState: time went backwards");
    if (!(depth_m > 0.0) || !std::isfinite(depth_m)) throw std::invalid_argument("GazeState: depth must be positive");
    buffer_.push_back(depth_m);
    while (buffer_.size() > static_cast<std::size_t>(config_.n_stab)) buffer_.pop_front();
    last_update_time_ = t;
}

bool GazeState::ingest(const Ray& gaze_ray, const MeshBvh& mesh, double t) {
    if (t < last_update_time_) throw std::invalid_argument("GazeState: time went backwards");
    const auto hit = mesh.intersect(gaze_ray);
    if (!hit) return false;
    const double depth = dot(hit->point - gaze_ray.origin, depth_axis_);
    if (!(depth > 0.0)) return false;
    push_depth(depth, t);
    return true;
}

GazeState ingest_gaze(GazeState state, const Ray& gaze_ray, const MeshBvh& mesh, double t) {
    state.ingest(gaze_ray, mesh, t);
    return state;
}

double vergence_depth_sample(const EyeRig& rig, const Vec3& target, double angular_sigma_rad, Rng& rng) {
    const Vec3 l = rig.left_eye.position();
    const Vec3 r = rig.right_eye.position();
    const Vec3 mid = (l + r) * 0.5;
    const Vec3 forward = rig.dominant_eye().forward();
    const double vergence = std::acos(std::clamp(dot(normalize(target - l), normalize(target - r)), -1.0, 1.0));
    const double noisy = std::max(vergence + angular_sigma_rad * rng.normal(), 1e-6);
    // symmetric-fixation triangle: half the baseline over tan(half the vergence angle)
    const double along_gaze = 0.5 * rig.ipd / std::tan(0.5 * noisy);
    const Vec3 dir = normalize(target - mid);
    return along_gaze * dot(dir, forward);
}

SceneMeshProxy make_mesh_proxy(const Scene& scene, double density, double depth_error_m, std::uint64_t seed,
                               double flat_padding_m) {
    if (!(density > 0.0)) throw std::invalid_argument("make_mesh_proxy: density must be positive");
    if (!(depth_error_m >= 0.0) || !std::isfinite(depth_error_m)) {
        throw std::invalid_argument("make_mesh_proxy: depth error must be finite and >= 0");
    }
    TriangleMesh mesh = decimate_mesh(scene.merged_mesh(), density, flat_padding_m);
    if (depth_error_m == 0.0) return SceneMeshProxy(std::move(mesh), 0.0);

    const auto normals = mesh.vertex_normals();
    std::vector<Vec3> verts = mesh.vertices();
    Rng rng(seed);
    for (std::size_t i = 0; i < verts.size(); ++i) {
        verts[i] += normals[i] * rng.uniform(-depth_error_m, depth_error_m);
    }
    return SceneMeshProxy(TriangleMesh(std::move(verts), mesh.triangles()), depth_error_m);
}

}  // namespace epr
