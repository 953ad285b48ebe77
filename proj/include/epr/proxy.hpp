#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <variant>

#include "epr/camera.hpp"
#include "epr/geom.hpp"
#include "epr/random.hpp"
#include "epr/scene.hpp"

namespace epr {

/// Plane parallel to the dominant eye's image plane, `depth_m` in front of it.
struct FixedPlaneProxy {
    double depth_m{0.95};
};

/// Immutable snapshot of the gaze-driven plane; same orientation as FixedPlaneProxy.
struct GazePlaneProxy {
    double depth_m{0.75};
};

/// Scene mesh used as projection surface (optionally decimated and perturbed).
class SceneMeshProxy {
public:
    SceneMeshProxy() = default;
    explicit SceneMeshProxy(TriangleMesh mesh, double depth_perturbation_m = 0.0);

    const TriangleMesh& mesh() const { return bvh_->mesh(); }
    const MeshBvh& bvh() const { return *bvh_; }
    double depth_perturbation_m() const { return depth_perturbation_m_; }

private:
    std::shared_ptr<const MeshBvh> bvh_;
    double depth_perturbation_m_{0.0};
};

using ProxyGeometry = std::variant<FixedPlaneProxy, GazePlaneProxy, SceneMeshProxy>;

const char* proxy_method_name(const ProxyGeometry& proxy);

/// Projection plane at `depth_m` along the dominant eye's forward axis.
Plane proxy_plane(const EyeRig& rig, double depth_m);

std::optional<Hit> intersect_proxy(const ProxyGeometry& proxy, const Ray& ray, const EyeRig& rig);

/// True if the proxy surface blocks `ray` strictly before `t_max - eps`.
bool proxy_blocks(const ProxyGeometry& proxy, const Ray& ray, double t_max, double eps, const EyeRig& rig);

struct GazeFilterConfig {
    int n_stab{40};
    double sample_rate_hz{30.0};
};

/// Sliding-window mean of gaze depths, one sample per eye-tracker frame.
/// Mutable; confine to one simulation thread and hand out snapshots.
class GazeState {
public:
    explicit GazeState(GazeFilterConfig config = {}, const Vec3& depth_axis = {0.0, 0.0, 1.0});

    const GazeFilterConfig& config() const { return config_; }
    const std::deque<double>& samples() const { return buffer_; }
    bool has_depth() const { return !buffer_.empty(); }
    /// Mean of the buffered samples. Throws std::logic_error before the first sample.
    double current_depth() const;
    double last_update_time() const { return last_update_time_; }

    /// Appends a depth sample, evicting the oldest beyond n_stab.
    /// Throws std::invalid_argument if `t` precedes the last update or depth <= 0.
    void push_depth(double depth_m, double t);

    /// Depth of gaze_ray ∩ mesh along the depth axis, measured from the ray origin
    /// (the dominant eye). Returns false and leaves the buffer untouched on a miss.
    bool ingest(const Ray& gaze_ray, const MeshBvh& mesh, double t);

    GazePlaneProxy snapshot() const { return {current_depth()}; }

private:
    GazeFilterConfig config_;
    Vec3 depth_axis_;
    std::deque<double> buffer_;
    double last_update_time_{-std::numeric_limits<double>::infinity()};
};

/// Value-returning form of GazeState::ingest.
GazeState ingest_gaze(GazeState state, const Ray& gaze_ray, const MeshBvh& mesh, double t);

/// Optional vergence depth model: the binocular vergence angle toward `target`
/// is perturbed by zero-mean Gaussian noise of `angular_sigma_rad`, then turned
/// back into a depth along the rig forward axis. Depth error grows roughly with d^2 / ipd.
double vergence_depth_sample(const EyeRig& rig, const Vec3& target, double angular_sigma_rad, Rng& rng);

/// Merges the scene meshes, decimates to `density` tri/m^3 and displaces each
/// vertex along its area-weighted normal by U(-depth_error_m, +depth_error_m).
SceneMeshProxy make_mesh_proxy(const Scene& scene, double density, double depth_error_m, std::uint64_t seed,
                               double flat_padding_m = 0.05);

}  // namespace epr
