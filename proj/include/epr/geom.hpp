#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epr {

/// Intersections closer than this along a ray are ignored (self-hit guard at ~1 m scene scale).
inline constexpr double kRayEpsilon = 1e-9;

struct Vec3 {
    double x{0.0}, y{0.0}, z{0.0};

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Throws std::invalid_argument for zero-length or non-finite input.
Vec3 normalize(const Vec3& v);

inline Vec3 component_min(const Vec3& a, const Vec3& b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 component_max(const Vec3& a, const Vec3& b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length

    Ray() = default;
    /// Normalizes `dir`.
    Ray(const Vec3& o, const Vec3& dir);

    Vec3 point_at(double t) const { return origin + direction * t; }
};

/// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }
    static Mat3 diagonal(double a, double b, double c) { return {{a, 0, 0, 0, b, 0, 0, 0, c}}; }
    /// Right-handed rotation of `angle_rad` about the unit `axis`.
    static Mat3 rotation(const Vec3& axis, double angle_rad);

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const;
    Mat3 transposed() const;
    double determinant() const;
    Mat3 inverse() const;
    Vec3 column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
};

/// Maps a local frame into a parent frame: p_parent = R * p_local + t.
class RigidTransform {
public:
    RigidTransform() = default;
    /// Throws std::invalid_argument unless R is orthonormal with det +1 (tolerance 1e-9).
    RigidTransform(const Mat3& rotation, const Vec3& translation);

    const Mat3& rotation() const { return rotation_; }
    const Vec3& translation() const { return translation_; }

    Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
    Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }
    RigidTransform inverse() const;
    /// (this ∘ other)(p) = this(other(p)).
    RigidTransform compose(const RigidTransform& other) const;

private:
    Mat3 rotation_{};
    Vec3 translation_{};
};

struct Plane {
    Vec3 point;
    Vec3 normal;  // unit length

    Plane() = default;
    /// Normalizes `n`.
    Plane(const Vec3& p, const Vec3& n);

    double signed_distance(const Vec3& q) const { return dot(q - point, normal); }
};

using TriangleIndices = std::array<std::uint32_t, 3>;

/// Indexed triangle soup. Validated on construction.
class TriangleMesh {
public:
    TriangleMesh() = default;
    /// Throws std::invalid_argument on out-of-range or repeated indices,
    /// non-finite vertices, or triangles with area <= 1e-12 m^2.
    TriangleMesh(std::vector<Vec3> vertices, std::vector<TriangleIndices> triangles);

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<TriangleIndices>& triangles() const { return triangles_; }
    std::size_t triangle_count() const { return triangles_.size(); }
    bool empty() const { return triangles_.empty(); }

    std::array<Vec3, 3> corners(std::size_t tri) const {
        const auto& t = triangles_[tri];
        return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
    }
    double triangle_area(std::size_t tri) const;
    Vec3 triangle_normal(std::size_t tri) const;
    /// Area-weighted vertex normals; isolated vertices get (0,0,0).
    std::vector<Vec3> vertex_normals() const;
    double surface_area() const;

    std::pair<Vec3, Vec3> bounds() const;

    /// Concatenation; indices of `other` are shifted.
    TriangleMesh merged_with(const TriangleMesh& other) const;

private:
    std::vector<Vec3> vertices_;
    std::vector<TriangleIndices> triangles_;
};

struct Hit {
    double t{0.0};
    Vec3 point;
    Vec3 normal;
    int object_id{-1};
    std::uint32_t triangle{0};
    double u{0.0}, v{0.0};  // barycentric weights of corners 1 and 2
};

std::optional<Hit> ray_plane_intersect(const Ray& ray, const Plane& plane);

/// Two-sided Möller–Trumbore test; returns t > kRayEpsilon or nothing.
std::optional<Hit> ray_triangle_intersect(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

/// Brute-force scan of every triangle. Ties on t resolve to the lower triangle index.
std::optional<Hit> ray_mesh_intersect(const Ray& ray, const TriangleMesh& mesh);

/// Bounding volume hierarchy over a mesh. Produces exactly the same hits as
/// ray_mesh_intersect (same triangle, same t).
class MeshBvh {
public:
    explicit MeshBvh(std::shared_ptr<const TriangleMesh> mesh);

    std::optional<Hit> intersect(const Ray& ray) const;
    /// True if any triangle is hit with kRayEpsilon < t < t_max.
    bool occluded(const Ray& ray, double t_max) const;

    const TriangleMesh& mesh() const { return *mesh_; }

private:
    struct Node {
        Vec3 lo, hi;
        std::uint32_t first{0};   // leaf: first index into order_; inner: right child
        std::uint32_t count{0};   // 0 for inner nodes
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

    std::shared_ptr<const TriangleMesh> mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
};

/// Vertex clustering on a uniform grid anchored at the (padded) bounding-box minimum.
/// Each cluster collapses to the mean of its vertices; triangles that become
/// degenerate or duplicate are dropped.
TriangleMesh cluster_vertices(const TriangleMesh& mesh, double cell_size, double flat_padding_m = 0.05);

/// Bounding-box volume used for density, with zero-thickness axes padded by `flat_padding_m`.
double density_volume(const TriangleMesh& mesh, double flat_padding_m = 0.05);

/// Grid cell size whose clustering brings the triangle count closest to
/// target_density * density_volume. Returns 0 when no clustering is needed.
double choose_cell_size(const TriangleMesh& mesh, double target_density, double flat_padding_m = 0.05);

/// Decimates to roughly `target_density` triangles per cubic meter of bounding box.
/// Meshes already at or below the target are returned unchanged.
/// Throws std::invalid_argument if the padded box volume is below 1e-12 m^3.
TriangleMesh decimate_mesh(const TriangleMesh& mesh, double target_density, double flat_padding_m = 0.05);

/// Subdivided icosahedron projected onto a sphere; 20 * 4^subdivisions triangles.
TriangleMesh make_icosphere(const Vec3& center, double radius, int subdivisions);

/// Unclipped distance from `p` to triangle (a, b, c).
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// ASCII OBJ subset: `v` and `f` records only, 1-based (or negative relative)
/// indices, polygons fan-triangulated. Throws std::runtime_error on malformed input.
TriangleMesh parse_obj(const std::string& text);
TriangleMesh load_obj(const std::string& path);

}  // namespace epr
