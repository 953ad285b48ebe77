#include "epr/geom.hpp"

#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace epr {

Vec3 normalize(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 1e-300) || !std::isfinite(n)) {
        throw std::invalid_argument("normalize: zero-length or non-finite vector");
    }
    return v / n;
}

Ray::Ray(const Vec3& o, const Vec3& dir) : origin(o), direction(normalize(dir)) {
    if (!is_finite(o)) throw std::invalid_argument("Ray: non-finite origin");
}

Plane::Plane(const Vec3& p, const Vec3& n) : point(p), normal(normalize(n)) {
    if (!is_finite(p)) throw std::invalid_argument("Plane: non-finite point");
}

// ---------------------------------------------------------------------------
// Mat3 / RigidTransform

Mat3 Mat3::rotation(const Vec3& axis, double angle_rad) {
    const Vec3 k = normalize(axis);
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    const double C = 1.0 - c;
    return {{c + k.x * k.x * C, k.x * k.y * C - k.z * s, k.x * k.z * C + k.y * s,
             k.y * k.x * C + k.z * s, c + k.y * k.y * C, k.y * k.z * C - k.x * s,
             k.z * k.x * C - k.y * s, k.z * k.y * C + k.x * s, c + k.z * k.z * C}};
}

Mat3 Mat3::operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += (*this)(i, k) * o(k, j);
            r(i, j) = acc;
        }
    }
    return r;
}

Mat3 Mat3::transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
}

double Mat3::determinant() const {
    const auto& a = m;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Mat3 Mat3::inverse() const {
    const double det = determinant();
    if (std::abs(det) < 1e-300) throw std::invalid_argument("Mat3::inverse: singular matrix");
    const auto& a = m;
    Mat3 r;
    r.m = {(a[4] * a[8] - a[5] * a[7]) / det, (a[2] * a[7] - a[1] * a[8]) / det,
           (a[1] * a[5] - a[2] * a[4]) / det, (a[5] * a[6] - a[3] * a[8]) / det,
           (a[0] * a[8] - a[2] * a[6]) / det, (a[2] * a[3] - a[0] * a[5]) / det,
           (a[3] * a[7] - a[4] * a[6]) / det, (a[1] * a[6] - a[0] * a[7]) / det,
           (a[0] * a[4] - a[1] * a[3]) / det};
    return r;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
    const Mat3 rtr = rotation.transposed() * rotation;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > 1e-9) {
                throw std::invalid_argument("RigidTransform: rotation is not orthonormal");
            }
        }
    }
    if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw std::invalid_argument("RigidTransform: rotation determinant is not +1");
    }
    if (!is_finite(translation)) throw std::invalid_argument("RigidTransform: non-finite translation");
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform r;
    r.rotation_ = rotation_.transposed();
    r.translation_ = -(r.rotation_ * translation_);
    return r;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
    RigidTransform r;
    r.rotation_ = rotation_ * other.rotation_;
    r.translation_ = rotation_ * other.translation_ + translation_;
    return r;
}

// ---------------------------------------------------------------------------
// TriangleMesh

namespace {

double raw_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

constexpr double kMinTriangleArea = 1e-12;

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<TriangleIndices> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    for (const auto& v : vertices_) {
        if (!is_finite(v)) throw std::invalid_argument("TriangleMesh: non-finite vertex");
    }
    const auto n = vertices_.size();
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        const auto& t = triangles_[i];
        if (t[0] >= n || t[1] >= n || t[2] >= n) {
            throw std::invalid_argument("TriangleMesh: triangle " + std::to_string(i) + " index out of range");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            throw std::invalid_argument("TriangleMesh: triangle " + std::to_string(i) + " repeats a vertex");
        }
        if (!(raw_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]) > kMinTriangleArea)) {
            throw std::invalid_argument("TriangleMesh: triangle " + std::to_string(i) + " is degenerate");
        }
    }
}

double TriangleMesh::triangle_area(std::size_t tri) const {
    const auto c = corners(tri);
    return raw_area(c[0], c[1], c[2]);
}

Vec3 TriangleMesh::triangle_normal(std::size_t tri) const {
    const auto c = corners(tri);
    return normalize(cross(c[1] - c[0], c[2] - c[0]));
}

std::vector<Vec3> TriangleMesh::vertex_normals() const {
    std::vector<Vec3> acc(vertices_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        const auto c = corners(i);
        // cross product length is twice the area, so this is area weighting
        const Vec3 n = cross(c[1] - c[0], c[2] - c[0]);
        for (auto idx : triangles_[i]) acc[idx] += n;
    }
    for (auto& n : acc) {
        const double len = norm(n);
        n = len > 0.0 ? n / len : Vec3{};
    }
    return acc;
}

double TriangleMesh::surface_area() const {
    double total = 0.0;
    for (std::size_t i = 0; i < triangles_.size(); ++i) total += triangle_area(i);
    return total;
}

std::pair<Vec3, Vec3> TriangleMesh::bounds() const {
    if (vertices_.empty()) return {Vec3{}, Vec3{}};
    Vec3 lo = vertices_.front();
    Vec3 hi = lo;
    for (const auto& v : vertices_) {
        lo = component_min(lo, v);
        hi = component_max(hi, v);
    }
    return {lo, hi};
}

TriangleMesh TriangleMesh::merged_with(const TriangleMesh& other) const {
    std::vector<Vec3> verts = vertices_;
    verts.insert(verts.end(), other.vertices_.begin(), other.vertices_.end());
    std::vector<TriangleIndices> tris = triangles_;
    const auto shift = static_cast<std::uint32_t>(vertices_.size());
    for (const auto& t : other.triangles_) tris.push_back({t[0] + shift, t[1] + shift, t[2] + shift});
    return TriangleMesh(std::move(verts), std::move(tris));
}

// ---------------------------------------------------------------------------
// Intersection

std::optional<Hit> ray_plane_intersect(const Ray& ray, const Plane& plane) {
    const double denom = dot(ray.direction, plane.normal);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = dot(plane.point - ray.origin, plane.normal) / denom;
    if (!(t > kRayEpsilon)) return std::nullopt;
    Hit h;
    h.t = t;
    h.point = ray.point_at(t);
    h.normal = plane.normal;
    return h;
}

std::optional<Hit> ray_triangle_intersect(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = cross(ray.direction, e2);
    const double det = dot(e1, p);
    if (std::abs(det) < 1e-18) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = ray.origin - a;
    const double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 q = cross(s, e1);
    const double v = dot(ray.direction, q) * inv;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = dot(e2, q) * inv;
    if (!(t > kRayEpsilon)) return std::nullopt;
    Hit h;
    h.t = t;
    h.point = ray.point_at(t);
    h.normal = normalize(cross(e1, e2));
    h.u = u;
    h.v = v;
    return h;
}

std::optional<Hit> ray_mesh_intersect(const Ray& ray, const TriangleMesh& mesh) {
    std::optional<Hit> best;
    for (std::size_t i = 0; i < mesh.triangle_count(); ++i) {
        const auto c = mesh.corners(i);
        auto h = ray_triangle_intersect(ray, c[0], c[1], c[2]);
        if (h && (!best || h->t < best->t)) {
            h->triangle = static_cast<std::uint32_t>(i);
            best = h;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// BVH

namespace {

constexpr std::uint32_t kLeafSize = 4;

// Slab test; returns entry distance or +inf on miss. Boxes are padded at build
// time so that culling never rejects a triangle the exact test would accept.
double slab_entry(const Ray& ray, const Vec3& inv_dir, const Vec3& lo, const Vec3& hi, double t_max) {
    double t0 = 0.0;
    double t1 = t_max;
    for (int axis = 0; axis < 3; ++axis) {
        const double o = ray.origin[axis];
        const double inv = inv_dir[axis];
        if (std::isinf(inv)) {
            if (o < lo[axis] || o > hi[axis]) return std::numeric_limits<double>::infinity();
            continue;
        }
        double tn = (lo[axis] - o) * inv;
        double tf = (hi[axis] - o) * inv;
        if (tn > tf) std::swap(tn, tf);
        t0 = std::max(t0, tn);
        t1 = std::min(t1, tf);
        if (t0 > t1) return std::numeric_limits<double>::infinity();
    }
    return t0;
}

Vec3 reciprocal(const Vec3& d) {
    auto r = [](double x) { return x == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / x; };
    return {r(d.x), r(d.y), r(d.z)};
}

}  // namespace

MeshBvh::MeshBvh(std::shared_ptr<const TriangleMesh> mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw std::invalid_argument("MeshBvh: null mesh");
    const auto n = static_cast<std::uint32_t>(mesh_->triangle_count());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::vector<Vec3> centroids(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto c = mesh_->corners(i);
        centroids[i] = (c[0] + c[1] + c[2]) / 3.0;
    }
    if (n > 0) {
        nodes_.reserve(2 * n / kLeafSize + 2);
        build(0, n, centroids);
    }
}

std::uint32_t MeshBvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi = -lo;
    Vec3 clo = lo;
    Vec3 chi = hi;
    for (std::uint32_t i = begin; i < end; ++i) {
        for (const auto& p : mesh_->corners(order_[i])) {
            lo = component_min(lo, p);
            hi = component_max(hi, p);
        }
        clo = component_min(clo, centroids[order_[i]]);
        chi = component_max(chi, centroids[order_[i]]);
    }
    const Vec3 extent = hi - lo;
    const double pad = 1e-9 * (1.0 + std::max({extent.x, extent.y, extent.z, norm(hi), norm(lo)}));
    nodes_[index].lo = lo - Vec3{pad, pad, pad};
    nodes_[index].hi = hi + Vec3{pad, pad, pad};

    if (end - begin <= kLeafSize) {
        nodes_[index].first = begin;
        nodes_[index].count = end - begin;
        return index;
    }

    const Vec3 cext = chi - clo;
    const int axis = (cext.x >= cext.y && cext.x >= cext.z) ? 0 : (cext.y >= cext.z ? 1 : 2);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = centroids[a][axis];
                         const double cb = centroids[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    build(begin, mid, centroids);  // left child is always index + 1
    const std::uint32_t right = build(mid, end, centroids);
    nodes_[index].first = right;
    nodes_[index].count = 0;
    return index;
}

std::optional<Hit> MeshBvh::intersect(const Ray& ray) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv_dir = reciprocal(ray.direction);
    std::optional<Hit> best;
    double best_t = std::numeric_limits<double>::infinity();

    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        // `>` keeps equal-distance candidates alive for the index tie-break
        if (slab_entry(ray, inv_dir, node.lo, node.hi, best_t) > best_t) continue;
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const std::uint32_t tri = order_[i];
                const auto c = mesh_->corners(tri);
                auto h = ray_triangle_intersect(ray, c[0], c[1], c[2]);
                if (!h) continue;
                if (h->t < best_t || (h->t == best_t && tri < best->triangle)) {
                    h->triangle = tri;
                    best_t = h->t;
                    best = h;
                }
            }
        } else {
            const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
            stack[top++] = node.first;
            stack[top++] = self + 1;
        }
    }
    return best;
}

bool MeshBvh::occluded(const Ray& ray, double t_max) const {
    if (nodes_.empty()) return false;
    const Vec3 inv_dir = reciprocal(ray.direction);
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (std::isinf(slab_entry(ray, inv_dir, node.lo, node.hi, t_max))) continue;
        if (node.count > 0) {
            for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                const auto c = mesh_->corners(order_[i]);
                const auto h = ray_triangle_intersect(ray, c[0], c[1], c[2]);
                if (h && h->t < t_max) return true;
            }
        } else {
            const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
            stack[top++] = node.first;
            stack[top++] = self + 1;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Decimation

namespace {

std::pair<Vec3, Vec3> padded_bounds(const TriangleMesh& mesh, double flat_padding_m) {
    auto [lo, hi] = mesh.bounds();
    for (int axis = 0; axis < 3; ++axis) {
        const double extent = hi[axis] - lo[axis];
        if (extent < 1e-9) {
            const double half = 0.5 * flat_padding_m;
            Vec3 d{axis == 0 ? half : 0.0, axis == 1 ? half : 0.0, axis == 2 ? half : 0.0};
            lo -= d;
            hi += d;
        }
    }
    return {lo, hi};
}

struct CellKey {
    std::int64_t i, j, k;
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& c) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(c.j) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(c.k) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

struct TriKeyHash {
    std::size_t operator()(const TriangleIndices& t) const noexcept {
        return (static_cast<std::size_t>(t[0]) * 73856093u) ^ (static_cast<std::size_t>(t[1]) * 19349663u) ^
               (static_cast<std::size_t>(t[2]) * 83492791u);
    }
};

}  // namespace

double density_volume(const TriangleMesh& mesh, double flat_padding_m) {
    const auto [lo, hi] = padded_bounds(mesh, flat_padding_m);
    const Vec3 e = hi - lo;
    return e.x * e.y * e.z;
}

TriangleMesh cluster_vertices(const TriangleMesh& mesh, double cell_size, double flat_padding_m) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("cluster_vertices: cell size must be positive");
    const auto [lo, hi] = padded_bounds(mesh, flat_padding_m);
    (void)hi;

    // clusters numbered in order of first appearance so output is deterministic
    std::unordered_map<CellKey, std::uint32_t, CellKeyHash> cluster_of_cell;
    std::vector<std::uint32_t> cluster_of_vertex(mesh.vertices().size());
    std::vector<Vec3> sums;
    std::vector<std::uint32_t> counts;
    for (std::size_t vi = 0; vi < mesh.vertices().size(); ++vi) {
        const Vec3 rel = (mesh.vertices()[vi] - lo) / cell_size;
        const CellKey key{static_cast<std::int64_t>(std::floor(rel.x)), static_cast<std::int64_t>(std::floor(rel.y)),
                          static_cast<std::int64_t>(std::floor(rel.z))};
        auto [it, inserted] = cluster_of_cell.try_emplace(key, static_cast<std::uint32_t>(sums.size()));
        if (inserted) {
            sums.emplace_back();
            counts.push_back(0);
        }
        sums[it->second] += mesh.vertices()[vi];
        ++counts[it->second];
        cluster_of_vertex[vi] = it->second;
    }
    std::vector<Vec3> reps(sums.size());
    for (std::size_t c = 0; c < sums.size(); ++c) reps[c] = sums[c] / static_cast<double>(counts[c]);

    std::vector<TriangleIndices> tris;
    std::unordered_map<TriangleIndices, bool, TriKeyHash> seen;
    std::vector<std::int64_t> remap(reps.size(), -1);
    std::vector<Vec3> out_vertices;
    for (const auto& t : mesh.triangles()) {
        TriangleIndices c{cluster_of_vertex[t[0]], cluster_of_vertex[t[1]], cluster_of_vertex[t[2]]};
        if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2]) continue;
        if (!(raw_area(reps[c[0]], reps[c[1]], reps[c[2]]) > kMinTriangleArea)) continue;
        TriangleIndices sorted = c;
        std::sort(sorted.begin(), sorted.end());
        if (!seen.try_emplace(sorted, true).second) continue;
        TriangleIndices out{};
        for (int k = 0; k < 3; ++k) {
            auto& r = remap[c[static_cast<std::size_t>(k)]];
            if (r < 0) {
                r = static_cast<std::int64_t>(out_vertices.size());
                out_vertices.push_back(reps[c[static_cast<std::size_t>(k)]]);
            }
            out[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(r);
        }
        tris.push_back(out);
    }
    return TriangleMesh(std::move(out_vertices), std::move(tris));
}

double choose_cell_size(const TriangleMesh& mesh, double target_density, double flat_padding_m) {
    if (!(target_density > 0.0)) throw std::invalid_argument("decimate_mesh: target density must be positive");
    if (mesh.empty()) throw std::invalid_argument("decimate_mesh: empty mesh");
    const double volume = density_volume(mesh, flat_padding_m);
    if (!(volume >= 1e-12)) {
        throw std::invalid_argument("decimate_mesh: bounding-box volume below 1e-12 m^3; supply a padding thickness");
    }
    const double target = target_density * volume;
    if (static_cast<double>(mesh.triangle_count()) <= target) return 0.0;

    const auto [lo, hi] = padded_bounds(mesh, flat_padding_m);
    const Vec3 e = hi - lo;
    const double largest = std::max({e.x, e.y, e.z});

    // geometric sweep from the full box down to 1/4096 of it, 16 steps per octave
    double best_cell = largest;
    double best_score = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 16 * 12; ++k) {
        const double cell = largest * std::exp2(-k / 16.0);
        const auto count = static_cast<double>(cluster_vertices(mesh, cell, flat_padding_m).triangle_count());
        if (count <= 0.0) continue;
        const double score = std::abs(std::log(count / target));
        if (score < best_score) {
            best_score = score;
            best_cell = cell;
        }
        if (count > 4.0 * target) break;  // counts only grow from here on
    }
    return best_cell;
}

TriangleMesh decimate_mesh(const TriangleMesh& mesh, double target_density, double flat_padding_m) {
    const double cell = choose_cell_size(mesh, target_density, flat_padding_m);
    if (cell == 0.0) return mesh;
    return cluster_vertices(mesh, cell, flat_padding_m);
}

// ---------------------------------------------------------------------------
// Misc geometry

TriangleMesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
    if (!(radius > 0.0) || subdivisions < 0) throw std::invalid_argument("make_icosphere: bad parameters");
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                           {0, -1, -p}, {0, 1, -p}, {p, 0, -1},  {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
    for (auto& x : v) x = normalize(x);
    std::vector<TriangleIndices> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::unordered_map<std::uint64_t, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            v.push_back(normalize((v[a] + v[b]) * 0.5));
            const auto idx = static_cast<std::uint32_t>(v.size() - 1);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<TriangleIndices> next;
        next.reserve(f.size() * 4);
        for (const auto& t : f) {
            const auto a = mid(t[0], t[1]);
            const auto b = mid(t[1], t[2]);
            const auto c = mid(t[2], t[0]);
            next.push_back({t[0], a, c});
            next.push_back({t[1], b, a});
            next.push_back({t[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }
    for (auto& x : v) x = center + x * radius;
    return TriangleMesh(std::move(v), std::move(f));
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // closest-point by Voronoi region classification
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return distance(p, a);
    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return distance(p, b);
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return distance(p, a + ab * (d1 / (d1 - d3)));
    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return distance(p, c);
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return distance(p, a + ac * (d2 / (d2 - d6)));
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return distance(p, b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6))));
    }
    const double denom = 1.0 / (va + vb + vc);
    return distance(p, a + ab * (vb * denom) + ac * (vc * denom));
}

// ---------------------------------------------------------------------------
// OBJ

TriangleMesh parse_obj(const std::string& text) {
    std::vector<Vec3> verts;
    std::vector<TriangleIndices> tris;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error("OBJ line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z)) fail("expected three coordinates");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<std::uint32_t> poly;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                long idx = 0;
                try {
                    std::size_t used = 0;
                    idx = std::stol(head, &used);
                    if (used != head.size()) fail("bad index '" + tok + "'");
                } catch (const std::logic_error&) {
                    fail("bad index '" + tok + "'");
                }
                const long n = static_cast<long>(verts.size());
                const long resolved = idx > 0 ? idx - 1 : n + idx;
                if (idx == 0 || resolved < 0 || resolved >= n) fail("index out of range");
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (poly.size() < 3) fail("face needs at least three vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    return TriangleMesh(std::move(verts), std::move(tris));
}

TriangleMesh load_obj(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open OBJ file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_obj(ss.str());
}

}  // namespace epr
