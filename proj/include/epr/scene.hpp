#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "epr/camera.hpp"
#include "epr/geom.hpp"

namespace epr {

struct Rgb8 {
    std::uint8_t r{0}, g{0}, b{0};
    bool operator==(const Rgb8&) const = default;
};

struct FlatColor {
    Rgb8 color;
};

/// Checkerboard on a planar patch. Cell (0, 0) touches `origin`; columns run
/// along `axis_u`, rows along `axis_v`. Even (col + row) parity gets color_a.
struct Checkerboard {
    Rgb8 color_a{235, 235, 235};
    Rgb8 color_b{25, 25, 25};
    double square_size_m{0.02};
    int cols{11};
    int rows{9};
    Vec3 origin;
    Vec3 axis_u{1, 0, 0};
    Vec3 axis_v{0, 1, 0};

    Vec3 normal() const { return cross(axis_u, axis_v); }
    Vec3 center() const {
        return origin + axis_u * (0.5 * cols * square_size_m) + axis_v * (0.5 * rows * square_size_m);
    }
    /// Center of cell (col, row) on the board surface.
    Vec3 square_center(int col, int row) const {
        return origin + axis_u * ((col + 0.5) * square_size_m) + axis_v * ((row + 0.5) * square_size_m);
    }
    /// Corners of cell (col, row) in counter-clockwise order from its (u, v) minimum.
    std::array<Vec3, 4> square_corners(int col, int row) const;
};

using Material = std::variant<FlatColor, Checkerboard>;

struct SceneObject {
    TriangleMesh mesh;
    Material material;
    int id{0};
};

struct SquareIndex {
    int col{0};
    int row{0};
    bool operator==(const SquareIndex&) const = default;
};

/// Immutable set of objects with a shared ray-casting accelerator.
class Scene {
public:
    Scene() = default;
    /// Throws std::invalid_argument on duplicate ids.
    explicit Scene(std::vector<SceneObject> objects);

    const std::vector<SceneObject>& objects() const { return *objects_; }
    bool empty() const { return !objects_ || objects_->empty(); }
    const SceneObject* find(int id) const;

    /// All object meshes concatenated in object order.
    const TriangleMesh& merged_mesh() const { return *merged_; }
    const MeshBvh& bvh() const { return *bvh_; }

    /// Nearest hit over all objects; Hit::object_id is set.
    std::optional<Hit> intersect(const Ray& ray) const;

    /// Material color at a point on object `id`.
    Rgb8 shade(int object_id, const Vec3& point) const;

private:
    std::shared_ptr<const std::vector<SceneObject>> objects_;
    std::shared_ptr<const TriangleMesh> merged_;
    std::shared_ptr<const MeshBvh> bvh_;
    std::vector<int> triangle_object_;
};

enum class BoardOrientation { wall, table };

struct BoardSpec {
    BoardOrientation orientation{BoardOrientation::wall};
    int cols{11};
    int rows{9};
    double square_m{0.02};
    double distance_m{0.75};
    /// Angle between the rig's forward axis and the board plane (TABLE only).
    double tilt_deg{50.0};
    Rgb8 color_a{235, 235, 235};
    Rgb8 color_b{25, 25, 25};
    /// Quads per board side; 1 yields the plain two-triangle board.
    int subdivisions{1};
};

inline constexpr int kBoardObjectId = 1;

/// Board centered on the rig's forward axis at `distance_m`. WALL faces the rig
/// head-on; TABLE is tilted about the x-axis so the forward axis meets it at `tilt_deg`.
/// Throws std::invalid_argument on bad dimensions or tilt outside (0, 90].
Scene build_board_scene(const BoardSpec& spec);

/// Board patch only, for composing larger scenes.
SceneObject make_board_object(const BoardSpec& spec, int id = kBoardObjectId);

/// Flat-colored axis-aligned quad facing the rig (normal -z), centered at `center`.
SceneObject make_fronto_quad(const Vec3& center, double width_m, double height_m, Rgb8 color, int id);

/// Cell under `surface_point`, or nothing if it is off the board extent or
/// more than 1e-6 m from the board plane.
std::optional<SquareIndex> square_index(const Checkerboard& board, const Vec3& surface_point);
std::optional<SquareIndex> square_index(const SceneObject& board, const Vec3& surface_point);

/// Row-major RGB8 image.
struct Image {
    int width{0};
    int height{0};
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, Rgb8 fill = {});

    Rgb8 at(int x, int y) const {
        const auto i = index(x, y);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    void set(int x, int y, Rgb8 c) {
        const auto i = index(x, y);
        rgb[i] = c.r;
        rgb[i + 1] = c.g;
        rgb[i + 2] = c.b;
    }
    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    }
};

struct GSample {
    double depth{0.0};  // along the camera forward axis
    Vec3 point;
    int object_id{-1};
    std::optional<SquareIndex> square;
};

struct GBuffer {
    int width{0};
    int height{0};
    std::vector<std::optional<GSample>> samples;

    const std::optional<GSample>& at(int x, int y) const {
        return samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
};

struct Render {
    Image image;
    GBuffer gbuffer;
};

/// Unlit ray-cast render; misses are black with an empty GBuffer entry.
Render raycast_render(const Scene& scene, const PinholeCamera& cam);

// --- PPM / PGM -------------------------------------------------------------

/// Binary P6, maxval 255: "P6\n<w> <h>\n255\n" followed by raw RGB bytes.
std::string encode_ppm(const Image& img);
Image decode_ppm(const std::string& bytes);
/// Binary P5 grayscale with the same header layout.
std::string encode_pgm(int width, int height, const std::vector<std::uint8_t>& gray);

/// File helpers; throw IoError on failure.
void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace epr
