#include "epr/scene.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "epr/parallel.hpp"

namespace epr {

std::array<Vec3, 4> Checkerboard::square_corners(int col, int row) const {
    const Vec3 p0 = origin + axis_u * (col * square_size_m) + axis_v * (row * square_size_m);
    const Vec3 du = axis_u * square_size_m;
    const Vec3 dv = axis_v * square_size_m;
    return {p0, p0 + du, p0 + du + dv, p0 + dv};
}

Scene::Scene(std::vector<SceneObject> objects) {
    std::set<int> ids;
    for (const auto& o : objects) {
        if (!ids.insert(o.id).second) {
            throw std::invalid_argument("Scene: duplicate object id " + std::to_string(o.id));
        }
    }
    TriangleMesh merged;
    for (const auto& o : objects) {
        merged = merged.merged_with(o.mesh);
        triangle_object_.insert(triangle_object_.end(), o.mesh.triangle_count(), o.id);
    }
    objects_ = std::make_shared<const std::vector<SceneObject>>(std::move(objects));
    merged_ = std::make_shared<const TriangleMesh>(std::move(merged));
    bvh_ = std::make_shared<const MeshBvh>(merged_);
}

const SceneObject* Scene::find(int id) const {
    if (!objects_) return nullptr;
    for (const auto& o : *objects_) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

std::optional<Hit> Scene::intersect(const Ray& ray) const {
    if (!bvh_) return std::nullopt;
    auto hit = bvh_->intersect(ray);
    if (hit) hit->object_id = triangle_object_[hit->triangle];
    return hit;
}

namespace {

SquareIndex clamped_cell(const Checkerboard& b, const Vec3& p) {
    const Vec3 local = p - b.origin;
    const int col = static_cast<int>(std::floor(dot(local, b.axis_u) / b.square_size_m));
    const int row = static_cast<int>(std::floor(dot(local, b.axis_v) / b.square_size_m));
    return {std::clamp(col, 0, b.cols - 1), std::clamp(row, 0, b.rows - 1)};
}

}  // namespace

Rgb8 Scene::shade(int object_id, const Vec3& point) const {
    const SceneObject* obj = find(object_id);
    if (!obj) return {};
    return std::visit(
        [&](const auto& m) -> Rgb8 {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FlatColor>) {
                return m.color;
            } else {
                // nearest-neighbor lookup; points on the outer rim belong to the edge cell
                const SquareIndex c = clamped_cell(m, point);
                return (c.col + c.row) % 2 == 0 ? m.color_a : m.color_b;
            }
        },
        obj->material);
}

// ---------------------------------------------------------------------------

namespace {

TriangleMesh grid_patch(const Vec3& origin, const Vec3& du, const Vec3& dv, int n) {
    std::vector<Vec3> verts;
    std::vector<TriangleIndices> tris;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) verts.push_back(origin + du * (static_cast<double>(i) / n) + dv * (static_cast<double>(j) / n));
    auto idx = [n](int i, int j) { return static_cast<std::uint32_t>(j * (n + 1) + i); };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // wound so that the face normal is -(du x dv), i.e. toward the rig
            tris.push_back({idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)});
            tris.push_back({idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)});
        }
    }
    return TriangleMesh(std::move(verts), std::move(tris));
}

}  // namespace

SceneObject make_board_object(const BoardSpec& spec, int id) {
    if (spec.cols < 1 || spec.rows < 1) throw std::invalid_argument("board: cols and rows must be >= 1");
    if (!(spec.square_m > 0.0)) throw std::invalid_argument("board: square size must be positive");
    if (!(spec.distance_m > 0.0)) throw std::invalid_argument("board: distance must be positive");
    if (spec.subdivisions < 1) throw std::invalid_argument("board: subdivisions must be >= 1");
    if (spec.orientation == BoardOrientation::table && !(spec.tilt_deg > 0.0 && spec.tilt_deg <= 90.0)) {
        throw std::invalid_argument("board: tilt must lie in (0, 90] degrees");
    }

    Checkerboard board;
    board.color_a = spec.color_a;
    board.color_b = spec.color_b;
    board.square_size_m = spec.square_m;
    board.cols = spec.cols;
    board.rows = spec.rows;
    board.axis_u = {1.0, 0.0, 0.0};
    if (spec.orientation == BoardOrientation::wall) {
        board.axis_v = {0.0, 1.0, 0.0};
    } else {
        // far edge recedes along +z; the forward axis meets the plane at tilt_deg
        const double tilt = spec.tilt_deg * std::numbers::pi / 180.0;
        board.axis_v = {0.0, std::sin(tilt), std::cos(tilt)};
    }
    const double w = spec.cols * spec.square_m;
    const double h = spec.rows * spec.square_m;
    const Vec3 center{0.0, 0.0, spec.distance_m};
    board.origin = center - board.axis_u * (0.5 * w) - board.axis_v * (0.5 * h);

    SceneObject obj;
    obj.mesh = grid_patch(board.origin, board.axis_u * w, board.axis_v * h, spec.subdivisions);
    obj.material = board;
    obj.id = id;
    return obj;
}

Scene build_board_scene(const BoardSpec& spec) { return Scene({make_board_object(spec)}); }

SceneObject make_fronto_quad(const Vec3& center, double width_m, double height_m, Rgb8 color, int id) {
    if (!(width_m > 0.0) || !(height_m > 0.0)) throw std::invalid_argument("quad: size must be positive");
    const Vec3 origin = center - Vec3{0.5 * width_m, 0.5 * height_m, 0.0};
    return SceneObject{grid_patch(origin, {width_m, 0, 0}, {0, height_m, 0}, 1), FlatColor{color}, id};
}

std::optional<SquareIndex> square_index(const Checkerboard& b, const Vec3& p) {
    const Vec3 local = p - b.origin;
    if (std::abs(dot(local, normalize(b.normal()))) > 1e-6) return std::nullopt;
    const double a = dot(local, b.axis_u) / b.square_size_m;
    const double c = dot(local, b.axis_v) / b.square_size_m;
    if (!(a >= 0.0 && a < b.cols && c >= 0.0 && c < b.rows)) return std::nullopt;
    return SquareIndex{static_cast<int>(std::floor(a)), static_cast<int>(std::floor(c))};
}

std::optional<SquareIndex> square_index(const SceneObject& board, const Vec3& p) {
    const auto* cb = std::get_if<Checkerboard>(&board.material);
    if (!cb) return std::nullopt;
    return square_index(*cb, p);
}

// ---------------------------------------------------------------------------

Image::Image(int w, int h, Rgb8 fill) : width(w), height(h) {
    if (w < 0 || h < 0) throw std::invalid_argument("Image: negative size");
    rgb.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill.r;
        rgb[i + 1] = fill.g;
        rgb[i + 2] = fill.b;
    }
}

Render raycast_render(const Scene& scene, const PinholeCamera& cam) {
    if (scene.empty()) throw std::invalid_argument("raycast_render: empty scene");
    const int w = cam.width();
    const int h = cam.height();
    Render out{Image(w, h), GBuffer{w, h, {}}};
    out.gbuffer.samples.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    const Vec3 forward = cam.forward();

    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            const Ray ray = unproject(cam, x, y);
            const auto hit = scene.intersect(ray);
            if (!hit) continue;
            out.image.set(x, y, scene.shade(hit->object_id, hit->point));
            GSample s;
            s.depth = hit->t * dot(ray.direction, forward);
            s.point = hit->point;
            s.object_id = hit->object_id;
            if (const auto* obj = scene.find(hit->object_id)) s.square = square_index(*obj, hit->point);
            out.gbuffer.samples[row * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = s;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string netpbm_header(const char* magic, int w, int h) {
    return std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

}  // namespace

std::string encode_ppm(const Image& img) {
    std::string out = netpbm_header("P6", img.width, img.height);
    out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
    return out;
}

std::string encode_pgm(int width, int height, const std::vector<std::uint8_t>& gray) {
    if (gray.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("encode_pgm: buffer size mismatch");
    }
    std::string out = netpbm_header("P5", width, height);
    out.append(reinterpret_cast<const char*>(gray.data()), gray.size());
    return out;
}

Image decode_ppm(const std::string& bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> int {
        skip_space();
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos || pos - start > 9) throw IoError("PPM: malformed header");
        return std::stoi(bytes.substr(start, pos - start));
    };
    if (bytes.size() < 2 || bytes.compare(0, 2, "P6") != 0) throw IoError("PPM: expected P6 magic");
    pos = 2;
    const int w = read_int();
    const int h = read_int();
    const int maxval = read_int();
    if (maxval != 255) throw IoError("PPM: only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw IoError("PPM: malformed header");
    }
    ++pos;
    Image img(w, h);
    if (bytes.size() - pos < img.rgb.size()) throw IoError("PPM: truncated pixel data");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.rgb.size(), img.rgb.begin());
    return img;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_ppm(const std::string& path, const Image& img) { write_file(path, encode_ppm(img)); }

Image read_ppm(const std::string& path) { return decode_ppm(read_file(path)); }

}  // namespace epr
