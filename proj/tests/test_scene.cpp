#include <doctest.h>

#include <cmath>
#include <numbers>

#include "epr/random.hpp"
#include "epr/scene.hpp"
#include "support.hpp"

using namespace epr;

namespace {

const Checkerboard& board_of(const Scene& s) { return std::get<Checkerboard>(s.find(kBoardObjectId)->material); }

}  // namespace

TEST_CASE("wall board geometry") {
    const Scene s = build_board_scene({});
    const auto [lo, hi] = s.merged_mesh().bounds();
    CHECK(lo.x == doctest::Approx(-0.11));
    CHECK(hi.x == doctest::Approx(0.11));
    CHECK(lo.y == doctest::Approx(-0.09));
    CHECK(hi.y == doctest::Approx(0.09));
    CHECK(lo.z == doctest::Approx(0.75));
    CHECK(hi.z == doctest::Approx(0.75));

    BoardSpec unit;
    unit.cols = unit.rows = 1;
    unit.square_m = 1.0;
    unit.distance_m = 1.0;
    const Scene u = build_board_scene(unit);
    CHECK(u.merged_mesh().triangle_count() == 2);
    CHECK(u.merged_mesh().surface_area() == doctest::Approx(1.0));
    for (const Vec3& v : u.merged_mesh().vertices()) CHECK(v.z == 1.0);
}

TEST_CASE("table board tilt") {
    BoardSpec spec;
    spec.orientation = BoardOrientation::table;
    spec.tilt_deg = 50.0;
    const Scene s = build_board_scene(spec);
    const Vec3 n = normalize(board_of(s).normal());
    const double angle = std::acos(std::abs(dot(n, {0, 0, 1}))) * 180.0 / std::numbers::pi;
    CHECK(angle == doctest::Approx(40.0).epsilon(1e-9));
    spec.tilt_deg = 0.0;
    CHECK_THROWS_AS(build_board_scene(spec), std::invalid_argument);
}

TEST_CASE("subdivided board keeps its footprint") {
    BoardSpec spec;
    spec.subdivisions = 8;
    const Scene s = build_board_scene(spec);
    CHECK(s.merged_mesh().triangle_count() == 128);
    CHECK(s.merged_mesh().surface_area() == doctest::Approx(0.22 * 0.18));
}

TEST_CASE("raycast_render: flat quad filling the frustum") {
    const Scene s({make_fronto_quad({0, 0, 2}, 10, 10, {255, 0, 0}, 5)});
    const PinholeCamera cam(Intrinsics{64, 48, 50, 50, 32, 24}, RigidTransform{});
    const Render r = raycast_render(s, cam);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
            CHECK(r.image.at(x, y) == Rgb8{255, 0, 0});
            REQUIRE(r.gbuffer.at(x, y));
            CHECK(r.gbuffer.at(x, y)->depth == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(r.gbuffer.at(x, y)->object_id == 5);
        }
    }
}

TEST_CASE("raycast_render: misses are black with no record") {
    const Scene s({make_fronto_quad({0, 0, 2}, 0.1, 0.1, {255, 0, 0}, 5)});
    const PinholeCamera cam(Intrinsics{64, 48, 50, 50, 32, 24}, RigidTransform{});
    const Render r = raycast_render(s, cam);
    CHECK(r.image.at(0, 0) == Rgb8{});
    CHECK_FALSE(r.gbuffer.at(0, 0));
    CHECK(r.gbuffer.at(32, 24));
}

TEST_CASE("raycast_render: checkerboard matches the analytic board") {
    const Scene s = build_board_scene({});
    const EyeRig rig = build_rig({});
    const PinholeCamera& cam = rig.right_eye;
    const Render r = raycast_render(s, cam);
    const Checkerboard& b = board_of(s);

    // principal point: the ray runs along +z from the eye, so depth is the wall distance
    REQUIRE(r.gbuffer.at(320, 240));
    CHECK(r.gbuffer.at(320, 240)->depth == doctest::Approx(0.75).epsilon(1e-9));

    int checked = 0;
    for (int y = 0; y < cam.height(); ++y) {
        for (int x = 0; x < cam.width(); ++x) {
            const Ray ray = unproject(cam, x, y);
            const double t = (0.75 - ray.origin.z) / ray.direction.z;
            const Vec3 p = ray.point_at(t);
            const double a = (p.x - b.origin.x) / b.square_size_m;
            const double c = (p.y - b.origin.y) / b.square_size_m;
            const bool on = a >= 0 && a < b.cols && c >= 0 && c < b.rows;
            // skip pixels within a hair of a cell boundary
            const double fa = a - std::floor(a), fc = c - std::floor(c);
            if (std::min({fa, 1 - fa, fc, 1 - fc}) < 1e-6) continue;
            const auto& g = r.gbuffer.at(x, y);
            REQUIRE(g.has_value() == on);
            if (!on) {
                CHECK(r.image.at(x, y) == Rgb8{});
                continue;
            }
            const int col = static_cast<int>(std::floor(a)), row = static_cast<int>(std::floor(c));
            CHECK(r.image.at(x, y) == ((col + row) % 2 == 0 ? b.color_a : b.color_b));
            REQUIRE(g->square);
            CHECK(*g->square == SquareIndex{col, row});
            ++checked;
        }
    }
    CHECK(checked > 10000);
}

TEST_CASE("square_index") {
    const Scene s = build_board_scene({});
    const Checkerboard& b = board_of(s);
    const auto center = square_index(b, {0, 0, 0.75});
    REQUIRE(center);
    CHECK(*center == SquareIndex{5, 4});
    const auto corner = square_index(b, {-0.11 + 0.001, -0.09 + 0.001, 0.75});
    REQUIRE(corner);
    CHECK(*corner == SquareIndex{0, 0});
    CHECK_FALSE(square_index(b, {0.2, 0, 0.75}));
    CHECK_FALSE(square_index(b, {0, 0, 0.76}));

    // brute force: the cell whose center is nearest in the chessboard metric
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p{rng.uniform(-0.11, 0.11), rng.uniform(-0.09, 0.09), 0.75};
        int best_col = -1, best_row = -1;
        double best = 1e9;
        for (int col = 0; col < b.cols; ++col) {
            for (int row = 0; row < b.rows; ++row) {
                const Vec3 c = b.square_center(col, row);
                const double d = std::max(std::abs(p.x - c.x), std::abs(p.y - c.y));
                if (d < best) {
                    best = d;
                    best_col = col;
                    best_row = row;
                }
            }
        }
        const auto got = square_index(*s.find(kBoardObjectId), p);
        REQUIRE(got);
        CHECK(*got == SquareIndex{best_col, best_row});
    }
}

TEST_CASE("square corners") {
    const Checkerboard& b = board_of(build_board_scene({}));
    const auto c = b.square_corners(0, 0);
    CHECK(norm(c[0] - Vec3{-0.11, -0.09, 0.75}) < 1e-12);
    CHECK(norm(c[2] - Vec3{-0.09, -0.07, 0.75}) < 1e-12);
}

TEST_CASE("scene rejects duplicate ids") {
    CHECK_THROWS_AS(Scene({make_fronto_quad({0, 0, 1}, 1, 1, {}, 3), make_fronto_quad({0, 0, 2}, 1, 1, {}, 3)}),
                    std::invalid_argument);
}

TEST_CASE("PPM and PGM") {
    const Image img = test::random_image(7, 5, 1);
    const std::string bytes = encode_ppm(img);
    CHECK(bytes.rfind("P6\n7 5\n255\n", 0) == 0);
    CHECK(decode_ppm(bytes) == img);
    CHECK_THROWS_AS(decode_ppm("P5\n1 1\n255\n\0"), IoError);
    CHECK_THROWS_AS(decode_ppm(bytes.substr(0, bytes.size() - 1)), IoError);
    CHECK_THROWS_AS(read_ppm("/nonexistent/dir/x.ppm"), IoError);
    const std::string pgm = encode_pgm(2, 1, {0, 255});
    CHECK(pgm == std::string("P5\n2 1\n255\n\x00\xff", 13));
}
