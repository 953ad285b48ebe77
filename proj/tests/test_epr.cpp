#include <doctest.h>

#include <cmath>

#include "epr/epr.hpp"
#include "support.hpp"

using namespace epr;

namespace {

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// interpolate along x on both rows, then along y
std::uint8_t lerp_lerp(const Image& img, double u, double v, int ch) {
    auto px = [&](int x, int y) {
        x = std::min(x, img.width - 1);
        y = std::min(y, img.height - 1);
        const Rgb8 c = img.at(x, y);
        return static_cast<double>(ch == 0 ? c.r : ch == 1 ? c.g : c.b);
    };
    const int x = static_cast<int>(u), y = static_cast<int>(v);
    const double top = lerp(px(x, y), px(x + 1, y), u - x);
    const double bottom = lerp(px(x, y + 1), px(x + 1, y + 1), u - x);
    return static_cast<std::uint8_t>(std::floor(lerp(top, bottom, v - y) + 0.5));
}

int max_channel_diff(Rgb8 a, Rgb8 b) {
    return std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
}

std::vector<ProxyGeometry> all_proxies(const Scene& scene) {
    return {FixedPlaneProxy{0.95}, GazePlaneProxy{0.6}, make_mesh_proxy(scene, 1e9, 0.0, 1),
            make_mesh_proxy(scene, 1e9, 0.02, 2)};
}

}  // namespace

TEST_CASE("sample_bilinear") {
    Image img(2, 1);
    img.set(0, 0, {0, 0, 0});
    img.set(1, 0, {255, 255, 255});
    CHECK(sample_bilinear(img, 0.5, 0.0) == Rgb8{128, 128, 128});
    CHECK(sample_bilinear(img, 1.0, 0.0) == Rgb8{255, 255, 255});
    CHECK_THROWS_AS(sample_bilinear(img, 1.01, 0.0), std::out_of_range);
    CHECK_THROWS_AS(sample_bilinear(img, -0.01, 0.0), std::out_of_range);

    const Image r = test::random_image(17, 13, 4);
    for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 17; ++x) CHECK(sample_bilinear(r, x, y) == r.at(x, y));

    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(0, 16), v = rng.uniform(0, 12);
        const Rgb8 got = sample_bilinear(r, u, v);
        const Rgb8 want{lerp_lerp(r, u, v, 0), lerp_lerp(r, u, v, 1), lerp_lerp(r, u, v, 2)};
        // the two evaluation orders may straddle a .5 boundary by rounding noise
        CHECK(max_channel_diff(got, want) <= 1);
    }
}

TEST_CASE("zero baseline reproduces the world image for every proxy") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig(test::rig_with_offset({0, 0, 0}));
    const Image world = raycast_render(scene, rig.world_camera).image;
    for (const auto& proxy : all_proxies(scene)) {
        const EprFrame f = epr_render(rig.dominant_eye(), rig.world_camera, world, proxy, rig);
        std::size_t valid = 0;
        for (int y = 0; y < f.height(); ++y) {
            for (int x = 0; x < f.width(); ++x) {
                if (f.at(x, y) != PixelStatus::valid) continue;
                ++valid;
                CHECK(max_channel_diff(f.image.at(x, y), world.at(x, y)) <= 1);
            }
        }
        if (std::holds_alternative<SceneMeshProxy>(proxy)) {
            CHECK(valid > 10000);
        } else {
            CHECK(valid >= static_cast<std::size_t>(639 * 479));
        }
    }
}

TEST_CASE("exact mesh proxy lands on the real surface") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig({});
    const ProxyGeometry proxy = make_mesh_proxy(scene, 1e9, 0.0, 1);
    const PinholeCamera& eye = rig.dominant_eye();
    Rng rng(6);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const auto tr = reproject_point(rng.uniform(230, 410), rng.uniform(160, 320), eye, rig.world_camera, proxy, scene, rig);
        if (!tr.proxy_point || !tr.camera_scene_hit || !tr.eye_scene_hit) continue;
        ++checked;
        CHECK(distance(tr.camera_scene_hit->point, tr.eye_scene_hit->point) < 1e-9);
        CHECK(distance(tr.camera_scene_hit->point, *tr.proxy_point) < 1e-9);
    }
    CHECK(checked > 50);
}

TEST_CASE("zero baseline trace is self-consistent for any proxy") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig(test::rig_with_offset({0, 0, 0}));
    for (const auto& proxy : all_proxies(scene)) {
        const auto tr = reproject_point(300, 200, rig.dominant_eye(), rig.world_camera, proxy, scene, rig);
        REQUIRE(tr.camera_scene_hit);
        REQUIRE(tr.eye_scene_hit);
        CHECK(distance(tr.camera_scene_hit->point, tr.eye_scene_hit->point) < 1e-9);
    }
}

TEST_CASE("plane proxy parallax on a fronto-parallel wall") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig(test::rig_with_offset({0.03, 0, 0}));
    const PinholeCamera& eye = rig.dominant_eye();
    for (double dp : {0.55, 0.7, 0.95, 1.15}) {
        const double expected = 0.03 * std::abs(0.75 - dp) / dp;
        Rng rng(7);
        for (int i = 0; i < 100; ++i) {
            const auto tr = reproject_point(rng.uniform(200, 440), rng.uniform(150, 330), eye, rig.world_camera,
                                            FixedPlaneProxy{dp}, scene, rig);
            if (!tr.camera_scene_hit || !tr.eye_scene_hit) continue;
            const double d = distance(tr.camera_scene_hit->point, tr.eye_scene_hit->point);
            CHECK(d == doctest::Approx(expected).epsilon(1e-6));
        }
    }
    CHECK(0.03 * 0.20 / 0.95 == doctest::Approx(0.006316).epsilon(1e-4));
}

TEST_CASE("displacement grows with proxy depth error") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig(test::rig_with_offset({0.03, 0.01, 0}));
    auto displacement = [&](double dp) {
        const auto tr = reproject_point(320, 240, rig.dominant_eye(), rig.world_camera, FixedPlaneProxy{dp}, scene, rig);
        REQUIRE(tr.camera_scene_hit);
        return distance(tr.camera_scene_hit->point, tr.eye_scene_hit->point);
    };
    double prev = displacement(0.75);
    CHECK(prev < 1e-12);
    for (double dp = 0.80; dp <= 1.5; dp += 0.05) {
        const double d = displacement(dp);
        CHECK(d > prev);
        prev = d;
    }
    prev = 0.0;
    for (double dp = 0.70; dp >= 0.4; dp -= 0.05) {
        const double d = displacement(dp);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("EPR pixels equal the world image sampled at the traced camera pixel") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig({});
    const Image world = raycast_render(scene, rig.world_camera).image;
    for (const auto& proxy : all_proxies(scene)) {
        const EprFrame f = epr_render(rig.dominant_eye(), rig.world_camera, world, proxy, rig);
        Rng rng(8);
        for (int i = 0; i < 300; ++i) {
            const int x = static_cast<int>(rng.below(640)), y = static_cast<int>(rng.below(480));
            const auto tr = reproject_point(x, y, rig.dominant_eye(), rig.world_camera, proxy, scene, rig);
            if (f.at(x, y) != PixelStatus::valid) {
                CHECK(f.image.at(x, y) == kInvalidColor);
                continue;
            }
            REQUIRE(tr.camera_pixel);
            CHECK(f.image.at(x, y) == sample_bilinear(world, tr.camera_pixel->u, tr.camera_pixel->v));
        }
    }
}

TEST_CASE("status codes") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig({});
    const Image world = raycast_render(scene, rig.world_camera).image;

    // the mesh proxy only covers the board, so the periphery has no proxy hit
    const EprFrame mesh = epr_render(rig.dominant_eye(), rig.world_camera, world, make_mesh_proxy(scene, 1e9, 0, 1), rig);
    CHECK(mesh.at(0, 0) == PixelStatus::no_proxy_hit);
    CHECK(mesh.at(320, 240) == PixelStatus::valid);

    // the camera sits 5 cm above the eye, so the bottom rows of a near plane fall outside its view
    const EprFrame plane = epr_render(rig.dominant_eye(), rig.world_camera, world, FixedPlaneProxy{0.3}, rig);
    CHECK(plane.at(320, 479) == PixelStatus::outside_camera_fov);
    CHECK(plane.status_gray()[479 * 640 + 320] == 64);

    // a small occluder in front of a backdrop: parts of the backdrop are hidden from the camera
    const Scene two({make_fronto_quad({0, 0, 1.0}, 2, 2, {200, 200, 200}, 1),
                     make_fronto_quad({0.0, 0.0, 0.5}, 0.05, 0.05, {255, 0, 0}, 2)});
    const Image w2 = raycast_render(two, rig.world_camera).image;
    const EprFrame occ = epr_render(rig.dominant_eye(), rig.world_camera, w2, make_mesh_proxy(two, 1e9, 0, 1), rig);
    std::size_t occluded = 0;
    for (auto s : occ.status) occluded += s == PixelStatus::occluded_from_camera;
    CHECK(occluded > 100);

    Image wrong(10, 10);
    CHECK_THROWS_AS(epr_render(rig.dominant_eye(), rig.world_camera, wrong, FixedPlaneProxy{}, rig), std::invalid_argument);
}
