#include <doctest.h>

#include <cmath>

#include "epr/proxy.hpp"
#include "support.hpp"

using namespace epr;

TEST_CASE("plane proxies") {
    const EyeRig rig = build_rig({});
    const PinholeCamera& eye = rig.dominant_eye();
    const Ray axial(eye.position(), eye.forward());
    const auto h = intersect_proxy(FixedPlaneProxy{0.95}, axial, rig);
    REQUIRE(h);
    CHECK(h->t == doctest::Approx(0.95).epsilon(1e-12));

    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const Ray r = unproject(eye, rng.uniform(0, 639), rng.uniform(0, 479));
        const auto a = intersect_proxy(GazePlaneProxy{0.75}, r, rig);
        const auto b = intersect_proxy(FixedPlaneProxy{0.75}, r, rig);
        REQUIRE(a);
        REQUIRE(b);
        CHECK(a->t == b->t);
        CHECK(a->point == b->point);
        CHECK(camera_depth(eye, a->point) == doctest::Approx(0.75));
    }
    CHECK(std::string(proxy_method_name(FixedPlaneProxy{})) == "plane");
    CHECK(std::string(proxy_method_name(GazePlaneProxy{})) == "gaze");
}

TEST_CASE("undecimated mesh proxy hits the scene exactly") {
    const Scene scene = build_board_scene({});
    const EyeRig rig = build_rig({});
    const ProxyGeometry proxy = make_mesh_proxy(scene, 1e9, 0.0, 1);
    Rng rng(2);
    int hits = 0;
    for (int i = 0; i < 200; ++i) {
        const Ray r = unproject(rig.dominant_eye(), rng.uniform(230, 410), rng.uniform(160, 320));
        const auto a = intersect_proxy(proxy, r, rig);
        const auto b = scene.intersect(r);
        REQUIRE(a.has_value() == b.has_value());
        if (!a) continue;
        ++hits;
        CHECK(a->t == b->t);
        CHECK(a->point == b->point);
    }
    CHECK(hits > 20);
}

TEST_CASE("make_mesh_proxy") {
    const Scene scene = build_board_scene({});
    const auto& src = scene.merged_mesh();

    SUBCASE("zero error keeps the scene mesh") {
        const auto p = make_mesh_proxy(scene, 1e9, 0.0, 3);
        CHECK(p.mesh().vertices() == src.vertices());
        CHECK(p.mesh().triangles() == src.triangles());
    }
    SUBCASE("perturbation is bounded and reproducible") {
        const auto a = make_mesh_proxy(scene, 1e9, 0.02, 9);
        const auto b = make_mesh_proxy(scene, 1e9, 0.02, 9);
        const auto c = make_mesh_proxy(scene, 1e9, 0.02, 10);
        CHECK(a.mesh().vertices() == b.mesh().vertices());
        CHECK(a.mesh().vertices() != c.mesh().vertices());
        double worst = 0.0;
        for (std::size_t i = 0; i < src.vertices().size(); ++i)
            worst = std::max(worst, distance(a.mesh().vertices()[i], src.vertices()[i]));
        CHECK(worst <= 0.02);
        CHECK(worst > 0.0);
        CHECK(a.depth_perturbation_m() == 0.02);
    }
    SUBCASE("tessellated board decimated to 2500 tri/m^3") {
        BoardSpec spec;
        spec.subdivisions = 32;
        const Scene fine = build_board_scene(spec);
        const double target = 2500.0 * density_volume(fine.merged_mesh());
        const auto p = make_mesh_proxy(fine, 2500.0, 0.0, 4);
        CHECK(static_cast<double>(p.mesh().triangle_count()) >= 0.75 * target);
        CHECK(static_cast<double>(p.mesh().triangle_count()) <= 1.25 * target);
    }
    CHECK_THROWS_AS(make_mesh_proxy(scene, 0.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_mesh_proxy(scene, 2500.0, -0.1, 1), std::invalid_argument);
}

TEST_CASE("gaze filter") {
    const Scene wall = build_board_scene({});
    const EyeRig rig = build_rig({});
    const PinholeCamera& eye = rig.dominant_eye();
    const Ray axial(eye.position(), eye.forward());

    SUBCASE("constant gaze") {
        GazeState s({}, eye.forward());
        for (int k = 0; k < 100; ++k) {
            s = ingest_gaze(s, axial, wall.bvh(), k / 30.0);
            CHECK(s.current_depth() == doctest::Approx(0.75).epsilon(1e-12));
        }
        CHECK(s.samples().size() == 40);
    }
    SUBCASE("step from 0.75 to 0.40") {
        const Scene near = build_board_scene([] {
            BoardSpec b;
            b.distance_m = 0.40;
            return b;
        }());
        GazeState s({}, eye.forward());
        int k = 0;
        for (; k < 40; ++k) s.ingest(axial, wall.bvh(), k / 30.0);
        for (int n = 1; n <= 40; ++n, ++k) {
            s.ingest(axial, near.bvh(), k / 30.0);
            if (n == 20) CHECK(s.current_depth() == doctest::Approx(0.575).epsilon(1e-12));
            const bool settled = std::abs(s.current_depth() - 0.40) <= 0.01 * 0.40;
            CHECK(settled == (n == 40));
        }
    }
    SUBCASE("misses leave the buffer alone") {
        GazeState s({}, eye.forward());
        CHECK_FALSE(s.ingest(Ray(eye.position(), {0, 1, 0}), wall.bvh(), 0.0));
        CHECK_FALSE(s.has_depth());
        CHECK_THROWS_AS(s.current_depth(), std::logic_error);
    }
    SUBCASE("time must not run backwards") {
        GazeState s({}, eye.forward());
        s.push_depth(0.5, 1.0);
        CHECK_THROWS_AS(s.push_depth(0.5, 0.5), std::invalid_argument);
    }
    CHECK_THROWS_AS(GazeState({0, 30.0}), std::invalid_argument);
}

TEST_CASE("vergence depth sample") {
    const EyeRig rig = build_rig({});
    Rng rng(8);
    const Vec3 target{0, 0, 0.75};
    CHECK(vergence_depth_sample(rig, target, 0.0, rng) == doctest::Approx(0.75).epsilon(1e-9));
    // error grows with distance for the same angular noise
    auto spread = [&](double d) {
        Rng r(9);
        double sum = 0.0;
        for (int i = 0; i < 500; ++i) sum += std::abs(vergence_depth_sample(rig, {0, 0, d}, 1e-3, r) - d);
        return sum / 500;
    };
    CHECK(spread(1.5) > 3.0 * spread(0.5));
}
