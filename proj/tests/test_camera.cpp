#include <doctest.h>

#include "epr/camera.hpp"
#include "epr/random.hpp"

using namespace epr;

TEST_CASE("project") {
    const PinholeCamera cam(Intrinsics{}, RigidTransform{});
    const auto c = project(cam, {0, 0, 1});
    REQUIRE(c);
    CHECK(c->u == 320.0);
    CHECK(c->v == 240.0);
    const auto r = project(cam, {0.1, 0, 1});
    REQUIRE(r);
    CHECK(r->u == doctest::Approx(370.0).epsilon(1e-12));
    CHECK(r->v == doctest::Approx(240.0).epsilon(1e-12));
    CHECK_FALSE(project(cam, {0, 0, -1}));
    CHECK_FALSE(project(cam, {10, 0, 1}));
    CHECK(cam.project_unclipped({10, 0, 1}));
}

TEST_CASE("unproject") {
    const PinholeCamera cam(Intrinsics{}, RigidTransform{});
    CHECK(norm(unproject(cam, 320, 240).direction - Vec3{0, 0, 1}) < 1e-12);
    CHECK(norm(unproject(cam, 370, 240).direction - normalize({0.1, 0, 1})) < 1e-12);
}

TEST_CASE("project inverts unproject for posed cameras") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const Mat3 r = Mat3::rotation(normalize({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}),
                                      rng.uniform(-3, 3));
        const PinholeCamera cam(Intrinsics{}, RigidTransform(r, {rng.uniform(-1, 1), rng.uniform(-1, 1), 0}));
        for (int i = 0; i < 100; ++i) {
            const double u = rng.uniform(0, 639), v = rng.uniform(0, 479);
            const auto p = project(cam, unproject(cam, u, v).point_at(2.0));
            REQUIRE(p);
            CHECK(std::abs(p->u - u) < 1e-6);
            CHECK(std::abs(p->v - v) < 1e-6);
        }
    }
}

TEST_CASE("moving camera and point together leaves the pixel unchanged") {
    const Mat3 r = Mat3::rotation(normalize({0.2, 1, 0.1}), 0.4);
    const RigidTransform move(r, {0.3, -0.1, 0.2});
    const PinholeCamera a(Intrinsics{}, RigidTransform{});
    const PinholeCamera b(Intrinsics{}, move);
    const Vec3 p{0.05, -0.07, 1.3};
    const auto pa = project(a, p);
    const auto pb = project(b, move.apply(p));
    REQUIRE(pa);
    REQUIRE(pb);
    CHECK(pa->u == doctest::Approx(pb->u));
    CHECK(pa->v == doctest::Approx(pb->v));
}

TEST_CASE("intrinsics validation") {
    Intrinsics k;
    k.fx = 0;
    CHECK_THROWS_AS(k.validate(), std::invalid_argument);
    k = {};
    k.width = 0;
    CHECK_THROWS_AS(k.validate(), std::invalid_argument);
    k = {};
    k.cx = 700;
    CHECK_THROWS_AS(k.validate(), std::invalid_argument);
}

TEST_CASE("build_rig") {
    RigConfig c;
    c.camera_offset_m = {0, 0, 0};
    auto rig = build_rig(c);
    CHECK(norm(rig.world_camera.position() - rig.right_eye.position()) < 1e-12);
    CHECK(distance(rig.left_eye.position(), rig.right_eye.position()) == doctest::Approx(0.063).epsilon(1e-9));
    CHECK(rig.left_eye.position().x > rig.right_eye.position().x);

    c.camera_offset_m = {0, 0.05, 0};
    rig = build_rig(c);
    const Vec3 d = rig.world_camera.position() - rig.right_eye.position();
    CHECK(norm(d - Vec3{0, 0.05, 0}) < 1e-12);

    c.dominant = Eye::left;
    rig = build_rig(c);
    CHECK(norm(rig.world_camera.position() - rig.left_eye.position() - Vec3{0, 0.05, 0}) < 1e-12);

    // looking forward with +y up: a point above the axis lands in the upper half of the image
    const auto above = project(rig.left_eye, rig.left_eye.position() + Vec3{0, 0.1, 1});
    REQUIRE(above);
    CHECK(above->v < 240.0);
    const auto left = project(rig.left_eye, rig.left_eye.position() + Vec3{0.1, 0, 1});
    REQUIRE(left);
    CHECK(left->u < 320.0);

    c.ipd_m = -1;
    CHECK_THROWS_AS(build_rig(c), std::invalid_argument);
}
