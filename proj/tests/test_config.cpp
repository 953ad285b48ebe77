#include <doctest.h>

#include "epr/config.hpp"

using namespace epr;

namespace {

ConfigError::Kind kind_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.kind();
    }
    FAIL("expected a ConfigError for: " << text);
    return ConfigError::Kind::parse;
}

int line_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("empty config yields the defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.board.orientation == BoardOrientation::wall);
    CHECK(c.board.cols == 11);
    CHECK(c.board.rows == 9);
    CHECK(c.board.square_m == 0.02);
    CHECK(c.board.distance_m == 0.75);
    CHECK(c.board.tilt_deg == 50.0);
    CHECK(c.proxy.method == "plane");
    CHECK(c.proxy.plane_depth_m == 0.95);
    CHECK(c.proxy.mesh_density == 2500.0);
    CHECK(c.proxy.gaze_n_stab == 40);
    CHECK(c.proxy.gaze_rate_hz == 30.0);
    CHECK(c.rig.ipd_m == 0.063);
    CHECK(c.rig.dominant == Eye::right);
    CHECK(c.task.touch_noise_m == 0.002);
    CHECK(c.seed == 0);
    CHECK(parse_config("# only a comment\n\n   \n").proxy.plane_depth_m == 0.95);
}

TEST_CASE("values") {
    const RunConfig c = parse_config(R"(seed = 7
[rig]
camera_offset_m = [0.0, 0.05, 0.0]   # above the eye
dominant_eye = "left"
fx = 400
[board]
orientation = "table"
tilt_deg = 35
[proxy]
method = "mesh"
mesh_depth_error_m = 0.01
[output]
prefix = "out#1"
)");
    CHECK(c.seed == 7);
    CHECK(c.rig.camera_offset_m == Vec3{0.0, 0.05, 0.0});
    CHECK(c.rig.dominant == Eye::left);
    CHECK(c.rig.eye_intrinsics.fx == 400.0);
    CHECK(c.rig.camera_intrinsics.fx == 400.0);
    CHECK(c.board.orientation == BoardOrientation::table);
    CHECK(c.board.tilt_deg == 35.0);
    CHECK(c.proxy.method == "mesh");
    CHECK(c.proxy.mesh_depth_error_m == 0.01);
    CHECK(c.output.prefix == "out#1");
}

TEST_CASE("keys ahead of any section resolve when unambiguous") {
    CHECK(parse_config("camera_offset_m = [0.0, 0.05, 0.0]").rig.camera_offset_m == Vec3{0, 0.05, 0});
    CHECK(kind_of("ipd_m = -1") == ConfigError::Kind::range);
    CHECK(kind_of("outline_px = 2") == ConfigError::Kind::unknown_key);
}

TEST_CASE("errors") {
    CHECK(kind_of("[rig]\nipd_m = -1\n") == ConfigError::Kind::range);
    CHECK(kind_of("[board]\ncols = 2.5\n") == ConfigError::Kind::range);
    CHECK(kind_of("[board]\ntilt_deg = 95\n") == ConfigError::Kind::range);
    CHECK(kind_of("[proxy]\nmethod = \"voxel\"\n") == ConfigError::Kind::range);
    CHECK(kind_of("[op]\ncanny_low = 120\ncanny_high = 100\n") == ConfigError::Kind::range);
    CHECK(kind_of("[rig]\ncx = 900\n") == ConfigError::Kind::range);

    CHECK(kind_of("[rig]\nwobble = 1\n") == ConfigError::Kind::unknown_key);
    CHECK(kind_of("[lighting]\n") == ConfigError::Kind::unknown_key);

    CHECK(kind_of("[rig]\nipd_m 0.06\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[rig\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[rig]\nipd_m = \"wide\"\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[rig]\ncamera_offset_m = [1, 2]\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[rig]\ncamera_offset_m = [1, 2, 3\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[rig]\nipd_m = 0.06\nipd_m = 0.07\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[rig]\nipd_m = nan\n") == ConfigError::Kind::parse);
    CHECK(kind_of("[output]\nprefix = \"open\n") == ConfigError::Kind::parse);

    CHECK(line_of("\n\n[board]\nrows = 0\n") == 4);
    CHECK(line_of("[rig]\n\nipd_m = x\n") == 3);
}

TEST_CASE("error codes") {
    CHECK(std::string(ConfigError(ConfigError::Kind::parse, 1, "").code()) == "E_PARSE");
    CHECK(std::string(ConfigError(ConfigError::Kind::range, 1, "").code()) == "E_RANGE");
    CHECK(std::string(ConfigError(ConfigError::Kind::unknown_key, 1, "").code()) == "E_UNKNOWN_KEY");
}

TEST_CASE("format_config round trip") {
    RunConfig c;
    c.seed = 123456789;
    c.rig.ipd_m = 0.0615;
    c.rig.camera_offset_m = {0.1 + 0.2, -1.0 / 3.0, 1e-7};
    c.rig.dominant = Eye::left;
    c.board.subdivisions = 4;
    c.proxy.method = "gaze";
    c.proxy.plane_depth_m = 0.7 + 1e-15;
    c.op.cvd = "deuteranopia";
    c.output.prefix = "run 3";
    const std::string text = format_config(c);
    const RunConfig back = parse_config(text);
    CHECK(format_config(back) == text);
    CHECK(back.rig.camera_offset_m == c.rig.camera_offset_m);
    CHECK(back.proxy.plane_depth_m == c.proxy.plane_depth_m);
    CHECK(back.seed == c.seed);
    CHECK(format_config(parse_config("")) == format_config(RunConfig{}));
}
