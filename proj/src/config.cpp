#include "epr/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "epr/metrics.hpp"

namespace epr {

ConfigError::ConfigError(Kind kind, int line, const std::string& message)
    : std::runtime_error(message), kind_(kind), line_(line) {}

const char* ConfigError::code() const {
    switch (kind_) {
        case Kind::parse: return "E_PARSE";
        case Kind::range: return "E_RANGE";
        case Kind::unknown_key: return "E_UNKNOWN_KEY";
    }
    return "E_PARSE";
}

namespace {

using Value = std::variant<double, std::string, Vec3>;

[[noreturn]] void fail(ConfigError::Kind kind, int line, const std::string& why) {
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    throw ConfigError(kind, line, where + why);
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

std::optional<double> parse_number(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) return std::nullopt;
    // digits, sign, point and exponent only: rejects "inf", "nan" and hex floats
    for (char c : t) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == 'e' || c == 'E')) {
            return std::nullopt;
        }
    }
    std::istringstream in(t);
    in.imbue(std::locale::classic());
    double v = 0.0;
    in >> v;
    if (in.fail() || !in.eof() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Strips a trailing comment, honoring '#' inside double quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

Value parse_value(const std::string& raw, int line) {
    const std::string v = trim(raw);
    if (v.empty()) fail(ConfigError::Kind::parse, line, "missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') fail(ConfigError::Kind::parse, line, "unterminated string");
        const std::string inner = v.substr(1, v.size() - 2);
        if (inner.find('"') != std::string::npos) fail(ConfigError::Kind::parse, line, "stray quote in string");
        return inner;
    }
    if (v.front() == '[') {
        if (v.back() != ']') fail(ConfigError::Kind::parse, line, "unterminated triple");
        std::vector<double> parts;
        std::stringstream ss(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto n = parse_number(item);
            if (!n) fail(ConfigError::Kind::parse, line, "triple elements must be numbers");
            parts.push_back(*n);
        }
        if (parts.size() != 3) fail(ConfigError::Kind::parse, line, "triple needs exactly three numbers");
        return Vec3{parts[0], parts[1], parts[2]};
    }
    const auto n = parse_number(v);
    if (!n) fail(ConfigError::Kind::parse, line, "cannot parse value '" + v + "'");
    return *n;
}

double want_number(const Value& v, const std::string& key, int line) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    fail(ConfigError::Kind::parse, line, key + " expects a number");
}

int want_int(const Value& v, const std::string& key, int line) {
    const double d = want_number(v, key, line);
    if (d != std::floor(d) || std::abs(d) > 2e9) fail(ConfigError::Kind::range, line, key + " must be an integer");
    return static_cast<int>(d);
}

std::string want_string(const Value& v, const std::string& key, int line) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    fail(ConfigError::Kind::parse, line, key + " expects a quoted string");
}

Vec3 want_triple(const Value& v, const std::string& key, int line) {
    if (const auto* t = std::get_if<Vec3>(&v)) return *t;
    fail(ConfigError::Kind::parse, line, key + " expects a triple [a, b, c]");
}

void require(bool ok, int line, const std::string& why) {
    if (!ok) fail(ConfigError::Kind::range, line, why);
}

using Setter = std::function<void(RunConfig&, const Value&, int)>;


template <typename Get>
Setter number(Get get, const char* key, std::function<bool(double)> ok, const char* rule) {
    return [=](RunConfig& c, const Value& v, int line) {
        const double d = want_number(v, key, line);
        require(ok(d), line, std::string(key) + " " + rule);
        get(c) = d;
    };
}

template <typename Get>
Setter integer(Get get, const char* key, int min_value) {
    return [=](RunConfig& c, const Value& v, int line) {
        const int i = want_int(v, key, line);
        require(i >= min_value, line, std::string(key) + " must be >= " + std::to_string(min_value));
        get(c) = i;
    };
}

bool is_positive(double d) { return d > 0.0; }
bool non_negative(double d) { return d >= 0.0; }
bool unit_interval(double d) { return d >= 0.0 && d <= 1.0; }
bool hue_degrees(double d) { return d >= 0.0 && d < 360.0; }

Setter intrinsic(double Intrinsics::*field, const char* key) {
    return [=](RunConfig& c, const Value& v, int line) {
        const double d = want_number(v, key, line);
        require(d >= 0.0, line, std::string(key) + " must be non-negative");
        c.rig.eye_intrinsics.*field = d;
        c.rig.camera_intrinsics.*field = d;
    };
}

Setter intrinsic_size(int Intrinsics::*field, const char* key) {
    return [=](RunConfig& c, const Value& v, int line) {
        const int i = want_int(v, key, line);
        require(i >= 1, line, std::string(key) + " must be >= 1");
        c.rig.eye_intrinsics.*field = i;
        c.rig.camera_intrinsics.*field = i;
    };
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
    static const std::map<std::string, std::map<std::string, Setter>> s = {
        {"",
         {{"seed", [](RunConfig& c, const Value& v, int line) {
               const double d = want_number(v, "seed", line);
               require(d >= 0.0 && d == std::floor(d) && d < 9.007199254740992e15, line,
                       "seed must be a non-negative integer");
               c.seed = static_cast<std::uint64_t>(d);
           }}}},
        {"rig",
         {{"ipd_m", number([](RunConfig& c) -> double& { return c.rig.ipd_m; }, "ipd_m", is_positive, "must be positive")},
          {"camera_offset_m", [](RunConfig& c, const Value& v, int line) {
               c.rig.camera_offset_m = want_triple(v, "camera_offset_m", line);
           }},
          {"dominant_eye", [](RunConfig& c, const Value& v, int line) {
               const std::string s = want_string(v, "dominant_eye", line);
               require(s == "left" || s == "right", line, "dominant_eye must be \"left\" or \"right\"");
               c.rig.dominant = s == "left" ? Eye::left : Eye::right;
           }},
          {"width", intrinsic_size(&Intrinsics::width, "width")},
          {"height", intrinsic_size(&Intrinsics::height, "height")},
          {"fx", intrinsic(&Intrinsics::fx, "fx")},
          {"fy", intrinsic(&Intrinsics::fy, "fy")},
          {"cx", intrinsic(&Intrinsics::cx, "cx")},
          {"cy", intrinsic(&Intrinsics::cy, "cy")}}},
        {"board",
         {{"orientation", [](RunConfig& c, const Value& v, int line) {
               const std::string s = want_string(v, "orientation", line);
               require(s == "wall" || s == "table", line, "orientation must be \"wall\" or \"table\"");
               c.board.orientation = s == "wall" ? BoardOrientation::wall : BoardOrientation::table;
           }},
          {"cols", integer([](RunConfig& c) -> int& { return c.board.cols; }, "cols", 1)},
          {"rows", integer([](RunConfig& c) -> int& { return c.board.rows; }, "rows", 1)},
          {"square_m", number([](RunConfig& c) -> double& { return c.board.square_m; }, "square_m", is_positive,
                              "must be positive")},
          {"distance_m", number([](RunConfig& c) -> double& { return c.board.distance_m; }, "distance_m", is_positive,
                                "must be positive")},
          {"tilt_deg", number([](RunConfig& c) -> double& { return c.board.tilt_deg; }, "tilt_deg",
                              [](double d) { return d > 0.0 && d <= 90.0; }, "must lie in (0, 90]")},
          {"subdivisions", integer([](RunConfig& c) -> int& { return c.board.subdivisions; }, "subdivisions", 1)}}},
        {"proxy",
         {{"method", [](RunConfig& c, const Value& v, int line) {
               const std::string s = want_string(v, "method", line);
               require(s == "plane" || s == "gaze" || s == "mesh", line, "method must be plane, gaze or mesh");
               c.proxy.method = s;
           }},
          {"plane_depth_m", number([](RunConfig& c) -> double& { return c.proxy.plane_depth_m; }, "plane_depth_m",
                                   is_positive, "must be positive")},
          {"mesh_density", number([](RunConfig& c) -> double& { return c.proxy.mesh_density; }, "mesh_density",
                                  is_positive, "must be positive")},
          {"mesh_depth_error_m", number([](RunConfig& c) -> double& { return c.proxy.mesh_depth_error_m; },
                                        "mesh_depth_error_m", non_negative, "must be >= 0")},
          {"gaze_n_stab", integer([](RunConfig& c) -> int& { return c.proxy.gaze_n_stab; }, "gaze_n_stab", 1)},
          {"gaze_rate_hz", number([](RunConfig& c) -> double& { return c.proxy.gaze_rate_hz; }, "gaze_rate_hz",
                                  is_positive, "must be positive")}}},
        {"task",
         {{"trials", integer([](RunConfig& c) -> int& { return c.task.trials; }, "trials", 1)},
          {"touch_noise_m", number([](RunConfig& c) -> double& { return c.task.touch_noise_m; }, "touch_noise_m",
                                   non_negative, "must be >= 0")},
          {"outline_px", integer([](RunConfig& c) -> int& { return c.task.outline_px; }, "outline_px", 1)}}},
        {"op",
         {{"canny_sigma", number([](RunConfig& c) -> double& { return c.op.canny_sigma; }, "canny_sigma", is_positive,
                                 "must be positive")},
          {"canny_low", number([](RunConfig& c) -> double& { return c.op.canny_low; }, "canny_low", is_positive,
                               "must be positive")},
          {"canny_high", number([](RunConfig& c) -> double& { return c.op.canny_high; }, "canny_high", is_positive,
                                "must be positive")},
          {"hue_min_deg", number([](RunConfig& c) -> double& { return c.op.hue_min_deg; }, "hue_min_deg", hue_degrees,
                                 "must lie in [0, 360)")},
          {"hue_max_deg", number([](RunConfig& c) -> double& { return c.op.hue_max_deg; }, "hue_max_deg", hue_degrees,
                                 "must lie in [0, 360)")},
          {"min_sat", number([](RunConfig& c) -> double& { return c.op.min_sat; }, "min_sat", unit_interval,
                             "must lie in [0, 1]")},
          {"min_val", number([](RunConfig& c) -> double& { return c.op.min_val; }, "min_val", unit_interval,
                             "must lie in [0, 1]")},
          {"cvd", [](RunConfig& c, const Value& v, int line) {
               const std::string s = want_string(v, "cvd", line);
               require(s == "protanopia" || s == "deuteranopia", line, "cvd must be protanopia or deuteranopia");
               c.op.cvd = s;
           }},
          {"dalton_strength", number([](RunConfig& c) -> double& { return c.op.dalton_strength; }, "dalton_strength",
                                     [](double d) { return d >= 0.0 && d <= 2.0; }, "must lie in [0, 2]")},
          {"outline_px", integer([](RunConfig& c) -> int& { return c.op.outline_px; }, "outline_px", 1)}}},
        {"output",
         {{"prefix", [](RunConfig& c, const Value& v, int line) {
               const std::string s = want_string(v, "prefix", line);
               require(!s.empty(), line, "prefix must not be empty");
               c.output.prefix = s;
           }},
          {"ground_truth", [](RunConfig& c, const Value& v, int line) {
               const int i = want_int(v, "ground_truth", line);
               require(i == 0 || i == 1, line, "ground_truth must be 0 or 1");
               c.output.ground_truth = i;
           }}}},
    };
    return s;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::map<std::string, int> key_line;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string body = trim(strip_comment(raw));
        if (body.empty()) continue;
        if (body.front() == '[' && body.find('=') == std::string::npos) {
            if (body.back() != ']') fail(ConfigError::Kind::parse, line, "malformed section header");
            const std::string name = trim(body.substr(1, body.size() - 2));
            if (!is_identifier(name)) fail(ConfigError::Kind::parse, line, "malformed section name");
            if (!schema().count(name) || name.empty()) fail(ConfigError::Kind::unknown_key, line, "unknown section [" + name + "]");
            section = name;
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail(ConfigError::Kind::parse, line, "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        if (!is_identifier(key)) fail(ConfigError::Kind::parse, line, "malformed key '" + key + "'");
        const auto* keys = &schema().at(section);
        auto it = keys->find(key);
        if (it == keys->end() && section.empty()) {
            // before any header, a key that names exactly one section key is accepted
            int matches = 0;
            for (const auto& [name, sec] : schema()) {
                const auto hit = sec.find(key);
                if (hit != sec.end()) {
                    ++matches;
                    keys = &sec;
                    it = hit;
                }
            }
            if (matches > 1) fail(ConfigError::Kind::unknown_key, line, "key '" + key + "' is ambiguous outside a section");
        }
        if (it == keys->end()) {
            const std::string where = section.empty() ? "top level" : "[" + section + "]";
            fail(ConfigError::Kind::unknown_key, line, "unknown key '" + key + "' in " + where);
        }
        std::string owner = section;
        for (const auto& [name, sec] : schema())
            if (&sec == keys) owner = name;
        const std::string full = owner + "." + key;
        if (!seen.insert(full).second) fail(ConfigError::Kind::parse, line, "duplicate key '" + key + "'");
        key_line[full] = line;
        it->second(cfg, parse_value(body.substr(eq + 1), line), line);
    }

    auto line_of = [&](std::initializer_list<const char*> keys) {
        int l = 0;
        for (const char* k : keys)
            if (key_line.count(k)) l = std::max(l, key_line[k]);
        return l;
    };
    require(is_finite(cfg.rig.camera_offset_m), line_of({"rig.camera_offset_m"}), "camera_offset_m must be finite");
    try {
        cfg.rig.eye_intrinsics.validate();
    } catch (const std::invalid_argument& e) {
        fail(ConfigError::Kind::range, line_of({"rig.width", "rig.height", "rig.fx", "rig.fy", "rig.cx", "rig.cy"}),
             e.what());
    }
    require(cfg.op.canny_low <= cfg.op.canny_high, line_of({"op.canny_low", "op.canny_high"}),
            "canny_low must not exceed canny_high");
    return cfg;
}

namespace {

std::string num(double d) {
    char buf[40];
    // shortest form that reads back to the same double
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, d);
        if (std::strtod(buf, nullptr) == d) break;
    }
    std::string s = buf;
    // keep it a number token the parser accepts
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

std::string format_config(const RunConfig& c) {
    const Intrinsics& k = c.rig.eye_intrinsics;
    std::ostringstream out;
    out << "seed = " << c.seed << "\n\n";
    out << "[rig]\n"
        << "ipd_m = " << num(c.rig.ipd_m) << "\n"
        << "camera_offset_m = [" << num(c.rig.camera_offset_m.x) << ", " << num(c.rig.camera_offset_m.y) << ", "
        << num(c.rig.camera_offset_m.z) << "]\n"
        << "dominant_eye = \"" << to_string(c.rig.dominant) << "\"\n"
        << "width = " << k.width << "\nheight = " << k.height << "\n"
        << "fx = " << num(k.fx) << "\nfy = " << num(k.fy) << "\ncx = " << num(k.cx) << "\ncy = " << num(k.cy) << "\n\n";
    out << "[board]\n"
        << "orientation = \"" << (c.board.orientation == BoardOrientation::wall ? "wall" : "table") << "\"\n"
        << "cols = " << c.board.cols << "\nrows = " << c.board.rows << "\n"
        << "square_m = " << num(c.board.square_m) << "\n"
        << "distance_m = " << num(c.board.distance_m) << "\n"
        << "tilt_deg = " << num(c.board.tilt_deg) << "\n"
        << "subdivisions = " << c.board.subdivisions << "\n\n";
    out << "[proxy]\n"
        << "method = \"" << c.proxy.method << "\"\n"
        << "plane_depth_m = " << num(c.proxy.plane_depth_m) << "\n"
        << "mesh_density = " << num(c.proxy.mesh_density) << "\n"
        << "mesh_depth_error_m = " << num(c.proxy.mesh_depth_error_m) << "\n"
        << "gaze_n_stab = " << c.proxy.gaze_n_stab << "\n"
        << "gaze_rate_hz = " << num(c.proxy.gaze_rate_hz) << "\n\n";
    out << "[task]\n"
        << "trials = " << c.task.trials << "\n"
        << "touch_noise_m = " << num(c.task.touch_noise_m) << "\n"
        << "outline_px = " << c.task.outline_px << "\n\n";
    out << "[op]\n"
        << "canny_sigma = " << num(c.op.canny_sigma) << "\n"
        << "canny_low = " << num(c.op.canny_low) << "\n"
        << "canny_high = " << num(c.op.canny_high) << "\n"
        << "hue_min_deg = " << num(c.op.hue_min_deg) << "\n"
        << "hue_max_deg = " << num(c.op.hue_max_deg) << "\n"
        << "min_sat = " << num(c.op.min_sat) << "\n"
        << "min_val = " << num(c.op.min_val) << "\n"
        << "cvd = \"" << c.op.cvd << "\"\n"
        << "dalton_strength = " << num(c.op.dalton_strength) << "\n"
        << "outline_px = " << c.op.outline_px << "\n\n";
    out << "[output]\n"
        << "prefix = \"" << c.output.prefix << "\"\n"
        << "ground_truth = " << c.output.ground_truth << "\n";
    return out.str();
}

GazeFilterConfig gaze_filter(const RunConfig& config) {
    return {config.proxy.gaze_n_stab, config.proxy.gaze_rate_hz};
}

ProxyGeometry proxy_from_config(const RunConfig& config, const Scene& scene, const EyeRig& rig) {
    const std::string& m = config.proxy.method;
    if (m == "plane") return FixedPlaneProxy{config.proxy.plane_depth_m};
    if (m == "gaze") {
        const Vec3 center = std::get<Checkerboard>(scene.find(kBoardObjectId)->material).center();
        return settled_gaze_proxy(scene, rig, center, gaze_filter(config));
    }
    return make_mesh_proxy(scene, config.proxy.mesh_density, config.proxy.mesh_depth_error_m, config.seed);
}

SelectionResult selection_from_config(const RunConfig& config) {
    const EyeRig rig = build_rig(config.rig);
    const Scene scene = build_board_scene(config.board);
    SelectionSettings s;
    s.trials = config.task.trials;
    s.touch_noise_sigma_m = config.task.touch_noise_m;
    s.outline_px = config.task.outline_px;
    s.seed = config.seed;
    if (config.proxy.method != "gaze") return simulate_selection(scene, rig, proxy_from_config(config, scene, rig), s);
    const GazeFilterConfig filter = gaze_filter(config);
    return simulate_selection(
        scene, rig, [&](const Vec3& target) -> ProxyGeometry { return settled_gaze_proxy(scene, rig, target, filter); }, s);
}

}  // namespace epr
