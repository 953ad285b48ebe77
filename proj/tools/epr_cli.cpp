#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "epr/config.hpp"
#include "epr/epr.hpp"
#include "epr/imageops.hpp"
#include "epr/metrics.hpp"
#include "epr/parallel.hpp"
#include "epr/proxy.hpp"
#include "epr/scene.hpp"

namespace {

using namespace epr;

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kIo = 3, kInternal = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::string method;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads{0};
};

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : parse_config(read_file(g.config_path));
    if (!g.method.empty()) cfg.proxy.method = g.method;
    if (g.seed) cfg.seed = *g.seed;
    if (!g.out.empty()) cfg.output.prefix = g.out;
    return cfg;
}

Eye parse_eye(const std::string& name, const EyeRig& rig) {
    if (name.empty()) return rig.dominant;
    return name == "left" ? Eye::left : Eye::right;
}

int cmd_render(const RunConfig& cfg, bool print_config, bool ground_truth) {
    if (print_config) {
        std::cout << format_config(cfg);
        return kOk;
    }
    const EyeRig rig = build_rig(cfg.rig);
    const Scene scene = build_board_scene(cfg.board);
    const ProxyGeometry proxy = proxy_from_config(cfg, scene, rig);
    const Image world = raycast_render(scene, rig.world_camera).image;
    for (Eye e : {Eye::left, Eye::right}) {
        const std::string base = cfg.output.prefix + "_" + to_string(e);
        const EprFrame frame = epr_render(rig.eye(e), rig.world_camera, world, proxy, rig);
        write_ppm(base + ".ppm", frame.image);
        write_file(base + "_mask.pgm", encode_pgm(frame.width(), frame.height(), frame.status_gray()));
        if (ground_truth || cfg.output.ground_truth) write_ppm(base + "_gt.ppm", raycast_render(scene, rig.eye(e)).image);
    }
    return kOk;
}

int cmd_map(const RunConfig& cfg, const std::string& eye_name) {
    const EyeRig rig = build_rig(cfg.rig);
    const Scene scene = build_board_scene(cfg.board);
    const Eye eye = parse_eye(eye_name, rig);
    const auto map = misalignment_map(scene, rig, proxy_from_config(cfg, scene, rig), eye);
    write_csv(misalignment_table(map, cfg.proxy.method, eye), cfg.output.prefix + "_misalignment.csv");
    return kOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, const std::string& range, const std::string& eye_name) {
    const EyeRig rig = build_rig(cfg.rig);
    const Scene scene = build_board_scene(cfg.board);
    SweepSettings s;
    s.method = cfg.proxy.method;
    s.param = param == "plane_depth"        ? SweepParam::plane_depth
              : param == "mesh_depth_error" ? SweepParam::mesh_depth_error
                                            : SweepParam::mesh_density;
    s.eye = parse_eye(eye_name, rig);
    s.mesh_density = cfg.proxy.mesh_density;
    s.mesh_depth_error_m = cfg.proxy.mesh_depth_error_m;
    s.seed = cfg.seed;
    try {
        s.values = parse_range(range);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (s.param != SweepParam::plane_depth && s.method != "mesh")
        throw UsageError("--param " + param + " needs --method mesh");
    if (s.param == SweepParam::plane_depth && s.method == "mesh")
        throw UsageError("--param plane_depth needs --method plane or gaze");
    write_csv(sweep_table(depth_sweep(scene, rig, s)), cfg.output.prefix + "_sweep.csv");
    return kOk;
}

int cmd_select(const RunConfig& cfg) {
    const SelectionResult result = selection_from_config(cfg);
    write_csv(selection_table(result), cfg.output.prefix + "_selection.csv");
    std::size_t correct = 0;
    for (const auto& t : result.trials) correct += t.correct ? 1 : 0;
    std::printf("accuracy %zu/%zu = %.4f\n", correct, result.trials.size(), result.accuracy);
    return kOk;
}

int cmd_timeline(const RunConfig& cfg, double step_depth, double duration) {
    const EyeRig rig = build_rig(cfg.rig);
    GazeStepScene step;
    try {
        step = build_gaze_step_scene(cfg.board, rig, step_depth);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    TimelineSettings s;
    s.t_start = -1.0;
    s.t_end = duration;
    s.filter = gaze_filter(cfg);
    const std::vector<GazeEvent> script{{-1e9, step.far_target}, {0.0, step.near_target}};
    write_csv(timeline_table(gaze_timeline(step.scene, rig, script, s)), cfg.output.prefix + "_timeline.csv");
    return kOk;
}

CvdDeficiency cvd_of(const std::string& name) {
    return name == "deuteranopia" ? CvdDeficiency::deuteranopia : CvdDeficiency::protanopia;
}

int cmd_imageop(const RunConfig& cfg, const std::string& op, const std::string& in) {
    const Image img = read_ppm(in);
    const std::string base = cfg.output.prefix + "_" + op;
    if (op == "canny") {
        const Mask m = canny(img, {cfg.op.canny_sigma, cfg.op.canny_low, cfg.op.canny_high});
        write_file(base + ".pgm", encode_mask_pgm(m));
    } else if (op == "hue") {
        const Mask m = hue_segment(img, cfg.op.hue_min_deg, cfg.op.hue_max_deg, cfg.op.min_sat, cfg.op.min_val);
        write_file(base + ".pgm", encode_mask_pgm(m));
        write_ppm(base + "_outline.ppm", composite(img, mask_outline(m, cfg.op.outline_px), {0, 255, 0}));
    } else if (op == "daltonize") {
        write_ppm(base + ".ppm", daltonize(img, cvd_of(cfg.op.cvd), cfg.op.dalton_strength));
    } else {
        write_ppm(base + ".ppm", simulate_cvd(img, cvd_of(cfg.op.cvd)));
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eye-perspective rendering simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "Scene config file");
    app.add_option("--method", g.method, "Proxy method")->check(CLI::IsMember({"plane", "gaze", "mesh"}));
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--out", g.out, "Output prefix");
    app.add_option("--threads", g.threads, "Worker threads, 0 = all cores");

    auto* render = app.add_subcommand("render", "EPR frames and validity masks for both eyes");
    bool print_config = false, ground_truth = false;
    render->add_flag("--print-config", print_config, "Print the resolved config and exit");
    render->add_flag("--ground-truth", ground_truth, "Also write ray-cast eye renders");

    std::string eye_name;
    auto* map = app.add_subcommand("map", "Per-pixel misalignment CSV");
    map->add_option("--eye", eye_name, "Eye (default: dominant)")->check(CLI::IsMember({"left", "right"}));

    auto* sweep = app.add_subcommand("sweep", "Misalignment statistics over a parameter range");
    std::string param = "plane_depth", range = "0.55:1.15:0.05";
    sweep->add_option("--param", param)->check(CLI::IsMember({"plane_depth", "mesh_depth_error", "mesh_density"}));
    sweep->add_option("--range", range, "start:stop:step");
    sweep->add_option("--eye", eye_name)->check(CLI::IsMember({"left", "right"}));

    auto* select = app.add_subcommand("select", "Simulated square-selection task");
    std::optional<int> trials, outline;
    std::optional<double> sigma;
    select->add_option("--trials", trials)->check(CLI::PositiveNumber);
    select->add_option("--sigma", sigma, "Touch noise, m")->check(CLI::NonNegativeNumber);
    select->add_option("--outline-px", outline)->check(CLI::PositiveNumber);

    auto* timeline = app.add_subcommand("timeline", "Gaze-proxy response to a depth step at t = 0");
    double step_depth = 0.40, duration = 2.0;
    timeline->add_option("--step-depth", step_depth, "Near target depth, m");
    timeline->add_option("--duration", duration, "Seconds after the step")->check(CLI::NonNegativeNumber);

    auto* imageop = app.add_subcommand("imageop", "Image operation on a PPM");
    std::string op, in;
    imageop->add_option("--op", op)->required()->check(CLI::IsMember({"canny", "hue", "daltonize", "simulate-cvd"}));
    imageop->add_option("--in", in, "Input PPM")->required();
    std::optional<double> c_sigma, c_low, c_high, h_min, h_max, strength;
    std::string cvd;
    imageop->add_option("--sigma", c_sigma);
    imageop->add_option("--low", c_low);
    imageop->add_option("--high", c_high);
    imageop->add_option("--hue-min", h_min);
    imageop->add_option("--hue-max", h_max);
    imageop->add_option("--cvd", cvd)->check(CLI::IsMember({"protanopia", "deuteranopia"}));
    imageop->add_option("--strength", strength);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        set_thread_count(g.threads);
        RunConfig cfg = resolve_config(g);
        if (*select) {
            if (trials) cfg.task.trials = *trials;
            if (sigma) cfg.task.touch_noise_m = *sigma;
            if (outline) cfg.task.outline_px = *outline;
        }
        if (*imageop) {
            if (c_sigma) cfg.op.canny_sigma = *c_sigma;
            if (c_low) cfg.op.canny_low = *c_low;
            if (c_high) cfg.op.canny_high = *c_high;
            if (h_min) cfg.op.hue_min_deg = *h_min;
            if (h_max) cfg.op.hue_max_deg = *h_max;
            if (!cvd.empty()) cfg.op.cvd = cvd;
            if (strength) cfg.op.dalton_strength = *strength;
            // re-validate overrides through the config grammar
            cfg = parse_config(format_config(cfg));
        }
        if (*render) return cmd_render(cfg, print_config, ground_truth);
        if (*map) return cmd_map(cfg, eye_name);
        if (*sweep) return cmd_sweep(cfg, param, range, eye_name);
        if (*select) return cmd_select(cfg);
        if (*timeline) return cmd_timeline(cfg, step_depth, duration);
        return cmd_imageop(cfg, op, in);
    } catch (const UsageError& e) {
        std::cerr << "epr: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "epr: " << e.code() << ": " << e.what() << "\n";
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "epr: I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "epr: invalid input: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "epr: internal error: " << e.what() << "\n";
        return kInternal;
    }
}
