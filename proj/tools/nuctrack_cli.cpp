// nuctrack command line: analyze, sweep, synth.

#include "nuctrack/nuctrack.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace nuctrack;

namespace {

/// Flags shared by analyze and sweep. Only flags the user actually passed
/// override values from --config.
struct CommonFlags {
    std::string config, red, green, out;
    int opening = 0, closing = 0, dilation = 0, threshold = 0;
    std::int64_t min_area = 0;
    double jump_factor = 0;
    std::size_t min_jump = 0;
    unsigned threads = 1;
    std::string red_channel, green_channel;

    CLI::Option *o_red{}, *o_green{}, *o_out{}, *o_opening{}, *o_closing{}, *o_min_area{}, *o_dilation{},
        *o_threshold{}, *o_jump{}, *o_min_jump{}, *o_threads{}, *o_red_channel{}, *o_green_channel{};

    void add(CLI::App& app, bool with_morphology)
    {
        app.add_option("--config", config, "JSON config file; command-line flags override it");
        o_red = app.add_option("--red", red, "Directory of red (nucleus) frames");
        o_green = app.add_option("--green", green, "Directory of green (signal) frames");
        o_out = app.add_option("--out", out, "Output CSV path");
        if (with_morphology) {
            o_opening = app.add_option("--opening", opening, "Opening iterations (default 2)");
            o_closing = app.add_option("--closing", closing, "Closing iterations (default 0)");
        }
        o_min_area = app.add_option("--min-area", min_area, "Minimum nucleus area in pixels (default 20)");
        o_dilation = app.add_option("--dilation", dilation, "Cytoplasm ring dilations (default 5)");
        o_threshold = app.add_option("--threshold", threshold, "Fixed threshold; skips automatic selection")
                          ->check(CLI::Range(0, 255));
        o_jump = app.add_option("--jump-factor", jump_factor, "Relative noise jump for the knee (default 2.0)");
        o_min_jump = app.add_option("--min-jump", min_jump, "Absolute noise jump for the knee (default 10)");
        o_threads = app.add_option("--threads", threads, "Detection worker threads (default 1)");
        o_red_channel = app.add_option("--red-channel", red_channel, "Channel read from red frames (default red)");
        o_green_channel =
            app.add_option("--green-channel", green_channel, "Channel read from green frames (default green)");
    }

    RunConfig resolve() const
    {
        RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
        auto given = [](const CLI::Option* o) { return o && o->count() > 0; };
        if (given(o_red)) cfg.red_dir = red;
        if (given(o_green)) cfg.green_dir = green;
        if (given(o_out)) cfg.out_csv = out;
        if (given(o_opening)) cfg.opening_iters = opening;
        if (given(o_closing)) cfg.closing_iters = closing;
        if (given(o_min_area)) cfg.min_area = min_area;
        if (given(o_dilation)) cfg.dilation_iters = dilation;
        if (given(o_threshold)) cfg.threshold_override = threshold;
        if (given(o_jump)) cfg.jump_factor = jump_factor;
        if (given(o_min_jump)) cfg.min_jump = min_jump;
        if (given(o_threads)) cfg.threads = threads;
        if (given(o_red_channel)) cfg.red_channel = parse_channel(red_channel);
        if (given(o_green_channel)) cfg.green_channel = parse_channel(green_channel);
        if (cfg.red_dir.empty() || cfg.green_dir.empty() || cfg.out_csv.empty()) {
            throw InputError("--red, --green and --out are required (on the command line or in --config)");
        }
        cfg.log = &std::cerr;
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Nucleus detection, tracking and signal measurement for two-channel time-lapse frames"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Detect, track and measure; write per-track CSV");
    CommonFlags analyze_flags;
    analyze_flags.add(*analyze, true);
    std::string overlay_dir, scan_dir;
    bool freeze = false;
    auto* o_overlay = analyze->add_option("--overlay-dir", overlay_dir, "Write annotated PNG per frame");
    auto* o_scan = analyze->add_option("--scan-dir", scan_dir, "Write the threshold scan CSV per frame");
    auto* o_freeze = analyze->add_flag("--freeze-threshold", freeze, "Reuse frame 0's automatic threshold");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Tracked-to-final counts over opening x closing iterations");
    CommonFlags sweep_flags;
    sweep_flags.add(*sweep_cmd, false);
    int max_opening = 5, max_closing = 5;
    bool sweep_freeze = false;
    sweep_cmd->add_option("--max-opening", max_opening, "Largest opening count (default 5)");
    sweep_cmd->add_option("--max-closing", max_closing, "Largest closing count (default 5)");
    auto* o_sweep_freeze = sweep_cmd->add_flag("--freeze-threshold", sweep_freeze, "Reuse frame 0's automatic threshold");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic two-channel sequence with ground truth");
    std::string synth_out;
    synth::DriftSceneParams scene;
    synth::SceneParams render;
    synth::SpeckleNoise noise{0.002, 100};
    std::uint64_t seed = 1;
    int red_bg = render.red_background, green_bg = render.green_background;
    int nucleus = scene.nucleus_intensity, green_nucleus = scene.green_nucleus_level,
        green_cyto = scene.green_cytoplasm_level;
    synth_cmd->add_option("--out", synth_out, "Output directory (red/, green/, ground_truth.json)")->required();
    synth_cmd->add_option("--width", scene.width, "Frame width")->capture_default_str();
    synth_cmd->add_option("--height", scene.height, "Frame height")->capture_default_str();
    synth_cmd->add_option("--frames", scene.frames, "Frame count")->capture_default_str();
    synth_cmd->add_option("--blobs", scene.blobs, "Number of nuclei")->capture_default_str();
    synth_cmd->add_option("--min-radius", scene.min_radius, "Smallest nucleus radius")->capture_default_str();
    synth_cmd->add_option("--max-radius", scene.max_radius, "Largest nucleus radius")->capture_default_str();
    synth_cmd->add_option("--max-step", scene.max_step, "Largest per-frame displacement")->capture_default_str();
    synth_cmd->add_option("--separation", scene.separation_factor, "Minimum center distance in radii")
        ->capture_default_str();
    synth_cmd->add_option("--close-pairs", scene.close_pairs, "Side-by-side nucleus pairs")->capture_default_str();
    synth_cmd->add_option("--density", noise.density, "Speckle density")->capture_default_str();
    synth_cmd->add_option("--amplitude", noise.amplitude, "Speckle amplitude")->capture_default_str();
    synth_cmd->add_option("--red-background", red_bg, "Red background level")->capture_default_str();
    synth_cmd->add_option("--green-background", green_bg, "Green background level")->capture_default_str();
    synth_cmd->add_option("--nucleus-level", nucleus, "Red nucleus level")->capture_default_str();
    synth_cmd->add_option("--green-nucleus", green_nucleus, "Green nucleus level")->capture_default_str();
    synth_cmd->add_option("--green-cytoplasm", green_cyto, "Green cytoplasm level")->capture_default_str();
    synth_cmd->add_option("--seed", seed, "PRNG seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) {
            RunConfig cfg = analyze_flags.resolve();
            if (o_overlay->count()) cfg.overlay_dir = overlay_dir;
            if (o_scan->count()) cfg.scan_dir = scan_dir;
            if (o_freeze->count()) cfg.freeze_threshold = freeze;
            const RunResult result = run(cfg);
            write_tracks_csv(result, cfg.out_csv);
            std::cerr << "tracks: " << result.tracks.size() << ", tracked to final frame: "
                      << result.tracked_to_final() << ", records: " << result.records.size()
                      << ", skipped measurements: " << result.skipped_measurements << '\n';
        } else if (sweep_cmd->parsed()) {
            RunConfig cfg = sweep_flags.resolve();
            if (o_sweep_freeze->count()) cfg.freeze_threshold = sweep_freeze;
            const SweepResult result = sweep(cfg, max_opening, max_closing);
            write_text(cfg.out_csv, sweep_csv(result));
        } else if (synth_cmd->parsed()) {
            auto level = [](int v, const char* what) {
                if (v < 0 || v > 255) throw InputError(std::string(what) + " must be in [0, 255]");
                return static_cast<std::uint8_t>(v);
            };
            render.width = scene.width;
            render.height = scene.height;
            render.red_background = level(red_bg, "--red-background");
            render.green_background = level(green_bg, "--green-background");
            scene.nucleus_intensity = level(nucleus, "--nucleus-level");
            scene.green_nucleus_level = level(green_nucleus, "--green-nucleus");
            scene.green_cytoplasm_level = level(green_cyto, "--green-cytoplasm");

            const auto specs = synth::make_drift_scene(scene, seed);
            const auto seq = synth::generate(specs, scene.frames, render, noise, seed);
            const fs::path root = synth_out;
            fs::create_directories(root / "red");
            fs::create_directories(root / "green");
            for (std::size_t f = 0; f < seq.red.size(); ++f) {
                char name[32];
                std::snprintf(name, sizeof name, "frame_%03zu.png", f);
                RgbImage red(render.width, render.height), green(render.width, render.height);
                for (int y = 0; y < render.height; ++y) {
                    for (int x = 0; x < render.width; ++x) {
                        red.set(x, y, {seq.red[f](x, y), 0, 0});
                        green.set(x, y, {0, seq.green[f](x, y), 0});
                    }
                }
                io::write_png(root / "red" / name, red);
                io::write_png(root / "green" / name, green);
            }
            write_text(root / "ground_truth.json", synth::ground_truth_json(seq.truth).dump(2) + "\n");
            std::cerr << "wrote " << seq.red.size() << " frame pairs with " << specs.size() << " nuclei to "
                      << root.string() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
