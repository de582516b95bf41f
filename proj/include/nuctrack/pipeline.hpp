#pragma once

#include "nuctrack/autothresh.hpp"
#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"
#include "nuctrack/image_io.hpp"
#include "nuctrack/imgproc.hpp"
#include "nuctrack/overlay.hpp"
#include "nuctrack/parallel.hpp"
#include "nuctrack/regions.hpp"
#include "nuctrack/signal.hpp"
#include "nuctrack/tracker.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace nuctrack {

struct RunConfig {
    std::filesystem::path red_dir;
    std::filesystem::path green_dir;
    Channel red_channel = Channel::Red;
    Channel green_channel = Channel::Green;

    int opening_iters = 2;
    int closing_iters = 0;
    std::int64_t min_area = 20;
    int dilation_iters = 5;
    double jump_factor = 2.0;
    std::size_t min_jump = 10;
    std::optional<int> threshold_override;
    /// Reuse frame 0's automatic threshold for every frame.
    bool freeze_threshold = false;
    StructuringElement se = StructuringElement::Square3x3;
    Connectivity connectivity = Connectivity::Eight;

    std::filesystem::path out_csv;
    std::optional<std::filesystem::path> overlay_dir;
    std::optional<std::filesystem::path> scan_dir;

    /// Worker threads for per-frame detection. Output does not depend on it.
    unsigned threads = 1;
    /// Per-frame progress lines go here when set.
    std::ostream* log = nullptr;

    ThresholdParams threshold_params() const
    {
        return {{opening_iters, closing_iters, se}, min_area, {jump_factor, min_jump}, connectivity};
    }
};

inline Channel parse_channel(const std::string& name)
{
    if (name == "red") return Channel::Red;
    if (name == "green") return Channel::Green;
    if (name == "blue") return Channel::Blue;
    if (name == "luminance") return Channel::Luminance;
    throw InputError("unknown channel '" + name + "' (expected red, green, blue or luminance)");
}

/// Overlays keys present in a JSON config object onto `cfg`.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j)
{
    if (!j.is_object()) throw InputError("config: top level must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "red") cfg.red_dir = value.get<std::string>();
        else if (key == "green") cfg.green_dir = value.get<std::string>();
        else if (key == "out") cfg.out_csv = value.get<std::string>();
        else if (key == "red_channel") cfg.red_channel = parse_channel(value.get<std::string>());
        else if (key == "green_channel") cfg.green_channel = parse_channel(value.get<std::string>());
        else if (key == "opening") cfg.opening_iters = value.get<int>();
        else if (key == "closing") cfg.closing_iters = value.get<int>();
        else if (key == "min_area") cfg.min_area = value.get<std::int64_t>();
        else if (key == "dilation") cfg.dilation_iters = value.get<int>();
        else if (key == "jump_factor") cfg.jump_factor = value.get<double>();
        else if (key == "min_jump") cfg.min_jump = value.get<std::size_t>();
        else if (key == "threshold") {
            if (value.is_null()) cfg.threshold_override.reset();
            else cfg.threshold_override = value.get<int>();
        }
        else if (key == "freeze_threshold") cfg.freeze_threshold = value.get<bool>();
        else if (key == "overlay_dir") cfg.overlay_dir = value.get<std::string>();
        else if (key == "scan_dir") cfg.scan_dir = value.get<std::string>();
        else if (key == "threads") cfg.threads = value.get<unsigned>();
        else throw InputError("config: unknown key '" + key + "'");
    }
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config " + path.string());
    RunConfig cfg;
    try {
        apply_json(cfg, nlohmann::json::parse(f));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config " + path.string() + ": " + e.what());
    }
    return cfg;
}

inline void validate(const RunConfig& cfg)
{
    if (cfg.opening_iters < 0 || cfg.closing_iters < 0) throw InputError("opening/closing counts must be >= 0");
    if (cfg.min_area < 0) throw InputError("min_area must be >= 0");
    if (cfg.dilation_iters < 1) throw InputError("dilation must be >= 1");
    if (!(cfg.jump_factor > 1.0)) throw InputError("jump_factor must be > 1");
    if (cfg.min_jump < 1) throw InputError("min_jump must be >= 1");
    if (cfg.threshold_override && (*cfg.threshold_override < 0 || *cfg.threshold_override > 255)) {
        throw InputError("threshold must be in [0, 255]");
    }
}

/// PNG/TIFF files in `dir`, sorted by filename.
inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && (io::is_png(entry.path()) || io::is_tiff(entry.path()))) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

inline std::vector<GrayImage> ingest_sequence(const std::filesystem::path& dir, Channel channel)
{
    const auto files = list_frames(dir);
    if (files.empty()) throw IoError("no PNG or TIFF frames in " + dir.string());
    std::vector<GrayImage> frames;
    frames.reserve(files.size());
    for (const auto& f : files) {
        frames.push_back(extract_channel(io::read_image(f), channel));
        if (!frames.back().same_shape(frames.front())) {
            throw DimensionError("frame " + f.filename().string() + " is " + std::to_string(frames.back().width()) +
                                 "x" + std::to_string(frames.back().height()) + " but " +
                                 files.front().filename().string() + " is " +
                                 std::to_string(frames.front().width()) + "x" +
                                 std::to_string(frames.front().height()));
        }
    }
    return frames;
}

/// Everything the detection stage knows about one red frame.
struct FrameDetection {
    int threshold = 0;
    std::optional<ThresholdDecision> decision; // empty when the threshold was given
    std::vector<ThresholdScanRow> scan;
    BinaryMask binary;                         // thresholded, before morphology
    BinaryMask clean;                          // after opening and closing
    Labeling labeling;                         // of `clean`, unfiltered
    std::vector<Region> regions;               // area >= min_area
};

inline FrameDetection detect_frame(const GrayImage& red, const RunConfig& cfg, std::optional<int> fixed_threshold)
{
    FrameDetection d;
    const ThresholdParams params = cfg.threshold_params();
    if (fixed_threshold) {
        d.threshold = *fixed_threshold;
    } else {
        d.scan = scan_thresholds(red, params.morph, params.min_area, params.connectivity);
        d.decision = decide_threshold(informative_rows(d.scan, red), params.knee);
        d.threshold = d.decision->selected;
    }
    d.binary = binarize(red, d.threshold);
    d.clean = clean_mask(d.binary, params.morph);
    d.labeling = label_components(d.clean, cfg.connectivity);
    d.regions = filter_regions(d.labeling.regions, cfg.min_area);
    return d;
}

struct FrameSummary {
    int frame = 0;
    int threshold = 0;
    std::size_t regions = 0;
    std::size_t live_tracks = 0;
};

struct RunResult {
    std::vector<Track> tracks;
    std::vector<SignalRecord> records;
    std::vector<FrameSummary> frames;
    std::size_t skipped_measurements = 0;

    /// Tracks still Live after the last frame.
    std::size_t tracked_to_final() const noexcept { return count_live(tracks); }
};

/// Detection, tracking and measurement over already-decoded frames.
inline RunResult run_sequences(std::span<const GrayImage> red, std::span<const GrayImage> green, const RunConfig& cfg)
{
    validate(cfg);
    if (red.empty()) throw InputError("run: no frames");
    if (red.size() != green.size()) {
        throw InputError("run: red has " + std::to_string(red.size()) + " frames, green has " +
                         std::to_string(green.size()));
    }
    for (std::size_t i = 0; i < red.size(); ++i) {
        if (!red[i].same_shape(red[0]) || !green[i].same_shape(red[0])) {
            throw DimensionError("run: frame " + std::to_string(i) + " dimensions differ from red frame 0");
        }
    }
    if (cfg.overlay_dir) std::filesystem::create_directories(*cfg.overlay_dir);
    if (cfg.scan_dir) std::filesystem::create_directories(*cfg.scan_dir);

    RunResult result;
    std::optional<int> fixed = cfg.threshold_override;
    std::vector<Region> prev_regions;

    const std::size_t batch = std::max(1u, cfg.threads);
    for (std::size_t begin = 0; begin < red.size(); begin += batch) {
        const std::size_t end = std::min(red.size(), begin + batch);
        std::vector<FrameDetection> detections(end - begin);
        if (begin == 0 && cfg.freeze_threshold && !fixed) {
            detections[0] = detect_frame(red[0], cfg, std::nullopt);
            fixed = detections[0].threshold;
            parallel_for(end - begin - 1, cfg.threads,
                         [&](std::size_t i) { detections[i + 1] = detect_frame(red[begin + i + 1], cfg, fixed); });
        } else {
            parallel_for(end - begin, cfg.threads,
                         [&](std::size_t i) { detections[i] = detect_frame(red[begin + i], cfg, fixed); });
        }

        for (std::size_t k = 0; k < detections.size(); ++k) {
            const int f = static_cast<int>(begin + k);
            const FrameDetection& d = detections[k];
            if (f == 0) {
                result.tracks = start_tracks(d.regions, 0);
            } else {
                const FrameAssociation assoc = associate_frame(prev_regions, d.regions);
                result.tracks = update_tracks(std::move(result.tracks), assoc, d.regions, f);
            }

            BinaryMask foreground = d.binary | d.clean;
            for (const Track& t : result.tracks) {
                if (!t.live()) continue;
                const Region& region = t.last().region;
                try {
                    const CellMasks masks = build_masks(d.labeling.map, region, cfg.dilation_iters,
                                                        default_crop_pad(cfg.dilation_iters), foreground, cfg.se);
                    const SignalMeasurement m = measure(green[static_cast<std::size_t>(f)], masks);
                    result.records.push_back({t.id, f, m.nucleus_mean, m.cytoplasm_mean, m.signal_ratio});
                } catch (const MeasurementError& e) {
                    ++result.skipped_measurements;
                    if (cfg.log) *cfg.log << "warning: frame " << f << " track " << t.id << ": " << e.what() << '\n';
                }
            }

            const std::size_t live = count_live(result.tracks);
            result.frames.push_back({f, d.threshold, d.regions.size(), live});
            if (cfg.log) {
                *cfg.log << "frame " << f << ": threshold " << d.threshold << ", regions " << d.regions.size()
                         << ", live tracks " << live << '\n';
            }

            char name[64];
            if (cfg.scan_dir && !d.scan.empty()) {
                std::snprintf(name, sizeof name, "scan_%04d.csv", f);
                write_scan_csv(d.scan, *cfg.scan_dir / name);
            }
            if (cfg.overlay_dir) {
                std::snprintf(name, sizeof name, "overlay_%04d.png", f);
                io::write_png(*cfg.overlay_dir / name,
                              overlay::render_overlay(red[static_cast<std::size_t>(f)], d.regions, result.tracks, f));
            }
            prev_regions = d.regions;
        }
    }
    return result;
}

inline RunResult run(const RunConfig& cfg)
{
    const auto red = ingest_sequence(cfg.red_dir, cfg.red_channel);
    const auto green = ingest_sequence(cfg.green_dir, cfg.green_channel);
    if (red.size() != green.size()) {
        throw InputError("red sequence has " + std::to_string(red.size()) + " frames, green has " +
                         std::to_string(green.size()));
    }
    if (!red.front().same_shape(green.front())) {
        throw DimensionError("red frames are " + std::to_string(red.front().width()) + "x" +
                             std::to_string(red.front().height()) + " but green frames are " +
                             std::to_string(green.front().width()) + "x" + std::to_string(green.front().height()));
    }
    return run_sequences(red, green, cfg);
}

inline constexpr const char* kTracksCsvHeader =
    "frame,track_id,centroid_x,centroid_y,bbox_min_x,bbox_min_y,bbox_max_x,bbox_max_y,area,"
    "nucleus_mean,cytoplasm_mean,signal_ratio";

/// One line per signal record, sorted by (frame, track_id), with the track's region
/// geometry at that frame.
inline std::string tracks_csv(std::span<const SignalRecord> records, std::span<const Track> tracks)
{
    std::vector<SignalRecord> sorted(records.begin(), records.end());
    std::sort(sorted.begin(), sorted.end(), [](const SignalRecord& a, const SignalRecord& b) {
        return a.frame_index != b.frame_index ? a.frame_index < b.frame_index : a.track_id < b.track_id;
    });

    std::string out = kTracksCsvHeader;
    out += '\n';
    char line[512];
    for (const SignalRecord& r : sorted) {
        const auto track = std::find_if(tracks.begin(), tracks.end(), [&](const Track& t) { return t.id == r.track_id; });
        const TrackEntry* e = track == tracks.end() ? nullptr : track->at_frame(r.frame_index);
        if (!e) {
            throw ConsistencyError("tracks_csv: no geometry for track " + std::to_string(r.track_id) + " at frame " +
                                   std::to_string(r.frame_index));
        }
        const Region& g = e->region;
        std::snprintf(line, sizeof line, "%d,%d,%.4f,%.4f,%d,%d,%d,%d,%lld,%.4f,%.4f,%.4f\n", r.frame_index,
                      r.track_id, g.centroid.x, g.centroid.y, g.bbox.min_x, g.bbox.min_y, g.bbox.max_x, g.bbox.max_y,
                      static_cast<long long>(g.area), r.nucleus_mean, r.cytoplasm_mean, r.signal_ratio);
        out += line;
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("failed writing " + path.string());
}

inline void write_tracks_csv(const RunResult& result, const std::filesystem::path& path)
{
    write_text(path, tracks_csv(result.records, result.tracks));
}

/// Tracked-to-final-frame counts, indexed [closing][opening].
struct SweepResult {
    int max_opening = 0;
    int max_closing = 0;
    std::vector<std::vector<std::size_t>> grid;

    std::size_t at(int opening, int closing) const
    {
        return grid.at(static_cast<std::size_t>(closing)).at(static_cast<std::size_t>(opening));
    }
};

inline SweepResult sweep_sequences(std::span<const GrayImage> red, std::span<const GrayImage> green,
                                   const RunConfig& base, int max_opening = 5, int max_closing = 5)
{
    if (max_opening < 0 || max_closing < 0) throw InputError("sweep: ranges must be non-negative");
    SweepResult s{max_opening, max_closing, {}};
    s.grid.assign(static_cast<std::size_t>(max_closing) + 1,
                  std::vector<std::size_t>(static_cast<std::size_t>(max_opening) + 1, 0));
    RunConfig cfg = base;
    cfg.overlay_dir.reset();
    cfg.scan_dir.reset();
    cfg.log = nullptr;
    for (int c = 0; c <= max_closing; ++c) {
        for (int o = 0; o <= max_opening; ++o) {
            cfg.opening_iters = o;
            cfg.closing_iters = c;
            const std::size_t n = run_sequences(red, green, cfg).tracked_to_final();
            s.grid[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)] = n;
            if (base.log) *base.log << "sweep opening " << o << " closing " << c << ": " << n << " tracked\n";
        }
    }
    return s;
}

inline SweepResult sweep(const RunConfig& cfg, int max_opening = 5, int max_closing = 5)
{
    const auto red = ingest_sequence(cfg.red_dir, cfg.red_channel);
    const auto green = ingest_sequence(cfg.green_dir, cfg.green_channel);
    return sweep_sequences(red, green, cfg, max_opening, max_closing);
}

/// Matrix with closing counts down the rows and opening counts across the columns.
inline std::string sweep_csv(const SweepResult& s)
{
    std::string out = "closing\\opening";
    for (int o = 0; o <= s.max_opening; ++o) out += "," + std::to_string(o);
    out += '\n';
    for (int c = 0; c <= s.max_closing; ++c) {
        out += std::to_string(c);
        for (int o = 0; o <= s.max_opening; ++o) out += "," + std::to_string(s.at(o, c));
        out += '\n';
    }
    return out;
}

} // namespace nuctrack
