#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"
#include "nuctrack/regions.hpp"
#include "nuctrack/tracker.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace nuctrack::synth {

/// One synthetic nucleus: a filled disc following `trajectory` (one center per frame).
struct BlobSpec {
    int id = 0;
    std::vector<Point2> trajectory;
    double radius = 5.0;
    std::uint8_t nucleus_intensity = 180;     // red channel
    std::uint8_t green_nucleus_level = 200;
    std::uint8_t green_cytoplasm_level = 50;
};

struct SceneParams {
    int width = 256;
    int height = 256;
    std::uint8_t red_background = 30;
    std::uint8_t green_background = 10;
    /// Width of the green cytoplasm annulus drawn around each disc.
    double cytoplasm_width = 8.0;
};

/// Each pixel of a red frame is independently hit with probability `density`;
/// a hit adds `amplitude` (saturating at 255).
struct SpeckleNoise {
    double density = 0.0;
    int amplitude = 0;
};

struct TrueBlob {
    int id = 0;
    Point2 center;      // trajectory point
    Point2 centroid;    // mean of rasterized disc pixels
    std::int64_t area = 0;
    BBox bbox;
    BinaryMask mask;    // over bbox
};

struct BlobLevels {
    int id = 0;
    double radius = 0.0;
    int nucleus_intensity = 0;
    int green_nucleus_level = 0;
    int green_cytoplasm_level = 0;
    int signal_ratio() const noexcept { return green_nucleus_level - green_cytoplasm_level; }
};

struct GroundTruth {
    int width = 0;
    int height = 0;
    std::vector<std::vector<TrueBlob>> frames;
    std::vector<BlobLevels> blobs;

    const TrueBlob* find(int frame, int id) const noexcept
    {
        if (frame < 0 || frame >= static_cast<int>(frames.size())) return nullptr;
        for (const TrueBlob& b : frames[static_cast<std::size_t>(frame)]) {
            if (b.id == id) return &b;
        }
        return nullptr;
    }
};

struct Sequence {
    std::vector<GrayImage> red;
    std::vector<GrayImage> green;
    GroundTruth truth;
};

/// Pixel (x, y) is inside the disc iff its center is within `radius` of `center`, inclusive.
template <class Fn>
void for_each_disc_pixel(Point2 center, double radius, int width, int height, Fn&& fn)
{
    const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(center.x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(center.y + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
        const double dy = y - center.y;
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - center.x;
            if (dx * dx + dy * dy <= r2) fn(x, y);
        }
    }
}

namespace detail {

inline void validate(std::span<const BlobSpec> specs, int frames, const SceneParams& scene, const SpeckleNoise& noise)
{
    if (frames < 1) throw SpecError("generate: frames must be >= 1");
    if (scene.width < 1 || scene.height < 1) throw SpecError("generate: scene dimensions must be positive");
    if (noise.density < 0.0 || noise.density > 1.0) throw SpecError("generate: speckle density must be in [0, 1]");
    if (noise.amplitude < 0 || noise.amplitude > 255) throw SpecError("generate: speckle amplitude must be in [0, 255]");
    std::set<int> ids;
    for (const BlobSpec& b : specs) {
        if (!ids.insert(b.id).second) throw SpecError("generate: duplicate blob id " + std::to_string(b.id));
        if (b.radius < 2.0) throw SpecError("generate: blob " + std::to_string(b.id) + " radius below 2");
        if (static_cast<int>(b.trajectory.size()) < frames) {
            throw SpecError("generate: blob " + std::to_string(b.id) + " trajectory shorter than frame count");
        }
        for (int f = 0; f < frames; ++f) {
            const Point2 c = b.trajectory[static_cast<std::size_t>(f)];
            if (c.x < 0 || c.y < 0 || c.x > scene.width - 1 || c.y > scene.height - 1) {
                throw SpecError("generate: blob " + std::to_string(b.id) + " out of bounds at frame " +
                                std::to_string(f));
            }
        }
    }
}

inline void add_speckle(GrayImage& img, const SpeckleNoise& noise, std::uint64_t seed, int frame)
{
    if (noise.density <= 0.0 || noise.amplitude == 0) return;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame)};
    std::mt19937_64 rng(seq);
    auto px = img.pixels();
    auto hit = [&](std::size_t i) { px[i] = static_cast<std::uint8_t>(std::min(255, px[i] + noise.amplitude)); };
    if (noise.density >= 1.0) {
        for (std::size_t i = 0; i < px.size(); ++i) hit(i);
        return;
    }
    std::geometric_distribution<std::uint64_t> gap(noise.density);
    for (std::uint64_t i = gap(rng); i < px.size(); i += 1 + gap(rng)) hit(static_cast<std::size_t>(i));
}

} // namespace detail

/// Renders red (detection) and green (signal) frames plus exact ground truth.
/// Output depends only on the arguments.
inline Sequence generate(std::span<const BlobSpec> specs, int frames, const SceneParams& scene,
                         const SpeckleNoise& noise, std::uint64_t seed)
{
    detail::validate(specs, frames, scene, noise);

    Sequence seq;
    seq.truth.width = scene.width;
    seq.truth.height = scene.height;
    for (const BlobSpec& b : specs) {
        seq.truth.blobs.push_back({b.id, b.radius, b.nucleus_intensity, b.green_nucleus_level, b.green_cytoplasm_level});
    }

    for (int f = 0; f < frames; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        GrayImage red(scene.width, scene.height, scene.red_background);
        GrayImage green(scene.width, scene.height, scene.green_background);
        std::vector<TrueBlob> truth;

        for (const BlobSpec& b : specs) {
            for_each_disc_pixel(b.trajectory[fi], b.radius + scene.cytoplasm_width, scene.width, scene.height,
                                [&](int x, int y) { green(x, y) = b.green_cytoplasm_level; });
        }
        for (const BlobSpec& b : specs) {
            const Point2 c = b.trajectory[fi];
            TrueBlob t;
            t.id = b.id;
            t.center = c;
            t.bbox = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1};
            double sx = 0, sy = 0;
            std::vector<std::pair<int, int>> pixels;
            for_each_disc_pixel(c, b.radius, scene.width, scene.height, [&](int x, int y) {
                red(x, y) = b.nucleus_intensity;
                green(x, y) = b.green_nucleus_level;
                pixels.emplace_back(x, y);
                sx += x;
                sy += y;
                t.bbox.min_x = std::min(t.bbox.min_x, x);
                t.bbox.min_y = std::min(t.bbox.min_y, y);
                t.bbox.max_x = std::max(t.bbox.max_x, x);
                t.bbox.max_y = std::max(t.bbox.max_y, y);
            });
            t.area = static_cast<std::int64_t>(pixels.size());
            t.centroid = {sx / static_cast<double>(t.area), sy / static_cast<double>(t.area)};
            t.mask = BinaryMask(t.bbox.width(), t.bbox.height());
            for (auto [x, y] : pixels) t.mask.set(x - t.bbox.min_x, y - t.bbox.min_y);
            truth.push_back(std::move(t));
        }

        detail::add_speckle(red, noise, seed, f);
        seq.red.push_back(std::move(red));
        seq.green.push_back(std::move(green));
        seq.truth.frames.push_back(std::move(truth));
    }
    return seq;
}

struct TrackingScore {
    double purity = 0.0;   // pure tracks / all tracks
    double survival = 0.0; // blobs with a pure track alive at the final frame / all blobs
    std::size_t pure_tracks = 0;
    std::size_t surviving_blobs = 0;
};

/// A track is pure when every entry lies within `tol` of one and the same blob's
/// true centroid at that frame.
inline TrackingScore score_tracking(std::span<const Track> tracks, const GroundTruth& truth, double tol)
{
    if (tol < 0) throw InputError("score_tracking: tol must be >= 0");
    TrackingScore s;
    const int final_frame = static_cast<int>(truth.frames.size()) - 1;
    std::set<int> survivors;

    for (const Track& t : tracks) {
        if (t.history.empty()) continue;
        std::optional<int> owner;
        for (const BlobLevels& b : truth.blobs) {
            const bool follows = std::all_of(t.history.begin(), t.history.end(), [&](const TrackEntry& e) {
                const TrueBlob* tb = truth.find(e.frame, b.id);
                return tb && std::hypot(tb->centroid.x - e.region.centroid.x, tb->centroid.y - e.region.centroid.y) <= tol;
            });
            if (follows) {
                owner = b.id;
                break;
            }
        }
        if (!owner) continue;
        ++s.pure_tracks;
        if (t.live() && t.last().frame == final_frame) survivors.insert(*owner);
    }

    s.surviving_blobs = survivors.size();
    s.purity = tracks.empty() ? 0.0 : static_cast<double>(s.pure_tracks) / static_cast<double>(tracks.size());
    s.survival = truth.blobs.empty() ? 0.0 : static_cast<double>(s.surviving_blobs) / static_cast<double>(truth.blobs.size());
    return s;
}

/// Randomized scene of blobs drifting at constant integer velocity.
struct DriftSceneParams {
    int width = 1920;
    int height = 1080;
    int blobs = 20;
    int frames = 24;
    int min_radius = 6;
    int max_radius = 10;
    /// Upper bound on the per-frame displacement (Euclidean, pixels).
    double max_step = 3.0;
    /// Center-to-center distance >= separation_factor * larger radius, in every frame.
    double separation_factor = 4.0;
    /// Number of blob pairs placed side by side with a narrow background gap and a
    /// shared velocity. Partners are exempt from the separation rule; closing can merge them.
    int close_pairs = 0;
    /// Background pixels between the partners of pair p: first_gap + gap_step * p.
    int first_gap = 2;
    int gap_step = 2;
    /// Minimum distance from any blob center to the frame edge.
    int margin = 30;
    std::uint8_t nucleus_intensity = 180;
    std::uint8_t green_nucleus_level = 200;
    std::uint8_t green_cytoplasm_level = 50;
};

inline std::vector<BlobSpec> make_drift_scene(const DriftSceneParams& p, std::uint64_t seed)
{
    if (p.blobs < 0 || 2 * p.close_pairs > p.blobs) throw SpecError("make_drift_scene: too many close pairs");
    if (p.min_radius < 2 || p.max_radius < p.min_radius) throw SpecError("make_drift_scene: bad radius range");
    if (p.frames < 1) throw SpecError("make_drift_scene: frames must be >= 1");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> radius_dist(p.min_radius, p.max_radius);

    const int step = static_cast<int>(std::floor(p.max_step));
    std::vector<std::pair<int, int>> velocities;
    for (int vy = -step; vy <= step; ++vy) {
        for (int vx = -step; vx <= step; ++vx) {
            if (vx * vx + vy * vy <= p.max_step * p.max_step) velocities.emplace_back(vx, vy);
        }
    }
    std::uniform_int_distribution<std::size_t> vel_dist(0, velocities.size() - 1);

    struct Placed {
        int x, y, vx, vy, r, group;
    };
    std::vector<Placed> placed;
    const int last = p.frames - 1;

    auto inside = [&](int x, int y, int vx, int vy) {
        for (int f : {0, last}) {
            const int cx = x + vx * f, cy = y + vy * f;
            if (cx < p.margin || cy < p.margin || cx > p.width - 1 - p.margin || cy > p.height - 1 - p.margin) {
                return false;
            }
        }
        return true;
    };
    auto clear_of_others = [&](const Placed& c) {
        for (const Placed& o : placed) {
            const double need = p.separation_factor * std::max(c.r, o.r);
            // Relative motion is linear, so the closest approach over frames is on a segment.
            const double dx0 = c.x - o.x, dy0 = c.y - o.y;
            const double dvx = c.vx - o.vx, dvy = c.vy - o.vy;
            const double vv = dvx * dvx + dvy * dvy;
            double tmin = vv > 0 ? -(dx0 * dvx + dy0 * dvy) / vv : 0.0;
            tmin = std::clamp(tmin, 0.0, static_cast<double>(last));
            for (double t : {0.0, static_cast<double>(last), tmin}) {
                if (std::hypot(dx0 + dvx * t, dy0 + dvy * t) < need) return false;
            }
        }
        return true;
    };

    std::uniform_int_distribution<int> xs(p.margin, p.width - 1 - p.margin);
    std::uniform_int_distribution<int> ys(p.margin, p.height - 1 - p.margin);
    const int max_attempts = 100000;
    int group = 0;
    for (int k = 0; k < p.close_pairs + (p.blobs - 2 * p.close_pairs); ++k, ++group) {
        const bool pair = k < p.close_pairs;
        bool ok = false;
        for (int attempt = 0; attempt < max_attempts && !ok; ++attempt) {
            const auto [vx, vy] = velocities[vel_dist(rng)];
            Placed a{xs(rng), ys(rng), vx, vy, radius_dist(rng), group};
            if (!inside(a.x, a.y, vx, vy) || !clear_of_others(a)) continue;
            if (!pair) {
                placed.push_back(a);
                ok = true;
                break;
            }
            const int gap = p.first_gap + p.gap_step * k;
            const int rb = radius_dist(rng);
            Placed b{a.x + a.r + rb + gap + 1, a.y, vx, vy, rb, group};
            if (!inside(b.x, b.y, vx, vy) || !clear_of_others(b)) continue;
            placed.push_back(a);
            placed.push_back(b);
            ok = true;
        }
        if (!ok) throw SpecError("make_drift_scene: could not place blob group " + std::to_string(k));
    }

    std::vector<BlobSpec> specs;
    int id = 1;
    for (const Placed& pl : placed) {
        BlobSpec b;
        b.id = id++;
        b.radius = pl.r;
        b.nucleus_intensity = p.nucleus_intensity;
        b.green_nucleus_level = p.green_nucleus_level;
        b.green_cytoplasm_level = p.green_cytoplasm_level;
        for (int f = 0; f < p.frames; ++f) {
            b.trajectory.push_back({static_cast<double>(pl.x + pl.vx * f), static_cast<double>(pl.y + pl.vy * f)});
        }
        specs.push_back(std::move(b));
    }
    return specs;
}

/// {"width","height","frames":[{"frame","blobs":[{"id","x","y","centroid_x","centroid_y","area"}]}],
///  "blobs":[{"id","radius","nucleus_intensity","green_nucleus_level","green_cytoplasm_level","signal_ratio"}]}
inline nlohmann::json ground_truth_json(const GroundTruth& truth)
{
    nlohmann::json j;
    j["width"] = truth.width;
    j["height"] = truth.height;
    j["frames"] = nlohmann::json::array();
    for (std::size_t f = 0; f < truth.frames.size(); ++f) {
        nlohmann::json fr;
        fr["frame"] = f;
        fr["blobs"] = nlohmann::json::array();
        for (const TrueBlob& b : truth.frames[f]) {
            fr["blobs"].push_back({{"id", b.id},
                                   {"x", b.center.x},
                                   {"y", b.center.y},
                                   {"centroid_x", b.centroid.x},
                                   {"centroid_y", b.centroid.y},
                                   {"area", b.area}});
        }
        j["frames"].push_back(std::move(fr));
    }
    j["blobs"] = nlohmann::json::array();
    for (const BlobLevels& b : truth.blobs) {
        j["blobs"].push_back({{"id", b.id},
                              {"radius", b.radius},
                              {"nucleus_intensity", b.nucleus_intensity},
                              {"green_nucleus_level", b.green_nucleus_level},
                              {"green_cytoplasm_level", b.green_cytoplasm_level},
                              {"signal_ratio", b.signal_ratio()}});
    }
    return j;
}

} // namespace nuctrack::synth
