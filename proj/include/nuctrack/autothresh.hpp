#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"
#include "nuctrack/imgproc.hpp"
#include "nuctrack/regions.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace nuctrack {

/// Component counts observed when binarizing at one threshold.
struct ThresholdScanRow {
    int threshold = 0;
    std::size_t raw_components = 0;   // before morphology, no area filter
    std::size_t clean_components = 0; // after opening/closing, area >= min_area
    std::size_t noise_count = 0;      // max(raw - clean, 0)

    friend bool operator==(const ThresholdScanRow&, const ThresholdScanRow&) = default;
};

struct ThresholdDecision {
    int knee_threshold = 0;
    int max_nuclei_threshold = 0;
    int selected = 0;

    friend bool operator==(const ThresholdDecision&, const ThresholdDecision&) = default;
};

struct KneeParams {
    double jump_factor = 2.0;
    std::size_t min_jump = 10;
};

struct ThresholdParams {
    MorphParams morph;
    std::int64_t min_area = 20;
    KneeParams knee;
    Connectivity connectivity = Connectivity::Eight;
};

/// Binarizes at every threshold from 255 down to 0 and counts components before and
/// after noise removal. Rows come back in that descending order.
///
/// The mask only changes at thresholds that some pixel actually takes, so the
/// morphology and labeling run once per distinct intensity and the row is copied
/// in between. The mask itself is grown incrementally as the threshold falls.
inline std::vector<ThresholdScanRow> scan_thresholds(const GrayImage& img, const MorphParams& morph,
                                                     std::int64_t min_area,
                                                     Connectivity conn = Connectivity::Eight)
{
    if (min_area < 0) throw InputError("scan_thresholds: min_area must be >= 0");

    std::array<std::size_t, 257> start{};
    for (std::uint8_t v : img.pixels()) ++start[v + 1u];
    for (std::size_t v = 1; v < start.size(); ++v) start[v] += start[v - 1];
    std::vector<std::uint32_t> by_value(img.size());
    {
        auto cursor = start;
        auto px = img.pixels();
        for (std::size_t i = 0; i < px.size(); ++i) by_value[cursor[px[i]]++] = static_cast<std::uint32_t>(i);
    }

    std::vector<ThresholdScanRow> rows;
    rows.reserve(256);
    BinaryMask mask(img.width(), img.height());
    const auto width = static_cast<std::uint32_t>(img.width());
    ThresholdScanRow current{};
    for (int t = 255; t >= 0; --t) {
        const std::size_t begin = start[static_cast<std::size_t>(t)];
        const std::size_t end = start[static_cast<std::size_t>(t) + 1];
        if (begin != end) {
            for (std::size_t k = begin; k < end; ++k) {
                const std::uint32_t idx = by_value[k];
                mask.set(static_cast<int>(idx % width), static_cast<int>(idx / width));
            }
            current.raw_components = count_components(mask, conn, 0);
            current.clean_components = count_components(clean_mask(mask, morph), conn, min_area);
            current.noise_count = current.raw_components > current.clean_components
                                      ? current.raw_components - current.clean_components
                                      : 0;
        }
        current.threshold = t;
        rows.push_back(current);
    }
    return rows;
}

namespace detail {

inline void require_rows(std::span<const ThresholdScanRow> rows, const char* what)
{
    if (rows.empty()) throw InputError(std::string(what) + ": no scan rows");
}

} // namespace detail

/// Threshold with the most clean components; ties go to the higher threshold.
inline int find_max_nuclei_threshold(std::span<const ThresholdScanRow> rows)
{
    detail::require_rows(rows, "find_max_nuclei_threshold");
    const ThresholdScanRow* best = &rows.front();
    for (const auto& r : rows) {
        if (r.clean_components > best->clean_components ||
            (r.clean_components == best->clean_components && r.threshold > best->threshold)) {
            best = &r;
        }
    }
    return best->threshold;
}

/// Walks rows from high to low threshold and returns the threshold just before the
/// first jump in noise that is both >= min_jump and >= jump_factor * max(previous, 1).
/// Without such a jump the max-nuclei threshold is returned.
inline int find_noise_knee(std::span<const ThresholdScanRow> rows, double jump_factor, std::size_t min_jump)
{
    detail::require_rows(rows, "find_noise_knee");
    if (!(jump_factor > 1.0)) throw InputError("find_noise_knee: jump_factor must be > 1");
    if (min_jump < 1) throw InputError("find_noise_knee: min_jump must be >= 1");

    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::size_t prev = rows[i - 1].noise_count;
        const std::size_t cur = rows[i].noise_count;
        if (cur <= prev) continue;
        const std::size_t jump = cur - prev;
        const double relative = jump_factor * static_cast<double>(std::max<std::size_t>(prev, 1));
        if (jump >= min_jump && static_cast<double>(jump) >= relative) return rows[i - 1].threshold;
    }
    return find_max_nuclei_threshold(rows);
}

inline ThresholdDecision decide_threshold(std::span<const ThresholdScanRow> rows, const KneeParams& knee)
{
    ThresholdDecision d;
    d.knee_threshold = find_noise_knee(rows, knee.jump_factor, knee.min_jump);
    d.max_nuclei_threshold = find_max_nuclei_threshold(rows);
    // Both are non-negative, so integer division is the floor of the mean.
    d.selected = (d.knee_threshold + d.max_nuclei_threshold) / 2;
    return d;
}

/// Rows whose binarization leaves some background. At t <= min(img) the whole frame
/// is one foreground block, which says nothing about nuclei; those rows are dropped
/// unless nothing else is left.
inline std::span<const ThresholdScanRow> informative_rows(std::span<const ThresholdScanRow> rows, const GrayImage& img)
{
    const auto px = img.pixels();
    const int lowest = px.empty() ? 0 : *std::min_element(px.begin(), px.end());
    std::size_t n = 0;
    while (n < rows.size() && rows[n].threshold > lowest) ++n;
    return n == 0 ? rows : rows.first(n);
}

inline ThresholdDecision select_threshold(const GrayImage& img, const ThresholdParams& params)
{
    const auto rows = scan_thresholds(img, params.morph, params.min_area, params.connectivity);
    return decide_threshold(informative_rows(rows, img), params.knee);
}

/// Diagnostic dump: threshold,raw_components,clean_components,noise_count.
inline std::string scan_csv(std::span<const ThresholdScanRow> rows)
{
    std::string out = "threshold,raw_components,clean_components,noise_count\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%zu\n", r.threshold, r.raw_components,
                      r.clean_components, r.noise_count);
        out += buf;
    }
    return out;
}

inline void write_scan_csv(std::span<const ThresholdScanRow> rows, const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << scan_csv(rows);
    if (!f) throw IoError("failed writing " + path.string());
}

} // namespace nuctrack
