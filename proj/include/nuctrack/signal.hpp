#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"
#include "nuctrack/imgproc.hpp"
#include "nuctrack/regions.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

namespace nuctrack {

/// Nucleus and cytoplasm-ring masks over a padded crop of the frame.
struct CellMasks {
    BBox crop;               // frame coordinates, inclusive
    BinaryMask nucleus;      // crop-sized
    BinaryMask cytoplasm;    // crop-sized, disjoint from nucleus
};

struct SignalMeasurement {
    double nucleus_mean = 0.0;
    double cytoplasm_mean = 0.0;
    double signal_ratio = 0.0; // nucleus_mean - cytoplasm_mean (a difference, not a quotient)
};

struct SignalRecord {
    int track_id = 0;
    int frame_index = 0;
    double nucleus_mean = 0.0;
    double cytoplasm_mean = 0.0;
    double signal_ratio = 0.0;

    friend bool operator==(const SignalRecord&, const SignalRecord&) = default;
};

/// Default crop padding for a given ring width.
constexpr int default_crop_pad(int dilation_iters) noexcept { return dilation_iters + 2; }

/// Cuts the region out of the label map and grows a cytoplasm ring around it:
/// ring = dilate^k(nucleus) minus the nucleus minus every foreground pixel of
/// `global_foreground`, so neighboring nuclei never leak into the ring.
inline CellMasks build_masks(const LabelMap& label_map, const Region& region, int dilation_iters, int pad,
                             const BinaryMask& global_foreground,
                             StructuringElement se = StructuringElement::Square3x3)
{
    if (dilation_iters < 1) throw InputError("build_masks: dilation_iters must be >= 1");
    if (pad < dilation_iters) throw InputError("build_masks: pad must be >= dilation_iters");
    if (global_foreground.width() != label_map.width() || global_foreground.height() != label_map.height()) {
        throw DimensionError("build_masks: foreground mask does not match label map");
    }
    const BBox& b = region.bbox;
    if (b.min_x < 0 || b.min_y < 0 || b.max_x >= label_map.width() || b.max_y >= label_map.height() ||
        b.width() < 1 || b.height() < 1) {
        throw ConsistencyError("build_masks: region " + std::to_string(region.label) + " bbox outside label map");
    }

    CellMasks m;
    m.crop = {std::max(0, b.min_x - pad), std::max(0, b.min_y - pad),
              std::min(label_map.width() - 1, b.max_x + pad), std::min(label_map.height() - 1, b.max_y + pad)};
    m.nucleus = BinaryMask(m.crop.width(), m.crop.height());
    for (int y = b.min_y; y <= b.max_y; ++y) {
        for (int x = b.min_x; x <= b.max_x; ++x) {
            if (label_map(x, y) == region.label) m.nucleus.set(x - m.crop.min_x, y - m.crop.min_y);
        }
    }
    if (m.nucleus.none()) {
        throw ConsistencyError("build_masks: label " + std::to_string(region.label) + " absent from label map");
    }

    m.cytoplasm = dilate_n(m.nucleus, se, dilation_iters);
    m.cytoplasm.subtract(m.nucleus);
    m.cytoplasm.subtract(crop_mask(global_foreground, m.crop.min_x, m.crop.min_y, m.crop.width(), m.crop.height()));
    return m;
}

/// Mean green intensity inside each mask and their difference.
inline SignalMeasurement measure(const GrayImage& green, const CellMasks& masks)
{
    if (masks.crop.min_x < 0 || masks.crop.min_y < 0 || masks.crop.max_x >= green.width() ||
        masks.crop.max_y >= green.height()) {
        throw DimensionError("measure: crop exceeds green frame bounds");
    }
    std::int64_t nuc_sum = 0, nuc_n = 0, cyt_sum = 0, cyt_n = 0;
    for (int y = 0; y < masks.crop.height(); ++y) {
        for (int x = 0; x < masks.crop.width(); ++x) {
            const int v = green(x + masks.crop.min_x, y + masks.crop.min_y);
            if (masks.nucleus(x, y)) {
                nuc_sum += v;
                ++nuc_n;
            } else if (masks.cytoplasm(x, y)) {
                cyt_sum += v;
                ++cyt_n;
            }
        }
    }
    if (nuc_n == 0) throw MeasurementError("measure: empty nucleus mask");
    if (cyt_n == 0) throw MeasurementError("measure: empty cytoplasm mask");

    SignalMeasurement s;
    s.nucleus_mean = static_cast<double>(nuc_sum) / static_cast<double>(nuc_n);
    s.cytoplasm_mean = static_cast<double>(cyt_sum) / static_cast<double>(cyt_n);
    s.signal_ratio = s.nucleus_mean - s.cytoplasm_mean;
    return s;
}

} // namespace nuctrack
