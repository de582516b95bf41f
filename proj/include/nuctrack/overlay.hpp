#pragma once

#include "nuctrack/image.hpp"
#include "nuctrack/regions.hpp"
#include "nuctrack/tracker.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>

namespace nuctrack::overlay {

inline constexpr RgbImage::Pixel kLiveColor{0, 255, 0};
inline constexpr RgbImage::Pixel kExcludedColor{255, 0, 255};
inline constexpr RgbImage::Pixel kCentroidColor{255, 255, 0};
inline constexpr RgbImage::Pixel kCaptionColor{255, 255, 255};

inline constexpr int kGlyphWidth = 3;
inline constexpr int kGlyphHeight = 5;
inline constexpr int kCaptionScale = 2;

// 3x5 digit glyphs, one row per 3-bit group (MSB = left column).
inline constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits{{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

inline void put(RgbImage& img, int x, int y, RgbImage::Pixel c)
{
    if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set(x, y, c);
}

/// Draws decimal `number` with its top-left corner at (x, y).
inline void draw_number(RgbImage& img, int x, int y, int number, RgbImage::Pixel c, int scale = 1)
{
    const std::string text = std::to_string(number);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto& glyph = kDigits[static_cast<std::size_t>(text[i] - '0')];
        const int gx = x + static_cast<int>(i) * (kGlyphWidth + 1) * scale;
        for (int row = 0; row < kGlyphHeight; ++row) {
            for (int col = 0; col < kGlyphWidth; ++col) {
                if (!((glyph[static_cast<std::size_t>(row)] >> (kGlyphWidth - 1 - col)) & 1)) continue;
                for (int sy = 0; sy < scale; ++sy) {
                    for (int sx = 0; sx < scale; ++sx) put(img, gx + col * scale + sx, y + row * scale + sy, c);
                }
            }
        }
    }
}

inline void draw_rect(RgbImage& img, const BBox& b, RgbImage::Pixel c)
{
    for (int x = b.min_x; x <= b.max_x; ++x) {
        put(img, x, b.min_y, c);
        put(img, x, b.max_y, c);
    }
    for (int y = b.min_y; y <= b.max_y; ++y) {
        put(img, b.min_x, y, c);
        put(img, b.max_x, y, c);
    }
}

/// Red frame as a gray background, one rectangle per region (live-track color or
/// excluded color), a centroid cross, the owning track id, and the frame index
/// caption in the top-left corner.
inline RgbImage render_overlay(const GrayImage& red_frame, std::span<const Region> regions,
                               std::span<const Track> tracks, int frame_index)
{
    RgbImage out(red_frame.width(), red_frame.height());
    for (int y = 0; y < red_frame.height(); ++y) {
        for (int x = 0; x < red_frame.width(); ++x) {
            const auto v = red_frame(x, y);
            out.set(x, y, {v, v, v});
        }
    }

    for (const Region& r : regions) {
        const Track* owner = nullptr;
        for (const Track& t : tracks) {
            if (!t.live()) continue;
            const TrackEntry* e = t.at_frame(frame_index);
            if (e && e->region.label == r.label) {
                owner = &t;
                break;
            }
        }
        draw_rect(out, r.bbox, owner ? kLiveColor : kExcludedColor);
        const int cx = static_cast<int>(std::lround(r.centroid.x));
        const int cy = static_cast<int>(std::lround(r.centroid.y));
        for (int d = -1; d <= 1; ++d) {
            put(out, cx + d, cy, kCentroidColor);
            put(out, cx, cy + d, kCentroidColor);
        }
        if (owner) draw_number(out, r.bbox.max_x + 2, r.bbox.min_y, owner->id, kLiveColor);
    }

    draw_number(out, 2, 2, frame_index, kCaptionColor, kCaptionScale);
    return out;
}

} // namespace nuctrack::overlay
