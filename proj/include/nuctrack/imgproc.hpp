#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"

#include <cstdint>
#include <vector>

namespace nuctrack {

enum class Channel { Red, Green, Blue, Luminance };

/// 3x3 neighborhood shapes; the anchor is always the center pixel.
enum class StructuringElement { Square3x3, Cross3x3 };

/// Pulls one fluorescence channel (or rounded Rec.601 luminance) out of an RGB frame.
inline GrayImage extract_channel(const RgbImage& image, Channel channel)
{
    if (image.empty()) throw DimensionError("extract_channel: empty image");

    GrayImage out(image.width(), image.height());
    auto src = image.bytes();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
        switch (channel) {
        case Channel::Red: dst[i] = static_cast<std::uint8_t>(r); break;
        case Channel::Green: dst[i] = static_cast<std::uint8_t>(g); break;
        case Channel::Blue: dst[i] = static_cast<std::uint8_t>(b); break;
        case Channel::Luminance:
            // Integer weights (per mille) keep the rounding exact: a gray pixel maps to itself.
            dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
            break;
        }
    }
    return out;
}

/// Foreground iff intensity >= threshold. Threshold 0 selects everything; 256 selects nothing.
inline BinaryMask binarize(const GrayImage& img, int threshold)
{
    BinaryMask out(img.width(), img.height());
    if (threshold > 255) return out;
    for (int y = 0; y < img.height(); ++y) {
        auto row = out.row(y);
        for (int x = 0; x < img.width(); ++x) {
            if (img(x, y) >= threshold) row[x / 64] |= BinaryMask::Word{1} << (x % 64);
        }
    }
    return out;
}

namespace detail {

using Word = BinaryMask::Word;

// Horizontal pass: combine each pixel with its left and right neighbors.
template <class Op>
void horizontal(std::span<const Word> in, std::span<Word> out, Op op) noexcept
{
    const std::size_t n = in.size();
    for (std::size_t j = 0; j < n; ++j) {
        const Word w = in[j];
        const Word left = (w << 1) | (j > 0 ? in[j - 1] >> 63 : 0);
        const Word right = (w >> 1) | (j + 1 < n ? in[j + 1] << 63 : 0);
        out[j] = op(op(w, left), right);
    }
}

template <class Op>
BinaryMask morph_step(const BinaryMask& mask, StructuringElement se, Op op)
{
    const int h = mask.height();
    const std::size_t stride = static_cast<std::size_t>(mask.stride());
    BinaryMask horiz(mask.width(), h);
    for (int y = 0; y < h; ++y) horizontal(mask.row(y), horiz.row(y), op);

    // Out-of-bounds rows are background.
    const std::vector<Word> zeros(stride, 0);
    // Square: vertical pass over the horizontal result (separable 3x3).
    // Cross: vertical pass over the original rows, center row from the horizontal result.
    const BinaryMask& vsrc = se == StructuringElement::Square3x3 ? horiz : mask;
    BinaryMask out(mask.width(), h);
    for (int y = 0; y < h; ++y) {
        auto up = y > 0 ? vsrc.row(y - 1) : std::span<const Word>(zeros);
        auto down = y + 1 < h ? vsrc.row(y + 1) : std::span<const Word>(zeros);
        auto mid = horiz.row(y);
        auto dst = out.row(y);
        for (std::size_t j = 0; j < stride; ++j) dst[j] = op(op(up[j], mid[j]), down[j]);
    }
    out.clear_padding();
    return out;
}

} // namespace detail

/// Pixel survives iff every in-bounds neighbor under `se` is foreground; out-of-bounds counts as background.
inline BinaryMask erode(const BinaryMask& mask, StructuringElement se = StructuringElement::Square3x3)
{
    return detail::morph_step(mask, se, [](detail::Word a, detail::Word b) { return a & b; });
}

/// Pixel becomes foreground iff any neighbor under `se` is foreground.
inline BinaryMask dilate(const BinaryMask& mask, StructuringElement se = StructuringElement::Square3x3)
{
    return detail::morph_step(mask, se, [](detail::Word a, detail::Word b) { return a | b; });
}

inline BinaryMask erode_n(BinaryMask mask, StructuringElement se, int iterations)
{
    for (int i = 0; i < iterations; ++i) mask = erode(mask, se);
    return mask;
}

inline BinaryMask dilate_n(BinaryMask mask, StructuringElement se, int iterations)
{
    for (int i = 0; i < iterations; ++i) mask = dilate(mask, se);
    return mask;
}

/// `iterations` erosions followed by `iterations` dilations.
inline BinaryMask opening(const BinaryMask& mask, StructuringElement se, int iterations)
{
    if (iterations < 0) throw InputError("opening: iterations must be >= 0");
    if (iterations == 0) return mask;
    return dilate_n(erode_n(mask, se, iterations), se, iterations);
}

/// `iterations` dilations followed by `iterations` erosions, evaluated as if the frame
/// were embedded in an unbounded background plane. Foreground grown past the frame
/// edge by the dilations is kept on a padded canvas so the erosions do not eat into
/// objects touching the border; this keeps closing extensive.
inline BinaryMask closing(const BinaryMask& mask, StructuringElement se, int iterations)
{
    if (iterations < 0) throw InputError("closing: iterations must be >= 0");
    if (iterations == 0) return mask;
    BinaryMask canvas = pad_mask(mask, iterations);
    canvas = erode_n(dilate_n(std::move(canvas), se, iterations), se, iterations);
    return crop_mask(canvas, iterations, iterations, mask.width(), mask.height());
}

struct MorphParams {
    int opening_iters = 2;
    int closing_iters = 0;
    StructuringElement se = StructuringElement::Square3x3;
};

/// Noise removal applied after binarization: opening, then closing.
inline BinaryMask clean_mask(const BinaryMask& mask, const MorphParams& params)
{
    return closing(opening(mask, params.se, params.opening_iters), params.se, params.closing_iters);
}

} // namespace nuctrack
