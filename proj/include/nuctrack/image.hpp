#pragma once

#include "nuctrack/error.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nuctrack {

namespace detail {

inline void check_dims(int width, int height, const char* what)
{
    if (width < 1 || height < 1) {
        throw DimensionError(std::string(what) + ": dimensions must be positive, got " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
}

} // namespace detail

/// Single-channel 8-bit raster, row-major.
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(int width, int height, std::uint8_t fill = 0)
        : width_(width), height_(height)
    {
        detail::check_dims(width, height, "GrayImage");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    GrayImage(int width, int height, std::vector<std::uint8_t> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        detail::check_dims(width, height, "GrayImage");
        if (data_.size() != static_cast<std::size_t>(width) * height) {
            throw DimensionError("GrayImage: data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(width) + "x" +
                                 std::to_string(height));
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t operator()(int x, int y) const { return data_[index(x, y)]; }
    std::uint8_t& operator()(int x, int y) { return data_[index(x, y)]; }

    std::span<const std::uint8_t> pixels() const noexcept { return data_; }
    std::span<std::uint8_t> pixels() noexcept { return data_; }

    bool same_shape(const GrayImage& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Interleaved 8-bit RGB raster. A default-constructed image is empty (0x0).
class RgbImage {
public:
    struct Pixel {
        std::uint8_t r = 0, g = 0, b = 0;
        friend bool operator==(const Pixel&, const Pixel&) = default;
    };

    RgbImage() = default;

    RgbImage(int width, int height) : RgbImage(width, height, Pixel{0, 0, 0}) {}

    RgbImage(int width, int height, Pixel fill)
        : width_(width), height_(height)
    {
        detail::check_dims(width, height, "RgbImage");
        data_.resize(static_cast<std::size_t>(width) * height * 3);
        for (std::size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = fill.r;
            data_[i + 1] = fill.g;
            data_[i + 2] = fill.b;
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }

    Pixel operator()(int x, int y) const
    {
        const std::size_t i = index(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }

    void set(int x, int y, Pixel p)
    {
        const std::size_t i = index(x, y);
        data_[i] = p.r;
        data_[i + 1] = p.g;
        data_[i + 2] = p.b;
    }

    std::span<const std::uint8_t> bytes() const noexcept { return data_; }
    std::span<std::uint8_t> bytes() noexcept { return data_; }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept
    {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Binary foreground mask stored as 64-bit words, one padded word run per row.
/// Bit i of word j in a row is pixel x = 64 * j + i. Padding bits past the
/// row width are always zero.
class BinaryMask {
public:
    using Word = std::uint64_t;
    static constexpr int kWordBits = 64;

    BinaryMask() = default;

    BinaryMask(int width, int height)
        : width_(width), height_(height), stride_((width + kWordBits - 1) / kWordBits)
    {
        detail::check_dims(width, height, "BinaryMask");
        words_.assign(static_cast<std::size_t>(stride_) * height, 0);
    }

    static BinaryMask filled(int width, int height)
    {
        BinaryMask m(width, height);
        std::fill(m.words_.begin(), m.words_.end(), ~Word{0});
        m.clear_padding();
        return m;
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int stride() const noexcept { return stride_; }

    bool operator()(int x, int y) const
    {
        return (words_[word_index(x, y)] >> (x % kWordBits)) & 1u;
    }

    bool in_bounds(int x, int y) const noexcept
    {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    void set(int x, int y, bool value = true)
    {
        const Word bit = Word{1} << (x % kWordBits);
        Word& w = words_[word_index(x, y)];
        w = value ? (w | bit) : (w & ~bit);
    }

    std::span<const Word> row(int y) const noexcept
    {
        return {words_.data() + static_cast<std::size_t>(y) * stride_,
                static_cast<std::size_t>(stride_)};
    }
    std::span<Word> row(int y) noexcept
    {
        return {words_.data() + static_cast<std::size_t>(y) * stride_,
                static_cast<std::size_t>(stride_)};
    }

    std::span<const Word> words() const noexcept { return words_; }
    std::span<Word> words() noexcept { return words_; }

    std::size_t count() const noexcept
    {
        std::size_t n = 0;
        for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    bool none() const noexcept
    {
        return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
    }

    bool same_shape(const BinaryMask& other) const noexcept
    {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// Mask selecting the valid (non-padding) bits of the last word in a row.
    Word tail_mask() const noexcept
    {
        const int rem = width_ % kWordBits;
        return rem == 0 ? ~Word{0} : (Word{1} << rem) - 1;
    }

    void clear_padding() noexcept
    {
        if (stride_ == 0) return;
        const Word tail = tail_mask();
        for (int y = 0; y < height_; ++y) words_[static_cast<std::size_t>(y) * stride_ + stride_ - 1] &= tail;
    }

    BinaryMask operator~() const
    {
        BinaryMask out = *this;
        for (Word& w : out.words_) w = ~w;
        out.clear_padding();
        return out;
    }

    BinaryMask& operator&=(const BinaryMask& o) { return combine(o, [](Word a, Word b) { return a & b; }); }
    BinaryMask& operator|=(const BinaryMask& o) { return combine(o, [](Word a, Word b) { return a | b; }); }
    /// Removes every pixel of `o` from this mask.
    BinaryMask& subtract(const BinaryMask& o) { return combine(o, [](Word a, Word b) { return a & ~b; }); }

    friend BinaryMask operator&(BinaryMask a, const BinaryMask& b) { return a &= b; }
    friend BinaryMask operator|(BinaryMask a, const BinaryMask& b) { return a |= b; }

    /// True when every foreground pixel of this mask is foreground in `o`.
    bool subset_of(const BinaryMask& o) const
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & ~o.words_[i]) return false;
        }
        return true;
    }

    bool intersects(const BinaryMask& o) const
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & o.words_[i]) return true;
        }
        return false;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t word_index(int x, int y) const noexcept
    {
        return static_cast<std::size_t>(y) * stride_ + static_cast<std::size_t>(x / kWordBits);
    }

    void require_same_shape(const BinaryMask& o) const
    {
        if (!same_shape(o)) {
            throw DimensionError("BinaryMask: shape mismatch " + std::to_string(width_) + "x" +
                                 std::to_string(height_) + " vs " + std::to_string(o.width_) + "x" +
                                 std::to_string(o.height_));
        }
    }

    template <class Op>
    BinaryMask& combine(const BinaryMask& o, Op op)
    {
        require_same_shape(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] = op(words_[i], o.words_[i]);
        return *this;
    }

    int width_ = 0;
    int height_ = 0;
    int stride_ = 0;
    std::vector<Word> words_;
};

namespace detail {

/// Reads up to 64 bits starting at bit `offset` of a word row; bits past `limit_words` read as zero.
inline BinaryMask::Word load_bits(std::span<const BinaryMask::Word> row, std::size_t offset) noexcept
{
    const std::size_t w = offset / 64;
    const unsigned s = static_cast<unsigned>(offset % 64);
    BinaryMask::Word lo = w < row.size() ? row[w] : 0;
    if (s == 0) return lo;
    BinaryMask::Word hi = w + 1 < row.size() ? row[w + 1] : 0;
    return (lo >> s) | (hi << (64 - s));
}

/// ORs `count` bits of `src` starting at `src_offset` into `dst` starting at `dst_offset`.
inline void or_bits(std::span<BinaryMask::Word> dst, std::size_t dst_offset,
                    std::span<const BinaryMask::Word> src, std::size_t src_offset,
                    std::size_t count) noexcept
{
    while (count > 0) {
        const std::size_t n = std::min<std::size_t>(count, 64);
        BinaryMask::Word chunk = load_bits(src, src_offset);
        if (n < 64) chunk &= (BinaryMask::Word{1} << n) - 1;
        const std::size_t w = dst_offset / 64;
        const unsigned s = static_cast<unsigned>(dst_offset % 64);
        if (w < dst.size()) dst[w] |= chunk << s;
        if (s != 0 && w + 1 < dst.size()) dst[w + 1] |= chunk >> (64 - s);
        count -= n;
        src_offset += n;
        dst_offset += n;
    }
}

} // namespace detail

/// Copies `src` into a larger background canvas with `border` pixels on every side.
inline BinaryMask pad_mask(const BinaryMask& src, int border)
{
    BinaryMask out(src.width() + 2 * border, src.height() + 2 * border);
    for (int y = 0; y < src.height(); ++y) {
        detail::or_bits(out.row(y + border), static_cast<std::size_t>(border), src.row(y), 0,
                        static_cast<std::size_t>(src.width()));
    }
    return out;
}

/// Extracts the width x height window whose top-left corner is (x0, y0). The window must lie inside `src`.
inline BinaryMask crop_mask(const BinaryMask& src, int x0, int y0, int width, int height)
{
    if (x0 < 0 || y0 < 0 || x0 + width > src.width() || y0 + height > src.height()) {
        throw DimensionError("crop_mask: window outside source mask");
    }
    BinaryMask out(width, height);
    for (int y = 0; y < height; ++y) {
        detail::or_bits(out.row(y), 0, src.row(y + y0), static_cast<std::size_t>(x0),
                        static_cast<std::size_t>(width));
    }
    return out;
}

} // namespace nuctrack
