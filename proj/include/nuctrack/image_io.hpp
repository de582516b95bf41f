#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace nuctrack::io {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

/// 16-bit samples map linearly onto 8 bits, full scale to full scale.
inline std::uint8_t to8(std::uint16_t v) noexcept
{
    return static_cast<std::uint8_t>((static_cast<std::uint32_t>(v) * 255u + 32767u) / 65535u);
}

inline std::string lower_extension(const std::filesystem::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

} // namespace detail

inline bool is_png(const std::filesystem::path& p) { return detail::lower_extension(p) == ".png"; }
inline bool is_tiff(const std::filesystem::path& p)
{
    const auto e = detail::lower_extension(p);
    return e == ".tif" || e == ".tiff";
}

inline RgbImage read_png(const std::filesystem::path& path)
{
    auto file = detail::open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw IoError("not a PNG file: " + path.string());
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialisation failed for " + path.string());
    }

    RgbImage out;
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("corrupt PNG: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png); // little-endian 16-bit samples, rescaled below
    png_read_update_info(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    const int out_depth = png_get_bit_depth(png, info);
    buffer.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    out = RgbImage(static_cast<int>(width), static_cast<int>(height));
    auto dst = out.bytes();
    for (png_uint_32 y = 0; y < height; ++y) {
        const png_byte* src = rows[y];
        for (png_uint_32 i = 0; i < width * 3; ++i) {
            std::uint8_t v;
            if (out_depth == 16) {
                v = detail::to8(static_cast<std::uint16_t>(src[2 * i] | (src[2 * i + 1] << 8)));
            } else {
                v = src[i];
            }
            dst[static_cast<std::size_t>(y) * width * 3 + i] = v;
        }
    }
    return out;
}

inline RgbImage read_tiff(const std::filesystem::path& path)
{
    TIFFSetWarningHandler(nullptr);
    std::unique_ptr<TIFF, void (*)(TIFF*)> tif(TIFFOpen(path.c_str(), "r"), [](TIFF* t) {
        if (t) TIFFClose(t);
    });
    if (!tif) throw IoError("cannot open TIFF " + path.string());

    std::uint32_t width = 0, height = 0;
    std::uint16_t bits = 8, spp = 1, config = PLANARCONFIG_CONTIG, photometric = PHOTOMETRIC_MINISBLACK;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bits);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &config);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PHOTOMETRIC, &photometric);
    if (width == 0 || height == 0) throw IoError("TIFF without image data: " + path.string());

    RgbImage out(static_cast<int>(width), static_cast<int>(height));
    auto dst = out.bytes();

    const bool plain = config == PLANARCONFIG_CONTIG && !TIFFIsTiled(tif.get()) && (bits == 8 || bits == 16) &&
                       (photometric == PHOTOMETRIC_MINISBLACK || photometric == PHOTOMETRIC_RGB) &&
                       spp >= 1;
    if (plain) {
        std::vector<std::uint8_t> line(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
        const std::size_t color_channels = photometric == PHOTOMETRIC_RGB ? 3 : 1;
        if (spp < color_channels) throw IoError("TIFF sample layout not supported: " + path.string());
        for (std::uint32_t y = 0; y < height; ++y) {
            if (TIFFReadScanline(tif.get(), line.data(), y, 0) < 0) throw IoError("corrupt TIFF: " + path.string());
            for (std::uint32_t x = 0; x < width; ++x) {
                for (std::size_t c = 0; c < 3; ++c) {
                    const std::size_t sample = static_cast<std::size_t>(x) * spp + (color_channels == 3 ? c : 0);
                    std::uint8_t v;
                    if (bits == 16) {
                        std::uint16_t s;
                        std::memcpy(&s, line.data() + 2 * sample, 2);
                        v = detail::to8(s);
                    } else {
                        v = line[sample];
                    }
                    dst[(static_cast<std::size_t>(y) * width + x) * 3 + c] = v;
                }
            }
        }
        return out;
    }

    // Anything else (palettes, tiles, odd depths) goes through libtiff's RGBA path.
    std::vector<std::uint32_t> raster(static_cast<std::size_t>(width) * height);
    if (!TIFFReadRGBAImageOriented(tif.get(), width, height, raster.data(), ORIENTATION_TOPLEFT, 0)) {
        throw IoError("unsupported TIFF layout: " + path.string());
    }
    for (std::size_t i = 0; i < raster.size(); ++i) {
        dst[3 * i] = static_cast<std::uint8_t>(TIFFGetR(raster[i]));
        dst[3 * i + 1] = static_cast<std::uint8_t>(TIFFGetG(raster[i]));
        dst[3 * i + 2] = static_cast<std::uint8_t>(TIFFGetB(raster[i]));
    }
    return out;
}

inline RgbImage read_image(const std::filesystem::path& path)
{
    if (is_png(path)) return read_png(path);
    if (is_tiff(path)) return read_tiff(path);
    throw IoError("unsupported image format: " + path.string());
}

namespace detail {

inline void write_png_rows(const std::filesystem::path& path, int width, int height, int color_type,
                           const std::uint8_t* data, std::size_t rowbytes)
{
    auto file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed for " + path.string());
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * rowbytes);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace detail

inline void write_png(const std::filesystem::path& path, const RgbImage& img)
{
    detail::write_png_rows(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, img.bytes().data(),
                           static_cast<std::size_t>(img.width()) * 3);
}

inline void write_png(const std::filesystem::path& path, const GrayImage& img)
{
    detail::write_png_rows(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, img.pixels().data(),
                           static_cast<std::size_t>(img.width()));
}

} // namespace nuctrack::io
