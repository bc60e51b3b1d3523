#include "diffrestore/image.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <zlib.h>

namespace diffrestore {

bool image::all_finite() const
{
    for (rgb const& p : pixels)
        for (double c : p)
            if (!std::isfinite(c))
                return false;
    return true;
}

namespace {

void append_float_le(std::vector<unsigned char>& out, float f)
{
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    if constexpr (std::endian::native == std::endian::big)
        u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) |
            ((u & 0x0000FF00u) << 8) | ((u & 0x000000FFu) << 24);
    out.push_back(static_cast<unsigned char>(u));
    out.push_back(static_cast<unsigned char>(u >> 8));
    out.push_back(static_cast<unsigned char>(u >> 16));
    out.push_back(static_cast<unsigned char>(u >> 24));
}

void write_file(std::string const& path, std::vector<unsigned char> const& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<char const*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

void push_u32_be(std::vector<unsigned char>& v, std::uint32_t x)
{
    v.push_back(static_cast<unsigned char>(x >> 24));
    v.push_back(static_cast<unsigned char>(x >> 16));
    v.push_back(static_cast<unsigned char>(x >> 8));
    v.push_back(static_cast<unsigned char>(x));
}

void push_chunk(std::vector<unsigned char>& out, char const* type,
                std::vector<unsigned char> const& data)
{
    push_u32_be(out, static_cast<std::uint32_t>(data.size()));
    std::size_t const crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t const crc = static_cast<std::uint32_t>(
        crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
    push_u32_be(out, crc);
}

void write_png_rgb8(std::vector<unsigned char> const& rows_top_down, int width, int height,
                    std::string const& path)
{
    // rows_top_down: height rows of (1 filter byte + 3*width samples).
    std::vector<unsigned char> png = { 0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A };

    std::vector<unsigned char> ihdr;
    push_u32_be(ihdr, static_cast<std::uint32_t>(width));
    push_u32_be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    push_chunk(png, "IHDR", ihdr);

    uLongf dest_len = compressBound(static_cast<uLong>(rows_top_down.size()));
    std::vector<unsigned char> compressed(dest_len);
    if (compress2(compressed.data(), &dest_len, rows_top_down.data(),
                  static_cast<uLong>(rows_top_down.size()), 6) != Z_OK)
        throw std::runtime_error("png deflate failed");
    compressed.resize(dest_len);
    push_chunk(png, "IDAT", compressed);
    push_chunk(png, "IEND", {});

    write_file(path, png);
}

unsigned char encode_srgb(double v)
{
    double const g = std::pow(std::clamp(v, 0.0, 1.0), 1.0 / 2.2);
    return static_cast<unsigned char>(std::lround(g * 255.0));
}

} // namespace

void write_pfm(image const& img, std::string const& path)
{
    std::string const header =
        "PF\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n-1.0\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + static_cast<std::size_t>(img.pixel_count()) * 12);
    // PFM with negative scale: little-endian, rows bottom-to-top; our row 0
    // is already the bottom scanline.
    for (int py = 0; py < img.height; ++py)
        for (int px = 0; px < img.width; ++px)
            for (double c : img.at(px, py))
                append_float_le(bytes, static_cast<float>(c));
    write_file(path, bytes);
}

void write_png(image const& img, std::string const& path, double exposure)
{
    std::vector<unsigned char> rows;
    rows.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * static_cast<std::size_t>(img.width)));
    for (int py = img.height - 1; py >= 0; --py) {
        rows.push_back(0); // filter: none
        for (int px = 0; px < img.width; ++px) {
            rgb const& c = img.at(px, py);
            rows.push_back(encode_srgb(exposure * c[0]));
            rows.push_back(encode_srgb(exposure * c[1]));
            rows.push_back(encode_srgb(exposure * c[2]));
        }
    }
    write_png_rgb8(rows, img.width, img.height, path);
}

void write_png_gray(std::vector<double> const& values, int width, int height,
                    double lo, double hi, std::string const& path)
{
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("write_png_gray: size mismatch");
    double const span = hi > lo ? hi - lo : 1.0;
    std::vector<unsigned char> rows;
    rows.reserve(static_cast<std::size_t>(height) * (1 + 3 * static_cast<std::size_t>(width)));
    for (int py = height - 1; py >= 0; --py) {
        rows.push_back(0);
        for (int px = 0; px < width; ++px) {
            double const v = values[static_cast<std::size_t>(py) * width + px];
            double const t = std::clamp((v - lo) / span, 0.0, 1.0);
            auto const g = static_cast<unsigned char>(std::lround(t * 255.0));
            rows.push_back(g);
            rows.push_back(g);
            rows.push_back(g);
        }
    }
    write_png_rgb8(rows, width, height, path);
}

} // namespace diffrestore
