#ifndef DIFFRESTORE_IMAGE_HPP
#define DIFFRESTORE_IMAGE_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace diffrestore {

using rgb = std::array<double, 3>;

inline rgb operator+(rgb a, rgb const& b)
{
    a[0] += b[0];
    a[1] += b[1];
    a[2] += b[2];
    return a;
}

inline rgb operator*(double s, rgb v)
{
    v[0] *= s;
    v[1] *= s;
    v[2] *= s;
    return v;
}

inline double luminance(rgb const& c)
{
    return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2];
}

// Row-major RGB image; row 0 is the bottom scanline (x1 = 0).
struct image {
    int width = 0;
    int height = 0;
    std::vector<rgb> pixels;

    image() = default;
    image(int w, int h) : width(w), height(h),
        pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), rgb{ 0, 0, 0 }) {}

    int pixel_count() const { return width * height; }
    rgb& at(int px, int py) { return pixels[static_cast<std::size_t>(py) * width + px]; }
    rgb const& at(int px, int py) const { return pixels[static_cast<std::size_t>(py) * width + px]; }

    bool all_finite() const;
};

// Little-endian 32-bit float PFM ("PF" header, scale -1.0, bottom-up rows).
void write_pfm(image const& img, std::string const& path);

// 8-bit sRGB PNG: exposure scale, then gamma 1/2.2, rows top-down.
void write_png(image const& img, std::string const& path, double exposure = 1.0);

// Grayscale PNG of a scalar field normalized to [lo, hi] (used by the bias
// heatmaps); values is row-major with row 0 at the bottom.
void write_png_gray(std::vector<double> const& values, int width, int height,
                    double lo, double hi, std::string const& path);

} // namespace diffrestore

#endif
