#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "osr/error.hpp"

namespace osr {

// Signed single-channel raster. Laplacian band values are differences and
// must not be clamped, so this type carries no range invariant.
struct BandBuf {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // row-major, width*height

    BandBuf() = default;
    BandBuf(int w, int h, double fill = 0.0) : width(w), height(h), data(size_t(w) * h, fill) {
        require(w > 0 && h > 0, Error::Kind::argument, "BandBuf: non-positive size");
    }

    double& at(int x, int y) { return data[size_t(y) * width + x]; }
    double at(int x, int y) const { return data[size_t(y) * width + x]; }

    // Replicate-clamped access, used by convolution boundaries.
    double at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return data[size_t(y) * width + x];
    }

    size_t size() const { return data.size(); }
};

// Normalized raster in [0,1], 1 or 3 interleaved channels. Every public
// operation that returns an ImageBuf clamps into range.
struct ImageBuf {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;  // row-major, channel-interleaved

    ImageBuf() = default;
    ImageBuf(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c), data(size_t(w) * h * c, fill) {
        require(w > 0 && h > 0, Error::Kind::argument, "ImageBuf: non-positive size");
        require(c == 1 || c == 3, Error::Kind::argument, "ImageBuf: channels must be 1 or 3");
    }

    double& at(int x, int y, int c = 0) { return data[(size_t(y) * width + x) * channels + c]; }
    double at(int x, int y, int c = 0) const { return data[(size_t(y) * width + x) * channels + c]; }

    size_t pixel_count() const { return size_t(width) * height; }

    void clamp01() {
        for (double& v : data) v = std::clamp(v, 0.0, 1.0);
    }
};

inline BandBuf get_plane(const ImageBuf& img, int c) {
    require(c >= 0 && c < img.channels, Error::Kind::argument, "get_plane: channel out of range");
    BandBuf out(img.width, img.height);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) out.data[i] = img.data[i * img.channels + c];
    return out;
}

inline void set_plane(ImageBuf& img, int c, const BandBuf& plane) {
    require(c >= 0 && c < img.channels, Error::Kind::argument, "set_plane: channel out of range");
    require(plane.width == img.width && plane.height == img.height, Error::Kind::dimension,
            "set_plane: plane size mismatch");
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) img.data[i * img.channels + c] = plane.data[i];
}

inline ImageBuf plane_to_image(const BandBuf& plane, bool clamp = true) {
    ImageBuf out(plane.width, plane.height, 1);
    out.data = plane.data;
    if (clamp) out.clamp01();
    return out;
}

// BT.601 full-range luma coefficients. kYB is defined by the unit-sum
// identity so achromatic pixels map to (v, 0.5, 0.5) with zero rounding.
inline constexpr double kYR = 0.299;
inline constexpr double kYG = 0.587;
inline constexpr double kYB = 1.0 - kYR - kYG;
inline constexpr double kCbScale = 1.772;  // 2*(1 - kYB)
inline constexpr double kCrScale = 1.402;  // 2*(1 - kYR)

// Full-range BT.601. Y in [0,1]; Cb/Cr offset so neutral gray is 0.5.
inline ImageBuf rgb_to_ycbcr(const ImageBuf& img) {
    require(img.channels == 3, Error::Kind::dimension, "rgb_to_ycbcr: expected 3 channels");
    ImageBuf out(img.width, img.height, 3);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const double r = img.data[i * 3 + 0];
        const double g = img.data[i * 3 + 1];
        const double b = img.data[i * 3 + 2];
        // Written as offsets from b so r==g==b gives y==b exactly.
        const double y = b + kYR * (r - b) + kYG * (g - b);
        out.data[i * 3 + 0] = y;
        out.data[i * 3 + 1] = 0.5 + (b - y) / kCbScale;
        out.data[i * 3 + 2] = 0.5 + (r - y) / kCrScale;
    }
    out.clamp01();
    return out;
}

inline ImageBuf ycbcr_to_rgb(const ImageBuf& img) {
    require(img.channels == 3, Error::Kind::dimension, "ycbcr_to_rgb: expected 3 channels");
    ImageBuf out(img.width, img.height, 3);
    const size_t n = img.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const double y = img.data[i * 3 + 0];
        const double cb = img.data[i * 3 + 1];
        const double cr = img.data[i * 3 + 2];
        const double r = y + kCrScale * (cr - 0.5);
        const double b = y + kCbScale * (cb - 0.5);
        const double g = y - (kYR * (r - y) + kYB * (b - y)) / kYG;
        out.data[i * 3 + 0] = r;
        out.data[i * 3 + 1] = g;
        out.data[i * 3 + 2] = b;
    }
    out.clamp01();
    return out;
}

}  // namespace osr
