#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "osr/error.hpp"
#include "osr/image.hpp"

namespace osr {

// Bands plus low-pass residual. Band l is the difference-of-Gaussians
// X - G(2)*X (l = 0) or G(2^l)*X - G(2^{l+1})*X (l > 0), computed at full
// resolution and then downsampled by band_scales[l]. The residual is
// G(2^{n_L+1})*X downsampled by the last band's factor.
struct LaplacianPyramid {
    int n_levels = 0;  // n_L; bands are l = 0 .. n_L, so n_L+1 band images
    std::vector<BandBuf> bands;
    BandBuf residual;
    std::vector<int> band_scales;
    int residual_scale = 1;
    int source_width = 0;
    int source_height = 0;
};

struct PyramidOptions {
    double base_sigma = 2.0;
    // Downsample factor per band; empty selects the default table
    // {1, 1, 2, 4, ..., 2^{n_L-1}} with the residual at the last factor.
    std::vector<int> scales;
};

inline std::vector<int> default_band_scales(int n_levels) {
    std::vector<int> s(size_t(n_levels) + 1);
    s[0] = 1;
    for (int l = 1; l <= n_levels; ++l) s[size_t(l)] = 1 << (l - 1);
    return s;
}

// Discretely normalized 1-D Gaussian, radius ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    require(sigma > 0.0, Error::Kind::argument, "gaussian kernel: sigma must be positive");
    const int radius = int(std::ceil(3.0 * sigma));
    std::vector<double> k(size_t(2 * radius) + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double w = std::exp(-0.5 * (double(i) * i) / (sigma * sigma));
        k[size_t(i + radius)] = w;
        sum += w;
    }
    for (double& w : k) w /= sum;
    return k;
}

// Separable convolution with replicate boundary. Constant inputs are
// preserved exactly because the kernel is normalized.
inline BandBuf gaussian_blur(const BandBuf& img, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int radius = int(k.size() / 2);
    const int w = img.width, h = img.height;

    BandBuf tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += k[size_t(i + radius)] * img.at_clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    }
    BandBuf out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += k[size_t(i + radius)] * tmp.at_clamped(x, y + i);
            out.at(x, y) = acc;
        }
    }
    return out;
}

// Box average over factor x factor blocks; edge blocks average the pixels
// that exist. Output size is ceil(size / factor).
inline BandBuf downsample(const BandBuf& img, int factor) {
    require(factor >= 1, Error::Kind::argument, "downsample: factor must be >= 1");
    if (factor == 1) return img;
    const int ow = (img.width + factor - 1) / factor;
    const int oh = (img.height + factor - 1) / factor;
    BandBuf out(ow, oh);
    for (int oy = 0; oy < oh; ++oy) {
        const int y0 = oy * factor, y1 = std::min(y0 + factor, img.height);
        for (int ox = 0; ox < ow; ++ox) {
            const int x0 = ox * factor, x1 = std::min(x0 + factor, img.width);
            double acc = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) acc += img.at(x, y);
            out.at(ox, oy) = acc / (double(y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

// Bilinear resize to an exact target size, align-centers convention
// (src = (dst + 0.5) * size_ratio - 0.5). This inverts the box-downsample
// geometry: block centers land exactly on source sample positions.
inline BandBuf upsample(const BandBuf& img, int target_w, int target_h) {
    require(target_w > 0 && target_h > 0, Error::Kind::argument, "upsample: zero target size");
    if (target_w == img.width && target_h == img.height) return img;
    BandBuf out(target_w, target_h);
    const double sx = double(img.width) / target_w;
    const double sy = double(img.height) / target_h;
    for (int y = 0; y < target_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(img.height - 1));
        const int y0 = int(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < target_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(img.width - 1));
            const int x0 = int(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            const double top = img.at(x0, y0) + wx * (img.at(x1, y0) - img.at(x0, y0));
            const double bot = img.at(x0, y1) + wx * (img.at(x1, y1) - img.at(x0, y1));
            out.at(x, y) = top + wy * (bot - top);
        }
    }
    return out;
}

inline LaplacianPyramid decompose(const BandBuf& img, int n_levels, const PyramidOptions& opt = {}) {
    require(n_levels >= 0, Error::Kind::argument, "decompose: n_levels must be >= 0");
    const int min_size = 1 << (n_levels + 1);
    require(img.width >= min_size && img.height >= min_size, Error::Kind::dimension,
            "decompose: image too small for " + std::to_string(n_levels) + " levels (need >= " +
                std::to_string(min_size) + " px per side)");
    std::vector<int> scales = opt.scales.empty() ? default_band_scales(n_levels) : opt.scales;
    require(int(scales.size()) == n_levels + 1, Error::Kind::argument, "decompose: scale table size mismatch");

    LaplacianPyramid pyr;
    pyr.n_levels = n_levels;
    pyr.band_scales = scales;
    pyr.residual_scale = scales.back();
    pyr.source_width = img.width;
    pyr.source_height = img.height;
    pyr.bands.reserve(size_t(n_levels) + 1);

    // One blur per sigma in 2^l * base_sigma; each band is the difference
    // of consecutive blurs, so the full-resolution bands telescope exactly.
    BandBuf prev = gaussian_blur(img, opt.base_sigma);
    {
        BandBuf band0(img.width, img.height);
        for (size_t i = 0; i < img.data.size(); ++i) band0.data[i] = img.data[i] - prev.data[i];
        pyr.bands.push_back(downsample(band0, scales[0]));
    }
    for (int l = 1; l <= n_levels; ++l) {
        BandBuf next = gaussian_blur(img, std::ldexp(opt.base_sigma, l));
        BandBuf band(img.width, img.height);
        for (size_t i = 0; i < img.data.size(); ++i) band.data[i] = prev.data[i] - next.data[i];
        pyr.bands.push_back(downsample(band, scales[size_t(l)]));
        prev = std::move(next);
    }
    pyr.residual = downsample(prev, pyr.residual_scale);
    return pyr;
}

// Upsamples every band and the residual to the source size and sums them.
inline BandBuf reconstruct(const LaplacianPyramid& pyr) {
    require(pyr.bands.size() == size_t(pyr.n_levels) + 1, Error::Kind::dimension,
            "reconstruct: band count mismatch");
    const int w = pyr.source_width, h = pyr.source_height;
    BandBuf out(w, h, 0.0);
    for (size_t l = 0; l < pyr.bands.size(); ++l) {
        const int s = pyr.band_scales[l];
        const int ew = (w + s - 1) / s, eh = (h + s - 1) / s;
        require(pyr.bands[l].width == ew && pyr.bands[l].height == eh, Error::Kind::dimension,
                "reconstruct: band " + std::to_string(l) + " size inconsistent with its scale");
        const BandBuf up = upsample(pyr.bands[l], w, h);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += up.data[i];
    }
    {
        const int s = pyr.residual_scale;
        require(pyr.residual.width == (w + s - 1) / s && pyr.residual.height == (h + s - 1) / s,
                Error::Kind::dimension, "reconstruct: residual size inconsistent with its scale");
        const BandBuf up = upsample(pyr.residual, w, h);
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += up.data[i];
    }
    return out;
}

}  // namespace osr
