#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "osr/error.hpp"
#include "osr/image.hpp"
#include "osr/pyramid.hpp"

namespace osr {

// Reference filters used to manufacture ground-truth after-images. All of
// them evaluate on the luminance plane of color inputs, preserving chroma,
// to match how the learned models are trained and scored.

enum class FilterKind { gaussian, unsharp, bilateral, local_laplacian };

struct FilterSpec {
    FilterKind kind = FilterKind::gaussian;
    double sigma = 2.0;    // gaussian / unsharp spatial scale
    double amount = 1.0;   // unsharp strength
    double sigma_s = 3.0;  // bilateral spatial scale
    double sigma_r = 0.1;  // range scale (bilateral and local laplacian)
    double alpha = 2.0;    // local laplacian detail exponent
    int levels = 5;        // local laplacian pyramid depth

    void validate() const {
        switch (kind) {
            case FilterKind::gaussian:
                require(sigma > 0.0, Error::Kind::argument, "sigma must be positive");
                break;
            case FilterKind::unsharp:
                require(sigma > 0.0, Error::Kind::argument, "sigma must be positive");
                break;
            case FilterKind::bilateral:
                require(sigma_s > 0.0 && sigma_r > 0.0, Error::Kind::argument,
                        "bilateral sigmas must be positive");
                break;
            case FilterKind::local_laplacian:
                require(alpha > 0.0 && sigma_r > 0.0, Error::Kind::argument,
                        "alpha and range sigma must be positive");
                require(levels >= 3, Error::Kind::argument, "local laplacian needs at least 3 levels");
                break;
        }
    }
};

inline FilterKind filter_kind_from_string(const std::string& s) {
    if (s == "gaussian") return FilterKind::gaussian;
    if (s == "unsharp") return FilterKind::unsharp;
    if (s == "bilateral") return FilterKind::bilateral;
    if (s == "local_laplacian") return FilterKind::local_laplacian;
    fail(Error::Kind::argument, "unknown filter type: " + s);
}

inline const char* to_string(FilterKind k) {
    switch (k) {
        case FilterKind::gaussian: return "gaussian";
        case FilterKind::unsharp: return "unsharp";
        case FilterKind::bilateral: return "bilateral";
        case FilterKind::local_laplacian: return "local_laplacian";
    }
    return "?";
}

// Smoothing and detail-enhancing parameter sets quoted for the tone-mapping
// comparison; the source material gives two conflicting enhancement settings,
// so both are kept and named.
inline FilterSpec llf_preset_smooth() {
    FilterSpec s;
    s.kind = FilterKind::local_laplacian;
    s.alpha = 2.0;
    s.sigma_r = 0.2;
    return s;
}
inline FilterSpec llf_preset_enhance() {
    FilterSpec s;
    s.kind = FilterKind::local_laplacian;
    s.alpha = 0.5;
    s.sigma_r = 0.1;
    return s;
}
inline FilterSpec llf_preset_enhance_alt() {
    FilterSpec s;
    s.kind = FilterKind::local_laplacian;
    s.alpha = 0.7;
    s.sigma_r = 0.4;
    return s;
}

inline BandBuf unsharp_plane(const BandBuf& p, double sigma, double amount) {
    const BandBuf blur = gaussian_blur(p, sigma);
    BandBuf out(p.width, p.height);
    for (size_t i = 0; i < p.data.size(); ++i)
        out.data[i] = std::clamp(p.data[i] + amount * (p.data[i] - blur.data[i]), 0.0, 1.0);
    return out;
}

// Brute-force windowed bilateral: Gaussian spatial and range kernels over a
// radius-ceil(3*sigma_s) window, replicate boundary, per-pixel renormalized.
inline BandBuf bilateral_plane(const BandBuf& p, double sigma_s, double sigma_r) {
    require(sigma_s > 0.0 && sigma_r > 0.0, Error::Kind::argument, "bilateral sigmas must be positive");
    const int radius = int(std::ceil(3.0 * sigma_s));
    const double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s);
    const double inv2sr = 1.0 / (2.0 * sigma_r * sigma_r);

    std::vector<double> spatial(size_t(2 * radius + 1) * (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            spatial[size_t(dy + radius) * (2 * radius + 1) + (dx + radius)] =
                std::exp(-(double(dx) * dx + double(dy) * dy) * inv2ss);

    BandBuf out(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            const double center = p.at(x, y);
            double acc = 0.0, norm = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double v = p.at_clamped(x + dx, y + dy);
                    const double dv = v - center;
                    const double w = spatial[size_t(dy + radius) * (2 * radius + 1) + (dx + radius)] *
                                     std::exp(-dv * dv * inv2sr);
                    acc += w * v;
                    norm += w;
                }
            }
            out.at(x, y) = acc / norm;
        }
    }
    return out;
}

namespace detail_llf {

// 5-tap Burt-Adelson kernel; reduce/expand with it make the Laplacian
// reconstruction identity exact by construction.
inline constexpr double kTap[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

inline int half_size(int n) { return (n + 1) / 2; }

inline BandBuf reduce(const BandBuf& in) {
    const int rw = half_size(in.width), rh = half_size(in.height);
    BandBuf tmp(rw, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < rw; ++x) {
            double acc = 0.0;
            for (int m = -2; m <= 2; ++m) acc += kTap[m + 2] * in.at_clamped(2 * x + m, y);
            tmp.at(x, y) = acc;
        }
    BandBuf out(rw, rh);
    for (int y = 0; y < rh; ++y)
        for (int x = 0; x < rw; ++x) {
            double acc = 0.0;
            for (int m = -2; m <= 2; ++m) acc += kTap[m + 2] * tmp.at_clamped(x, 2 * y + m);
            out.at(x, y) = acc;
        }
    return out;
}

// One expanded sample at (x, y) of the doubled grid; direct 2D tap sum.
inline double expand_at(const BandBuf& in, int x, int y) {
    double acc = 0.0;
    for (int m = -2; m <= 2; ++m) {
        if ((y - m) % 2 != 0) continue;
        const int sy = std::clamp((y - m) / 2, 0, in.height - 1);
        double row = 0.0;
        for (int n = -2; n <= 2; ++n) {
            if ((x - n) % 2 != 0) continue;
            const int sx = std::clamp((x - n) / 2, 0, in.width - 1);
            row += 2.0 * kTap[n + 2] * in.at(sx, sy);
        }
        acc += 2.0 * kTap[m + 2] * row;
    }
    return acc;
}

inline BandBuf expand(const BandBuf& in, int target_w, int target_h) {
    require(half_size(target_w) == in.width && half_size(target_h) == in.height,
            Error::Kind::dimension, "expand: target size does not halve back to input size");
    BandBuf out(target_w, target_h);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x) out.at(x, y) = expand_at(in, x, y);
    return out;
}

inline std::vector<BandBuf> gaussian_levels(const BandBuf& base, int levels) {
    std::vector<BandBuf> g;
    g.reserve(size_t(levels));
    g.push_back(base);
    for (int l = 1; l < levels; ++l) g.push_back(reduce(g.back()));
    return g;
}

// r_g(v): compress or amplify the deviation from g inside the range band,
// identity outside; continuous at |v-g| == sigma_r.
inline double remap(double v, double g, double alpha, double sigma_r) {
    const double diff = v - g;
    const double ad = std::abs(diff);
    if (ad > sigma_r) return v;
    const double shaped = sigma_r * std::pow(ad / sigma_r, alpha);
    return g + (diff < 0.0 ? -shaped : shaped);
}

}  // namespace detail_llf

// Local Laplacian filtering by per-coefficient remapping: every output
// pyramid coefficient is computed from its own copy of the image remapped
// around the local Gaussian-pyramid value. The copy is restricted to the
// coefficient's support window (an exact windowing, not an approximation);
// window starts are aligned to the coefficient's grid so sub-pyramid indices
// correspond one-to-one with the full image's.
inline BandBuf local_laplacian_plane(const BandBuf& p, double alpha, double sigma_r, int levels) {
    require(alpha > 0.0 && sigma_r > 0.0, Error::Kind::argument,
            "alpha and range sigma must be positive");
    require(levels >= 3, Error::Kind::argument, "local laplacian needs at least 3 levels");
    require(std::min(p.width, p.height) >= (1 << levels), Error::Kind::dimension,
            "image too small for requested pyramid depth");

    using namespace detail_llf;
    const std::vector<BandBuf> G = gaussian_levels(p, levels);

    std::vector<BandBuf> out_pyr(static_cast<size_t>(levels));
    for (int l = 0; l < levels - 1; ++l) {
        const int align = 1 << (l + 1);
        const int margin = 12 * (1 << l) + 8;  // support cone plus stencil slack
        BandBuf coeffs(G[size_t(l)].width, G[size_t(l)].height);
        for (int gy = 0; gy < coeffs.height; ++gy) {
            for (int gx = 0; gx < coeffs.width; ++gx) {
                const double g0 = G[size_t(l)].at(gx, gy);
                const int cx = gx << l, cy = gy << l;
                const int x0 = std::max(0, ((cx - margin) / align) * align);
                const int y0 = std::max(0, ((cy - margin) / align) * align);
                const int x1 = std::min(p.width, cx + margin + 1);
                const int y1 = std::min(p.height, cy + margin + 1);

                BandBuf win(x1 - x0, y1 - y0);
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x)
                        win.at(x - x0, y - y0) = remap(p.at(x, y), g0, alpha, sigma_r);

                BandBuf lv = win;
                for (int t = 0; t < l; ++t) lv = reduce(lv);
                const BandBuf top = reduce(lv);
                const int lx = gx - (x0 >> l), ly = gy - (y0 >> l);
                coeffs.at(gx, gy) = lv.at(lx, ly) - expand_at(top, lx, ly);
            }
        }
        out_pyr[size_t(l)] = std::move(coeffs);
    }
    out_pyr[size_t(levels - 1)] = G[size_t(levels - 1)];  // residual passes through

    BandBuf acc = out_pyr[size_t(levels - 1)];
    for (int l = levels - 2; l >= 0; --l) {
        const BandBuf up = expand(acc, out_pyr[size_t(l)].width, out_pyr[size_t(l)].height);
        acc = std::move(out_pyr[size_t(l)]);
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += up.data[i];
    }
    for (double& v : acc.data) v = std::clamp(v, 0.0, 1.0);
    return acc;
}

namespace detail_filter {

template <class PlaneFn>
ImageBuf on_luma(const ImageBuf& img, PlaneFn&& fn) {
    if (img.channels == 1) {
        BandBuf out = fn(get_plane(img, 0));
        return plane_to_image(out);
    }
    ImageBuf ycc = rgb_to_ycbcr(img);
    BandBuf y = fn(get_plane(ycc, 0));
    for (double& v : y.data) v = std::clamp(v, 0.0, 1.0);
    set_plane(ycc, 0, y);
    return ycbcr_to_rgb(ycc);
}

}  // namespace detail_filter

inline ImageBuf gaussian_filter(const ImageBuf& img, double sigma) {
    return detail_filter::on_luma(img, [sigma](const BandBuf& p) { return gaussian_blur(p, sigma); });
}

inline ImageBuf unsharp_mask(const ImageBuf& img, double sigma, double amount) {
    return detail_filter::on_luma(
        img, [sigma, amount](const BandBuf& p) { return unsharp_plane(p, sigma, amount); });
}

inline ImageBuf bilateral_filter(const ImageBuf& img, double sigma_s, double sigma_r) {
    return detail_filter::on_luma(
        img, [sigma_s, sigma_r](const BandBuf& p) { return bilateral_plane(p, sigma_s, sigma_r); });
}

inline ImageBuf local_laplacian(const ImageBuf& img, double alpha, double sigma_r, int levels = 5) {
    return detail_filter::on_luma(img, [alpha, sigma_r, levels](const BandBuf& p) {
        return local_laplacian_plane(p, alpha, sigma_r, levels);
    });
}

inline ImageBuf apply_filter(const ImageBuf& img, const FilterSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case FilterKind::gaussian: return gaussian_filter(img, spec.sigma);
        case FilterKind::unsharp: return unsharp_mask(img, spec.sigma, spec.amount);
        case FilterKind::bilateral: return bilateral_filter(img, spec.sigma_s, spec.sigma_r);
        case FilterKind::local_laplacian:
            return local_laplacian(img, spec.alpha, spec.sigma_r, spec.levels);
    }
    fail(Error::Kind::argument, "unreachable filter kind");
}

}  // namespace osr
