#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "osr/error.hpp"
#include "osr/image.hpp"

namespace osr {

struct PsnrResult {
    double db = 0.0;
    bool is_infinite = false;  // MSE was exactly zero
};

inline PsnrResult psnr(const BandBuf& a, const BandBuf& b, double peak = 1.0) {
    require(a.width == b.width && a.height == b.height, Error::Kind::dimension, "psnr size mismatch");
    require(peak > 0.0, Error::Kind::argument, "psnr peak must be positive");
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= double(a.data.size());
    if (mse == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {10.0 * std::log10(peak * peak / mse), false};
}

inline PsnrResult psnr(const ImageBuf& a, const ImageBuf& b, double peak = 1.0) {
    require(a.width == b.width && a.height == b.height && a.channels == b.channels,
            Error::Kind::dimension, "psnr size mismatch");
    require(peak > 0.0, Error::Kind::argument, "psnr peak must be positive");
    double mse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= double(a.data.size());
    if (mse == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {10.0 * std::log10(peak * peak / mse), false};
}

// Structural similarity, 11x11 Gaussian window sigma 1.5, K1=0.01, K2=0.03,
// peak 1; mean over all positions where the window fits entirely.
inline double ssim(const BandBuf& a, const BandBuf& b) {
    require(a.width == b.width && a.height == b.height, Error::Kind::dimension, "ssim size mismatch");
    constexpr int kRadius = 5;
    require(a.width >= 2 * kRadius + 1 && a.height >= 2 * kRadius + 1, Error::Kind::dimension,
            "ssim needs at least an 11x11 image");
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;

    double w[2 * kRadius + 1][2 * kRadius + 1];
    double wsum = 0.0;
    for (int dy = -kRadius; dy <= kRadius; ++dy)
        for (int dx = -kRadius; dx <= kRadius; ++dx) {
            const double v = std::exp(-(double(dx) * dx + double(dy) * dy) / (2.0 * 1.5 * 1.5));
            w[dy + kRadius][dx + kRadius] = v;
            wsum += v;
        }
    for (auto& row : w)
        for (double& v : row) v /= wsum;

    double total = 0.0;
    long count = 0;
    for (int y = kRadius; y < a.height - kRadius; ++y) {
        for (int x = kRadius; x < a.width - kRadius; ++x) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int dy = -kRadius; dy <= kRadius; ++dy)
                for (int dx = -kRadius; dx <= kRadius; ++dx) {
                    const double wv = w[dy + kRadius][dx + kRadius];
                    const double va = a.at(x + dx, y + dy);
                    const double vb = b.at(x + dx, y + dy);
                    mx += wv * va;
                    my += wv * vb;
                    xx += wv * va * va;
                    yy += wv * vb * vb;
                    xy += wv * va * vb;
                }
            // Difference form: each denominator is its numerator plus
            // correction terms that vanish exactly for identical inputs, so
            // self-similarity is exactly 1 per window no matter how the
            // compiler contracts the arithmetic.
            const double pxy = mx * my;
            const double cxy = xy - pxy;
            const double dm = mx - my;
            const double num1 = pxy + pxy + kC1;
            const double den1 = num1 + dm * dm;  // == mx^2 + my^2 + kC1
            const double num2 = cxy + cxy + kC2;
            const double den2 = num2 + ((xx - xy) - mx * dm) + ((yy - xy) + my * dm);
            total += (num1 / den1) * (num2 / den2);
            ++count;
        }
    }
    return total / double(count);
}

namespace detail_fft {

using Cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place; n must be a power of two.
inline void fft_pow2(std::vector<Cplx>& v, bool inverse) {
    const int n = int(v.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(v[size_t(i)], v[size_t(j)]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / len;
        const Cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            Cplx wcur(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const Cplx u = v[size_t(i + k)];
                const Cplx t = v[size_t(i + k + len / 2)] * wcur;
                v[size_t(i + k)] = u + t;
                v[size_t(i + k + len / 2)] = u - t;
                wcur *= wl;
            }
        }
    }
    if (inverse)
        for (Cplx& c : v) c /= double(n);
}

// Naive O(n^2) transform for sizes that are not powers of two.
inline void dft_any(std::vector<Cplx>& v, bool inverse) {
    const int n = int(v.size());
    std::vector<Cplx> out(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        Cplx acc(0.0, 0.0);
        for (int t = 0; t < n; ++t) {
            const double ang = (inverse ? 2.0 : -2.0) * kPi * double(k) * double(t) / double(n);
            acc += v[size_t(t)] * Cplx(std::cos(ang), std::sin(ang));
        }
        out[size_t(k)] = inverse ? acc / double(n) : acc;
    }
    v = std::move(out);
}

inline void fft_1d(std::vector<Cplx>& v, bool inverse) {
    if (v.size() <= 1) return;
    if (is_pow2(int(v.size())))
        fft_pow2(v, inverse);
    else
        dft_any(v, inverse);
}

}  // namespace detail_fft

// 2D transform of a row-major w*h grid, rows first then columns.
inline std::vector<std::complex<double>> fft_2d(const std::vector<std::complex<double>>& grid, int w,
                                                int h, bool inverse = false) {
    require(int64_t(w) * h == int64_t(grid.size()), Error::Kind::dimension, "fft_2d size mismatch");
    std::vector<std::complex<double>> out = grid;
    std::vector<std::complex<double>> line;
    line.resize(size_t(w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) line[size_t(x)] = out[size_t(y) * w + x];
        detail_fft::fft_1d(line, inverse);
        for (int x = 0; x < w; ++x) out[size_t(y) * w + x] = line[size_t(x)];
    }
    line.resize(size_t(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) line[size_t(y)] = out[size_t(y) * w + x];
        detail_fft::fft_1d(line, inverse);
        for (int y = 0; y < h; ++y) out[size_t(y) * w + x] = line[size_t(y)];
    }
    return out;
}

// Absolute difference of magnitude spectra at display range [0,255], zero
// frequency centered, clamped to [1, 1e5], shown as log10/5 in [0,1].
inline ImageBuf fft_diff(const BandBuf& a, const BandBuf& b) {
    require(a.width == b.width && a.height == b.height, Error::Kind::dimension,
            "fft_diff size mismatch");
    const int w = a.width, h = a.height;
    std::vector<std::complex<double>> ga(a.data.size()), gb(b.data.size());
    for (size_t i = 0; i < a.data.size(); ++i) {
        ga[i] = std::complex<double>(255.0 * a.data[i], 0.0);
        gb[i] = std::complex<double>(255.0 * b.data[i], 0.0);
    }
    const auto fa = fft_2d(ga, w, h);
    const auto fb = fft_2d(gb, w, h);

    ImageBuf out(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = std::abs(std::abs(fa[size_t(y) * w + x]) - std::abs(fb[size_t(y) * w + x]));
            const double clamped = std::clamp(d, 1.0, 1e5);
            const int sx = (x + w / 2) % w;
            const int sy = (y + h / 2) % h;
            out.at(sx, sy) = std::log10(clamped) / 5.0;
        }
    }
    return out;
}

// The scoring channel: luminance for color images, the plane itself otherwise.
inline BandBuf eval_plane(const ImageBuf& img) {
    if (img.channels == 1) return get_plane(img, 0);
    return get_plane(rgb_to_ycbcr(img), 0);
}

struct ImageScore {
    std::string name;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double ssim = 0.0;
};

struct EvalReport {
    std::vector<ImageScore> images;
    double mean_psnr_db = 0.0;
    bool any_infinite = false;
    double mean_ssim = 0.0;

    void finalize() {
        double ps = 0.0, ss = 0.0;
        any_infinite = false;
        for (const auto& s : images) {
            ps += s.psnr_db;
            ss += s.ssim;
            any_infinite = any_infinite || s.psnr_infinite;
        }
        mean_psnr_db = images.empty() ? 0.0 : ps / double(images.size());
        mean_ssim = images.empty() ? 0.0 : ss / double(images.size());
    }
};

// Scores one output against its reference on the evaluation channel.
inline ImageScore score_pair(const std::string& name, const ImageBuf& reference, const ImageBuf& result) {
    const BandBuf ra = eval_plane(reference);
    const BandBuf rb = eval_plane(result);
    const PsnrResult p = psnr(ra, rb);
    return {name, p.db, p.is_infinite, ssim(ra, rb)};
}

}  // namespace osr
