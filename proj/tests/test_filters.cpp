#include <catch2/catch_amalgamated.hpp>

#include "osr/filters.hpp"
#include "support/test_util.hpp"

using osr::BandBuf;
using osr::FilterKind;
using osr::FilterSpec;
using osr::ImageBuf;

namespace {

double max_abs_diff(const BandBuf& a, const BandBuf& b) {
    REQUIRE(a.width == b.width);
    REQUIRE(a.height == b.height);
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// ---- independent re-implementations used as oracles ----

// direct 25-tap reduce, no separable passes
BandBuf reduce_oracle(const BandBuf& in) {
    constexpr double t[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    const int rw = (in.width + 1) / 2, rh = (in.height + 1) / 2;
    BandBuf out(rw, rh);
    for (int y = 0; y < rh; ++y)
        for (int x = 0; x < rw; ++x) {
            double acc = 0.0;
            for (int m = -2; m <= 2; ++m)
                for (int n = -2; n <= 2; ++n)
                    acc += t[m + 2] * t[n + 2] * in.at_clamped(2 * x + n, 2 * y + m);
            out.at(x, y) = acc;
        }
    return out;
}

double expand_at_oracle(const BandBuf& in, int x, int y) {
    constexpr double t[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    double acc = 0.0;
    for (int m = -2; m <= 2; ++m) {
        if ((y - m) % 2 != 0) continue;
        const int sy = std::clamp((y - m) / 2, 0, in.height - 1);
        for (int n = -2; n <= 2; ++n) {
            if ((x - n) % 2 != 0) continue;
            const int sx = std::clamp((x - n) / 2, 0, in.width - 1);
            acc += 4.0 * t[m + 2] * t[n + 2] * in.at(sx, sy);
        }
    }
    return acc;
}

BandBuf expand_oracle(const BandBuf& in, int tw, int th) {
    BandBuf out(tw, th);
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) out.at(x, y) = expand_at_oracle(in, x, y);
    return out;
}

double remap_oracle(double v, double g, double alpha, double sigma_r) {
    const double d = v - g;
    if (std::abs(d) > sigma_r) return v;
    const double shaped = sigma_r * std::pow(std::abs(d) / sigma_r, alpha);
    return d < 0.0 ? g - shaped : g + shaped;
}

// textbook evaluation: every coefficient gets a full remapped copy of the
// image and a full pyramid of it — no windowing anywhere
BandBuf llf_naive(const BandBuf& p, double alpha, double sigma_r, int levels) {
    std::vector<BandBuf> G;
    G.push_back(p);
    for (int l = 1; l < levels; ++l) G.push_back(reduce_oracle(G.back()));

    std::vector<BandBuf> out(static_cast<size_t>(levels));
    for (int l = 0; l < levels - 1; ++l) {
        out[size_t(l)] = BandBuf(G[size_t(l)].width, G[size_t(l)].height);
        for (int gy = 0; gy < G[size_t(l)].height; ++gy) {
            for (int gx = 0; gx < G[size_t(l)].width; ++gx) {
                const double g0 = G[size_t(l)].at(gx, gy);
                BandBuf R(p.width, p.height);
                for (int y = 0; y < p.height; ++y)
                    for (int x = 0; x < p.width; ++x)
                        R.at(x, y) = remap_oracle(p.at(x, y), g0, alpha, sigma_r);
                BandBuf lv = R;
                for (int t = 0; t < l; ++t) lv = reduce_oracle(lv);
                const BandBuf top = reduce_oracle(lv);
                out[size_t(l)].at(gx, gy) = lv.at(gx, gy) - expand_at_oracle(top, gx, gy);
            }
        }
    }
    out[size_t(levels - 1)] = G[size_t(levels - 1)];

    BandBuf acc = out[size_t(levels - 1)];
    for (int l = levels - 2; l >= 0; --l) {
        const BandBuf up = expand_oracle(acc, out[size_t(l)].width, out[size_t(l)].height);
        acc = std::move(out[size_t(l)]);
        for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += up.data[i];
    }
    for (double& v : acc.data) v = std::clamp(v, 0.0, 1.0);
    return acc;
}

BandBuf step_plane(int w, int h, double lo, double hi) {
    BandBuf p(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) p.at(x, y) = x < w / 2 ? lo : hi;
    return p;
}

double highfreq_energy(const BandBuf& p) {
    const BandBuf blur = osr::gaussian_blur(p, 2.0);
    double e = 0.0;
    for (size_t i = 0; i < p.data.size(); ++i) {
        const double d = p.data[i] - blur.data[i];
        e += d * d;
    }
    return e;
}

}  // namespace

TEST_CASE("every filter leaves constant images unchanged") {
    ImageBuf flat(32, 24, 1, 0.44);
    const double tol = 1e-12;

    auto check = [&](const ImageBuf& out) {
        REQUIRE(out.width == 32);
        REQUIRE(out.channels == 1);
        for (double v : out.data) REQUIRE(v == Catch::Approx(0.44).margin(tol));
    };
    check(osr::gaussian_filter(flat, 2.0));
    check(osr::unsharp_mask(flat, 2.0, 1.0));
    check(osr::bilateral_filter(flat, 3.0, 0.1));
    check(osr::local_laplacian(flat, 2.0, 0.2, 4));
}

TEST_CASE("unsharp with zero amount is the identity") {
    const ImageBuf img = testutil::noise_image(24, 18, 1, 1);
    const ImageBuf out = osr::unsharp_mask(img, 2.0, 0.0);
    for (size_t i = 0; i < img.data.size(); ++i) REQUIRE(out.data[i] == img.data[i]);
}

TEST_CASE("unsharp overshoots across an edge") {
    const BandBuf p = step_plane(40, 8, 0.3, 0.7);
    const BandBuf out = osr::unsharp_plane(p, 2.0, 1.0);
    // just left of the edge dips below the plateau, just right rises above
    REQUIRE(out.at(17, 4) < 0.3 - 1e-4);
    REQUIRE(out.at(22, 4) > 0.7 + 1e-4);
    // far from the edge nothing changes
    REQUIRE(out.at(1, 4) == Catch::Approx(0.3).margin(1e-9));
    REQUIRE(out.at(38, 4) == Catch::Approx(0.7).margin(1e-9));
}

TEST_CASE("unsharp output is clamped to the unit interval") {
    const BandBuf p = step_plane(30, 6, 0.02, 0.98);
    const BandBuf out = osr::unsharp_plane(p, 2.0, 3.0);
    for (double v : out.data) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    // the clamp actually engaged somewhere near the edge
    bool hit0 = false, hit1 = false;
    for (double v : out.data) {
        if (v == 0.0) hit0 = true;
        if (v == 1.0) hit1 = true;
    }
    REQUIRE(hit0);
    REQUIRE(hit1);
}

TEST_CASE("bilateral matches an independent double loop") {
    const BandBuf p = testutil::noise_plane(20, 15, 2);
    const double sigma_s = 1.5, sigma_r = 0.15;
    const BandBuf out = osr::bilateral_plane(p, sigma_s, sigma_r);

    const int radius = int(std::ceil(3.0 * sigma_s));
    for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) {
            double acc = 0.0, norm = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double v = p.at_clamped(x + dx, y + dy);
                    const double w =
                        std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_s * sigma_s)) *
                        std::exp(-(v - p.at(x, y)) * (v - p.at(x, y)) / (2.0 * sigma_r * sigma_r));
                    acc += w * v;
                    norm += w;
                }
            REQUIRE(out.at(x, y) == Catch::Approx(acc / norm).margin(1e-12));
        }
}

TEST_CASE("bilateral with a huge range sigma degenerates to gaussian blur") {
    const BandBuf p = testutil::noise_plane(24, 24, 3);
    const BandBuf bi = osr::bilateral_plane(p, 2.0, 1e6);
    const BandBuf ga = osr::gaussian_blur(p, 2.0);
    REQUIRE(max_abs_diff(bi, ga) < 1e-9);
}

TEST_CASE("bilateral smooths texture but keeps a strong edge") {
    BandBuf p = step_plane(40, 20, 0.2, 0.8);
    osr::Rng rng(4);
    for (double& v : p.data) v += 0.02 * (rng.uniform01() - 0.5);
    const BandBuf out = osr::bilateral_plane(p, 3.0, 0.1);

    // flat-region roughness drops
    double rough_in = 0.0, rough_out = 0.0;
    for (int y = 1; y < 19; ++y)
        for (int x = 1; x < 15; ++x) {
            rough_in += std::abs(p.at(x, y) - p.at(x - 1, y));
            rough_out += std::abs(out.at(x, y) - out.at(x - 1, y));
        }
    REQUIRE(rough_out < 0.3 * rough_in);
    // the edge stays within a pixel of full contrast
    REQUIRE(out.at(25, 10) - out.at(14, 10) > 0.5);
}

TEST_CASE("range-band remap is continuous and shape-correct") {
    using osr::detail_llf::remap;
    const double g = 0.5, sr = 0.2;
    // outside the band: identity
    REQUIRE(remap(0.9, g, 2.0, sr) == 0.9);
    REQUIRE(remap(0.05, g, 2.0, sr) == 0.05);
    // at the band edge: continuous junction
    REQUIRE(remap(g + sr, g, 2.0, sr) == Catch::Approx(g + sr).margin(1e-12));
    REQUIRE(remap(g - sr, g, 0.5, sr) == Catch::Approx(g - sr).margin(1e-12));
    // alpha > 1 compresses small deviations, alpha < 1 amplifies them
    REQUIRE(remap(g + 0.1, g, 2.0, sr) - g == Catch::Approx(sr * 0.25).margin(1e-12));
    REQUIRE(remap(g + 0.1, g, 0.5, sr) - g > 0.1);
    // odd symmetry
    REQUIRE(remap(g - 0.07, g, 2.0, sr) - g == Catch::Approx(-(remap(g + 0.07, g, 2.0, sr) - g)).margin(1e-14));
    // alpha = 1 is the identity inside the band
    REQUIRE(remap(g + 0.13, g, 1.0, sr) == Catch::Approx(g + 0.13).margin(1e-14));
}

TEST_CASE("local laplacian with alpha 1 reproduces the input") {
    // identity remap makes every windowed coefficient a plain pyramid
    // coefficient; exact reconstruction then returns the image
    const BandBuf p = testutil::noise_plane(48, 40, 5);
    const BandBuf out = osr::local_laplacian_plane(p, 1.0, 0.3, 4);
    REQUIRE(max_abs_diff(p, out) < 1e-10);
}

TEST_CASE("windowed evaluation equals the full-remap reference") {
    struct Cfg {
        int w, h, levels;
        double alpha, sigma_r;
    };
    const Cfg cfgs[] = {
        {32, 32, 3, 2.0, 0.2},   // smoothing regime
        {32, 32, 3, 0.5, 0.1},   // enhancement regime
        {33, 29, 3, 0.7, 0.4},   // odd sizes stress the half-size chain
        {40, 24, 4, 2.0, 0.15},  // deeper pyramid
    };
    for (const auto& c : cfgs) {
        DYNAMIC_SECTION("case " << c.w << "x" << c.h << " levels " << c.levels << " alpha " << c.alpha) {
            const BandBuf p = testutil::noise_plane(c.w, c.h, uint64_t(c.w * 1000 + c.h));
            const BandBuf fast = osr::local_laplacian_plane(p, c.alpha, c.sigma_r, c.levels);
            const BandBuf ref = llf_naive(p, c.alpha, c.sigma_r, c.levels);
            REQUIRE(max_abs_diff(fast, ref) < 1e-10);
        }
    }
}

TEST_CASE("presets move detail energy the way their names say") {
    BandBuf p = step_plane(64, 64, 0.35, 0.65);
    osr::Rng rng(6);
    for (double& v : p.data) v += 0.05 * (rng.uniform01() - 0.5);

    const double base = highfreq_energy(p);
    const FilterSpec smooth = osr::llf_preset_smooth();
    const FilterSpec enhance = osr::llf_preset_enhance();
    const BandBuf s = osr::local_laplacian_plane(p, smooth.alpha, smooth.sigma_r, 5);
    const BandBuf e = osr::local_laplacian_plane(p, enhance.alpha, enhance.sigma_r, 5);
    REQUIRE(highfreq_energy(s) < base);
    REQUIRE(highfreq_energy(e) > base);

    const FilterSpec alt = osr::llf_preset_enhance_alt();
    REQUIRE(alt.alpha == 0.7);
    REQUIRE(alt.sigma_r == 0.4);
    REQUIRE(alt.kind == FilterKind::local_laplacian);
}

TEST_CASE("color filtering edits luma only") {
    const ImageBuf rgb = testutil::noise_image(32, 32, 7, 3);
    const ImageBuf out = osr::gaussian_filter(rgb, 2.0);
    REQUIRE(out.channels == 3);

    const ImageBuf ycc_in = osr::rgb_to_ycbcr(rgb);
    const ImageBuf ycc_out = osr::rgb_to_ycbcr(out);
    double chroma_diff = 0.0, luma_diff = 0.0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            luma_diff = std::max(luma_diff, std::abs(ycc_out.at(x, y, 0) - ycc_in.at(x, y, 0)));
            chroma_diff = std::max(chroma_diff, std::abs(ycc_out.at(x, y, 1) - ycc_in.at(x, y, 1)));
            chroma_diff = std::max(chroma_diff, std::abs(ycc_out.at(x, y, 2) - ycc_in.at(x, y, 2)));
        }
    REQUIRE(luma_diff > 1e-3);     // the filter did something
    REQUIRE(chroma_diff < 1e-9);   // but only to luminance
}

TEST_CASE("apply_filter dispatches and validates") {
    const ImageBuf img = testutil::noise_image(32, 32, 8, 1);

    FilterSpec spec;
    spec.kind = FilterKind::gaussian;
    spec.sigma = 1.5;
    const ImageBuf a = osr::apply_filter(img, spec);
    const ImageBuf b = osr::gaussian_filter(img, 1.5);
    for (size_t i = 0; i < a.data.size(); ++i) REQUIRE(a.data[i] == b.data[i]);

    spec.sigma = -1.0;
    REQUIRE_THROWS_AS(osr::apply_filter(img, spec), osr::Error);

    FilterSpec llf;
    llf.kind = FilterKind::local_laplacian;
    llf.levels = 2;
    REQUIRE_THROWS_WITH(osr::apply_filter(img, llf),
                        Catch::Matchers::ContainsSubstring("at least 3 levels"));
    llf.levels = 6;  // needs min dim >= 64
    REQUIRE_THROWS_WITH(osr::apply_filter(img, llf), Catch::Matchers::ContainsSubstring("too small"));
}

TEST_CASE("filter names round trip") {
    for (const char* name : {"gaussian", "unsharp", "bilateral", "local_laplacian"}) {
        REQUIRE(std::string(osr::to_string(osr::filter_kind_from_string(name))) == name);
    }
    REQUIRE_THROWS_WITH(osr::filter_kind_from_string("median"),
                        Catch::Matchers::ContainsSubstring("unknown filter type"));
}
