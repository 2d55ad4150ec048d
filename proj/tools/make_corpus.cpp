// Generates the benchmark corpus: deterministic procedural 256x256 color
// images (fractal value noise + smooth gradients + soft-edged shapes of mixed
// contrast). One training image plus seven evaluation images, written as
// binary PPM. Rerunning always reproduces the same bytes.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "osr/image.hpp"
#include "osr/io.hpp"
#include "osr/rng.hpp"

namespace {

constexpr int kSize = 256;
constexpr uint64_t kBaseSeed = 0x05EEDC0DEull;

double smoothstep5(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }

// Value noise: random lattice, quintic interpolation, several octaves.
osr::BandBuf fractal_noise(uint64_t seed, int octaves, int base_freq) {
    osr::BandBuf out(kSize, kSize, 0.0);
    double amp = 1.0, total_amp = 0.0;
    int freq = base_freq;
    for (int o = 0; o < octaves; ++o) {
        osr::Rng rng(osr::mix64(seed + uint64_t(o) * 0x9E3779B97F4A7C15ull));
        const int n = freq + 1;
        std::vector<double> lattice(size_t(n) * n);
        for (double& v : lattice) v = rng.uniform01();

        for (int y = 0; y < kSize; ++y) {
            const double fy = double(y) / kSize * freq;
            const int iy = int(fy);
            const double ty = smoothstep5(fy - iy);
            for (int x = 0; x < kSize; ++x) {
                const double fx = double(x) / kSize * freq;
                const int ix = int(fx);
                const double tx = smoothstep5(fx - ix);
                const double v00 = lattice[size_t(iy) * n + ix];
                const double v10 = lattice[size_t(iy) * n + ix + 1];
                const double v01 = lattice[size_t(iy + 1) * n + ix];
                const double v11 = lattice[size_t(iy + 1) * n + ix + 1];
                const double v = (v00 * (1 - tx) + v10 * tx) * (1 - ty) +
                                 (v01 * (1 - tx) + v11 * tx) * ty;
                out.at(x, y) += amp * (v - 0.5);
            }
        }
        total_amp += amp;
        amp *= 0.5;
        freq *= 2;
    }
    for (double& v : out.data) v = 0.5 + v / total_amp;
    return out;
}

// Soft-edged rotated ellipses; edge widths span sharp to blurry so the
// benchmark exercises edge-aware filtering, not just smoothing.
void add_shapes(osr::BandBuf& y, uint64_t seed, int count) {
    osr::Rng rng(seed);
    for (int s = 0; s < count; ++s) {
        const double cx = rng.uniform(20.0, kSize - 20.0);
        const double cy = rng.uniform(20.0, kSize - 20.0);
        const double rx = rng.uniform(14.0, 70.0);
        const double ry = rng.uniform(14.0, 70.0);
        const double rot = rng.uniform(0.0, 3.14159265358979);
        const double contrast = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.08, 0.30);
        const double edge = rng.uniform01() < 0.5 ? rng.uniform(0.8, 2.0) : rng.uniform(3.0, 10.0);
        const double cr = std::cos(rot), sr = std::sin(rot);
        const double rmin = std::min(rx, ry);

        for (int py = 0; py < kSize; ++py) {
            for (int px = 0; px < kSize; ++px) {
                const double dx = px - cx, dy = py - cy;
                const double ux = (dx * cr + dy * sr) / rx;
                const double uy = (-dx * sr + dy * cr) / ry;
                const double d = std::sqrt(ux * ux + uy * uy);
                const double t = std::clamp((1.0 - d) * rmin / edge + 0.5, 0.0, 1.0);
                if (t > 0.0) y.at(px, py) += contrast * smoothstep5(t);
            }
        }
    }
}

osr::ImageBuf synth_image(uint64_t seed) {
    osr::Rng rng(seed);

    // smooth luminance gradient with a random direction
    const double ang = rng.uniform(0.0, 6.28318530717958);
    const double gx = std::cos(ang), gy = std::sin(ang);
    const double gamp = rng.uniform(0.10, 0.22);

    osr::BandBuf noise = fractal_noise(osr::Rng::derive(seed, 1), 6, 4);
    osr::BandBuf y(kSize, kSize);
    for (int py = 0; py < kSize; ++py)
        for (int px = 0; px < kSize; ++px) {
            const double g = ((px - kSize / 2) * gx + (py - kSize / 2) * gy) / kSize;
            y.at(px, py) = 0.5 + gamp * 2.0 * g + 0.34 * (noise.at(px, py) - 0.5) * 2.0;
        }
    add_shapes(y, osr::Rng::derive(seed, 2), 7);

    // keep luminance off the rails so detail survives quantization
    for (double& v : y.data) v = std::clamp(0.5 + 0.84 * (v - 0.5), 0.02, 0.98);

    // mild low-frequency chroma
    osr::BandBuf cb = fractal_noise(osr::Rng::derive(seed, 3), 2, 3);
    osr::BandBuf cr = fractal_noise(osr::Rng::derive(seed, 4), 2, 3);

    osr::ImageBuf ycc(kSize, kSize, 3);
    for (int py = 0; py < kSize; ++py)
        for (int px = 0; px < kSize; ++px) {
            ycc.at(px, py, 0) = y.at(px, py);
            ycc.at(px, py, 1) = 0.5 + 0.24 * (cb.at(px, py) - 0.5);
            ycc.at(px, py, 2) = 0.5 + 0.24 * (cr.at(px, py) - 0.5);
        }
    return osr::ycbcr_to_rgb(ycc);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out_dir = argc > 1 ? argv[1] : "data/corpus";
    std::filesystem::create_directories(out_dir);

    const auto write = [&](const std::string& name, uint64_t seed) {
        const std::string path = out_dir + "/" + name;
        osr::save_image(synth_image(seed), path);
        std::printf("%s\n", path.c_str());
    };

    write("train.ppm", osr::mix64(kBaseSeed));
    for (int i = 1; i <= 7; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "eval_%02d.ppm", i);
        write(name, osr::mix64(kBaseSeed + uint64_t(i)));
    }
    return 0;
}
