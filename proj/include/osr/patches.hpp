#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "osr/error.hpp"
#include "osr/image.hpp"

namespace osr {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Padding { valid, replicate };

// Flattened overlapping patches plus the geometry needed to put them back.
// Patch centers are enumerated row-major; each patch is flattened row-major,
// which is part of the serialized model contract.
struct PatchSet {
    MatRM patches;  // N x d, d = patch_size^2
    int patch_size = 3;
    int stride = 1;
    int grid_rows = 0;
    int grid_cols = 0;
    int source_width = 0;
    int source_height = 0;
    Padding padding = Padding::valid;

    Eigen::Index count() const { return patches.rows(); }
    int dim() const { return patch_size * patch_size; }
};

inline PatchSet extract_patches(const BandBuf& band, int patch_size = 3, int stride = 1,
                                Padding padding = Padding::valid) {
    require(patch_size >= 1 && patch_size % 2 == 1, Error::Kind::argument,
            "extract_patches: patch_size must be odd");
    require(stride >= 1, Error::Kind::argument, "extract_patches: stride must be >= 1");
    const int r = patch_size / 2;

    PatchSet ps;
    ps.patch_size = patch_size;
    ps.stride = stride;
    ps.source_width = band.width;
    ps.source_height = band.height;
    ps.padding = padding;
    if (padding == Padding::valid) {
        require(band.width >= patch_size && band.height >= patch_size, Error::Kind::dimension,
                "extract_patches: band smaller than patch");
        ps.grid_rows = (band.height - patch_size) / stride + 1;
        ps.grid_cols = (band.width - patch_size) / stride + 1;
    } else {
        ps.grid_rows = (band.height + stride - 1) / stride;
        ps.grid_cols = (band.width + stride - 1) / stride;
    }

    const int d = patch_size * patch_size;
    ps.patches.resize(Eigen::Index(ps.grid_rows) * ps.grid_cols, d);
    Eigen::Index n = 0;
    for (int gy = 0; gy < ps.grid_rows; ++gy) {
        for (int gx = 0; gx < ps.grid_cols; ++gx, ++n) {
            // center of patch (gy, gx)
            const int cy = padding == Padding::valid ? gy * stride + r : gy * stride;
            const int cx = padding == Padding::valid ? gx * stride + r : gx * stride;
            int j = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx, ++j)
                    ps.patches(n, j) = padding == Padding::valid ? band.at(cx + dx, cy + dy)
                                                                 : band.at_clamped(cx + dx, cy + dy);
        }
    }
    return ps;
}

// Overlap-average reassembly: each output pixel is the mean of all patch
// cells covering it. Replicate-padded ghost cells are dropped; only
// in-bounds contributions are counted. Accumulation order is fixed
// (patch index, then cell), so results are schedule-independent.
inline BandBuf assemble_patches(const PatchSet& ps) {
    const int d = ps.dim();
    require(ps.patches.cols() == d, Error::Kind::dimension, "assemble_patches: patch dim mismatch");
    require(ps.patches.rows() == Eigen::Index(ps.grid_rows) * ps.grid_cols, Error::Kind::dimension,
            "assemble_patches: patch count does not match grid");
    const int r = ps.patch_size / 2;
    const int w = ps.source_width, h = ps.source_height;
    require(w > 0 && h > 0, Error::Kind::dimension, "assemble_patches: empty geometry");

    BandBuf sum(w, h, 0.0);
    std::vector<double> cover(size_t(w) * h, 0.0);
    Eigen::Index n = 0;
    for (int gy = 0; gy < ps.grid_rows; ++gy) {
        for (int gx = 0; gx < ps.grid_cols; ++gx, ++n) {
            const int cy = ps.padding == Padding::valid ? gy * ps.stride + r : gy * ps.stride;
            const int cx = ps.padding == Padding::valid ? gx * ps.stride + r : gx * ps.stride;
            int j = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx, ++j) {
                    const int x = cx + dx, y = cy + dy;
                    if (x < 0 || x >= w || y < 0 || y >= h) continue;
                    sum.at(x, y) += ps.patches(n, j);
                    cover[size_t(y) * w + x] += 1.0;
                }
            }
        }
    }
    for (size_t i = 0; i < sum.data.size(); ++i) {
        require(cover[i] > 0.0, Error::Kind::dimension, "assemble_patches: uncovered pixel");
        sum.data[i] /= cover[i];
    }
    return sum;
}

}  // namespace osr
