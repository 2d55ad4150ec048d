#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "osr/error.hpp"
#include "osr/image.hpp"
#include "osr/patches.hpp"
#include "osr/pyramid.hpp"

namespace osr {

using Vec = Eigen::VectorXd;

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }

// Intermediate activations kept for backprop.
struct FieldTrace {
    MatRM a1, h1, a2, h2, logits, weights;
};

// Three fully-connected layers with Leaky ReLU after the first two and a
// Softmax head, mapping a patch vector to K blending weights on the
// probability simplex.
struct WeightField {
    int in_dim = 9;
    int hidden = 32;
    int out_dim = 1;  // K
    double leaky_slope = 0.01;
    MatRM W1, W2, W3;  // H x d, H x H, K x H
    Vec b1, b2, b3;

    void resize() {
        W1.resize(hidden, in_dim);
        W2.resize(hidden, hidden);
        W3.resize(out_dim, hidden);
        b1.resize(hidden);
        b2.resize(hidden);
        b3.resize(out_dim);
    }

    // Rows of X are patches; returns B x K softmax weights. Softmax uses
    // max-subtraction for stability.
    MatRM forward_batch(const MatRM& X, FieldTrace* trace = nullptr) const {
        require(X.cols() == in_dim, Error::Kind::dimension, "weight field: input dimension mismatch");
        const double s = leaky_slope;
        auto lrelu = [s](double v) { return v > 0.0 ? v : s * v; };

        MatRM a1 = (X * W1.transpose()).rowwise() + b1.transpose();
        MatRM h1 = a1.unaryExpr(lrelu);
        MatRM a2 = (h1 * W2.transpose()).rowwise() + b2.transpose();
        MatRM h2 = a2.unaryExpr(lrelu);
        MatRM logits = (h2 * W3.transpose()).rowwise() + b3.transpose();

        MatRM w = logits;
        const Vec rowmax = w.rowwise().maxCoeff();
        w.colwise() -= rowmax;
        w = w.array().exp().matrix();
        const Vec rowsum = w.rowwise().sum();
        w.array().colwise() /= rowsum.array();

        if (trace) {
            trace->a1 = std::move(a1);
            trace->h1 = std::move(h1);
            trace->a2 = std::move(a2);
            trace->h2 = std::move(h2);
            trace->logits = std::move(logits);
            trace->weights = w;
        }
        return w;
    }
};

// Returns the length-K simplex vector f(x).
inline Vec field_weights(const WeightField& field, const Vec& x) {
    require(x.size() == field.in_dim, Error::Kind::dimension, "field_weights: dimension mismatch");
    MatRM X(1, x.size());
    X.row(0) = x.transpose();
    return field.forward_batch(X).row(0).transpose();
}

// The per-band patch map y(x) = sum_k f_k(x) * A_k x. Matrices are stored
// flattened: row k of A is A_k in row-major order, so serialization and
// the blended-matrix GEMM share one layout.
struct BandMap {
    int K = 1;
    int d = 9;
    MatRM A;  // K x (d*d)
    WeightField field;

    static constexpr Eigen::Index kChunk = 4096;

    // Y row b = (sum_k w_bk A_k) x_b. No clamping: bands are signed.
    MatRM map_batch(const MatRM& X) const {
        require(X.cols() == d, Error::Kind::dimension, "map_patch: patch dimension mismatch");
        require(field.in_dim == d && field.out_dim == K, Error::Kind::dimension,
                "map_patch: field dimensions inconsistent");
        MatRM Y(X.rows(), d);
        for (Eigen::Index start = 0; start < X.rows(); start += kChunk) {
            const Eigen::Index n = std::min(kChunk, X.rows() - start);
            const auto Xc = X.middleRows(start, n);
            const MatRM W = field.forward_batch(Xc);
            const MatRM M = W * A;  // n x d^2, blended matrix per patch
            for (Eigen::Index r = 0; r < n; ++r) {
                Eigen::Map<const MatRM> Mb(M.row(r).data(), d, d);
                Y.row(start + r) = (Mb * Xc.row(r).transpose()).transpose();
            }
        }
        return Y;
    }
};

inline Vec map_patch(const BandMap& bm, const Vec& x) {
    require(x.size() == bm.d, Error::Kind::dimension, "map_patch: dimension mismatch");
    MatRM X(1, x.size());
    X.row(0) = x.transpose();
    return bm.map_batch(X).row(0).transpose();
}

// Ablation baseline: plain 3-layer MLP regressor, Leaky ReLU after every
// layer including the last.
struct RegressorMap {
    int d = 9;
    int hidden = 32;
    double leaky_slope = 0.01;
    MatRM W1, W2, W3;  // H x d, H x H, d x H
    Vec b1, b2, b3;

    void resize() {
        W1.resize(hidden, d);
        W2.resize(hidden, hidden);
        W3.resize(d, hidden);
        b1.resize(hidden);
        b2.resize(hidden);
        b3.resize(d);
    }

    MatRM map_batch(const MatRM& X, FieldTrace* trace = nullptr) const {
        require(X.cols() == d, Error::Kind::dimension, "map_patch_regressor: dimension mismatch");
        const double s = leaky_slope;
        auto lrelu = [s](double v) { return v > 0.0 ? v : s * v; };
        MatRM a1 = (X * W1.transpose()).rowwise() + b1.transpose();
        MatRM h1 = a1.unaryExpr(lrelu);
        MatRM a2 = (h1 * W2.transpose()).rowwise() + b2.transpose();
        MatRM h2 = a2.unaryExpr(lrelu);
        MatRM a3 = (h2 * W3.transpose()).rowwise() + b3.transpose();
        MatRM out = a3.unaryExpr(lrelu);
        if (trace) {
            trace->a1 = std::move(a1);
            trace->h1 = std::move(h1);
            trace->a2 = std::move(a2);
            trace->h2 = std::move(h2);
            trace->logits = std::move(a3);
            trace->weights = out;
        }
        return out;
    }
};

inline Vec map_patch_regressor(const RegressorMap& rm, const Vec& x) {
    require(x.size() == rm.d, Error::Kind::dimension, "map_patch_regressor: dimension mismatch");
    MatRM X(1, x.size());
    X.row(0) = x.transpose();
    return rm.map_batch(X).row(0).transpose();
}

enum class ChannelMode : uint8_t { luma_only = 0, per_channel = 1 };
enum class ModelKind : uint8_t { blend = 0, regressor = 1 };

// A trained map: one patch map per band per trained channel, plus the
// pyramid configuration it was trained with. The low-pass residual is
// always carried through unmodified.
struct RetouchModel {
    ModelKind kind = ModelKind::blend;
    ChannelMode channel_mode = ChannelMode::luma_only;
    int n_levels = 5;
    int patch_size = 3;
    int K = 256;
    int hidden = 32;
    double leaky_slope = 0.01;
    uint64_t seed = 0;
    std::vector<int> band_scales;
    // Indexed [channel][band]; exactly one of the two is populated.
    std::vector<std::vector<BandMap>> blend_maps;
    std::vector<std::vector<RegressorMap>> regressor_maps;

    int trained_channels() const {
        return kind == ModelKind::blend ? int(blend_maps.size()) : int(regressor_maps.size());
    }

    int patch_dim() const { return patch_size * patch_size; }

    // Trainable parameter count (weights + biases) across all channels.
    long long parameter_count() const {
        const int d = patch_dim(), H = hidden;
        long long per_band = 0;
        if (kind == ModelKind::blend)
            per_band = 1LL * K * d * d + (1LL * H * d + H) + (1LL * H * H + H) + (1LL * K * H + K);
        else
            per_band = (1LL * H * d + H) + (1LL * H * H + H) + (1LL * d * H + d);
        return per_band * (n_levels + 1) * trained_channels();
    }
};

namespace detail_blend {

inline MatRM map_band_patches(const RetouchModel& model, int channel, int band, const MatRM& X) {
    if (model.kind == ModelKind::blend) return model.blend_maps[size_t(channel)][size_t(band)].map_batch(X);
    return model.regressor_maps[size_t(channel)][size_t(band)].map_batch(X);
}

// decompose -> map every replicate-mode patch -> overlap-average -> sum
// with the untouched residual.
inline BandBuf apply_to_plane(const RetouchModel& model, int channel, const BandBuf& plane) {
    PyramidOptions opt;
    opt.scales = model.band_scales;
    LaplacianPyramid pyr = decompose(plane, model.n_levels, opt);
    for (int l = 0; l <= model.n_levels; ++l) {
        PatchSet ps = extract_patches(pyr.bands[size_t(l)], model.patch_size, 1, Padding::replicate);
        ps.patches = map_band_patches(model, channel, l, ps.patches);
        pyr.bands[size_t(l)] = assemble_patches(ps);
    }
    return reconstruct(pyr);
}

}  // namespace detail_blend

// Applies the model in Y'CbCr space; input and output are Y'CbCr images.
// Untrained channels are copied bitwise.
inline ImageBuf apply_model_ycbcr(const RetouchModel& model, const ImageBuf& ycc) {
    require(ycc.channels == 3, Error::Kind::dimension, "apply_model_ycbcr: expected 3 channels");
    ImageBuf out = ycc;
    const int trained = model.channel_mode == ChannelMode::per_channel ? 3 : 1;
    require(model.trained_channels() == trained, Error::Kind::model,
            "apply_model_ycbcr: model channel maps inconsistent with its mode");
    for (int c = 0; c < trained; ++c)
        set_plane(out, c, detail_blend::apply_to_plane(model, c, get_plane(ycc, c)));
    out.clamp01();
    return out;
}

// Full-image application of the learned band maps. 3-channel inputs are
// converted to Y'CbCr, mapped, converted back, and clamped to [0,1].
inline ImageBuf apply_model(const RetouchModel& model, const ImageBuf& img) {
    if (img.channels == 1) {
        require(model.channel_mode == ChannelMode::luma_only, Error::Kind::dimension,
                "apply_model: per-channel model requires a color input");
        ImageBuf out = plane_to_image(detail_blend::apply_to_plane(model, 0, get_plane(img, 0)));
        return out;
    }
    const ImageBuf ycc = rgb_to_ycbcr(img);
    return ycbcr_to_rgb(apply_model_ycbcr(model, ycc));
}

}  // namespace osr
