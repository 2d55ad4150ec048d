#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "osr/blend.hpp"
#include "osr/error.hpp"
#include "osr/image.hpp"
#include "osr/patches.hpp"
#include "osr/pyramid.hpp"
#include "osr/rng.hpp"

namespace osr {

struct TrainConfig {
    int K = 256;
    int n_levels = 5;
    int patch_size = 3;
    int hidden = 32;
    double lr = 1e-2;
    double lr_decay = 0.96;  // per epoch
    int epochs = 300;
    int batch = 4096;
    uint64_t seed = 0;
    double leaky_slope = 0.01;
    ChannelMode channel_mode = ChannelMode::luma_only;
    ModelKind kind = ModelKind::blend;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double init_sigma = 0.01;  // noise added to the identity matrices
    double base_sigma = 2.0;   // pyramid blur at full resolution

    void validate() const {
        require(K >= 1, Error::Kind::argument, "K must be at least 1");
        require(lr > 0.0, Error::Kind::argument, "learning rate must be positive");
        require(lr_decay > 0.0 && lr_decay <= 1.0, Error::Kind::argument, "decay must be in (0, 1]");
        require(batch >= 1, Error::Kind::argument, "batch size must be at least 1");
        require(epochs >= 1, Error::Kind::argument, "epoch count must be at least 1");
        require(patch_size >= 1 && patch_size % 2 == 1, Error::Kind::argument, "patch size must be odd");
        require(hidden >= 1, Error::Kind::argument, "hidden width must be at least 1");
        require(n_levels >= 0, Error::Kind::argument, "level count must be non-negative");
    }
    int patch_dim() const { return patch_size * patch_size; }
};

// Aligned patch rows extracted from one band of the before/after pair.
struct PatchPairSet {
    MatRM X;  // N x d, before
    MatRM Y;  // N x d, after
    int band = 0;
};

// Decomposes both images identically and pairs valid-mode stride-1 patches
// positionally, one set per band per trained channel. Result is indexed
// [channel][band]; luma_only yields a single channel entry.
inline std::vector<std::vector<PatchPairSet>> build_dataset(const ImageBuf& before, const ImageBuf& after,
                                                            const TrainConfig& cfg) {
    require(before.width == after.width && before.height == after.height,
            Error::Kind::dimension, "example pair must be pixel-aligned (image sizes differ)");
    require(before.channels == after.channels, Error::Kind::dimension,
            "example pair must be pixel-aligned (channel counts differ)");

    const ImageBuf b3 = before.channels == 3 ? rgb_to_ycbcr(before) : before;
    const ImageBuf a3 = after.channels == 3 ? rgb_to_ycbcr(after) : after;
    const int channels = cfg.channel_mode == ChannelMode::per_channel ? 3 : 1;
    require(channels == 1 || before.channels == 3, Error::Kind::argument,
            "per-channel training needs 3-channel images");

    PyramidOptions opt;
    opt.base_sigma = cfg.base_sigma;

    std::vector<std::vector<PatchPairSet>> out;
    for (int c = 0; c < channels; ++c) {
        const LaplacianPyramid pb = decompose(get_plane(b3, c), cfg.n_levels, opt);
        const LaplacianPyramid pa = decompose(get_plane(a3, c), cfg.n_levels, opt);
        std::vector<PatchPairSet> sets;
        for (int l = 0; l <= cfg.n_levels; ++l) {
            PatchPairSet s;
            s.band = l;
            s.X = extract_patches(pb.bands[size_t(l)], cfg.patch_size, 1, Padding::valid).patches;
            s.Y = extract_patches(pa.bands[size_t(l)], cfg.patch_size, 1, Padding::valid).patches;
            sets.push_back(std::move(s));
        }
        out.push_back(std::move(sets));
    }
    return out;
}

// loss = sum|pred - target| / d, grad = sign(pred - target) / d, sign(0) := 0.
inline std::pair<double, Vec> l1_loss_and_grad(const Vec& pred, const Vec& target) {
    require(pred.size() == target.size(), Error::Kind::dimension, "l1 loss length mismatch");
    const double d = double(pred.size());
    Vec g(pred.size());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - target[i];
        loss += std::abs(r);
        g[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / d;
    }
    return {loss / d, g};
}

struct AdamState {
    Eigen::ArrayXd m, v;
    long t = 0;

    void resize(Eigen::Index n) {
        m = Eigen::ArrayXd::Zero(n);
        v = Eigen::ArrayXd::Zero(n);
        t = 0;
    }
};

// Standard Adam with bias correction; lr_t is the already-decayed rate.
inline void adam_step(double* param, const double* grad, Eigen::Index n, AdamState& st, double lr_t,
                      const TrainConfig& cfg) {
    require(st.m.size() == n && st.v.size() == n, Error::Kind::dimension, "Adam state shape mismatch");
    ++st.t;
    Eigen::Map<const Eigen::ArrayXd> g(grad, n);
    Eigen::Map<Eigen::ArrayXd> p(param, n);
    st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * g;
    st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * g.square();
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(st.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(st.t));
    p -= lr_t * (st.m / bc1) / ((st.v / bc2).sqrt() + cfg.eps);
}

struct BandGradients {
    MatRM A, W1, W2, W3;
    Vec b1, b2, b3;
};

struct RegressorGradients {
    MatRM W1, W2, W3;
    Vec b1, b2, b3;
};

namespace detail_train {

inline double lrelu_deriv(double a, double slope) { return a > 0.0 ? 1.0 : slope; }

// Gradient of the batch-mean l1 loss w.r.t. the predictions: sign(R) / (d*B).
inline MatRM l1_batch_grad(const MatRM& resid, double& loss_out) {
    const double scale = 1.0 / (double(resid.cols()) * double(resid.rows()));
    loss_out = resid.array().abs().sum() * scale;
    return resid.unaryExpr([scale](double r) {
        return (r > 0.0 ? scale : (r < 0.0 ? -scale : 0.0));
    });
}

// Rows of Q are the flattened outer products g_b x_b^T, so that
// Q * A^T recovers g^T (A_k x) per patch and W^T * Q accumulates dL/dA.
inline MatRM outer_rows(const MatRM& G, const MatRM& X) {
    const Eigen::Index B = G.rows(), d = G.cols();
    MatRM Q(B, d * d);
    for (Eigen::Index b = 0; b < B; ++b)
        Eigen::Map<MatRM>(Q.row(b).data(), d, d) = G.row(b).transpose() * X.row(b);
    return Q;
}

inline void mlp_backward(const MatRM& X, const FieldTrace& tr, const MatRM& dlogits, const MatRM& W2,
                         const MatRM& W3, double slope, MatRM& gW1, Vec& gb1, MatRM& gW2, Vec& gb2,
                         MatRM& gW3, Vec& gb3) {
    gW3 = dlogits.transpose() * tr.h2;
    gb3 = dlogits.colwise().sum().transpose();
    MatRM da2 = (dlogits * W3).cwiseProduct(
        tr.a2.unaryExpr([slope](double a) { return lrelu_deriv(a, slope); }));
    gW2 = da2.transpose() * tr.h1;
    gb2 = da2.colwise().sum().transpose();
    MatRM da1 = (da2 * W2).cwiseProduct(
        tr.a1.unaryExpr([slope](double a) { return lrelu_deriv(a, slope); }));
    gW1 = da1.transpose() * X;
    gb1 = da1.colwise().sum().transpose();
}

}  // namespace detail_train

// Analytic gradients of the batch-mean l1 loss through the blended map.
// Returns the loss; the reduction order is fixed so results are reproducible.
inline double backward(const BandMap& bm, const MatRM& X, const MatRM& T, BandGradients& g) {
    require(X.rows() == T.rows() && X.cols() == T.cols(), Error::Kind::dimension,
            "batch shape mismatch");
    require(X.cols() == bm.d, Error::Kind::dimension, "patch length does not match map");
    const Eigen::Index B = X.rows();
    const int d = bm.d;

    FieldTrace tr;
    const MatRM W = bm.field.forward_batch(X, &tr);  // B x K
    const MatRM M = W * bm.A;                        // B x d^2
    MatRM Y(B, d);
    for (Eigen::Index b = 0; b < B; ++b)
        Y.row(b) = (Eigen::Map<const MatRM>(M.row(b).data(), d, d) * X.row(b).transpose()).transpose();

    double loss = 0.0;
    const MatRM G = detail_train::l1_batch_grad(Y - T, loss);
    const MatRM Q = detail_train::outer_rows(G, X);  // B x d^2

    g.A = W.transpose() * Q;  // K x d^2

    // Softmax Jacobian: dlogits = w ⊙ (u − rowsum(w ⊙ u)), u_bk = g_b^T (A_k x_b).
    const MatRM U = Q * bm.A.transpose();  // B x K
    const Vec s = (W.array() * U.array()).rowwise().sum();
    MatRM dlogits = (W.array() * (U.array().colwise() - s.array())).matrix();

    detail_train::mlp_backward(X, tr, dlogits, bm.field.W2, bm.field.W3, bm.field.leaky_slope, g.W1,
                               g.b1, g.W2, g.b2, g.W3, g.b3);
    return loss;
}

inline double backward_regressor(const RegressorMap& rm, const MatRM& X, const MatRM& T,
                                 RegressorGradients& g) {
    require(X.rows() == T.rows() && X.cols() == T.cols(), Error::Kind::dimension,
            "batch shape mismatch");
    require(X.cols() == rm.d, Error::Kind::dimension, "patch length does not match map");
    const double slope = rm.leaky_slope;

    FieldTrace tr;
    const MatRM Y = rm.map_batch(X, &tr);  // trace.logits = a3, trace.weights = lrelu(a3)

    double loss = 0.0;
    const MatRM G = detail_train::l1_batch_grad(Y - T, loss);
    MatRM da3 = G.cwiseProduct(
        tr.logits.unaryExpr([slope](double a) { return detail_train::lrelu_deriv(a, slope); }));
    detail_train::mlp_backward(X, tr, da3, rm.W2, rm.W3, slope, g.W1, g.b1, g.W2, g.b2, g.W3, g.b3);
    return loss;
}

using EpochLog = std::function<void(int epoch, double lr, double loss)>;

struct BandTrainResult {
    BandMap map;
    std::vector<double> epoch_loss;
};

struct RegressorTrainResult {
    RegressorMap map;
    std::vector<double> epoch_loss;
};

namespace detail_train {

// One optimizable tensor: parameter storage, matching gradient storage, Adam state.
struct ParamSlot {
    double* p;
    const double* g;
    Eigen::Index n;
    AdamState st;

    ParamSlot(double* p_, const double* g_, Eigen::Index n_) : p(p_), g(g_), n(n_) { st.resize(n_); }
};

inline void init_field_layer(MatRM& W, Vec& b, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    // fan-in scaled uniform noise for weights and biases alike
    const double bound = 1.0 / std::sqrt(double(cols));
    W.resize(rows, cols);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.uniform(-bound, bound);
    b.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) b[i] = rng.uniform(-bound, bound);
}

// Shared epoch/minibatch schedule: seeded shuffle each epoch, contiguous
// slices of the permutation, exponential lr decay per epoch. step(Xb, Tb, lr)
// must run backward on the slice, apply the optimizer, and return the loss.
template <class StepFn>
std::vector<double> sgd_loop(const PatchPairSet& pairs, const TrainConfig& cfg, Rng& rng,
                             const EpochLog& log, StepFn&& step) {
    const Eigen::Index N = pairs.X.rows();
    const int d = int(pairs.X.cols());
    std::vector<Eigen::Index> order(static_cast<size_t>(N));
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> trace;
    trace.reserve(size_t(cfg.epochs));
    MatRM Xb, Tb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr_t = cfg.lr * std::pow(cfg.lr_decay, double(epoch));
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (Eigen::Index start = 0; start < N; start += cfg.batch) {
            const Eigen::Index rows = std::min<Eigen::Index>(cfg.batch, N - start);
            Xb.resize(rows, d);
            Tb.resize(rows, d);
            for (Eigen::Index r = 0; r < rows; ++r) {
                Xb.row(r) = pairs.X.row(order[size_t(start + r)]);
                Tb.row(r) = pairs.Y.row(order[size_t(start + r)]);
            }
            loss_sum += step(Xb, Tb, lr_t) * double(rows);
        }
        const double mean_loss = loss_sum / double(N);
        trace.push_back(mean_loss);
        if (log) log(epoch, lr_t, mean_loss);
    }
    return trace;
}

}  // namespace detail_train

// Trains one band's blended map from scratch. Matrices start at the identity
// plus small Gaussian noise (identity is a safe starting map; the noise breaks
// the symmetry between the K candidates), the field at fan-in-scaled uniform.
inline BandTrainResult train_band(const PatchPairSet& pairs, const TrainConfig& cfg, uint64_t seed,
                                  const EpochLog& log = {}) {
    cfg.validate();
    require(pairs.X.rows() >= 1, Error::Kind::argument, "empty patch set");
    require(pairs.X.rows() == pairs.Y.rows() && pairs.X.cols() == pairs.Y.cols(),
            Error::Kind::dimension, "patch pair shape mismatch");
    const int d = int(pairs.X.cols());
    require(d == cfg.patch_dim(), Error::Kind::dimension, "patch length does not match config");

    Rng rng(seed);
    BandTrainResult res;
    BandMap& bm = res.map;
    bm.K = cfg.K;
    bm.d = d;
    bm.A.resize(cfg.K, d * d);
    for (int k = 0; k < cfg.K; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                bm.A(k, i * d + j) = (i == j ? 1.0 : 0.0) + cfg.init_sigma * rng.normal();

    WeightField& f = bm.field;
    f.in_dim = d;
    f.hidden = cfg.hidden;
    f.out_dim = cfg.K;
    f.leaky_slope = cfg.leaky_slope;
    detail_train::init_field_layer(f.W1, f.b1, cfg.hidden, d, rng);
    detail_train::init_field_layer(f.W2, f.b2, cfg.hidden, cfg.hidden, rng);
    detail_train::init_field_layer(f.W3, f.b3, cfg.K, cfg.hidden, rng);

    BandGradients grad;
    std::vector<detail_train::ParamSlot> slots;
    const auto add = [&](double* p, const double* g, Eigen::Index n) { slots.emplace_back(p, g, n); };
    grad.A.resize(cfg.K, d * d);
    grad.W1.resize(cfg.hidden, d);
    grad.b1.resize(cfg.hidden);
    grad.W2.resize(cfg.hidden, cfg.hidden);
    grad.b2.resize(cfg.hidden);
    grad.W3.resize(cfg.K, cfg.hidden);
    grad.b3.resize(cfg.K);
    add(bm.A.data(), grad.A.data(), bm.A.size());
    add(f.W1.data(), grad.W1.data(), f.W1.size());
    add(f.b1.data(), grad.b1.data(), f.b1.size());
    add(f.W2.data(), grad.W2.data(), f.W2.size());
    add(f.b2.data(), grad.b2.data(), f.b2.size());
    add(f.W3.data(), grad.W3.data(), f.W3.size());
    add(f.b3.data(), grad.b3.data(), f.b3.size());

    res.epoch_loss = detail_train::sgd_loop(
        pairs, cfg, rng, log, [&](const MatRM& Xb, const MatRM& Tb, double lr_t) {
            const double loss = backward(bm, Xb, Tb, grad);
            for (auto& s : slots) adam_step(s.p, s.g, s.n, s.st, lr_t, cfg);
            return loss;
        });
    return res;
}

// Baseline: same budget and schedule, but a plain per-patch MLP regressor.
inline RegressorTrainResult train_band_regressor(const PatchPairSet& pairs, const TrainConfig& cfg,
                                                 uint64_t seed, const EpochLog& log = {}) {
    cfg.validate();
    require(pairs.X.rows() >= 1, Error::Kind::argument, "empty patch set");
    require(pairs.X.rows() == pairs.Y.rows() && pairs.X.cols() == pairs.Y.cols(),
            Error::Kind::dimension, "patch pair shape mismatch");
    const int d = int(pairs.X.cols());
    require(d == cfg.patch_dim(), Error::Kind::dimension, "patch length does not match config");

    Rng rng(seed);
    RegressorTrainResult res;
    RegressorMap& rm = res.map;
    rm.d = d;
    rm.hidden = cfg.hidden;
    rm.leaky_slope = cfg.leaky_slope;
    detail_train::init_field_layer(rm.W1, rm.b1, cfg.hidden, d, rng);
    detail_train::init_field_layer(rm.W2, rm.b2, cfg.hidden, cfg.hidden, rng);
    detail_train::init_field_layer(rm.W3, rm.b3, d, cfg.hidden, rng);

    RegressorGradients grad;
    grad.W1.resize(cfg.hidden, d);
    grad.b1.resize(cfg.hidden);
    grad.W2.resize(cfg.hidden, cfg.hidden);
    grad.b2.resize(cfg.hidden);
    grad.W3.resize(d, cfg.hidden);
    grad.b3.resize(d);
    std::vector<detail_train::ParamSlot> slots;
    slots.emplace_back(rm.W1.data(), grad.W1.data(), rm.W1.size());
    slots.emplace_back(rm.b1.data(), grad.b1.data(), rm.b1.size());
    slots.emplace_back(rm.W2.data(), grad.W2.data(), rm.W2.size());
    slots.emplace_back(rm.b2.data(), grad.b2.data(), rm.b2.size());
    slots.emplace_back(rm.W3.data(), grad.W3.data(), rm.W3.size());
    slots.emplace_back(rm.b3.data(), grad.b3.data(), rm.b3.size());

    res.epoch_loss = detail_train::sgd_loop(
        pairs, cfg, rng, log, [&](const MatRM& Xb, const MatRM& Tb, double lr_t) {
            const double loss = backward_regressor(rm, Xb, Tb, grad);
            for (auto& s : slots) adam_step(s.p, s.g, s.n, s.st, lr_t, cfg);
            return loss;
        });
    return res;
}

// log(channel, band, epoch, lr, loss) fires once per band per epoch.
using TrainLog = std::function<void(int channel, int band, int epoch, double lr, double loss)>;

// Learns the full model from one aligned before/after pair: independent maps
// per band (and per channel when requested), residual left untouched.
inline RetouchModel train(const ImageBuf& before, const ImageBuf& after, const TrainConfig& cfg,
                          const TrainLog& log = {}) {
    cfg.validate();
    const auto dataset = build_dataset(before, after, cfg);

    RetouchModel model;
    model.kind = cfg.kind;
    model.channel_mode = cfg.channel_mode;
    model.n_levels = cfg.n_levels;
    model.patch_size = cfg.patch_size;
    model.K = cfg.K;
    model.hidden = cfg.hidden;
    model.leaky_slope = cfg.leaky_slope;
    model.seed = cfg.seed;
    model.band_scales = default_band_scales(cfg.n_levels);

    for (int c = 0; c < int(dataset.size()); ++c) {
        std::vector<BandMap> bmaps;
        std::vector<RegressorMap> rmaps;
        for (int l = 0; l <= cfg.n_levels; ++l) {
            const uint64_t seed = Rng::derive(cfg.seed, uint64_t(c), uint64_t(l));
            EpochLog band_log;
            if (log)
                band_log = [&log, c, l](int epoch, double lr, double loss) { log(c, l, epoch, lr, loss); };
            if (cfg.kind == ModelKind::blend)
                bmaps.push_back(train_band(dataset[size_t(c)][size_t(l)], cfg, seed, band_log).map);
            else
                rmaps.push_back(
                    train_band_regressor(dataset[size_t(c)][size_t(l)], cfg, seed, band_log).map);
        }
        if (cfg.kind == ModelKind::blend)
            model.blend_maps.push_back(std::move(bmaps));
        else
            model.regressor_maps.push_back(std::move(rmaps));
    }
    return model;
}

namespace detail_train {

// Branch signature of one forward pass: signs of every kink-bearing value —
// Leaky ReLU pre-activations and prediction residuals. Central differences
// are only trusted when the signature is identical at p−h, p, and p+h;
// otherwise the segment crossed a kink and the parameter is skipped.
inline void push_signs(std::vector<int8_t>& sig, const MatRM& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        sig.push_back(v > 0.0 ? 1 : (v < 0.0 ? -1 : 0));
    }
}

inline double blend_loss(const BandMap& bm, const MatRM& X, const MatRM& T,
                         std::vector<int8_t>* sig) {
    FieldTrace tr;
    const MatRM W = bm.field.forward_batch(X, &tr);
    const MatRM M = W * bm.A;
    const int d = bm.d;
    MatRM Y(X.rows(), d);
    for (Eigen::Index b = 0; b < X.rows(); ++b)
        Y.row(b) = (Eigen::Map<const MatRM>(M.row(b).data(), d, d) * X.row(b).transpose()).transpose();
    const MatRM resid = Y - T;
    if (sig) {
        push_signs(*sig, tr.a1);
        push_signs(*sig, tr.a2);
        push_signs(*sig, resid);  // softmax logits are smooth, no kink there
    }
    return resid.array().abs().sum() / (double(d) * double(X.rows()));
}

inline double regressor_loss(const RegressorMap& rm, const MatRM& X, const MatRM& T,
                             std::vector<int8_t>* sig) {
    FieldTrace tr;
    const MatRM Y = rm.map_batch(X, &tr);
    const MatRM resid = Y - T;
    if (sig) {
        push_signs(*sig, tr.a1);
        push_signs(*sig, tr.a2);
        push_signs(*sig, tr.logits);  // the final layer is Leaky ReLU too
        push_signs(*sig, resid);
    }
    return resid.array().abs().sum() / (double(rm.d) * double(X.rows()));
}

template <class Model, class LossFn>
double grad_check_impl(Model& model, const MatRM& X, const MatRM& T, double h,
                       const std::vector<std::pair<double*, const double*>>& tensors,
                       const std::vector<Eigen::Index>& sizes, LossFn&& loss_fn) {
    double worst = 0.0;
    for (size_t t = 0; t < tensors.size(); ++t) {
        double* p = tensors[t].first;
        const double* g = tensors[t].second;
        for (Eigen::Index i = 0; i < sizes[t]; ++i) {
            const double saved = p[i];

            std::vector<int8_t> sig_hi, sig_lo, sig_mid;
            p[i] = saved + h;
            const double hi = loss_fn(model, X, T, &sig_hi);
            p[i] = saved - h;
            const double lo = loss_fn(model, X, T, &sig_lo);
            p[i] = saved;
            loss_fn(model, X, T, &sig_mid);

            if (sig_hi != sig_lo || sig_hi != sig_mid) continue;  // kink inside [p−h, p+h]

            const double numeric = (hi - lo) / (2.0 * h);
            const double analytic = g[i];
            const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
            worst = std::max(worst, std::abs(numeric - analytic) / denom);
        }
    }
    return worst;
}

}  // namespace detail_train

// Central finite differences over every parameter against the analytic
// gradients. Returns the worst relative error; parameters whose perturbation
// interval straddles a kink are excluded. Meant for small instances.
inline double grad_check(const BandMap& bm, const MatRM& X, const MatRM& T, double h = 1e-6) {
    BandGradients g;
    backward(bm, X, T, g);
    BandMap probe = bm;
    std::vector<std::pair<double*, const double*>> tensors = {
        {probe.A.data(), g.A.data()},           {probe.field.W1.data(), g.W1.data()},
        {probe.field.b1.data(), g.b1.data()},   {probe.field.W2.data(), g.W2.data()},
        {probe.field.b2.data(), g.b2.data()},   {probe.field.W3.data(), g.W3.data()},
        {probe.field.b3.data(), g.b3.data()},
    };
    std::vector<Eigen::Index> sizes = {probe.A.size(),        probe.field.W1.size(),
                                       probe.field.b1.size(), probe.field.W2.size(),
                                       probe.field.b2.size(), probe.field.W3.size(),
                                       probe.field.b3.size()};
    return detail_train::grad_check_impl(
        probe, X, T, h, tensors, sizes,
        [](const BandMap& m, const MatRM& x, const MatRM& t, std::vector<int8_t>* sig) {
            return detail_train::blend_loss(m, x, t, sig);
        });
}

inline double grad_check_regressor(const RegressorMap& rm, const MatRM& X, const MatRM& T,
                                   double h = 1e-6) {
    RegressorGradients g;
    backward_regressor(rm, X, T, g);
    RegressorMap probe = rm;
    std::vector<std::pair<double*, const double*>> tensors = {
        {probe.W1.data(), g.W1.data()}, {probe.b1.data(), g.b1.data()},
        {probe.W2.data(), g.W2.data()}, {probe.b2.data(), g.b2.data()},
        {probe.W3.data(), g.W3.data()}, {probe.b3.data(), g.b3.data()},
    };
    std::vector<Eigen::Index> sizes = {probe.W1.size(), probe.b1.size(), probe.W2.size(),
                                       probe.b2.size(), probe.W3.size(), probe.b3.size()};
    return detail_train::grad_check_impl(
        probe, X, T, h, tensors, sizes,
        [](const RegressorMap& m, const MatRM& x, const MatRM& t, std::vector<int8_t>* sig) {
            return detail_train::regressor_loss(m, x, t, sig);
        });
}

}  // namespace osr
