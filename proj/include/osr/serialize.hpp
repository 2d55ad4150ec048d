#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "osr/blend.hpp"
#include "osr/error.hpp"
#include "osr/io.hpp"

namespace osr {

// Model file layout (all integers and doubles little-endian):
//   magic "OSR1"
//   u32 version (1), u32 n_L, u32 K, u32 patch_size, u32 hidden,
//   u8 channel_mode, u8 round(leaky_slope*100), u64 seed
//   then per channel, per band l = 0..n_L:
//     K d*d matrices row-major f64, then W1, b1, W2, b2, W3, b3 row-major f64
// K == 0 marks the MLP-regressor baseline: no matrices, and the last layer
// is d x hidden instead of K x hidden. Readers reject unknown versions.

namespace detail_ser {

inline constexpr char kMagic[4] = {'O', 'S', 'R', '1'};
inline constexpr uint32_t kVersion = 1;

struct Writer {
    std::vector<uint8_t> bytes;

    void u8(uint8_t v) { bytes.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(uint8_t(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void mat(const MatRM& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
    }
    void vec(const Vec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
    }
};

struct Reader {
    const std::vector<uint8_t>& bytes;
    size_t pos = 0;

    void need(size_t n) {
        if (bytes.size() - pos < n) fail(Error::Kind::model, "truncated model file");
    }
    uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(bytes[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(bytes[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void mat(MatRM& m, Eigen::Index rows, Eigen::Index cols) {
        m.resize(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    }
    void vec(Vec& v, Eigen::Index n) {
        v.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
    }
};

}  // namespace detail_ser

inline std::vector<uint8_t> model_to_bytes(const RetouchModel& m) {
    detail_ser::Writer w;
    w.bytes.insert(w.bytes.end(), detail_ser::kMagic, detail_ser::kMagic + 4);
    w.u32(detail_ser::kVersion);
    w.u32(uint32_t(m.n_levels));
    w.u32(m.kind == ModelKind::blend ? uint32_t(m.K) : 0u);
    w.u32(uint32_t(m.patch_size));
    w.u32(uint32_t(m.hidden));
    w.u8(uint8_t(m.channel_mode));
    w.u8(uint8_t(std::lround(m.leaky_slope * 100.0)));
    w.u64(m.seed);
    const int channels = m.trained_channels();
    for (int c = 0; c < channels; ++c) {
        for (int l = 0; l <= m.n_levels; ++l) {
            if (m.kind == ModelKind::blend) {
                const BandMap& bm = m.blend_maps[size_t(c)][size_t(l)];
                w.mat(bm.A);
                w.mat(bm.field.W1);
                w.vec(bm.field.b1);
                w.mat(bm.field.W2);
                w.vec(bm.field.b2);
                w.mat(bm.field.W3);
                w.vec(bm.field.b3);
            } else {
                const RegressorMap& rm = m.regressor_maps[size_t(c)][size_t(l)];
                w.mat(rm.W1);
                w.vec(rm.b1);
                w.mat(rm.W2);
                w.vec(rm.b2);
                w.mat(rm.W3);
                w.vec(rm.b3);
            }
        }
    }
    return w.bytes;
}

inline RetouchModel model_from_bytes(const std::vector<uint8_t>& bytes) {
    detail_ser::Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), detail_ser::kMagic, 4) != 0) fail(Error::Kind::model, "not a model file");
    r.pos = 4;
    const uint32_t version = r.u32();
    if (version != detail_ser::kVersion)
        fail(Error::Kind::model, "unknown model file version " + std::to_string(version));

    RetouchModel m;
    m.n_levels = int(r.u32());
    const uint32_t k = r.u32();
    m.kind = k == 0 ? ModelKind::regressor : ModelKind::blend;
    m.K = k == 0 ? 1 : int(k);
    m.patch_size = int(r.u32());
    m.hidden = int(r.u32());
    const uint8_t mode = r.u8();
    if (mode > 1) fail(Error::Kind::model, "bad channel mode in model file");
    m.channel_mode = ChannelMode(mode);
    m.leaky_slope = r.u8() / 100.0;
    m.seed = r.u64();
    if (m.n_levels < 0 || m.n_levels > 16 || m.patch_size < 1 || m.patch_size > 33 ||
        m.patch_size % 2 == 0 || m.hidden < 1 || m.hidden > 65536)
        fail(Error::Kind::model, "implausible model header");
    m.band_scales = default_band_scales(m.n_levels);

    const int channels = m.channel_mode == ChannelMode::per_channel ? 3 : 1;
    const int d = m.patch_dim();
    for (int c = 0; c < channels; ++c) {
        if (m.kind == ModelKind::blend) {
            std::vector<BandMap> maps;
            for (int l = 0; l <= m.n_levels; ++l) {
                BandMap bm;
                bm.K = m.K;
                bm.d = d;
                bm.field.in_dim = d;
                bm.field.hidden = m.hidden;
                bm.field.out_dim = m.K;
                bm.field.leaky_slope = m.leaky_slope;
                r.mat(bm.A, m.K, d * d);
                r.mat(bm.field.W1, m.hidden, d);
                r.vec(bm.field.b1, m.hidden);
                r.mat(bm.field.W2, m.hidden, m.hidden);
                r.vec(bm.field.b2, m.hidden);
                r.mat(bm.field.W3, m.K, m.hidden);
                r.vec(bm.field.b3, m.K);
                maps.push_back(std::move(bm));
            }
            m.blend_maps.push_back(std::move(maps));
        } else {
            std::vector<RegressorMap> maps;
            for (int l = 0; l <= m.n_levels; ++l) {
                RegressorMap rm;
                rm.d = d;
                rm.hidden = m.hidden;
                rm.leaky_slope = m.leaky_slope;
                r.mat(rm.W1, m.hidden, d);
                r.vec(rm.b1, m.hidden);
                r.mat(rm.W2, m.hidden, m.hidden);
                r.vec(rm.b2, m.hidden);
                r.mat(rm.W3, d, m.hidden);
                r.vec(rm.b3, d);
                maps.push_back(std::move(rm));
            }
            m.regressor_maps.push_back(std::move(maps));
        }
    }
    if (r.pos != bytes.size()) fail(Error::Kind::model, "trailing bytes in model file");
    return m;
}

inline void save_model(const RetouchModel& m, const std::string& path) {
    detail_io::write_file(path, model_to_bytes(m));
}

inline RetouchModel load_model(const std::string& path) {
    return model_from_bytes(detail_io::read_file(path));
}

}  // namespace osr
