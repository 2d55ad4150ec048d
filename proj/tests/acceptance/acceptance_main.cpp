// Acceptance gate: runs every promised end-to-end check at its pinned
// threshold and prints exactly one PASS/FAIL line per criterion. Exit code
// is zero only when all criteria hold. Expect several minutes of training.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "osr/osr.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kBin = OSR_CLI_BIN;
const fs::path kCorpus = fs::path(OSR_DATA_DIR) / "corpus";
constexpr int kEvalImages = 7;

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "osr_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

struct CliRun {
    int exit_code = -1;
    std::string output;
    double seconds = 0.0;
};

CliRun run_cli(const std::string& args, const std::string& tag) {
    const fs::path log = work_dir() / (tag + ".log");
    const std::string cmd = kBin + " " + args + " > " + log.string() + " 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    const auto t1 = std::chrono::steady_clock::now();
    CliRun r;
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    if (status != -1 && WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

struct Gate {
    int passed = 0;
    int total = 0;

    void report(int idx, bool ok, const char* fmt, ...) {
        ++total;
        if (ok) ++passed;
        char detail[512];
        va_list ap;
        va_start(ap, fmt);
        std::vsnprintf(detail, sizeof detail, fmt, ap);
        va_end(ap);
        std::printf("%s %2d. %s\n", ok ? "PASS" : "FAIL", idx, detail);
        std::fflush(stdout);
    }

    void fail(int idx, const std::string& why) { report(idx, false, "%s", why.c_str()); }
};

struct CorpusScore {
    double psnr = 0.0;
    double ssim = 0.0;
};

// mean PSNR/SSIM of the model's output against the oracle filter over the
// held-out corpus images
CorpusScore score_corpus(const osr::RetouchModel& model, const osr::FilterSpec& oracle) {
    osr::EvalReport rep;
    for (int i = 1; i <= kEvalImages; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "eval_%02d.ppm", i);
        const osr::ImageBuf img = osr::load_image((kCorpus / name).string());
        rep.images.push_back(
            osr::score_pair(name, osr::apply_filter(img, oracle), osr::apply_model(model, img)));
    }
    rep.finalize();
    return {rep.mean_psnr_db, rep.mean_ssim};
}

osr::FilterSpec oracle_spec(osr::FilterKind kind) {
    osr::FilterSpec s;  // pinned oracle parameters are the flag defaults
    s.kind = kind;
    return s;
}

std::string parse_line_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key, 0) == 0) return line.substr(key.size());
    return {};
}

osr::RetouchModel identity_model() {
    osr::RetouchModel m;
    m.kind = osr::ModelKind::blend;
    m.channel_mode = osr::ChannelMode::luma_only;
    m.n_levels = 5;
    m.patch_size = 3;
    m.K = 1;
    m.hidden = 4;
    m.band_scales = osr::default_band_scales(5);
    std::vector<osr::BandMap> maps;
    for (int l = 0; l <= 5; ++l) {
        osr::BandMap bm;
        bm.K = 1;
        bm.d = 9;
        bm.A = osr::MatRM::Zero(1, 81);
        for (int i = 0; i < 9; ++i) bm.A(0, i * 9 + i) = 1.0;
        bm.field.in_dim = 9;
        bm.field.hidden = 4;
        bm.field.out_dim = 1;
        bm.field.resize();
        bm.field.W1.setZero();
        bm.field.W2.setZero();
        bm.field.W3.setZero();
        bm.field.b1.setZero();
        bm.field.b2.setZero();
        bm.field.b3.setZero();
        maps.push_back(std::move(bm));
    }
    m.blend_maps.push_back(std::move(maps));
    return m;
}

osr::MatRM gaussian_patches(Eigen::Index n, int d, uint64_t seed, double sigma) {
    osr::MatRM X(n, d);
    osr::Rng rng(seed);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = sigma * rng.normal();
    return X;
}

osr::BandMap random_band_map(int K, int d, int hidden, uint64_t seed) {
    osr::BandMap bm;
    bm.K = K;
    bm.d = d;
    bm.A.resize(K, d * d);
    bm.field.in_dim = d;
    bm.field.hidden = hidden;
    bm.field.out_dim = K;
    bm.field.resize();
    osr::Rng rng(seed);
    for (Eigen::Index i = 0; i < bm.A.size(); ++i) bm.A.data()[i] = 0.3 * rng.normal();
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < d; ++i) bm.A(k, i * d + i) += 1.0;
    auto fill = [&rng](auto& m, double s) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * rng.normal();
    };
    fill(bm.field.W1, 0.5);
    fill(bm.field.b1, 0.1);
    fill(bm.field.W2, 0.5);
    fill(bm.field.b2, 0.1);
    fill(bm.field.W3, 0.5);
    fill(bm.field.b3, 0.1);
    return bm;
}

}  // namespace

int main() {
    Gate gate;
    const fs::path before_path = kCorpus / "train.ppm";
    if (!fs::exists(before_path)) {
        std::printf("FAIL  0. corpus missing at %s (run osr_make_corpus)\n", kCorpus.string().c_str());
        return 1;
    }
    const osr::ImageBuf before = osr::load_image(before_path.string());

    osr::RetouchModel gauss_model, unsharp_model;
    bool have_gauss = false, have_unsharp = false;
    long long parameters = -1;
    double bilateral_k64_psnr = 0.0;
    bool have_k64 = false;

    // 1. gaussian transfer at the default configuration, trained via the CLI
    const osr::ImageBuf gauss_after = osr::apply_filter(before, oracle_spec(osr::FilterKind::gaussian));
    try {
        const fs::path after_path = work_dir() / "after_gaussian.ppm";
        const fs::path model_path = work_dir() / "gaussian.osr";
        osr::save_image(gauss_after, after_path.string());
        const CliRun r = run_cli("train --before " + before_path.string() + " --after " +
                                     after_path.string() + " --output " + model_path.string(),
                                 "train_gaussian");
        if (r.exit_code != 0) throw osr::Error(osr::Error::Kind::io, "train exited " +
                                               std::to_string(r.exit_code) + "\n" + r.output);
        const std::string params_str = parse_line_value(r.output, "parameters=");
        if (!params_str.empty()) parameters = std::atoll(params_str.c_str());
        gauss_model = osr::load_model(model_path.string());
        have_gauss = true;
        const CorpusScore s = score_corpus(gauss_model, oracle_spec(osr::FilterKind::gaussian));
        gate.report(1,
                    s.psnr >= 35.0 && s.ssim >= 0.95 && r.seconds <= 900.0,
                    "gaussian transfer: mean PSNR %.2f dB (>= 35), mean SSIM %.4f (>= 0.95), "
                    "train %.1f s (<= 900)",
                    s.psnr, s.ssim, r.seconds);
    } catch (const std::exception& e) {
        gate.fail(1, std::string("gaussian transfer: ") + e.what());
    }

    // 2. unsharp transfer, same protocol
    const osr::ImageBuf unsharp_after = osr::apply_filter(before, oracle_spec(osr::FilterKind::unsharp));
    try {
        osr::TrainConfig cfg;
        unsharp_model = osr::train(before, unsharp_after, cfg);
        have_unsharp = true;
        const CorpusScore s = score_corpus(unsharp_model, oracle_spec(osr::FilterKind::unsharp));
        gate.report(2, s.psnr >= 29.0, "unsharp transfer: mean PSNR %.2f dB (>= 29)", s.psnr);
    } catch (const std::exception& e) {
        gate.fail(2, std::string("unsharp transfer: ") + e.what());
    }

    // 3. bilateral transfer: K=64 floor plus the capacity gap over K=1
    const osr::ImageBuf bilat_after = osr::apply_filter(before, oracle_spec(osr::FilterKind::bilateral));
    try {
        osr::TrainConfig cfg;
        cfg.K = 64;
        const osr::RetouchModel k64 = osr::train(before, bilat_after, cfg);
        const CorpusScore s64 = score_corpus(k64, oracle_spec(osr::FilterKind::bilateral));
        bilateral_k64_psnr = s64.psnr;
        have_k64 = true;
        cfg.K = 1;
        const osr::RetouchModel k1 = osr::train(before, bilat_after, cfg);
        const CorpusScore s1 = score_corpus(k1, oracle_spec(osr::FilterKind::bilateral));
        gate.report(3,
                    s64.psnr >= 31.0 && s64.psnr - s1.psnr >= 1.0,
                    "bilateral transfer: K=64 mean PSNR %.2f dB (>= 31), gap over K=1 %.2f dB (>= 1)",
                    s64.psnr, s64.psnr - s1.psnr);
    } catch (const std::exception& e) {
        gate.fail(3, std::string("bilateral transfer: ") + e.what());
    }

    // 4. fidelity on the training pair itself
    try {
        if (!have_gauss || !have_unsharp)
            throw osr::Error(osr::Error::Kind::argument, "prerequisite training failed");
        const double g =
            osr::score_pair("train", gauss_after, osr::apply_model(gauss_model, before)).psnr_db;
        const double u =
            osr::score_pair("train", unsharp_after, osr::apply_model(unsharp_model, before)).psnr_db;
        gate.report(4, g >= 42.0 && u >= 36.0,
                    "training-pair fidelity: gaussian %.2f dB (>= 42), unsharp %.2f dB (>= 36)", g, u);
    } catch (const std::exception& e) {
        gate.fail(4, std::string("training-pair fidelity: ") + e.what());
    }

    // 5. regressor baseline trails the blend model on bilateral
    try {
        if (!have_k64) throw osr::Error(osr::Error::Kind::argument, "prerequisite training failed");
        osr::TrainConfig cfg;
        cfg.kind = osr::ModelKind::regressor;
        const osr::RetouchModel reg = osr::train(before, bilat_after, cfg);
        const CorpusScore s = score_corpus(reg, oracle_spec(osr::FilterKind::bilateral));
        gate.report(5, bilateral_k64_psnr - s.psnr >= 1.0,
                    "ablation direction: regressor %.2f dB vs blend %.2f dB, gap %.2f dB (>= 1)",
                    s.psnr, bilateral_k64_psnr, bilateral_k64_psnr - s.psnr);
    } catch (const std::exception& e) {
        gate.fail(5, std::string("ablation direction: ") + e.what());
    }

    // 6. analytic gradients vs central differences at the pinned sizes
    try {
        double worst = 0.0;
        for (uint64_t seed = 0; seed < 3; ++seed) {
            const osr::MatRM X = gaussian_patches(8, 9, 900 + seed, 0.6);
            const osr::MatRM T = gaussian_patches(8, 9, 950 + seed, 0.6);
            const osr::BandMap bm = random_band_map(2, 9, 4, 1000 + seed);
            worst = std::max(worst, osr::grad_check(bm, X, T, 1e-6));
        }
        gate.report(6, worst < 1e-4, "gradient correctness: K=2 H=4 max relative error %.3g (< 1e-4)",
                    worst);
    } catch (const std::exception& e) {
        gate.fail(6, std::string("gradient correctness: ") + e.what());
    }

    // 7. blending weights live on the probability simplex
    try {
        const osr::BandMap bm = random_band_map(16, 9, 32, 77);
        const osr::MatRM X = gaussian_patches(100000, 9, 78, 1.0);
        const osr::MatRM W = bm.field.forward_batch(X);
        double worst_sum = 0.0, min_w = 1.0;
        for (Eigen::Index b = 0; b < W.rows(); ++b) {
            worst_sum = std::max(worst_sum, std::abs(W.row(b).sum() - 1.0));
            min_w = std::min(min_w, W.row(b).minCoeff());
        }
        gate.report(7, worst_sum <= 1e-9 && min_w >= 0.0,
                    "simplex property: 1e5 patches, worst |sum-1| %.3g (<= 1e-9), min weight %.3g (>= 0)",
                    worst_sum, min_w);
    } catch (const std::exception& e) {
        gate.fail(7, std::string("simplex property: ") + e.what());
    }

    // 8. pyramid identities: exact telescope at unit scales, near-exact
    //    round trip through the identity model at default scales
    try {
        const osr::BandBuf plane = osr::eval_plane(before);
        osr::PyramidOptions opt;
        opt.scales.assign(6, 1);
        const osr::LaplacianPyramid pyr = osr::decompose(plane, 5, opt);
        const osr::BandBuf back = osr::reconstruct(pyr);
        double tele_err = 0.0;
        for (size_t i = 0; i < plane.data.size(); ++i)
            tele_err = std::max(tele_err, std::abs(plane.data[i] - back.data[i]));

        const osr::RetouchModel ident = identity_model();
        osr::EvalReport rep;
        for (int i = 1; i <= kEvalImages; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "eval_%02d.ppm", i);
            const osr::ImageBuf img = osr::load_image((kCorpus / name).string());
            rep.images.push_back(osr::score_pair(name, img, osr::apply_model(ident, img)));
        }
        rep.finalize();
        gate.report(8, tele_err <= 1e-10 && rep.mean_psnr_db >= 40.0,
                    "pyramid identities: telescope error %.3g (<= 1e-10), identity-model round trip "
                    "%.2f dB (>= 40)",
                    tele_err, rep.mean_psnr_db);
    } catch (const std::exception& e) {
        gate.fail(8, std::string("pyramid identities: ") + e.what());
    }

    // 9. bitwise-identical model files from two identical CLI runs
    try {
        const fs::path after_path = work_dir() / "after_gaussian.ppm";
        const fs::path m1 = work_dir() / "det_a.osr";
        const fs::path m2 = work_dir() / "det_b.osr";
        const std::string flags = " --k 8 --hidden 16 --epochs 3 --seed 11";
        const CliRun r1 = run_cli("train --before " + before_path.string() + " --after " +
                                      after_path.string() + " --output " + m1.string() + flags,
                                  "det_a");
        const CliRun r2 = run_cli("train --before " + before_path.string() + " --after " +
                                      after_path.string() + " --output " + m2.string() + flags,
                                  "det_b");
        const bool ok = r1.exit_code == 0 && r2.exit_code == 0 &&
                        osr::detail_io::read_file(m1.string()) == osr::detail_io::read_file(m2.string());
        gate.report(9, ok, "determinism: repeated train runs byte-identical (%s)",
                    ok ? "yes" : "no");
    } catch (const std::exception& e) {
        gate.fail(9, std::string("determinism: ") + e.what());
    }

    // 10. default parameter count sits in the documented bracket
    try {
        if (parameters < 0)
            throw osr::Error(osr::Error::Kind::argument, "no parameters= line captured from train");
        gate.report(10, parameters >= 120000 && parameters <= 250000,
                    "parameter count: default config reports %lld (in [120000, 250000])", parameters);
    } catch (const std::exception& e) {
        gate.fail(10, std::string("parameter count: ") + e.what());
    }

    std::printf("acceptance: %d/%d criteria passed\n", gate.passed, gate.total);
    return gate.passed == gate.total ? 0 : 1;
}
