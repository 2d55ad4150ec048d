// osr: learn a retouching map from one before/after image pair and reuse it.
//
// Subcommands: train, apply, filter, eval, decompose, sweep. Every run writes
// a key=value manifest next to its primary output so results can be audited
// and reproduced.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osr/osr.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Manifest {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
    void add(const std::string& k, double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        entries.emplace_back(k, buf);
    }
    void add(const std::string& k, long long v) { entries.emplace_back(k, std::to_string(v)); }

    // FNV-1a over the settled entries; identifies the configuration.
    std::string config_hash() const {
        uint64_t h = 1469598103934665603ull;
        for (const auto& [k, v] : entries)
            for (const char c : k + "=" + v + "\n") h = (h ^ uint8_t(c)) * 1099511628211ull;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    void write(const std::string& path, double wall_seconds) {
        add("config_hash", config_hash());
        add("wall_clock_s", wall_seconds);
        std::string text;
        for (const auto& [k, v] : entries) text += k + "=" + v + "\n";
        osr::detail_io::write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
    }
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::vector<fs::path> list_images(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".png" || ext == ".ppm" || ext == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    osr::require(!files.empty(), osr::Error::Kind::io, "no images (.png/.ppm/.pgm) in " + dir);
    return files;
}

osr::ChannelMode channel_mode_from_string(const std::string& s) {
    if (s == "luma") return osr::ChannelMode::luma_only;
    if (s == "per-channel") return osr::ChannelMode::per_channel;
    osr::fail(osr::Error::Kind::argument, "unknown channel mode: " + s + " (use luma or per-channel)");
}

void add_train_flags(CLI::App* cmd, osr::TrainConfig& cfg, std::string& channel_mode,
                     std::string& baseline) {
    cmd->add_option("--k", cfg.K, "number of candidate matrices per band");
    cmd->add_option("--levels", cfg.n_levels, "detail band count is levels+1");
    cmd->add_option("--patch", cfg.patch_size, "patch side length (odd)");
    cmd->add_option("--hidden", cfg.hidden, "weight-field hidden width");
    cmd->add_option("--lr", cfg.lr, "Adam learning rate");
    cmd->add_option("--decay", cfg.lr_decay, "per-epoch learning-rate decay");
    cmd->add_option("--epochs", cfg.epochs, "training epochs per band");
    cmd->add_option("--batch", cfg.batch, "patches per optimizer step");
    cmd->add_option("--seed", cfg.seed, "RNG seed (whole run is deterministic in it)");
    cmd->add_option("--leaky-slope", cfg.leaky_slope, "Leaky ReLU negative slope");
    cmd->add_option("--base-sigma", cfg.base_sigma, "pyramid blur scale at full resolution");
    cmd->add_option("--channel-mode", channel_mode, "luma | per-channel");
    cmd->add_option("--baseline", baseline, "'regressor' trains the MLP baseline instead");
}

void manifest_train_flags(Manifest& m, const osr::TrainConfig& cfg, const std::string& channel_mode,
                          const std::string& baseline) {
    m.add("k", (long long)cfg.K);
    m.add("levels", (long long)cfg.n_levels);
    m.add("patch", (long long)cfg.patch_size);
    m.add("hidden", (long long)cfg.hidden);
    m.add("lr", cfg.lr);
    m.add("decay", cfg.lr_decay);
    m.add("epochs", (long long)cfg.epochs);
    m.add("batch", (long long)cfg.batch);
    m.add("seed", (long long)cfg.seed);
    m.add("leaky_slope", cfg.leaky_slope);
    m.add("base_sigma", cfg.base_sigma);
    m.add("channel_mode", channel_mode);
    m.add("baseline", baseline.empty() ? "none" : baseline);
}

osr::TrainConfig resolve_train_config(osr::TrainConfig cfg, const std::string& channel_mode,
                                      const std::string& baseline) {
    cfg.channel_mode = channel_mode_from_string(channel_mode);
    if (baseline == "regressor")
        cfg.kind = osr::ModelKind::regressor;
    else
        osr::require(baseline.empty(), osr::Error::Kind::argument,
                     "unknown baseline: " + baseline + " (only 'regressor')");
    return cfg;
}

// Prints per-epoch lines and returns the model; shared by train and sweep.
osr::RetouchModel run_training(const osr::ImageBuf& before, const osr::ImageBuf& after,
                               const osr::TrainConfig& cfg, bool quiet,
                               std::vector<double>* final_losses = nullptr) {
    const bool per_channel = cfg.channel_mode == osr::ChannelMode::per_channel;
    if (final_losses) final_losses->assign(size_t(cfg.n_levels + 1) * (per_channel ? 3 : 1), 0.0);
    const auto log = [&](int channel, int band, int epoch, double lr, double loss) {
        if (!quiet) {
            if (per_channel)
                std::printf("epoch=%d channel=%d band=%d lr=%.8g loss=%.8g\n", epoch, channel, band, lr,
                            loss);
            else
                std::printf("epoch=%d band=%d lr=%.8g loss=%.8g\n", epoch, band, lr, loss);
        }
        if (final_losses && epoch == cfg.epochs - 1)
            (*final_losses)[size_t(channel) * (cfg.n_levels + 1) + size_t(band)] = loss;
    };
    return osr::train(before, after, cfg, log);
}

int cmd_train(const std::string& before_path, const std::string& after_path,
              const std::string& output, const osr::TrainConfig& flag_cfg,
              const std::string& channel_mode, const std::string& baseline) {
    Timer timer;
    const osr::TrainConfig cfg = resolve_train_config(flag_cfg, channel_mode, baseline);
    const osr::ImageBuf before = osr::load_image(before_path);
    const osr::ImageBuf after = osr::load_image(after_path);

    std::vector<double> final_losses;
    const osr::RetouchModel model = run_training(before, after, cfg, false, &final_losses);
    osr::save_model(model, output);

    std::printf("parameters=%lld\n", (long long)model.parameter_count());
    const int bands = cfg.n_levels + 1;
    for (size_t i = 0; i < final_losses.size(); ++i) {
        if (cfg.channel_mode == osr::ChannelMode::per_channel)
            std::printf("final channel=%zu band=%zu loss=%.8g\n", i / bands, i % bands, final_losses[i]);
        else
            std::printf("final band=%zu loss=%.8g\n", i % bands, final_losses[i]);
    }
    std::printf("model=%s\n", output.c_str());

    Manifest m;
    m.add("subcommand", "train");
    m.add("tool_version", kToolVersion);
    m.add("before", before_path);
    m.add("after", after_path);
    m.add("output", output);
    manifest_train_flags(m, cfg, channel_mode, baseline);
    m.add("parameters", (long long)model.parameter_count());
    m.write(output + ".manifest", timer.seconds());
    return 0;
}

int cmd_apply(const std::string& model_path, const std::string& input, const std::string& output,
              const std::string& input_dir, const std::string& output_dir) {
    Timer timer;
    const osr::RetouchModel model = osr::load_model(model_path);

    Manifest m;
    m.add("subcommand", "apply");
    m.add("tool_version", kToolVersion);
    m.add("model", model_path);

    std::string manifest_path;
    if (!input_dir.empty()) {
        osr::require(!output_dir.empty(), osr::Error::Kind::argument,
                     "--input-dir needs --output-dir");
        fs::create_directories(output_dir);
        for (const auto& p : list_images(input_dir)) {
            const osr::ImageBuf img = osr::load_image(p.string());
            const std::string out = (fs::path(output_dir) / p.filename()).string();
            osr::save_image(osr::apply_model(model, img), out);
            std::printf("%s -> %s\n", p.string().c_str(), out.c_str());
        }
        m.add("input_dir", input_dir);
        m.add("output_dir", output_dir);
        manifest_path = (fs::path(output_dir) / "manifest").string();
    } else {
        osr::require(!input.empty() && !output.empty(), osr::Error::Kind::argument,
                     "need --input and --output (or --input-dir/--output-dir)");
        const osr::ImageBuf img = osr::load_image(input);
        osr::save_image(osr::apply_model(model, img), output);
        m.add("input", input);
        m.add("output", output);
        manifest_path = output + ".manifest";
    }
    m.write(manifest_path, timer.seconds());
    return 0;
}

int cmd_filter(const std::string& type, const std::string& preset, osr::FilterSpec spec,
               const std::string& input, const std::string& output) {
    Timer timer;
    if (!preset.empty()) {
        osr::require(type.empty() || type == "local_laplacian", osr::Error::Kind::argument,
                     "--llf-preset implies --type local_laplacian");
        if (preset == "smooth")
            spec = osr::llf_preset_smooth();
        else if (preset == "enhance")
            spec = osr::llf_preset_enhance();
        else if (preset == "enhance-alt")
            spec = osr::llf_preset_enhance_alt();
        else
            osr::fail(osr::Error::Kind::argument, "unknown preset: " + preset);
    } else {
        spec.kind = osr::filter_kind_from_string(type);
    }
    const osr::ImageBuf img = osr::load_image(input);
    osr::save_image(osr::apply_filter(img, spec), output);

    Manifest m;
    m.add("subcommand", "filter");
    m.add("tool_version", kToolVersion);
    m.add("type", osr::to_string(spec.kind));
    m.add("input", input);
    m.add("output", output);
    m.add("sigma", spec.sigma);
    m.add("amount", spec.amount);
    m.add("sigma_s", spec.sigma_s);
    m.add("sigma_r", spec.sigma_r);
    m.add("alpha", spec.alpha);
    m.add("llf_levels", (long long)spec.levels);
    m.write(output + ".manifest", timer.seconds());
    return 0;
}

void print_score(const osr::ImageScore& s) {
    std::printf("%s PSNR_dB=%.4f SSIM=%.6f\n", s.name.c_str(), s.psnr_db, s.ssim);
}

int cmd_eval(const std::string& reference, const std::string& result, const std::string& reference_dir,
             const std::string& result_dir, const std::string& fft_out) {
    Timer timer;
    osr::EvalReport report;
    std::string manifest_path;
    if (!reference_dir.empty()) {
        osr::require(!result_dir.empty(), osr::Error::Kind::argument,
                     "--reference-dir needs --result-dir");
        for (const auto& p : list_images(reference_dir)) {
            const std::string other = (fs::path(result_dir) / p.filename()).string();
            const osr::ImageBuf ref = osr::load_image(p.string());
            const osr::ImageBuf res = osr::load_image(other);
            report.images.push_back(osr::score_pair(p.filename().string(), ref, res));
        }
        manifest_path = (fs::path(result_dir) / "eval.manifest").string();
    } else {
        osr::require(!reference.empty() && !result.empty(), osr::Error::Kind::argument,
                     "need --reference and --result (or the -dir pair)");
        const osr::ImageBuf ref = osr::load_image(reference);
        const osr::ImageBuf res = osr::load_image(result);
        report.images.push_back(osr::score_pair(result, ref, res));
        if (!fft_out.empty())
            osr::save_image(osr::fft_diff(osr::eval_plane(ref), osr::eval_plane(res)), fft_out);
        manifest_path = result + ".eval.manifest";
    }
    report.finalize();
    for (const auto& s : report.images) print_score(s);
    std::printf("MEAN PSNR_dB=%.4f SSIM=%.6f\n", report.mean_psnr_db, report.mean_ssim);

    Manifest m;
    m.add("subcommand", "eval");
    m.add("tool_version", kToolVersion);
    m.add("reference", reference.empty() ? reference_dir : reference);
    m.add("result", result.empty() ? result_dir : result);
    if (!fft_out.empty()) m.add("fft_diff", fft_out);
    m.write(manifest_path, timer.seconds());
    return 0;
}

int cmd_decompose(const std::string& input, int levels, double base_sigma,
                  const std::string& output_dir) {
    Timer timer;
    const osr::ImageBuf img = osr::load_image(input);
    osr::PyramidOptions opt;
    opt.base_sigma = base_sigma;
    const osr::LaplacianPyramid pyr = osr::decompose(osr::eval_plane(img), levels, opt);
    fs::create_directories(output_dir);

    // Bands are signed; store them around mid-gray so they stay viewable.
    const auto save_band = [](const osr::BandBuf& b, const std::string& path, double offset) {
        std::string header = "P5\n" + std::to_string(b.width) + " " + std::to_string(b.height) + "\n255\n";
        std::vector<uint8_t> out(header.begin(), header.end());
        for (const double v : b.data)
            out.push_back(uint8_t(std::clamp(std::lround(offset + 255.0 * v), 0l, 255l)));
        osr::detail_io::write_file(path, out);
    };

    std::string scales = "levels=" + std::to_string(levels) + "\n";
    for (int l = 0; l <= levels; ++l) {
        const std::string name = "band_" + std::to_string(l) + ".pgm";
        save_band(pyr.bands[size_t(l)], (fs::path(output_dir) / name).string(), 128.0);
        scales += "band" + std::to_string(l) + "_scale=" + std::to_string(pyr.band_scales[size_t(l)]) + "\n";
    }
    save_band(pyr.residual, (fs::path(output_dir) / "residual.pgm").string(), 0.0);
    scales += "residual_scale=" + std::to_string(pyr.residual_scale) + "\n";
    osr::detail_io::write_file((fs::path(output_dir) / "scales.txt").string(),
                               std::vector<uint8_t>(scales.begin(), scales.end()));

    Manifest m;
    m.add("subcommand", "decompose");
    m.add("tool_version", kToolVersion);
    m.add("input", input);
    m.add("output_dir", output_dir);
    m.add("levels", (long long)levels);
    m.add("base_sigma", base_sigma);
    m.write((fs::path(output_dir) / "manifest").string(), timer.seconds());
    return 0;
}

int cmd_sweep(const std::string& type, const std::string& before_path, const std::string& corpus_dir,
              std::vector<int> k_list, const std::string& output, osr::TrainConfig flag_cfg,
              const std::string& channel_mode, const osr::FilterSpec& spec_flags) {
    Timer timer;
    osr::FilterSpec spec = spec_flags;
    spec.kind = osr::filter_kind_from_string(type);
    const osr::TrainConfig base_cfg = resolve_train_config(flag_cfg, channel_mode, "");
    osr::require(!k_list.empty(), osr::Error::Kind::argument, "--k-list must not be empty");

    const osr::ImageBuf before = osr::load_image(before_path);
    const osr::ImageBuf after = osr::apply_filter(before, spec);
    const auto corpus = list_images(corpus_dir);

    std::string table = "K\tPSNR_dB\tSSIM\n";
    for (const int k : k_list) {
        osr::TrainConfig cfg = base_cfg;
        cfg.K = k;
        const osr::RetouchModel model = run_training(before, after, cfg, true);
        osr::EvalReport report;
        for (const auto& p : corpus) {
            const osr::ImageBuf img = osr::load_image(p.string());
            report.images.push_back(osr::score_pair(p.filename().string(), osr::apply_filter(img, spec),
                                                    osr::apply_model(model, img)));
        }
        report.finalize();
        char row[96];
        std::snprintf(row, sizeof row, "%d\t%.4f\t%.6f\n", k, report.mean_psnr_db, report.mean_ssim);
        table += row;
        std::printf("K=%d PSNR_dB=%.4f SSIM=%.6f\n", k, report.mean_psnr_db, report.mean_ssim);
    }
    osr::detail_io::write_file(output, std::vector<uint8_t>(table.begin(), table.end()));

    Manifest m;
    m.add("subcommand", "sweep");
    m.add("tool_version", kToolVersion);
    m.add("type", type);
    m.add("before", before_path);
    m.add("corpus_dir", corpus_dir);
    m.add("output", output);
    std::string ks;
    for (const int k : k_list) ks += (ks.empty() ? "" : ",") + std::to_string(k);
    m.add("k_list", ks);
    manifest_train_flags(m, base_cfg, channel_mode, "");
    m.write(output + ".manifest", timer.seconds());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-pair retouching: learn an image edit from one example and reapply it"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "learn a model from a before/after pair");
    std::string before_path, after_path, model_out;
    osr::TrainConfig train_cfg;
    std::string train_channel_mode = "luma", train_baseline;
    train->add_option("--before", before_path, "input (before) image")->required();
    train->add_option("--after", after_path, "retouched (after) image")->required();
    train->add_option("--output", model_out, "model file to write")->required();
    add_train_flags(train, train_cfg, train_channel_mode, train_baseline);

    // apply
    auto* apply = app.add_subcommand("apply", "run a trained model on new images");
    std::string apply_model_path, apply_input, apply_output, apply_input_dir, apply_output_dir;
    apply->add_option("--model", apply_model_path, "model file")->required();
    apply->add_option("--input", apply_input, "input image");
    apply->add_option("--output", apply_output, "output image");
    apply->add_option("--input-dir", apply_input_dir, "apply to every image in this directory");
    apply->add_option("--output-dir", apply_output_dir, "directory for batch outputs");

    // filter
    auto* filter = app.add_subcommand("filter", "run a reference filter (ground-truth oracle)");
    std::string filter_type, filter_preset, filter_input, filter_output;
    osr::FilterSpec filter_spec;
    filter->add_option("--type", filter_type, "gaussian | unsharp | bilateral | local_laplacian");
    filter->add_option("--llf-preset", filter_preset, "smooth | enhance | enhance-alt");
    filter->add_option("--input", filter_input, "input image")->required();
    filter->add_option("--output", filter_output, "output image")->required();
    filter->add_option("--sigma", filter_spec.sigma, "gaussian/unsharp spatial sigma");
    filter->add_option("--amount", filter_spec.amount, "unsharp strength");
    filter->add_option("--sigma-s", filter_spec.sigma_s, "bilateral spatial sigma");
    filter->add_option("--sigma-r", filter_spec.sigma_r, "range sigma (bilateral/local_laplacian)");
    filter->add_option("--alpha", filter_spec.alpha, "local laplacian detail exponent");
    filter->add_option("--llf-levels", filter_spec.levels, "local laplacian pyramid depth");

    // eval
    auto* eval = app.add_subcommand("eval", "PSNR/SSIM of results against references");
    std::string eval_ref, eval_res, eval_ref_dir, eval_res_dir, eval_fft;
    eval->add_option("--reference", eval_ref, "ground-truth image");
    eval->add_option("--result", eval_res, "image to score");
    eval->add_option("--reference-dir", eval_ref_dir, "directory of ground-truth images");
    eval->add_option("--result-dir", eval_res_dir, "directory of images to score (same filenames)");
    eval->add_option("--fft-diff", eval_fft, "also write the spectral-difference image here");

    // decompose
    auto* dec = app.add_subcommand("decompose", "write the detail bands of an image");
    std::string dec_input, dec_outdir;
    int dec_levels = 5;
    double dec_base_sigma = 2.0;
    dec->add_option("--input", dec_input, "input image")->required();
    dec->add_option("--output-dir", dec_outdir, "directory for band images")->required();
    dec->add_option("--levels", dec_levels, "detail band count is levels+1");
    dec->add_option("--base-sigma", dec_base_sigma, "blur scale at full resolution");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "capacity study: train per K, score on a corpus");
    std::string sweep_type, sweep_before, sweep_corpus, sweep_output;
    std::vector<int> sweep_k;
    osr::TrainConfig sweep_cfg;
    std::string sweep_channel_mode = "luma", sweep_baseline_unused;
    osr::FilterSpec sweep_spec;
    sweep->add_option("--type", sweep_type, "oracle filter used for the pair and the references")
        ->required();
    sweep->add_option("--before", sweep_before, "training input image")->required();
    sweep->add_option("--corpus-dir", sweep_corpus, "evaluation images")->required();
    sweep->add_option("--k-list", sweep_k, "K values to train")->required()->delimiter(',');
    sweep->add_option("--output", sweep_output, "TSV table to write")->required();
    add_train_flags(sweep, sweep_cfg, sweep_channel_mode, sweep_baseline_unused);
    sweep->add_option("--sigma", sweep_spec.sigma, "oracle spatial sigma");
    sweep->add_option("--amount", sweep_spec.amount, "oracle unsharp strength");
    sweep->add_option("--sigma-s", sweep_spec.sigma_s, "oracle bilateral spatial sigma");
    sweep->add_option("--sigma-r", sweep_spec.sigma_r, "oracle range sigma");
    sweep->add_option("--alpha", sweep_spec.alpha, "oracle local laplacian exponent");
    sweep->add_option("--llf-levels", sweep_spec.levels, "oracle local laplacian depth");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed())
            return cmd_train(before_path, after_path, model_out, train_cfg, train_channel_mode,
                             train_baseline);
        if (apply->parsed())
            return cmd_apply(apply_model_path, apply_input, apply_output, apply_input_dir,
                             apply_output_dir);
        if (filter->parsed())
            return cmd_filter(filter_type, filter_preset, filter_spec, filter_input, filter_output);
        if (eval->parsed()) return cmd_eval(eval_ref, eval_res, eval_ref_dir, eval_res_dir, eval_fft);
        if (dec->parsed()) return cmd_decompose(dec_input, dec_levels, dec_base_sigma, dec_outdir);
        if (sweep->parsed())
            return cmd_sweep(sweep_type, sweep_before, sweep_corpus, sweep_k, sweep_output, sweep_cfg,
                             sweep_channel_mode, sweep_spec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::fprintf(stderr, "error: no subcommand\n");
    return 1;
}
