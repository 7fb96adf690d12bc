// jpegrad CLI: craft compression-robust image perturbations and reproduce
// the associated diagnostics (gradient coverage, DCT survival, QF sweeps).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "jpegrad/codec.hpp"
#include "jpegrad/crafter.hpp"
#include "jpegrad/errors.hpp"
#include "jpegrad/gradcheck.hpp"
#include "jpegrad/image_io.hpp"
#include "jpegrad/metrics.hpp"
#include "jpegrad/rng.hpp"
#include "jpegrad/surrogate.hpp"
#include "jpegrad/transforms.hpp"

namespace fs = std::filesystem;
using namespace jpegrad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitInvariant = 3;

struct NamedImage {
    std::string name;  // basename
    ImageTensor image;
};

std::vector<std::string> list_pngs(const std::string& dir) {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.push_back(entry.path().filename().string());
    }
    if (ec) throw IoError("cannot list directory " + dir + ": " + ec.message());
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<NamedImage> load_inputs(const std::vector<std::string>& paths) {
    std::vector<NamedImage> out;
    for (const std::string& p : paths) {
        if (fs::is_directory(p)) {
            for (const std::string& name : list_pngs(p))
                out.push_back({name, load_png((fs::path(p) / name).string())});
        } else {
            out.push_back({fs::path(p).filename().string(), load_png(p)});
        }
    }
    if (out.empty()) throw IoError("no input images found");
    return out;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

/// Deterministic textured test image used when gradcheck gets no --image.
ImageTensor synthetic_test_image(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    ImageTensor img(h, w, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float fy = static_cast<float>(y) / h;
            const float fx = static_cast<float>(x) / w;
            const float base = 0.5f + 0.25f * std::sin(6.28318f * (1.7f * fx + 0.9f * fy)) +
                               0.15f * std::sin(6.28318f * 5.3f * fx) *
                                   std::cos(6.28318f * 4.1f * fy);
            for (int c = 0; c < 3; ++c) {
                const float v = base + 0.1f * c * fx + 0.08f * rng.normal();
                img.at(y, x, c) = std::min(1.0f, std::max(0.0f, v));
            }
        }
    }
    return img;
}

struct CraftCliOptions {
    std::vector<std::string> inputs;
    std::string out_dir = "out";
    CraftConfig cfg;
};

int cmd_craft(const CraftCliOptions& opt) {
    ensure_out_dir(opt.out_dir);
    const std::vector<NamedImage> inputs = load_inputs(opt.inputs);

    std::vector<ImageTensor> clean;
    clean.reserve(inputs.size());
    for (const auto& n : inputs) clean.push_back(n.image);

    const CraftResult result = craft(clean, opt.cfg);

    for (std::size_t i = 0; i < inputs.size(); ++i)
        save_png((fs::path(opt.out_dir) / inputs[i].name).string(),
                 result.protected_images[i]);
    atomic_write_text((fs::path(opt.out_dir) / "craft_log.csv").string(),
                      craft_log_csv(result.log));

    double psnr_acc = 0.0, survival_acc = 0.0, coverage_acc = 0.0;
    float max_delta = 0.0f;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const PerturbationStats stats =
            perturbation_stats(result.protected_images[i], clean[i]);
        psnr_acc += psnr(result.protected_images[i], clean[i]);
        survival_acc += jpeg_survival(result.protected_images[i], clean[i], opt.cfg.survival_qf);
        coverage_acc += stats.coverage;
        max_delta = std::max(max_delta, stats.max_delta);
    }
    const double n = static_cast<double>(inputs.size());
    std::printf("psnr=%.2fdB max_delta=%.3f/255 coverage=%.1f%% survival=%.3f (qf=%d)\n",
                psnr_acc / n, max_delta, 100.0 * coverage_acc / n, survival_acc / n,
                opt.cfg.survival_qf);
    return kExitOk;
}

struct GradcheckOptions {
    std::string image_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

int cmd_gradcheck(const GradcheckOptions& opt) {
    ensure_out_dir(opt.out_dir);
    const ImageTensor x = opt.image_path.empty() ? synthetic_test_image(64, 64, 12345)
                                                 : load_png(opt.image_path);

    const SurrogateParams params = init_surrogate(Rng(opt.seed).derive(1).next_u64());
    const NoiseSchedule sched = NoiseSchedule::linear();
    Rng rng(opt.seed);

    std::string csv = "qf,hard_coverage,diff_coverage,diff_grad_norm\n";
    std::printf("%-6s %-14s %-14s %-16s\n", "qf", "hard_cov", "diff_cov", "diff_grad_norm");
    for (const int qf : {50, 75, 90}) {
        const float hard_cov = grad_coverage(CodecKind::kHard, x, qf, rng);
        const float diff_cov = grad_coverage(CodecKind::kDiff, x, qf, rng);

        // Gradient of the denoising loss through the differentiable codec.
        TransformSpec spec;
        spec.category = TransformCategory::kJpegOnly;
        spec.qf = qf;
        TransformCtx tctx;
        const ImageTensor y = apply_transform(spec, x, GradMode::kWithGrad, &tctx);
        const DenoiseEval eval =
            denoise_loss_and_input_grad(params, sched, y, 0, 4, rng.derive(qf));
        const Cotangent grad = transform_vjp(tctx, eval.input_grad);
        const double norm = l2_norm(grad);

        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", qf, hard_cov, diff_cov, norm);
        csv += buf;
        std::printf("%-6d %-14.3f %-14.3f %-16.6g\n", qf, hard_cov, diff_cov, norm);
    }
    atomic_write_text((fs::path(opt.out_dir) / "gradcheck.csv").string(), csv);
    return kExitOk;
}

struct FreqOptions {
    std::string image_path;
    std::vector<int> qfs = {50, 75, 90};
    std::string out_dir = "out";
};

int cmd_freq(const FreqOptions& opt) {
    ensure_out_dir(opt.out_dir);
    ImageTensor x = load_png(opt.image_path);
    // Analysis needs whole blocks; trim any partial edge blocks.
    const int h = (x.height / 8) * 8, w = (x.width / 8) * 8;
    if (h == 0 || w == 0) throw IoError("image too small for 8x8 analysis");
    if (h != x.height || w != x.width) {
        ImageTensor trimmed(h, w, 3);
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                for (int c = 0; c < 3; ++c) trimmed.at(y, xx, c) = x.at(y, xx, c);
        x = std::move(trimmed);
    }

    for (const int qf : opt.qfs) {
        const SurvivalHeatmap heat = dct_survival_heatmap(x, qf);
        const ZoneReport zones = zone_survival(heat);
        atomic_write_text(
            (fs::path(opt.out_dir) / ("heatmap_qf" + std::to_string(qf) + ".csv")).string(),
            heatmap_csv(heat));
        atomic_write_text(
            (fs::path(opt.out_dir) / ("zones_qf" + std::to_string(qf) + ".csv")).string(),
            zone_report_csv(zones));
        std::printf("qf=%d dc=%.3f low=%.3f mid=%.3f high=%.3f\n", qf, zones.dc, zones.low,
                    zones.mid, zones.high);
    }
    return kExitOk;
}

struct PairedDirOptions {
    std::string clean_dir, protected_dir;
    std::string out_dir = "out";
    int samples = 8;
    int survival_qf = 75;
    std::uint64_t seed = 0;
};

std::pair<std::vector<NamedImage>, std::vector<NamedImage>> load_pairs(
    const PairedDirOptions& opt) {
    const std::vector<std::string> clean_names = list_pngs(opt.clean_dir);
    const std::vector<std::string> prot_names = list_pngs(opt.protected_dir);
    if (clean_names.empty()) throw IoError("no PNG files in " + opt.clean_dir);
    if (clean_names != prot_names)
        throw IoError("file names differ between " + opt.clean_dir + " and " +
                      opt.protected_dir);
    std::vector<NamedImage> clean, prot;
    for (const std::string& n : clean_names) {
        clean.push_back({n, load_png((fs::path(opt.clean_dir) / n).string())});
        prot.push_back({n, load_png((fs::path(opt.protected_dir) / n).string())});
    }
    return {std::move(clean), std::move(prot)};
}

int cmd_eval(const PairedDirOptions& opt) {
    ensure_out_dir(opt.out_dir);
    auto [clean_named, prot_named] = load_pairs(opt);
    std::vector<ImageTensor> clean, prot;
    for (auto& n : clean_named) clean.push_back(std::move(n.image));
    for (auto& n : prot_named) prot.push_back(std::move(n.image));

    const SurrogateParams params = init_surrogate(Rng(opt.seed).derive(1).next_u64());
    const NoiseSchedule sched = NoiseSchedule::linear();
    const ProtectionTable table =
        eval_protection(clean, prot, params, sched, protection_qfs(), opt.samples, 0,
                        Rng(opt.seed).derive(2).next_u64());

    atomic_write_text((fs::path(opt.out_dir) / "protection.csv").string(),
                      protection_table_csv(table));

    int wins = 0;
    for (const auto& row : table.rows)
        if (row.delta > 0.0f) ++wins;
    std::printf("wins: %d/%zu\n", wins, table.rows.size());
    return kExitOk;
}

int cmd_survival(const PairedDirOptions& opt) {
    ensure_out_dir(opt.out_dir);
    auto [clean, prot] = load_pairs(opt);

    std::string csv = "name,qf,survival\n";
    double acc = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const float s = jpeg_survival(prot[i].image, clean[i].image, opt.survival_qf);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%d,%.9g\n", clean[i].name.c_str(),
                      opt.survival_qf, s);
        csv += buf;
        acc += s;
    }
    atomic_write_text((fs::path(opt.out_dir) / "survival.csv").string(), csv);
    std::printf("mean survival at qf=%d: %.3f\n", opt.survival_qf,
                acc / static_cast<double>(clean.size()));
    return kExitOk;
}

/// Plain key=value config support ('#' comments, blank lines). Values apply
/// only to options the command line did not set, so flags override the file.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option* option = cmd->get_option_no_throw("--" + key);
        if (!option)
            throw IoError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (option->count() > 0) continue;  // flag given explicitly, keep it
        option->add_result(value);
        option->run_callback();
    }
}

void add_config_option(CLI::App* cmd, std::string& config_path) {
    cmd->add_option("--config", config_path, "key=value config file (flags override)");
}

void add_craft_options(CLI::App* app, CraftCliOptions& opt) {
    app->add_option("--in", opt.inputs, "input PNG files or directories")->required();
    app->add_option("--out-dir", opt.out_dir, "output directory");
    app->add_option("--seed", opt.cfg.seed, "run seed");
    app->add_option("--epsilon", opt.cfg.epsilon, "l-inf budget in [0,1] units");
    app->add_option("--alpha", opt.cfg.alpha, "PGD step size in [0,1] units");
    app->add_option("--steps", opt.cfg.steps, "crafting steps C");
    app->add_option("--eot-samples", opt.cfg.eot_samples, "EOT samples J per step");
    app->add_option("--inner-unroll", opt.cfg.inner_unroll, "inner SGD steps K");
    app->add_option("--inner-lr", opt.cfg.inner_lr, "inner SGD learning rate");
    app->add_option("--qf-max", opt.cfg.qf_max, "curriculum QF upper bound");
    app->add_option("--qf-min-final", opt.cfg.qf_min_final, "curriculum final QF lower bound");
    app->add_option("--survival-qf", opt.cfg.survival_qf, "reference QF for logged survival");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compression-robust adversarial perturbation toolkit"};
    app.require_subcommand(1);

    std::string config_path;

    CraftCliOptions craft_opt;
    CLI::App* craft_cmd = app.add_subcommand("craft", "craft protected images");
    add_config_option(craft_cmd, config_path);
    add_craft_options(craft_cmd, craft_opt);

    GradcheckOptions grad_opt;
    CLI::App* grad_cmd =
        app.add_subcommand("gradcheck", "gradient coverage through hard vs diff codec");
    add_config_option(grad_cmd, config_path);
    grad_cmd->add_option("--image", grad_opt.image_path, "test image (default: built-in)");
    grad_cmd->add_option("--out-dir", grad_opt.out_dir, "output directory");
    grad_cmd->add_option("--seed", grad_opt.seed, "probe seed");

    FreqOptions freq_opt;
    CLI::App* freq_cmd = app.add_subcommand("freq", "DCT frequency-zone survival analysis");
    add_config_option(freq_cmd, config_path);
    freq_cmd->add_option("--image", freq_opt.image_path, "input PNG")->required();
    freq_cmd->add_option("--qfs", freq_opt.qfs, "quality factors to analyze");
    freq_cmd->add_option("--out-dir", freq_opt.out_dir, "output directory");

    PairedDirOptions eval_opt;
    CLI::App* eval_cmd = app.add_subcommand("eval", "denoising-loss QF sweep");
    add_config_option(eval_cmd, config_path);
    eval_cmd->add_option("--clean-dir", eval_opt.clean_dir, "clean images")->required();
    eval_cmd->add_option("--protected-dir", eval_opt.protected_dir, "protected images")
        ->required();
    eval_cmd->add_option("--out-dir", eval_opt.out_dir, "output directory");
    eval_cmd->add_option("--samples", eval_opt.samples, "noise draws per image");
    eval_cmd->add_option("--seed", eval_opt.seed, "noise seed");

    PairedDirOptions surv_opt;
    CLI::App* surv_cmd = app.add_subcommand("survival", "perturbation survival through JPEG");
    add_config_option(surv_cmd, config_path);
    surv_cmd->add_option("--clean-dir", surv_opt.clean_dir, "clean images")->required();
    surv_cmd->add_option("--protected-dir", surv_opt.protected_dir, "protected images")
        ->required();
    surv_cmd->add_option("--out-dir", surv_opt.out_dir, "output directory");
    surv_cmd->add_option("--survival-qf", surv_opt.survival_qf, "quality factor");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty())
            for (CLI::App* sub : app.get_subcommands()) apply_config_file(sub, config_path);
        if (craft_cmd->parsed()) return cmd_craft(craft_opt);
        if (grad_cmd->parsed()) return cmd_gradcheck(grad_opt);
        if (freq_cmd->parsed()) return cmd_freq(freq_opt);
        if (eval_cmd->parsed()) return cmd_eval(eval_opt);
        if (surv_cmd->parsed()) return cmd_survival(surv_opt);
    } catch (const InvariantViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvariant;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
